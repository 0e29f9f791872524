use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Declaration {
    Concept(ConceptDecl),
    Property(PropertyDecl),
    Model(ModelDecl),
    Individual(IndividualDecl),
    View(ViewDecl),
}

impl Declaration {
    pub fn name(&self) -> &str {
        match self {
            Declaration::Concept(d) => &d.name,
            Declaration::Property(d) => &d.name,
            Declaration::Model(d) => &d.name,
            Declaration::Individual(d) => &d.name,
            Declaration::View(d) => &d.name,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Declaration::Concept(_) => "ConceptDecl",
            Declaration::Property(_) => "PropertyDecl",
            Declaration::Model(_) => "ModelDecl",
            Declaration::Individual(_) => "IndividualDecl",
            Declaration::View(_) => "ViewDecl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptDecl {
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropKind {
    Relation,
    Attribute,
}

impl fmt::Display for PropKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropKind::Relation => "Relation",
            PropKind::Attribute => "Attribute",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataType {
    Boolean,
    Number,
    String,
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataType::Boolean => "Boolean",
            DataType::Number => "Number",
            DataType::String => "String",
        })
    }
}

impl FromStr for DataType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Boolean" => Ok(DataType::Boolean),
            "Number" => Ok(DataType::Number),
            "String" => Ok(DataType::String),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyDecl {
    pub name: String,
    pub prop_kind: PropKind,
    /// Concept a relation points at. Optional: `task` ranges over several.
    pub range: Option<String>,
    pub data_type: Option<DataType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RestrictionKind {
    Condition,
    ValueCondition,
    SetValue,
    SetDo,
    Immutable,
    Default,
    // Accepted and ignored with a warning.
    Multiple,
    Unique,
    UniqueDomain,
    SetRange,
    Required,
    Permission,
}

impl RestrictionKind {
    pub const ALL: [RestrictionKind; 12] = [
        RestrictionKind::Condition,
        RestrictionKind::ValueCondition,
        RestrictionKind::SetValue,
        RestrictionKind::SetDo,
        RestrictionKind::Immutable,
        RestrictionKind::Default,
        RestrictionKind::Multiple,
        RestrictionKind::Unique,
        RestrictionKind::UniqueDomain,
        RestrictionKind::SetRange,
        RestrictionKind::Required,
        RestrictionKind::Permission,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RestrictionKind::Condition => "Condition",
            RestrictionKind::ValueCondition => "ValueCondition",
            RestrictionKind::SetValue => "SetValue",
            RestrictionKind::SetDo => "SetDo",
            RestrictionKind::Immutable => "Immutable",
            RestrictionKind::Default => "Default",
            RestrictionKind::Multiple => "Multiple",
            RestrictionKind::Unique => "Unique",
            RestrictionKind::UniqueDomain => "UniqueDomain",
            RestrictionKind::SetRange => "SetRange",
            RestrictionKind::Required => "Required",
            RestrictionKind::Permission => "Permission",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Kinds the engine executes.
    pub fn is_supported(self) -> bool {
        matches!(
            self,
            RestrictionKind::Condition
                | RestrictionKind::ValueCondition
                | RestrictionKind::SetValue
                | RestrictionKind::SetDo
                | RestrictionKind::Immutable
                | RestrictionKind::Default
        )
    }
}

impl fmt::Display for RestrictionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A restriction keeps its expression as raw text; the expr module parses
/// it during validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Restriction {
    pub kind: RestrictionKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEvent {
    pub prop_kind: PropKind,
    pub property: String,
    pub restrictions: Vec<Restriction>,
    /// Nested model events. Structural only.
    pub children: Vec<ModelEvent>,
}

impl ModelEvent {
    pub fn restriction(&self, kind: RestrictionKind) -> Option<&Restriction> {
        self.restrictions.iter().find(|r| r.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDecl {
    pub concept: String,
    pub name: String,
    /// A `SetModel:` line inside a model; carried through and ignored.
    pub set_model: Option<String>,
    pub events: Vec<ModelEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub property: String,
    /// Literal text, or an individual name for relations.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndividualDecl {
    pub concept: String,
    pub name: String,
    pub set_model: Option<String>,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub property: String,
    pub title: Option<String>,
    pub control_type: Option<String>,
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewDecl {
    pub name: String,
    pub set_model: Option<String>,
    pub concept_page: Option<String>,
    pub individual_id: Option<String>,
    pub view_concept: Option<String>,
    pub individual_list: Option<String>,
    pub view_mode: Option<String>,
    pub title: Option<String>,
    pub include: Option<String>,
    pub exclude: Option<String>,
    pub controls: Vec<Control>,
}
