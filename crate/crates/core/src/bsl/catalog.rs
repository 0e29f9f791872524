use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ast::{DataType, PropKind, RestrictionKind, ViewDecl};
use crate::expr::{parse_number, EditAction, Expr, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyDef {
    pub kind: PropKind,
    pub range: Option<String>,
    pub data_type: Option<DataType>,
}

/// A model event with its restrictions parsed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventDef {
    pub kind: PropKind,
    pub property: String,
    pub condition: Option<Expr>,
    pub value_condition: Option<Expr>,
    pub set_value: Option<Expr>,
    pub set_do: Option<EditAction>,
    pub default: Option<Expr>,
    pub immutable: bool,
    /// Source text of every restriction declared so far, ignored kinds
    /// included.
    pub source: BTreeMap<RestrictionKind, String>,
    pub children: Vec<EventDef>,
}

impl EventDef {
    pub fn new(kind: PropKind, property: impl Into<String>) -> Self {
        EventDef {
            kind,
            property: property.into(),
            condition: None,
            value_condition: None,
            set_value: None,
            set_do: None,
            default: None,
            immutable: false,
            source: BTreeMap::new(),
            children: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDef {
    pub concept: String,
    /// Root-level model events in declaration order, amendments appended.
    pub events: Vec<EventDef>,
}

impl ModelDef {
    pub fn event(&self, property: &str) -> Option<&EventDef> {
        self.events.iter().find(|e| e.property == property)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndividualDef {
    pub concept: String,
    pub model: String,
}

/// Everything declared so far: the schema the engine executes against.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Catalog {
    pub concepts: BTreeSet<String>,
    pub properties: BTreeMap<String, PropertyDef>,
    pub models: BTreeMap<String, ModelDef>,
    pub individuals: BTreeMap<String, IndividualDef>,
    pub views: Vec<ViewDecl>,
}

impl Catalog {
    pub fn model_of(&self, individual: &str) -> Option<&ModelDef> {
        self.models.get(&self.individuals.get(individual)?.model)
    }

    /// The root model event governing `individual.property`, if any.
    pub fn slot_event(&self, individual: &str, property: &str) -> Option<&EventDef> {
        self.model_of(individual)?.event(property)
    }

    pub fn view(&self, name: &str) -> Option<&ViewDecl> {
        self.views.iter().find(|v| v.name == name)
    }

    /// Coerce `value` to the shape the property's declaration calls for.
    ///
    /// Relations take a reference (or its name as a string) to a known
    /// individual. Booleans accept `1`/`0`/`true`/`false` in any form,
    /// numbers accept numeric strings. Undeclared properties pass through.
    pub fn normalize(&self, property: &str, value: Value) -> Result<Value, String> {
        let Some(def) = self.properties.get(property) else {
            return Ok(value);
        };
        if value.is_null() {
            return Err(format!("`{property}` cannot be set to null"));
        }
        match (def.kind, def.data_type) {
            (PropKind::Relation, _) => {
                let id = match &value {
                    Value::Ref(id) | Value::Str(id) => id.clone(),
                    other => return Err(format!("`{property}` needs an individual, got {other}")),
                };
                if self.individuals.contains_key(&id) {
                    Ok(Value::Ref(id))
                } else {
                    Err(format!("`{property}` refers to unknown individual `{id}`"))
                }
            }
            (PropKind::Attribute, Some(DataType::Boolean)) => match &value {
                Value::Bool(_) => Ok(value),
                Value::Num(n) if *n == 1.0 || *n == 0.0 => Ok(Value::Bool(*n == 1.0)),
                Value::Str(s) => match s.trim() {
                    "1" | "true" => Ok(Value::Bool(true)),
                    "0" | "false" => Ok(Value::Bool(false)),
                    _ => Err(format!("`{property}` is Boolean, got `{s}`")),
                },
                other => Err(format!("`{property}` is Boolean, got {other}")),
            },
            (PropKind::Attribute, Some(DataType::Number)) => match &value {
                Value::Num(_) => Ok(value),
                Value::Str(s) => parse_number(s)
                    .map(Value::Num)
                    .ok_or_else(|| format!("`{property}` is Number, got `{s}`")),
                other => Err(format!("`{property}` is Number, got {other}")),
            },
            (PropKind::Attribute, Some(DataType::String)) => Ok(Value::Str(value.render())),
            (PropKind::Attribute, None) => Ok(value),
        }
    }
}
