use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::*;
use super::catalog::{Catalog, EventDef, IndividualDef, ModelDef, PropertyDef};
use crate::expr::{parse_action, parse_expr, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefKind {
    Concept,
    Property,
    Model,
    Individual,
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "issue")]
pub enum Issue {
    #[error("unresolved {kind} `{name}`")]
    UnresolvedReference { name: String, kind: RefKind },
    #[error("`{individual}.{property}` = `{value}` is not a {range}")]
    RangeViolation {
        individual: String,
        property: String,
        value: String,
        range: String,
    },
    #[error("`{individual}.{property}`: {message}")]
    TypeMismatch {
        individual: String,
        property: String,
        message: String,
    },
    #[error("amendment target `{0}` does not exist")]
    AmendmentTargetMissing(String),
    #[error("conflicting amendment of `{name}`: {reason}")]
    ConflictingAmendment { name: String, reason: String },
    #[error("{kind} `{name}` is already declared")]
    DuplicateDeclaration { kind: String, name: String },
    #[error("`{model}.{property}` already has a {kind} restriction")]
    DuplicateRestrictionKind {
        model: String,
        property: String,
        kind: RestrictionKind,
    },
    #[error("`{model}.{property}` is declared as a {declared} but used as a {used}")]
    KindMismatch {
        model: String,
        property: String,
        declared: PropKind,
        used: PropKind,
    },
    #[error("{kind} on `{model}.{property}`: {message}")]
    Expression {
        model: String,
        property: String,
        kind: RestrictionKind,
        message: String,
    },
    #[error("individual `{individual}` has no SetModel")]
    MissingModel { individual: String },
    #[error("model `{model}` belongs to `{model_concept}`, not `{concept}`")]
    ModelConceptMismatch {
        model: String,
        model_concept: String,
        concept: String,
    },
    #[error("`{property}` is not an event of `{model}` (assigned on `{individual}`)")]
    NotInModel {
        individual: String,
        property: String,
        model: String,
    },
    #[error("view `{view}`: unknown control type `{control_type}`")]
    UnknownControlType { view: String, control_type: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{} validation issue(s): {}", issues.len(), issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub issues: Vec<Issue>,
}

/// Declarations checked against the catalog they will be installed into.
#[derive(Debug, Clone)]
pub struct ValidatedBlock {
    pub decls: Vec<Declaration>,
    /// The catalog as it will be once the block is installed.
    pub catalog: Catalog,
    /// Individuals this block creates, in declaration order.
    pub new_individuals: Vec<String>,
    /// Models that existed before and were amended by this block.
    pub amended_models: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn validate(
    decls: Vec<Declaration>,
    context: &Catalog,
) -> Result<ValidatedBlock, ValidationError> {
    let mut v = Validator {
        catalog: context.clone(),
        issues: Vec::new(),
        warnings: Vec::new(),
        new_individuals: Vec::new(),
        amended_models: Vec::new(),
    };
    let block_concepts: BTreeSet<&str> = decls
        .iter()
        .filter_map(|d| match d {
            Declaration::Concept(c) => Some(c.name.as_str()),
            _ => None,
        })
        .collect();
    for decl in &decls {
        v.structure(decl, &block_concepts);
    }
    for decl in &decls {
        v.references(decl);
    }
    if v.issues.is_empty() {
        Ok(ValidatedBlock {
            decls,
            catalog: v.catalog,
            new_individuals: v.new_individuals,
            amended_models: v.amended_models,
            warnings: v.warnings,
        })
    } else {
        Err(ValidationError { issues: v.issues })
    }
}

struct Validator {
    catalog: Catalog,
    issues: Vec<Issue>,
    warnings: Vec<String>,
    new_individuals: Vec<String>,
    amended_models: Vec<String>,
}

impl Validator {
    fn unresolved(&mut self, name: &str, kind: RefKind) {
        self.issues.push(Issue::UnresolvedReference {
            name: name.to_string(),
            kind,
        });
    }

    /// Pass one: register names and merge amendments, in source order.
    fn structure(&mut self, decl: &Declaration, block_concepts: &BTreeSet<&str>) {
        match decl {
            Declaration::Concept(c) => {
                if !self.catalog.concepts.insert(c.name.clone()) {
                    self.issues.push(Issue::DuplicateDeclaration {
                        kind: "concept".into(),
                        name: c.name.clone(),
                    });
                }
            }
            Declaration::Property(p) => {
                if self.catalog.properties.contains_key(&p.name) {
                    self.issues.push(Issue::DuplicateDeclaration {
                        kind: "property".into(),
                        name: p.name.clone(),
                    });
                    return;
                }
                self.catalog.properties.insert(
                    p.name.clone(),
                    PropertyDef {
                        kind: p.prop_kind,
                        range: p.range.clone(),
                        data_type: p.data_type,
                    },
                );
            }
            Declaration::Model(m) => self.model(m, block_concepts),
            Declaration::Individual(d) => self.individual(d),
            Declaration::View(view) => {
                if self.catalog.view(&view.name).is_some() {
                    self.issues.push(Issue::DuplicateDeclaration {
                        kind: "view".into(),
                        name: view.name.clone(),
                    });
                    return;
                }
                for c in &view.controls {
                    if let Some(t) = c.control_type.as_deref().filter(|t| *t != "button") {
                        self.issues.push(Issue::UnknownControlType {
                            view: view.name.clone(),
                            control_type: t.to_string(),
                        });
                    }
                }
                self.catalog.views.push(view.clone());
            }
        }
    }

    fn model(&mut self, m: &ModelDecl, block_concepts: &BTreeSet<&str>) {
        if let Some(s) = &m.set_model {
            self.warnings.push(format!(
                "`SetModel: {s}` inside model `{}` is ignored",
                m.name
            ));
        }
        let existing = self.catalog.models.get(&m.name).cloned();
        let mut def = match existing {
            Some(def) => {
                if def.concept != m.concept {
                    self.issues.push(Issue::ConflictingAmendment {
                        name: m.name.clone(),
                        reason: format!(
                            "declared for `{}`, amended for `{}`",
                            def.concept, m.concept
                        ),
                    });
                    return;
                }
                if !self.amended_models.contains(&m.name) {
                    self.amended_models.push(m.name.clone());
                }
                def
            }
            None => {
                let concept_known = self.catalog.concepts.contains(&m.concept)
                    || block_concepts.contains(m.concept.as_str());
                if !concept_known {
                    self.issues
                        .push(Issue::AmendmentTargetMissing(m.name.clone()));
                    return;
                }
                ModelDef {
                    concept: m.concept.clone(),
                    events: Vec::new(),
                }
            }
        };
        for event in &m.events {
            match def.events.iter().position(|e| e.property == event.property) {
                Some(i) => {
                    if def.events[i].kind != event.prop_kind {
                        self.issues.push(Issue::ConflictingAmendment {
                            name: m.name.clone(),
                            reason: format!(
                                "`{}` is a {}, amended as a {}",
                                event.property, def.events[i].kind, event.prop_kind
                            ),
                        });
                        continue;
                    }
                    let mut target = def.events[i].clone();
                    self.merge(&m.name, &mut target, event);
                    def.events[i] = target;
                }
                None => {
                    let mut fresh = EventDef::new(event.prop_kind, event.property.as_str());
                    self.merge(&m.name, &mut fresh, event);
                    def.events.push(fresh);
                }
            }
        }
        self.catalog.models.insert(m.name.clone(), def);
    }

    fn merge(&mut self, model: &str, target: &mut EventDef, source: &ModelEvent) {
        for r in &source.restrictions {
            if target.source.contains_key(&r.kind) && r.kind != RestrictionKind::SetValue {
                self.issues.push(Issue::DuplicateRestrictionKind {
                    model: model.to_string(),
                    property: source.property.clone(),
                    kind: r.kind,
                });
                continue;
            }
            target.source.insert(r.kind, r.text.clone());
            let expr_issue = |message: String| Issue::Expression {
                model: model.to_string(),
                property: source.property.clone(),
                kind: r.kind,
                message,
            };
            let parsed = |text: &str| parse_expr(text).map_err(|e| expr_issue(e.to_string()));
            let result: Result<(), Issue> = match r.kind {
                RestrictionKind::Condition => parsed(&r.text).map(|e| target.condition = Some(e)),
                RestrictionKind::ValueCondition => {
                    parsed(&r.text).map(|e| target.value_condition = Some(e))
                }
                RestrictionKind::SetValue => parsed(&r.text).map(|e| target.set_value = Some(e)),
                RestrictionKind::Default => parsed(&r.text).map(|e| target.default = Some(e)),
                RestrictionKind::SetDo => parse_action(&r.text)
                    .map(|a| target.set_do = Some(a))
                    .map_err(|e| expr_issue(e.to_string())),
                RestrictionKind::Immutable => {
                    target.immutable = !matches!(r.text.trim(), "0" | "false");
                    Ok(())
                }
                ignored => {
                    self.warnings.push(format!(
                        "{ignored} restriction on `{model}.{}` is not enforced",
                        source.property
                    ));
                    Ok(())
                }
            };
            if let Err(issue) = result {
                self.issues.push(issue);
            }
        }
        for child in &source.children {
            match target
                .children
                .iter()
                .position(|c| c.property == child.property)
            {
                Some(i) => {
                    let mut nested = target.children[i].clone();
                    self.merge(model, &mut nested, child);
                    target.children[i] = nested;
                }
                None => {
                    let mut nested = EventDef::new(child.prop_kind, child.property.as_str());
                    self.merge(model, &mut nested, child);
                    target.children.push(nested);
                }
            }
        }
    }

    fn individual(&mut self, d: &IndividualDecl) {
        if let Some(existing) = self.catalog.individuals.get(&d.name) {
            if existing.concept != d.concept {
                self.issues.push(Issue::ConflictingAmendment {
                    name: d.name.clone(),
                    reason: format!("is a `{}`, reopened as `{}`", existing.concept, d.concept),
                });
            } else if let Some(m) = d.set_model.as_ref().filter(|m| **m != existing.model) {
                self.issues.push(Issue::ConflictingAmendment {
                    name: d.name.clone(),
                    reason: format!("has model `{}`, reopened with `{m}`", existing.model),
                });
            }
            return;
        }
        let Some(model) = d.set_model.clone() else {
            self.issues.push(Issue::MissingModel {
                individual: d.name.clone(),
            });
            return;
        };
        self.catalog.individuals.insert(
            d.name.clone(),
            IndividualDef {
                concept: d.concept.clone(),
                model,
            },
        );
        self.new_individuals.push(d.name.clone());
    }

    /// Pass two: every name resolves against the merged catalog.
    fn references(&mut self, decl: &Declaration) {
        match decl {
            Declaration::Concept(_) => {}
            Declaration::Property(p) => {
                if let Some(range) = &p.range {
                    if !self.catalog.concepts.contains(range) {
                        self.unresolved(range, RefKind::Concept);
                    }
                }
            }
            Declaration::Model(m) => {
                if !self.catalog.concepts.contains(&m.concept) {
                    self.unresolved(&m.concept, RefKind::Concept);
                }
                for e in &m.events {
                    self.event_references(&m.name, e);
                }
            }
            Declaration::Individual(d) => self.individual_references(d),
            Declaration::View(v) => {
                if let Some(m) = &v.set_model {
                    if !self.catalog.models.contains_key(m) {
                        self.unresolved(m, RefKind::Model);
                    }
                }
                for c in [&v.concept_page, &v.view_concept].into_iter().flatten() {
                    if !self.catalog.concepts.contains(c) {
                        self.unresolved(c, RefKind::Concept);
                    }
                }
                for i in [&v.individual_id, &v.individual_list].into_iter().flatten() {
                    if !self.catalog.individuals.contains_key(i) {
                        self.unresolved(i, RefKind::Individual);
                    }
                }
                for c in &v.controls {
                    if !self.catalog.properties.contains_key(&c.property) {
                        self.unresolved(&c.property, RefKind::Property);
                    }
                }
            }
        }
    }

    fn event_references(&mut self, model: &str, e: &ModelEvent) {
        match self.catalog.properties.get(&e.property) {
            None => self.unresolved(&e.property, RefKind::Property),
            Some(p) if p.kind != e.prop_kind => self.issues.push(Issue::KindMismatch {
                model: model.to_string(),
                property: e.property.clone(),
                declared: p.kind,
                used: e.prop_kind,
            }),
            Some(_) => {}
        }
        for r in &e.restrictions {
            let mut exprs: Vec<Expr> = Vec::new();
            let mut assigned: Vec<String> = Vec::new();
            match r.kind {
                RestrictionKind::SetDo => {
                    if let Ok(a) = parse_action(&r.text) {
                        exprs.extend(a.expressions().cloned());
                        assigned.extend(a.assignments.iter().map(|(p, _)| p.clone()));
                    }
                }
                k if k.is_supported() && k != RestrictionKind::Immutable => {
                    exprs.extend(parse_expr(&r.text).ok());
                }
                _ => {}
            }
            let mut props: Vec<String> = assigned;
            let mut models: Vec<String> = Vec::new();
            for x in &exprs {
                props.extend(x.referenced_properties().into_iter().map(String::from));
                models.extend(x.referenced_models().into_iter().map(String::from));
            }
            for p in props {
                if !self.catalog.properties.contains_key(&p) {
                    self.unresolved(&p, RefKind::Property);
                }
            }
            for m in models {
                if !self.catalog.models.contains_key(&m) {
                    self.unresolved(&m, RefKind::Model);
                }
            }
        }
        for child in &e.children {
            self.event_references(model, child);
        }
    }

    fn individual_references(&mut self, d: &IndividualDecl) {
        if !self.catalog.concepts.contains(&d.concept) {
            self.unresolved(&d.concept, RefKind::Concept);
        }
        let Some(ind) = self.catalog.individuals.get(&d.name).cloned() else {
            return;
        };
        let Some(model) = self.catalog.models.get(&ind.model).cloned() else {
            self.unresolved(&ind.model, RefKind::Model);
            return;
        };
        if model.concept != ind.concept {
            self.issues.push(Issue::ModelConceptMismatch {
                model: ind.model.clone(),
                model_concept: model.concept.clone(),
                concept: ind.concept.clone(),
            });
        }
        for a in &d.assignments {
            let Some(prop) = self.catalog.properties.get(&a.property).cloned() else {
                self.unresolved(&a.property, RefKind::Property);
                continue;
            };
            if model.event(&a.property).is_none() {
                self.issues.push(Issue::NotInModel {
                    individual: d.name.clone(),
                    property: a.property.clone(),
                    model: ind.model.clone(),
                });
                continue;
            }
            if prop.kind == PropKind::Relation {
                match self.catalog.individuals.get(&a.value) {
                    None => self.unresolved(&a.value, RefKind::Individual),
                    Some(target) => {
                        if let Some(range) = prop.range.as_ref().filter(|r| **r != target.concept) {
                            self.issues.push(Issue::RangeViolation {
                                individual: d.name.clone(),
                                property: a.property.clone(),
                                value: a.value.clone(),
                                range: range.clone(),
                            });
                        }
                    }
                }
            } else if let Err(message) = self
                .catalog
                .normalize(&a.property, crate::expr::Value::str(a.value.as_str()))
            {
                self.issues.push(Issue::TypeMismatch {
                    individual: d.name.clone(),
                    property: a.property.clone(),
                    message,
                });
            }
        }
    }
}
