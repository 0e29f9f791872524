use std::collections::BTreeMap;

use serde::Serialize;

use super::Engine;
use crate::expr::{Value, MEMBERSHIP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlPayload {
    pub property: String,
    pub title: String,
    pub control_type: String,
    pub value: String,
    /// Whether the bound action is currently available.
    pub available: bool,
}

/// A view resolved against the current projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewPayload {
    pub name: String,
    pub title: String,
    pub mode: String,
    pub concept: Option<String>,
    pub individual: Option<String>,
    pub values: BTreeMap<String, Value>,
    pub controls: Vec<ControlPayload>,
}

impl Engine {
    pub fn view_names(&self) -> Vec<String> {
        self.catalog()
            .views
            .iter()
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn view(&mut self, name: &str) -> Option<ViewPayload> {
        let decl = self.catalog().view(name)?.clone();
        let individual = decl.individual_id.clone();
        let values = individual
            .as_deref()
            .and_then(|i| self.state().properties(i))
            .map(|props| {
                props
                    .iter()
                    .filter(|(p, _)| p.as_str() != MEMBERSHIP)
                    .map(|(p, v)| (p.clone(), v.clone()))
                    .collect()
            })
            .unwrap_or_default();
        let actions = match individual.as_deref() {
            Some(i) => self.available_actions(Some(i)),
            None => Vec::new(),
        };
        let controls = decl
            .controls
            .iter()
            .map(|c| ControlPayload {
                property: c.property.clone(),
                title: c.title.clone().unwrap_or_else(|| c.property.clone()),
                control_type: c.control_type.clone().unwrap_or_else(|| "button".into()),
                value: c.value.clone().unwrap_or_else(|| "1".into()),
                available: actions
                    .iter()
                    .any(|a| a.property == c.property && a.available),
            })
            .collect();
        Some(ViewPayload {
            title: decl.title.clone().unwrap_or_else(|| decl.name.clone()),
            mode: decl.view_mode.clone().unwrap_or_else(|| "showcase".into()),
            name: decl.name,
            concept: decl.view_concept.or(decl.concept_page),
            individual,
            values,
            controls,
        })
    }
}
