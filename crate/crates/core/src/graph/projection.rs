use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::event::Event;
use crate::expr::{StateView, Value, MEMBERSHIP};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndividualInfo {
    pub concept: String,
    pub model: String,
    pub created_seq: u64,
    pub creation_id: String,
}

/// Latest value per slot, folded from the log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectedState {
    values: HashMap<String, BTreeMap<String, Value>>,
    individuals: HashMap<String, IndividualInfo>,
    /// Individuals in creation order.
    order: Vec<String>,
    upto: u64,
}

impl ProjectedState {
    pub fn apply(&mut self, e: &Event) {
        if e.property == MEMBERSHIP && !self.individuals.contains_key(&e.base) {
            self.individuals.insert(
                e.base.clone(),
                IndividualInfo {
                    concept: e.value.render(),
                    model: e.model.clone(),
                    created_seq: e.seq,
                    creation_id: e.id.clone(),
                },
            );
            self.order.push(e.base.clone());
        }
        self.values
            .entry(e.base.clone())
            .or_default()
            .insert(e.property.clone(), e.value.clone());
        self.upto = e.seq;
    }

    pub fn fold<'a>(events: impl IntoIterator<Item = &'a Event>) -> Self {
        let mut s = ProjectedState::default();
        for e in events {
            s.apply(e);
        }
        s
    }

    /// Seq of the last event folded in.
    pub fn upto(&self) -> u64 {
        self.upto
    }

    pub fn get(&self, individual: &str, property: &str) -> Option<&Value> {
        self.values.get(individual)?.get(property)
    }

    /// Every assigned property of an individual, reserved slots included.
    pub fn properties(&self, individual: &str) -> Option<&BTreeMap<String, Value>> {
        self.values.get(individual)
    }

    pub fn individual(&self, id: &str) -> Option<&IndividualInfo> {
        self.individuals.get(id)
    }

    pub fn individuals(&self) -> impl Iterator<Item = (&str, &IndividualInfo)> {
        self.order
            .iter()
            .map(|id| (id.as_str(), &self.individuals[id.as_str()]))
    }
}

impl StateView for ProjectedState {
    fn value(&self, individual: &str, property: &str) -> Value {
        self.get(individual, property).cloned().unwrap_or_default()
    }

    fn members(&self, model: &str) -> Vec<String> {
        self.individuals()
            .filter(|(_, info)| info.model == model)
            .map(|(id, _)| id.to_string())
            .collect()
    }
}
