use std::collections::{BTreeSet, HashMap};

use crate::expr::Slot;

pub type RuleId = usize;

/// Slot → rules index, kept exact by replacing a rule's whole slot set
/// after each evaluation.
#[derive(Debug, Clone, Default)]
pub struct Subscriptions {
    exact: HashMap<(String, String), BTreeSet<RuleId>>,
    wildcard: HashMap<String, BTreeSet<RuleId>>,
    by_rule: HashMap<RuleId, BTreeSet<Slot>>,
}

impl Subscriptions {
    pub fn set(&mut self, rule: RuleId, deps: BTreeSet<Slot>) {
        if let Some(old) = self.by_rule.remove(&rule) {
            for slot in old {
                self.bucket(&slot).remove(&rule);
            }
        }
        for slot in &deps {
            self.bucket(slot).insert(rule);
        }
        self.by_rule.insert(rule, deps);
    }

    fn bucket(&mut self, slot: &Slot) -> &mut BTreeSet<RuleId> {
        match &slot.individual {
            Some(i) => self
                .exact
                .entry((i.clone(), slot.property.clone()))
                .or_default(),
            None => self.wildcard.entry(slot.property.clone()).or_default(),
        }
    }

    pub fn lookup(&self, individual: &str, property: &str) -> BTreeSet<RuleId> {
        let mut out = BTreeSet::new();
        if let Some(s) = self
            .exact
            .get(&(individual.to_string(), property.to_string()))
        {
            out.extend(s);
        }
        if let Some(s) = self.wildcard.get(property) {
            out.extend(s);
        }
        out
    }

    pub fn deps(&self, rule: RuleId) -> Option<&BTreeSet<Slot>> {
        self.by_rule.get(&rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resubscription_replaces_slots() {
        let mut s = Subscriptions::default();
        s.set(0, [Slot::exact("D", "robot"), Slot::any("location")].into());
        s.set(1, [Slot::exact("R", "location")].into());
        assert_eq!(s.lookup("R", "location"), [0, 1].into());
        s.set(
            0,
            [Slot::exact("D", "robot"), Slot::exact("R", "location")].into(),
        );
        assert_eq!(s.lookup("X", "location"), BTreeSet::new());
        assert_eq!(s.lookup("R", "location"), [0, 1].into());
        assert_eq!(s.lookup("D", "robot"), [0].into());
    }
}
