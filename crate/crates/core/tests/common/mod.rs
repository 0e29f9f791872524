//! Shared test fixtures: random small worlds and a naive fixpoint oracle.
#![allow(dead_code)]

use std::collections::BTreeMap;

use eoflow::bsl::Catalog;
use eoflow::engine::Engine;
use eoflow::expr::{dependencies, eval, EvalContext, StateView, Value};
use proptest::prelude::*;

pub const LOCS: [&str; 3] = ["Loc A", "Loc B", "Loc C"];

type Props = BTreeMap<String, BTreeMap<String, Value>>;

/// Projection snapshot the oracle mutates on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveState {
    pub values: Props,
    /// (individual, model) in creation order.
    pub members: Vec<(String, String)>,
}

impl NaiveState {
    pub fn of(engine: &Engine) -> Self {
        let state = engine.state();
        let members: Vec<(String, String)> = state
            .individuals()
            .map(|(id, info)| (id.to_string(), info.model.clone()))
            .collect();
        let values = members
            .iter()
            .map(|(id, _)| {
                (
                    id.clone(),
                    state.properties(id).cloned().unwrap_or_default(),
                )
            })
            .collect();
        NaiveState { values, members }
    }

    fn set(&mut self, individual: &str, property: &str, v: Value) -> bool {
        let slot = self.values.entry(individual.to_string()).or_default();
        if slot.get(property) == Some(&v) {
            return false;
        }
        slot.insert(property.to_string(), v);
        true
    }
}

impl StateView for NaiveState {
    fn value(&self, individual: &str, property: &str) -> Value {
        self.values
            .get(individual)
            .and_then(|p| p.get(property))
            .cloned()
            .unwrap_or_default()
    }

    fn members(&self, model: &str) -> Vec<String> {
        self.members
            .iter()
            .filter(|(_, m)| m == model)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

/// Every (individual, property) that carries a SetValue, in creation then
/// declaration order.
pub fn all_rules(catalog: &Catalog, state: &NaiveState) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (id, _) in &state.members {
        if let Some(model) = catalog.model_of(id) {
            for e in model.events.iter().filter(|e| e.set_value.is_some()) {
                out.push((id.clone(), e.property.clone()));
            }
        }
    }
    out
}

/// Applies the SetDo hosted on a slot that just received `value`.
fn fire_set_do(
    catalog: &Catalog,
    s: &mut NaiveState,
    individual: &str,
    property: &str,
    value: &Value,
) {
    let Some(action) = catalog
        .slot_event(individual, property)
        .and_then(|e| e.set_do.clone())
    else {
        return;
    };
    let ctx = EvalContext::new(s, individual).with_value(value);
    let fires = action
        .guard
        .as_ref()
        .is_none_or(|g| eval(g, &ctx).is_ok_and(|v| v.truthy()));
    if !fires {
        return;
    }
    let Ok(Value::Ref(target)) = eval(&action.target, &ctx) else {
        return;
    };
    let writes: Vec<(String, Value)> = action
        .assignments
        .iter()
        .filter_map(|(p, e)| Some((p.clone(), eval(e, &ctx).ok()?)))
        .collect();
    for (p, v) in writes {
        let Some(def) = catalog.slot_event(&target, &p) else {
            continue;
        };
        let Ok(v) = catalog.normalize(&p, v) else {
            continue;
        };
        if def.immutable && s.value(&target, &p) != Value::Null {
            continue;
        }
        if let Some(vc) = &def.value_condition {
            let ctx = EvalContext::new(s, &target).with_value(&v);
            if !eval(vc, &ctx).is_ok_and(|r| r.truthy()) {
                continue;
            }
        }
        if s.set(&target, &p, v.clone()) {
            fire_set_do(catalog, s, &target, &p, &v);
        }
    }
}

/// Applies a trigger write to `before`, then re-evaluates every SetValue on
/// every individual until a full pass changes nothing. Each new slot value
/// fires the SetDo hosted on that slot.
pub fn oracle(
    catalog: &Catalog,
    before: &NaiveState,
    individual: &str,
    property: &str,
    value: Value,
) -> NaiveState {
    let mut s = before.clone();
    let value = catalog
        .normalize(property, value)
        .expect("trigger value is valid");
    s.set(individual, property, value.clone());
    fire_set_do(catalog, &mut s, individual, property, &value);

    let rules = all_rules(catalog, &s);
    for _ in 0..1_000 {
        let mut changed = false;
        for (host, prop) in &rules {
            let expr = catalog
                .slot_event(host, prop)
                .and_then(|e| e.set_value.as_ref())
                .unwrap();
            let Ok(v) = eval(expr, &EvalContext::new(&s, host)) else {
                continue;
            };
            if v == Value::Null {
                continue;
            }
            let Ok(v) = catalog.normalize(prop, v) else {
                continue;
            };
            if s.set(host, prop, v.clone()) {
                changed = true;
                fire_set_do(catalog, &mut s, host, prop, &v);
            }
        }
        if !changed {
            return s;
        }
    }
    panic!("oracle did not reach a fixpoint");
}

/// Rules whose read set, evaluated against `state`, covers the slot.
pub fn readers(catalog: &Catalog, state: &NaiveState, individual: &str, property: &str) -> usize {
    all_rules(catalog, state)
        .iter()
        .filter(|(host, prop)| {
            let expr = catalog
                .slot_event(host, prop)
                .and_then(|e| e.set_value.as_ref())
                .unwrap();
            dependencies(expr, &EvalContext::new(state, host))
                .iter()
                .any(|slot| slot.covers(individual, property))
        })
        .count()
}

/// One random external write.
#[derive(Debug, Clone)]
pub enum Op {
    /// 0 robot location, 1 object location, 2 target location.
    Place(usize, usize),
    Battery(u32),
    /// Press the n-th available action, modulo the count.
    Press(usize),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        1 => (0..3usize, 0..5usize).prop_map(|(w, l)| Op::Place(w, l)),
        1 => (0..=120u32).prop_map(Op::Battery),
        3 => any::<usize>().prop_map(Op::Press),
    ]
}

#[derive(Debug, Clone)]
pub struct World {
    pub initial: [usize; 3],
    pub recharge: bool,
    pub dock: bool,
    pub ops: Vec<Op>,
}

pub fn world(max_ops: usize) -> impl Strategy<Value = World> {
    (
        [0..3usize, 0..3usize, 0..3usize],
        any::<bool>(),
        any::<bool>(),
        prop::collection::vec(op(), 1..=max_ops),
    )
        .prop_map(|(initial, recharge, dock, ops)| World {
            initial,
            recharge,
            dock: recharge && dock,
            ops,
        })
}

impl World {
    pub fn engine(&self) -> Engine {
        let mut blocks = vec!["delivery"];
        if self.recharge {
            blocks.push("recharging");
        }
        if self.dock {
            blocks.push("docking");
        }
        let mut e = Engine::with_blocks(&blocks).unwrap();
        for (slot, loc) in SLOTS.iter().zip(self.initial) {
            e.inject("operator", slot.0, slot.1, Value::reference(LOCS[loc]))
                .unwrap();
        }
        e
    }

    /// All locations the world knows about.
    pub fn locations(&self) -> Vec<&'static str> {
        let mut locs = LOCS.to_vec();
        if self.recharge {
            locs.push("Loc Station");
        }
        if self.dock {
            locs.push("Loc Dock");
        }
        locs
    }

    /// Resolves an op to a concrete write, or `None` when nothing applies.
    pub fn write(&self, engine: &mut Engine, op: &Op) -> Option<(String, String, String, Value)> {
        match *op {
            Op::Place(which, loc) => {
                let locs = self.locations();
                let (ind, prop) = SLOTS[which];
                let to = locs[loc % locs.len()];
                Some((
                    "operator".into(),
                    ind.into(),
                    prop.into(),
                    Value::reference(to),
                ))
            }
            Op::Battery(level) if self.recharge => Some((
                "sensor".into(),
                "Robot 1".into(),
                "batteryLevel".into(),
                Value::Num(level as f64),
            )),
            Op::Battery(_) => None,
            Op::Press(n) => {
                let avail: Vec<_> = engine
                    .available_actions(None)
                    .into_iter()
                    .filter(|a| a.available)
                    .collect();
                if avail.is_empty() {
                    return None;
                }
                let a = &avail[n % avail.len()];
                Some((
                    "auto-operator".into(),
                    a.individual.clone(),
                    a.property.clone(),
                    Value::Str("1".into()),
                ))
            }
        }
    }
}

pub const SLOTS: [(&str, &str); 3] = [
    ("Robot 1", "location"),
    ("Delivery 1", "objectLoc"),
    ("Delivery 1", "targetLoc"),
];

/// Result of checking one world against the oracle.
pub struct OracleRun {
    pub cascades: usize,
    pub mismatch: Option<String>,
}

/// Runs every op of the world, comparing the engine projection with the
/// oracle after each accepted write.
pub fn check_world(w: &World) -> OracleRun {
    let mut engine = w.engine();
    let mut cascades = 0;
    for op in &w.ops {
        let Some((actor, ind, prop, value)) = w.write(&mut engine, op) else {
            continue;
        };
        let before = NaiveState::of(&engine);
        if engine.inject(&actor, &ind, &prop, value.clone()).is_err() {
            continue;
        }
        cascades += 1;
        let expected = oracle(engine.catalog(), &before, &ind, &prop, value);
        let actual = NaiveState::of(&engine);
        if expected.values != actual.values {
            return OracleRun {
                cascades,
                mismatch: Some(format!(
                    "after {ind}.{prop} ({op:?}):\n  oracle {:?}\n  engine {:?}",
                    expected.values, actual.values
                )),
            };
        }
    }
    OracleRun {
        cascades,
        mismatch: None,
    }
}
