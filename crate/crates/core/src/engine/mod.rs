//! The dataflow executor: gated injection, subscription-driven cascades,
//! action availability and hot-loading of model blocks.

mod subs;
mod views;

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

pub use subs::{RuleId, Subscriptions};
pub use views::{ControlPayload, ViewPayload};

use crate::bsl::{
    self, Catalog, DataType, Declaration, ParseError, PropKind, RestrictionKind, ValidatedBlock,
    ValidationError,
};
use crate::corpus;
use crate::expr::{dependencies, eval, EvalContext, Slot, Value, MEMBERSHIP};
use crate::graph::{Event, EventGraph, NewEvent, ProjectedState, LOAD_BLOCK, SYSTEM};

/// Actor recorded on every event the engine derives itself.
pub const ENGINE_ACTOR: &str = "engine";
/// Derived events allowed per trigger before a cascade is declared divergent.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// SetValue evaluations plus SetDo guard evaluations.
    pub rule_evaluations: u64,
    pub derived_events: u64,
    /// Events taken off a cascade worklist.
    pub triggers: u64,
    /// Condition evaluations for gates and action availability.
    pub gate_evaluations: u64,
}

/// A SetValue restriction instantiated on one individual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub host: String,
    pub property: String,
    pub model: String,
    pub event_index: usize,
    pub host_seq: u64,
}

/// Rule failures that do not abort a cascade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    /// Seq of the event being processed, if any.
    pub trigger: Option<u64>,
    pub individual: String,
    pub property: String,
    pub restriction: RestrictionKind,
    pub message: String,
}

/// One worklist step, kept so evaluation counts can be audited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CascadeStep {
    pub trigger_seq: u64,
    /// Last seq in the graph when the step ran.
    pub state_seq: u64,
    /// SetValue rules evaluated, in evaluation order.
    pub rules: Vec<RuleId>,
    /// Whether the trigger's slot carries a SetDo.
    pub set_do: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionDescriptor {
    pub individual: String,
    pub property: String,
    pub model: String,
    pub available: bool,
    pub data_type: Option<DataType>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectReport {
    pub event: Event,
    pub derived: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadReport {
    pub block_event: Event,
    pub created: Vec<String>,
    /// Every event the load appended, the block event first.
    pub events: Vec<Event>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cascade exceeded {limit} derived events")]
pub struct CascadeBudgetExceeded {
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error")]
pub enum InjectError {
    #[error("`{individual}` has no model event `{property}`")]
    UnknownSlot {
        individual: String,
        property: String,
    },
    #[error("invalid value: {message}")]
    InvalidValue { property: String, message: String },
    #[error("`{individual}.{property}` is immutable and already set")]
    ImmutableViolation {
        individual: String,
        property: String,
    },
    #[error("condition of `{individual}.{property}` does not hold: {condition}")]
    ConditionNotMet {
        individual: String,
        property: String,
        condition: String,
    },
    #[error("value {value} rejected for `{individual}.{property}`: {condition}")]
    ValueConditionViolation {
        individual: String,
        property: String,
        value: String,
        condition: String,
    },
    #[error("cascade exceeded {limit} derived events")]
    CascadeBudgetExceeded { limit: usize },
}

impl InjectError {
    pub fn code(&self) -> &'static str {
        match self {
            InjectError::UnknownSlot { .. } => "UnknownSlot",
            InjectError::InvalidValue { .. } => "InvalidValue",
            InjectError::ImmutableViolation { .. } => "ImmutableViolation",
            InjectError::ConditionNotMet { .. } => "ConditionNotMet",
            InjectError::ValueConditionViolation { .. } => "ValueConditionViolation",
            InjectError::CascadeBudgetExceeded { .. } => "CascadeBudgetExceeded",
        }
    }
}

impl From<CascadeBudgetExceeded> for InjectError {
    fn from(e: CascadeBudgetExceeded) -> Self {
        InjectError::CascadeBudgetExceeded { limit: e.limit }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    /// An initial assignment failed its gates; nothing was appended.
    #[error("initial assignment rejected: {0}")]
    Rejected(InjectError),
    #[error(transparent)]
    Cascade(#[from] CascadeBudgetExceeded),
}

#[derive(Debug, Clone)]
pub struct Engine {
    catalog: Catalog,
    graph: EventGraph,
    rules: Vec<Rule>,
    rule_by_slot: HashMap<(String, String), RuleId>,
    subs: Subscriptions,
    counters: Counters,
    diagnostics: Vec<Diagnostic>,
    trace: Vec<CascadeStep>,
    budget: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    /// An empty graph whose catalog holds the view vocabulary.
    pub fn new() -> Self {
        let prelude = bsl::parse_source(corpus::PRELUDE)
            .map_err(|e| e.to_string())
            .and_then(|d| bsl::validate(d, &Catalog::default()).map_err(|e| e.to_string()))
            .expect("prelude is valid");
        let mut graph = EventGraph::with_schema();
        for p in prelude.catalog.properties.keys() {
            graph.declare_property(p.as_str());
        }
        Engine {
            catalog: prelude.catalog,
            graph,
            rules: Vec::new(),
            rule_by_slot: HashMap::new(),
            subs: Subscriptions::default(),
            counters: Counters::default(),
            diagnostics: Vec::new(),
            trace: Vec::new(),
            budget: DEFAULT_BUDGET,
        }
    }

    /// A fresh engine with the given corpus blocks loaded in order.
    pub fn with_blocks(names: &[&str]) -> Result<Self, LoadError> {
        let mut engine = Engine::new();
        for name in names {
            let text = corpus::block(name).unwrap_or_else(|| panic!("no corpus block `{name}`"));
            engine.load_source(text, "operator")?;
        }
        Ok(engine)
    }

    pub fn set_budget(&mut self, budget: usize) {
        self.budget = budget;
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn graph(&self) -> &EventGraph {
        &self.graph
    }

    pub fn state(&self) -> &ProjectedState {
        self.graph.state()
    }

    pub fn value(&self, individual: &str, property: &str) -> Value {
        self.state()
            .get(individual, property)
            .cloned()
            .unwrap_or_default()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = Counters::default();
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn trace(&self) -> &[CascadeStep] {
        &self.trace
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn subscriptions(&self, rule: RuleId) -> Option<&std::collections::BTreeSet<Slot>> {
        self.subs.deps(rule)
    }

    pub fn export_log(&self) -> String {
        self.graph.export_jsonl()
    }

    fn creation_id(&self, individual: &str) -> Option<String> {
        self.state()
            .individual(individual)
            .map(|i| i.creation_id.clone())
    }

    fn model_name(&self, individual: &str) -> String {
        self.catalog
            .individuals
            .get(individual)
            .map(|i| i.model.clone())
            .unwrap_or_default()
    }

    fn diagnose(
        &mut self,
        trigger: Option<u64>,
        individual: &str,
        property: &str,
        kind: RestrictionKind,
        message: String,
    ) {
        self.diagnostics.push(Diagnostic {
            trigger,
            individual: individual.to_string(),
            property: property.to_string(),
            restriction: kind,
            message,
        });
    }

    fn append_engine(
        &mut self,
        base: &str,
        property: &str,
        value: Value,
        cause: Option<String>,
    ) -> u64 {
        let model = self.model_name(base);
        self.graph
            .append(NewEvent {
                base: base.to_string(),
                property: property.to_string(),
                value,
                model,
                cause,
                actor: ENGINE_ACTOR.to_string(),
            })
            .expect("engine appends only to declared slots")
            .seq
    }

    fn event(&self, seq: u64) -> &Event {
        &self.graph.events()[seq as usize - 1]
    }

    // ---- loading ----

    pub fn load_source(&mut self, text: &str, actor: &str) -> Result<LoadReport, LoadError> {
        let decls = bsl::parse_source(text)?;
        let block = bsl::validate(decls, &self.catalog)?;
        self.load_block(block, actor)
    }

    pub fn load_block(
        &mut self,
        block: ValidatedBlock,
        actor: &str,
    ) -> Result<LoadReport, LoadError> {
        let plan = self.plan_assignments(&block).map_err(LoadError::Rejected)?;
        let start = self.graph.len();

        let text = bsl::print(&block.decls);
        let block_event = self
            .graph
            .append(NewEvent {
                base: SYSTEM.to_string(),
                property: LOAD_BLOCK.to_string(),
                value: Value::Str(text),
                model: SYSTEM.to_string(),
                cause: None,
                actor: actor.to_string(),
            })
            .expect("block events are always accepted")
            .clone();
        self.catalog = block.catalog;
        for p in self.catalog.properties.keys() {
            self.graph.declare_property(p.as_str());
        }

        let mut creations = Vec::new();
        for id in &block.new_individuals {
            let info = &self.catalog.individuals[id];
            let seq = self
                .graph
                .append(NewEvent {
                    base: id.clone(),
                    property: MEMBERSHIP.to_string(),
                    value: Value::str(info.concept.as_str()),
                    model: info.model.clone(),
                    cause: Some(block_event.id.clone()),
                    actor: ENGINE_ACTOR.to_string(),
                })
                .expect("validated individuals are new")
                .seq;
            creations.push(seq);
        }

        let affected: Vec<String> = self
            .state()
            .individuals()
            .filter(|(id, info)| {
                block.new_individuals.iter().any(|n| n == id)
                    || block.amended_models.contains(&info.model)
            })
            .map(|(id, _)| id.to_string())
            .collect();
        self.sync_rules(&affected);
        self.cascade(creations)?;

        for (individual, property, value) in plan {
            let cause = self.creation_id(&individual);
            let seq = self.append_engine(&individual, &property, value, cause);
            self.cascade(vec![seq])?;
        }

        for individual in &affected {
            let mut rules: Vec<RuleId> = self
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| &r.host == individual)
                .map(|(i, _)| i)
                .collect();
            rules.sort_by_key(|r| self.rules[*r].event_index);
            let cause = self.creation_id(individual);
            for r in rules {
                if let Some(seq) = self.run_set_value(r, cause.clone(), None) {
                    self.cascade(vec![seq])?;
                }
            }
        }

        Ok(LoadReport {
            block_event,
            created: block.new_individuals,
            events: self.graph.events()[start..].to_vec(),
            warnings: block.warnings,
        })
    }

    /// Normalize and gate every initial assignment (and default) before
    /// anything is appended, so a rejected block leaves no trace.
    fn plan_assignments(
        &self,
        block: &ValidatedBlock,
    ) -> Result<Vec<(String, String, Value)>, InjectError> {
        let catalog = &block.catalog;
        let mut plan: Vec<(String, String, Value)> = Vec::new();
        for decl in &block.decls {
            let Declaration::Individual(d) = decl else {
                continue;
            };
            for a in &d.assignments {
                let value = catalog
                    .normalize(&a.property, Value::str(a.value.as_str()))
                    .map_err(|message| InjectError::InvalidValue {
                        property: a.property.clone(),
                        message,
                    })?;
                plan.push((d.name.clone(), a.property.clone(), value));
            }
        }
        for id in &block.new_individuals {
            let Some(model) = catalog.model_of(id) else {
                continue;
            };
            for ev in &model.events {
                let Some(default) = &ev.default else { continue };
                if plan.iter().any(|(i, p, _)| i == id && *p == ev.property) {
                    continue;
                }
                let v = eval(default, &EvalContext::new(self.state(), id)).unwrap_or_default();
                if let Ok(v) = catalog.normalize(&ev.property, v) {
                    plan.push((id.clone(), ev.property.clone(), v));
                }
            }
        }
        for (i, (individual, property, value)) in plan.iter().enumerate() {
            let Some(def) = catalog.slot_event(individual, property) else {
                return Err(InjectError::UnknownSlot {
                    individual: individual.clone(),
                    property: property.clone(),
                });
            };
            let earlier = plan[..i]
                .iter()
                .any(|(a, b, _)| a == individual && b == property);
            if def.immutable && (self.state().get(individual, property).is_some() || earlier) {
                return Err(InjectError::ImmutableViolation {
                    individual: individual.clone(),
                    property: property.clone(),
                });
            }
            if let Some(vc) = &def.value_condition {
                let ctx = EvalContext::new(self.state(), individual).with_value(value);
                if !eval(vc, &ctx).is_ok_and(|v| v.truthy()) {
                    return Err(InjectError::ValueConditionViolation {
                        individual: individual.clone(),
                        property: property.clone(),
                        value: value.to_string(),
                        condition: source_text(def, RestrictionKind::ValueCondition),
                    });
                }
            }
        }
        Ok(plan)
    }

    /// Instantiate SetValue rules for the given individuals and refresh the
    /// subscriptions of the ones that already exist.
    fn sync_rules(&mut self, individuals: &[String]) {
        for id in individuals {
            let Some(model) = self.catalog.model_of(id) else {
                continue;
            };
            let info = self.state().individual(id).cloned();
            let model_name = self.model_name(id);
            let targets: Vec<(usize, String)> = model
                .events
                .iter()
                .enumerate()
                .filter(|(_, e)| e.set_value.is_some())
                .map(|(i, e)| (i, e.property.clone()))
                .collect();
            for (event_index, property) in targets {
                let key = (id.clone(), property.clone());
                let rule = match self.rule_by_slot.get(&key) {
                    Some(r) => *r,
                    None => {
                        self.rules.push(Rule {
                            host: id.clone(),
                            property,
                            model: model_name.clone(),
                            event_index,
                            host_seq: info.as_ref().map_or(0, |i| i.created_seq),
                        });
                        let r = self.rules.len() - 1;
                        self.rule_by_slot.insert(key, r);
                        r
                    }
                };
                self.subscribe(rule);
            }
        }
    }

    fn subscribe(&mut self, rule: RuleId) {
        let r = &self.rules[rule];
        let deps = match self
            .catalog
            .slot_event(&r.host, &r.property)
            .and_then(|e| e.set_value.as_ref())
        {
            Some(expr) => dependencies(expr, &EvalContext::new(self.graph.state(), &r.host)),
            None => Default::default(),
        };
        self.subs.set(rule, deps);
    }

    // ---- injection ----

    pub fn inject(
        &mut self,
        actor: &str,
        individual: &str,
        property: &str,
        value: Value,
    ) -> Result<InjectReport, InjectError> {
        let unknown = || InjectError::UnknownSlot {
            individual: individual.to_string(),
            property: property.to_string(),
        };
        let cause = self.creation_id(individual).ok_or_else(unknown)?;
        let def = self
            .catalog
            .slot_event(individual, property)
            .ok_or_else(unknown)?
            .clone();
        let value = self.catalog.normalize(property, value).map_err(|message| {
            InjectError::InvalidValue {
                property: property.to_string(),
                message,
            }
        })?;

        if def.immutable && self.state().get(individual, property).is_some() {
            return Err(InjectError::ImmutableViolation {
                individual: individual.to_string(),
                property: property.to_string(),
            });
        }
        if let Some(cond) = &def.condition {
            self.counters.gate_evaluations += 1;
            let ok =
                eval(cond, &EvalContext::new(self.state(), individual)).is_ok_and(|v| v.truthy());
            if !ok {
                return Err(InjectError::ConditionNotMet {
                    individual: individual.to_string(),
                    property: property.to_string(),
                    condition: source_text(&def, RestrictionKind::Condition),
                });
            }
        }
        if let Some(vc) = &def.value_condition {
            self.counters.gate_evaluations += 1;
            let ctx = EvalContext::new(self.state(), individual).with_value(&value);
            if !eval(vc, &ctx).is_ok_and(|v| v.truthy()) {
                return Err(InjectError::ValueConditionViolation {
                    individual: individual.to_string(),
                    property: property.to_string(),
                    value: value.to_string(),
                    condition: source_text(&def, RestrictionKind::ValueCondition),
                });
            }
        }

        let model = self.model_name(individual);
        let event = self
            .graph
            .append(NewEvent {
                base: individual.to_string(),
                property: property.to_string(),
                value,
                model,
                cause: Some(cause),
                actor: actor.to_string(),
            })
            .expect("gated slot is declared")
            .clone();
        let derived = self.cascade(vec![event.seq])?;
        Ok(InjectReport {
            event,
            derived: derived.into_iter().map(|s| self.event(s).clone()).collect(),
        })
    }

    // ---- cascade ----

    /// Run subscribed rules for each seed and everything they derive,
    /// breadth first, until nothing changes.
    fn cascade(&mut self, seeds: Vec<u64>) -> Result<Vec<u64>, CascadeBudgetExceeded> {
        let mut queue: VecDeque<u64> = seeds.into();
        let mut derived = Vec::new();
        while let Some(seq) = queue.pop_front() {
            self.counters.triggers += 1;
            let ev = self.event(seq).clone();
            let mut rules: Vec<RuleId> = self
                .subs
                .lookup(&ev.base, &ev.property)
                .into_iter()
                .collect();
            rules.sort_by_key(|r| (self.rules[*r].host_seq, self.rules[*r].event_index, *r));
            let set_do = self
                .catalog
                .slot_event(&ev.base, &ev.property)
                .is_some_and(|e| e.set_do.is_some());
            self.trace.push(CascadeStep {
                trigger_seq: seq,
                state_seq: self.graph.last_seq(),
                rules: rules.clone(),
                set_do,
            });
            for r in rules {
                if let Some(s) = self.run_set_value(r, Some(ev.id.clone()), Some(seq)) {
                    queue.push_back(s);
                    derived.push(s);
                }
            }
            if set_do {
                for s in self.run_set_do(&ev) {
                    queue.push_back(s);
                    derived.push(s);
                }
            }
            if derived.len() > self.budget {
                return Err(CascadeBudgetExceeded { limit: self.budget });
            }
        }
        Ok(derived)
    }

    /// Re-evaluate one SetValue, resubscribe it, and append its new value
    /// if it changed.
    fn run_set_value(
        &mut self,
        rule: RuleId,
        cause: Option<String>,
        trigger: Option<u64>,
    ) -> Option<u64> {
        let Rule { host, property, .. } = self.rules[rule].clone();
        let expr = self
            .catalog
            .slot_event(&host, &property)?
            .set_value
            .clone()?;
        self.counters.rule_evaluations += 1;
        let ctx = EvalContext::new(self.graph.state(), &host);
        let result = eval(&expr, &ctx);
        let deps = dependencies(&expr, &ctx);
        self.subs.set(rule, deps);
        let value = match result {
            Ok(Value::Null) => return None,
            Ok(v) => v,
            Err(e) => {
                self.diagnose(
                    trigger,
                    &host,
                    &property,
                    RestrictionKind::SetValue,
                    e.to_string(),
                );
                return None;
            }
        };
        let value = match self.catalog.normalize(&property, value) {
            Ok(v) => v,
            Err(message) => {
                self.diagnose(
                    trigger,
                    &host,
                    &property,
                    RestrictionKind::SetValue,
                    message,
                );
                return None;
            }
        };
        if self.state().get(&host, &property) == Some(&value) {
            return None;
        }
        self.counters.derived_events += 1;
        Some(self.append_engine(&host, &property, value, cause))
    }

    /// Apply the SetDo on the trigger's slot if its guard passes.
    fn run_set_do(&mut self, trigger: &Event) -> Vec<u64> {
        let (base, property) = (trigger.base.as_str(), trigger.property.as_str());
        let Some(action) = self
            .catalog
            .slot_event(base, property)
            .and_then(|e| e.set_do.clone())
        else {
            return Vec::new();
        };
        self.counters.rule_evaluations += 1;
        let fail = |this: &mut Self, message: String| {
            this.diagnose(
                Some(trigger.seq),
                base,
                property,
                RestrictionKind::SetDo,
                message,
            );
            Vec::new()
        };

        let ctx = EvalContext::new(self.graph.state(), base).with_value(&trigger.value);
        if let Some(guard) = &action.guard {
            match eval(guard, &ctx) {
                Ok(v) if v.truthy() => {}
                Ok(_) => return Vec::new(),
                Err(e) => return fail(self, e.to_string()),
            }
        }
        let target = match eval(&action.target, &ctx) {
            Ok(Value::Ref(id)) => id,
            Ok(other) => return fail(self, format!("edit target {other} is not an individual")),
            Err(e) => return fail(self, e.to_string()),
        };
        let mut values = Vec::new();
        for (p, e) in &action.assignments {
            match eval(e, &ctx) {
                Ok(v) => values.push((p.clone(), v)),
                Err(e) => return fail(self, e.to_string()),
            }
        }

        let mut out = Vec::new();
        for (p, v) in values {
            let Some(def) = self.catalog.slot_event(&target, &p).cloned() else {
                fail(self, format!("`{target}` has no model event `{p}`"));
                continue;
            };
            let v = match self.catalog.normalize(&p, v) {
                Ok(v) => v,
                Err(message) => {
                    fail(self, message);
                    continue;
                }
            };
            let current = self.state().get(&target, &p);
            if def.immutable && current.is_some() {
                fail(self, format!("`{target}.{p}` is immutable and already set"));
                continue;
            }
            if current == Some(&v) {
                continue;
            }
            if let Some(vc) = &def.value_condition {
                let ok = eval(
                    vc,
                    &EvalContext::new(self.graph.state(), &target).with_value(&v),
                )
                .is_ok_and(|r| r.truthy());
                if !ok {
                    fail(
                        self,
                        format!("{v} violates the value condition of `{target}.{p}`"),
                    );
                    continue;
                }
            }
            self.counters.derived_events += 1;
            out.push(self.append_engine(&target, &p, v, Some(trigger.id.clone())));
        }
        out
    }

    // ---- actions ----

    /// Condition-gated attribute slots without a SetValue, with their
    /// current availability.
    pub fn available_actions(&mut self, individual: Option<&str>) -> Vec<ActionDescriptor> {
        let mut out = Vec::new();
        let hosts: Vec<(String, String)> = self
            .state()
            .individuals()
            .filter(|(id, _)| individual.is_none_or(|i| i == *id))
            .map(|(id, info)| (id.to_string(), info.model.clone()))
            .collect();
        for (id, model_name) in hosts {
            let Some(model) = self.catalog.models.get(&model_name) else {
                continue;
            };
            for ev in &model.events {
                let Some(cond) = &ev.condition else { continue };
                if ev.kind != PropKind::Attribute || ev.set_value.is_some() {
                    continue;
                }
                self.counters.gate_evaluations += 1;
                let available = eval(cond, &EvalContext::new(self.graph.state(), &id))
                    .is_ok_and(|v| v.truthy());
                out.push(ActionDescriptor {
                    individual: id.clone(),
                    property: ev.property.clone(),
                    model: model_name.clone(),
                    available,
                    data_type: self
                        .catalog
                        .properties
                        .get(&ev.property)
                        .and_then(|p| p.data_type),
                });
            }
        }
        out
    }
}

fn source_text(def: &bsl::EventDef, kind: RestrictionKind) -> String {
    def.source.get(&kind).cloned().unwrap_or_default()
}

#[cfg(test)]
mod tests;
