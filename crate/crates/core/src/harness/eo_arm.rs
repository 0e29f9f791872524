use serde::Serialize;

use super::metrics::{eo_metrics, Arm, MetricsReport};
use super::scenario::{Perturbation, Scenario};
use super::{HarnessError, AUTO_OPERATOR, DELIVERY, OPERATOR, ROBOT, SENSOR};
use crate::corpus;
use crate::engine::{Engine, InjectError};
use crate::expr::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiredAction {
    pub step: usize,
    pub individual: String,
    pub property: String,
}

/// Drives an engine through a scenario one step at a time. A step either
/// fires one available action or, with nothing to do yet, waits.
#[derive(Debug, Clone)]
pub struct EoSession {
    engine: Engine,
    scenario: Scenario,
    step: usize,
    fired: Vec<FiredAction>,
    flags: Vec<String>,
}

impl EoSession {
    /// Loads the initial blocks and writes the initial locations.
    pub fn start(scenario: &Scenario) -> Result<Self, HarnessError> {
        let mut engine = Engine::new();
        for block in scenario.initial_blocks() {
            load(&mut engine, block)?;
        }
        let init = &scenario.initial;
        for (who, prop, to) in [
            (ROBOT, "location", &init.robot),
            (DELIVERY, "objectLoc", &init.object),
            (DELIVERY, "targetLoc", &init.target),
        ] {
            engine
                .inject(OPERATOR, who, prop, Value::reference(to.as_str()))
                .map_err(|source| HarnessError::Inject { step: 0, source })?;
        }
        Ok(EoSession {
            engine,
            scenario: scenario.clone(),
            step: 0,
            fired: Vec::new(),
            flags: Vec::new(),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn fired(&self) -> &[FiredAction] {
        &self.fired
    }

    /// Delivered, with no recharge pending.
    pub fn done(&self) -> bool {
        self.engine.value(DELIVERY, "delivered").truthy()
            && !self.engine.value(ROBOT, "batteryLow").truthy()
    }

    /// The individual whose actions the operator works on: the robot's
    /// current task, or the delivery when no task is set.
    pub fn focus(&self) -> String {
        match self.engine.value(ROBOT, "task") {
            Value::Ref(id) => id,
            _ => DELIVERY.to_string(),
        }
    }

    fn apply_scheduled(&mut self) -> Result<(), HarnessError> {
        let step = self.step;
        let loads: Vec<String> = self
            .scenario
            .staged
            .iter()
            .filter(|s| s.step == step)
            .map(|s| s.block.clone())
            .collect();
        for block in loads {
            load(&mut self.engine, &block)?;
        }
        let due: Vec<Perturbation> = self
            .scenario
            .perturbations
            .iter()
            .filter(|p| p.step == step)
            .map(|p| p.perturbation.clone())
            .collect();
        for p in due {
            perturb(&mut self.engine, &p)
                .map_err(|source| HarnessError::Inject { step, source })?;
        }
        Ok(())
    }

    fn pending_after(&self, step: usize) -> bool {
        self.scenario
            .last_scheduled_step()
            .is_some_and(|last| last > step)
    }

    /// Runs one step. Returns false once the scenario is complete.
    pub fn step(&mut self) -> Result<bool, HarnessError> {
        if self.step >= self.scenario.max_steps {
            return Err(self.stalled("step budget exhausted"));
        }
        self.apply_scheduled()?;
        let waiting = self.pending_after(self.step);
        if self.done() {
            if !waiting {
                return Ok(false);
            }
            self.step += 1;
            return Ok(true);
        }
        let focus = self.focus();
        let available: Vec<String> = self
            .engine
            .available_actions(Some(&focus))
            .into_iter()
            .filter(|a| a.available)
            .map(|a| a.property)
            .collect();
        match available.as_slice() {
            [] if waiting => {}
            [] => return Err(self.stalled(&format!("no action available on `{focus}`"))),
            [first, rest @ ..] => {
                if !rest.is_empty() {
                    self.flags.push(format!(
                        "step {}: {} actions available on `{focus}`",
                        self.step,
                        available.len()
                    ));
                }
                self.engine
                    .inject(AUTO_OPERATOR, &focus, first, Value::str("1"))
                    .map_err(|source| HarnessError::Inject {
                        step: self.step,
                        source,
                    })?;
                self.fired.push(FiredAction {
                    step: self.step,
                    individual: focus.clone(),
                    property: first.clone(),
                });
            }
        }
        self.step += 1;
        Ok(true)
    }

    fn stalled(&self, reason: &str) -> HarnessError {
        HarnessError::ScenarioStalled {
            arm: Arm::Eo,
            step: self.step,
            reason: reason.to_string(),
        }
    }
}

fn load(engine: &mut Engine, block: &str) -> Result<(), HarnessError> {
    let text = corpus::block(block)
        .ok_or_else(|| HarnessError::Scenario(format!("unknown block `{block}`")))?;
    engine
        .load_source(text, OPERATOR)
        .map(drop)
        .map_err(|source| HarnessError::Load {
            block: block.to_string(),
            source,
        })
}

fn perturb(engine: &mut Engine, p: &Perturbation) -> Result<(), InjectError> {
    match p {
        Perturbation::SetBattery { level } => {
            engine.inject(SENSOR, ROBOT, "batteryLevel", Value::Num(*level))
        }
        Perturbation::MoveTarget { to } => engine.inject(
            OPERATOR,
            DELIVERY,
            "targetLoc",
            Value::reference(to.as_str()),
        ),
        Perturbation::MoveObject { to } => engine.inject(
            OPERATOR,
            DELIVERY,
            "objectLoc",
            Value::reference(to.as_str()),
        ),
        Perturbation::InjectAttribute {
            individual,
            property,
            value,
        } => engine.inject(OPERATOR, individual, property, json_value(value)),
    }
    .map(drop)
}

fn json_value(v: &serde_json::Value) -> Value {
    match v {
        serde_json::Value::Bool(b) => Value::Bool(*b),
        serde_json::Value::Number(n) => Value::Num(n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::String(s) => Value::Str(s.clone()),
        serde_json::Value::Null => Value::Null,
        other => Value::Str(other.to_string()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EoRun {
    pub log: String,
    pub fired: Vec<FiredAction>,
    pub flags: Vec<String>,
    pub report: MetricsReport,
}

pub fn run_eo(s: &Scenario) -> Result<EoRun, HarnessError> {
    let mut session = EoSession::start(s)?;
    while session.step()? {}
    let log = session.engine.export_log();
    let report = eo_metrics(&s.name, &log, s.idle_steps)?;
    Ok(EoRun {
        log,
        fired: session.fired,
        flags: session.flags,
        report,
    })
}
