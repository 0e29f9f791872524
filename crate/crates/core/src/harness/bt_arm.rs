use serde::{Deserialize, Serialize};

use super::metrics::{Arm, FinalState};
use super::scenario::{Perturbation, Scenario};
use super::{HarnessError, DELIVERY, ROBOT};
use crate::bt::{build_benchmark_tree, Blackboard, Extensions, Status, Tick, Tree};

/// One tick with the tree shape in force and the action it performed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub step: usize,
    pub extensions: Extensions,
    pub tick: Tick,
    pub acted: Option<String>,
}

/// Everything the metrics need from a tree run, serializable as a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtRun {
    pub scenario: String,
    pub ticks: Vec<TickRecord>,
    /// Steps whose world update pushed the battery below its minimum.
    pub battery_low_steps: Vec<usize>,
    pub idle: Vec<TickRecord>,
    pub final_bb: Blackboard,
}

impl BtRun {
    pub fn extensions(&self) -> Extensions {
        self.ticks.last().map(|t| t.extensions).unwrap_or_default()
    }

    pub fn final_state(&self) -> FinalState {
        let bb = &self.final_bb;
        FinalState {
            robot_loc: bb.robot_loc.clone(),
            object_loc: bb.object_loc.clone(),
            target_loc: bb.target_loc.clone(),
            delivered: bb.delivered,
            battery_level: self.extensions().recharge.then_some(bb.battery_level),
        }
    }
}

/// Ticks a tree through a scenario. Staged blocks swap in the extended
/// tree between ticks, the counterpart of a hot-load.
pub struct BtSession {
    scenario: Scenario,
    tree: Tree,
    ext: Extensions,
    bb: Blackboard,
    step: usize,
    run: BtRun,
}

impl BtSession {
    pub fn start(s: &Scenario) -> Self {
        let ext = s.extensions_at(0);
        let mut bb = Blackboard::new(&s.initial.robot, &s.initial.object, &s.initial.target);
        if s.extensions.dock {
            bb = bb.with_dock("Loc Dock");
        }
        BtSession {
            scenario: s.clone(),
            tree: build_benchmark_tree(ext),
            ext,
            run: BtRun {
                scenario: s.name.clone(),
                ticks: Vec::new(),
                battery_low_steps: Vec::new(),
                idle: Vec::new(),
                final_bb: bb.clone(),
            },
            bb,
            step: 0,
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn blackboard(&self) -> &Blackboard {
        &self.bb
    }

    fn world(&mut self) {
        let ext = self.scenario.extensions_at(self.step);
        if ext != self.ext {
            self.ext = ext;
            self.tree = build_benchmark_tree(ext);
        }
        let step = self.step;
        let due: Vec<Perturbation> = self
            .scenario
            .perturbations
            .iter()
            .filter(|p| p.step == step)
            .map(|p| p.perturbation.clone())
            .collect();
        for p in &due {
            let was_low = self.bb.battery_level < self.bb.battery_min;
            apply(&mut self.bb, p);
            if !was_low && self.bb.battery_level < self.bb.battery_min {
                self.run.battery_low_steps.push(step);
            }
        }
    }

    fn tick(&mut self) -> TickRecord {
        let tick = self.tree.tick(&mut self.bb);
        let acted = self
            .tree
            .acting_node(&tick)
            .map(|i| self.tree.label(i).to_string());
        TickRecord {
            step: self.step,
            extensions: self.ext,
            tick,
            acted,
        }
    }

    /// Applies the world update for the current step and ticks once.
    /// Returns false once the root succeeds with nothing left scheduled.
    pub fn step(&mut self) -> Result<bool, HarnessError> {
        if self.step >= self.scenario.max_steps {
            return Err(HarnessError::ScenarioStalled {
                arm: Arm::Bt,
                step: self.step,
                reason: "tick budget exhausted".into(),
            });
        }
        self.world();
        let record = self.tick();
        let success = record.tick.status == Status::Success;
        self.run.ticks.push(record);
        let pending = self
            .scenario
            .last_scheduled_step()
            .is_some_and(|last| last > self.step);
        self.step += 1;
        Ok(!(success && !pending))
    }

    pub fn idle_tick(&mut self) {
        let record = self.tick();
        self.run.idle.push(record);
    }

    pub fn finish(mut self) -> BtRun {
        self.run.final_bb = self.bb;
        self.run
    }
}

fn apply(bb: &mut Blackboard, p: &Perturbation) {
    match p {
        Perturbation::SetBattery { level } => bb.battery_level = *level,
        Perturbation::MoveTarget { to } => bb.target_loc = to.clone(),
        Perturbation::MoveObject { to } => {
            bb.object_loc = to.clone();
            bb.carrying = false;
        }
        Perturbation::InjectAttribute {
            individual,
            property,
            value,
        } => match (individual.as_str(), property.as_str(), value) {
            (ROBOT, "batteryLevel", v) if v.is_number() => {
                bb.battery_level = v.as_f64().unwrap_or(bb.battery_level)
            }
            (ROBOT, "location", serde_json::Value::String(s)) => bb.robot_loc = s.clone(),
            (DELIVERY, "targetLoc", serde_json::Value::String(s)) => bb.target_loc = s.clone(),
            (DELIVERY, "objectLoc", serde_json::Value::String(s)) => {
                bb.object_loc = s.clone();
                bb.carrying = false;
            }
            _ => {}
        },
    }
    bb.refresh();
}

pub fn run_bt(s: &Scenario) -> Result<BtRun, HarnessError> {
    let mut session = BtSession::start(s);
    while session.step()? {}
    for _ in 0..s.idle_steps {
        session.idle_tick();
    }
    Ok(session.finish())
}
