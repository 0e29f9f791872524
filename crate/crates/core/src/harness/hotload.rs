use serde::Serialize;

use super::eo_arm::EoSession;
use super::scenario::Scenario;
use super::{HarnessError, DELIVERY, ROBOT, SENSOR};
use crate::engine::ENGINE_ACTOR;
use crate::expr::Value;
use crate::graph::{LOAD_BLOCK, SYSTEM};

#[derive(Debug, Clone, Serialize)]
pub struct HotloadReport {
    pub checks: Vec<(String, bool)>,
}

impl HotloadReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Runs the staged schedule (delivery, then the recharging block with a
/// battery drop, then the docking block before the final put) and checks
/// that the graph was extended in place.
pub fn hotload_test() -> Result<HotloadReport, HarnessError> {
    let scenario = Scenario::builtin("hotload").expect("bundled hotload scenario");
    let mut session = EoSession::start(&scenario)?;
    let mut snapshots = Vec::new();
    let mut switched_on_drop = false;
    loop {
        let step = session.step_index();
        let staged_now = scenario.staged.iter().any(|s| s.step == step);
        if staged_now {
            snapshots.push(session.engine().export_log());
        }
        let before = session.engine().graph().len();
        let more = session.step()?;
        if scenario.perturbations.iter().any(|p| p.step == step) {
            // The task switch belongs to the write that lowered the battery,
            // before the operator acted in this step.
            let events = &session.engine().graph().events()[before..];
            let drop = events
                .iter()
                .position(|e| e.actor == SENSOR && e.property == "batteryLevel");
            switched_on_drop |= drop.is_some_and(|d| {
                events[d + 1..]
                    .iter()
                    .take_while(|e| e.actor == ENGINE_ACTOR)
                    .any(|e| {
                        e.base == ROBOT
                            && e.property == "task"
                            && e.value == Value::reference("Recharging")
                    })
            });
        }
        if !more {
            break;
        }
    }

    let engine = session.engine();
    let log = engine.export_log();
    let seqs: Vec<u64> = engine.graph().events().iter().map(|e| e.seq).collect();
    let blocks = engine
        .graph()
        .events()
        .iter()
        .filter(|e| e.base == SYSTEM && e.property == LOAD_BLOCK)
        .count();
    let checks = vec![
        (
            "seq strictly increasing from 1".to_string(),
            seqs.iter().enumerate().all(|(i, &s)| s == i as u64 + 1),
        ),
        (
            "earlier events kept across every load".to_string(),
            snapshots.len() == scenario.staged.len()
                && snapshots.iter().all(|snap| log.starts_with(snap.as_str())),
        ),
        (
            "one block event per load".to_string(),
            blocks == 1 + scenario.staged.len(),
        ),
        (
            "task switched in the battery drop cascade".to_string(),
            switched_on_drop,
        ),
        (
            "delivered".to_string(),
            engine.value(DELIVERY, "delivered").truthy(),
        ),
        (
            "robot ends at the dock".to_string(),
            engine.value(ROBOT, "location") == Value::reference("Loc Dock"),
        ),
    ];
    Ok(HotloadReport { checks })
}
