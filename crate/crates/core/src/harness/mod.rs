//! Scenario runner for both arms, metrics, replay and hot-load checks.

mod bt_arm;
mod eo_arm;
mod hotload;
mod metrics;
mod replay;
mod scenario;

pub use bt_arm::{run_bt, BtRun, BtSession, TickRecord};
pub use eo_arm::{run_eo, EoRun, EoSession, FiredAction};
pub use hotload::{hotload_test, HotloadReport};
pub use metrics::{
    bt_metrics, count_elements, eo_metrics, Arm, Elements, FinalState, IdleMetrics, MetricsReport,
    ModelCount, PUBLISHED_NODE_RANGE,
};
pub use replay::{rebuild, replay_check, ReplayOutcome};
pub use scenario::{
    EngineChoice, Initial, Perturbation, Scenario, StagedLoad, Timed, BUILTIN, LOCATIONS,
};

use serde::Serialize;
use thiserror::Error;

use crate::bt::Extensions;
use crate::engine::{InjectError, LoadError};

pub const ROBOT: &str = "Robot 1";
pub const DELIVERY: &str = "Delivery 1";
/// Actor of actions fired by the auto-operator.
pub const AUTO_OPERATOR: &str = "auto-operator";
/// Actor of setup writes and location edits.
pub const OPERATOR: &str = "operator";
/// Actor of battery readings.
pub const SENSOR: &str = "sensor";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{arm:?} stalled at step {step}: {reason}")]
    ScenarioStalled {
        arm: Arm,
        step: usize,
        reason: String,
    },
    #[error("loading `{block}` failed: {source}")]
    Load { block: String, source: LoadError },
    #[error("step {step}: {source}")]
    Inject { step: usize, source: InjectError },
    #[error("replay diverged: {0:?}")]
    Replay(ReplayOutcome),
}

/// Both arms' results for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub eo: Option<EoRun>,
    pub bt: Option<BtRun>,
    pub reports: Vec<MetricsReport>,
    /// Final states agree, when both arms ran.
    pub agree: Option<bool>,
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutcome, HarnessError> {
    s.check()?;
    let mut reports = Vec::new();
    let eo = if s.engine.eo() {
        let run = run_eo(s)?;
        reports.push(run.report.clone());
        Some(run)
    } else {
        None
    };
    let bt = if s.engine.bt() {
        let run = run_bt(s)?;
        reports.push(bt_metrics(&run));
        Some(run)
    } else {
        None
    };
    let agree = match (&eo, &bt) {
        (Some(e), Some(b)) => Some(e.report.final_state == b.final_state()),
        _ => None,
    };
    Ok(ScenarioOutcome {
        scenario: s.name.clone(),
        eo,
        bt,
        reports,
        agree,
    })
}

/// One row of the initial-configuration sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub initial: Initial,
    pub eo_actions: usize,
    pub bt_ticks: usize,
    pub eo: FinalState,
    pub bt: FinalState,
}

impl SweepRow {
    pub fn agree(&self) -> bool {
        self.eo == self.bt
    }
}

/// Runs every robot/object/target assignment over [`LOCATIONS`].
pub fn sweep(ext: Extensions) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::new();
    for robot in LOCATIONS {
        for object in LOCATIONS {
            for target in LOCATIONS {
                let s = Scenario::new(
                    format!("sweep {robot}/{object}/{target}"),
                    robot,
                    object,
                    target,
                )
                .with_extensions(ext);
                let eo = run_eo(&s)?;
                let bt = run_bt(&s)?;
                rows.push(SweepRow {
                    initial: s.initial.clone(),
                    eo_actions: eo.report.steps,
                    bt_ticks: bt.ticks.len(),
                    eo: eo.report.final_state.clone(),
                    bt: bt.final_state(),
                });
            }
        }
    }
    Ok(rows)
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests;
