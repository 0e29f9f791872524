use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bt::Extensions;

pub const LOCATIONS: [&str; 3] = ["Loc A", "Loc B", "Loc C"];

/// Scenario files bundled with the crate, in suite order.
pub const BUILTIN: &[(&str, &str)] = &[
    ("baseline", include_str!("../../scenarios/baseline.json")),
    (
        "battery_drop",
        include_str!("../../scenarios/battery_drop.json"),
    ),
    ("docking", include_str!("../../scenarios/docking.json")),
    ("hotload", include_str!("../../scenarios/hotload.json")),
    (
        "target_edit",
        include_str!("../../scenarios/target_edit.json"),
    ),
    ("idle", include_str!("../../scenarios/idle.json")),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Initial {
    pub robot: String,
    pub object: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Eo,
    Bt,
    #[default]
    Both,
}

impl EngineChoice {
    pub fn eo(self) -> bool {
        self != EngineChoice::Bt
    }

    pub fn bt(self) -> bool {
        self != EngineChoice::Eo
    }
}

/// A world change applied before the step with the same index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Perturbation {
    SetBattery {
        level: f64,
    },
    MoveTarget {
        to: String,
    },
    MoveObject {
        to: String,
    },
    /// Raw attribute write. The tree runner maps the handful of slots it
    /// mirrors and ignores the rest.
    InjectAttribute {
        individual: String,
        property: String,
        value: serde_json::Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timed {
    pub step: usize,
    #[serde(flatten)]
    pub perturbation: Perturbation,
}

/// An extension block loaded at a step instead of at start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagedLoad {
    pub step: usize,
    pub block: String,
}

fn default_max_steps() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub initial: Initial,
    #[serde(default)]
    pub extensions: Extensions,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub staged: Vec<StagedLoad>,
    #[serde(default)]
    pub perturbations: Vec<Timed>,
    /// Extra steps run after completion with no operator input.
    #[serde(default)]
    pub idle_steps: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl Scenario {
    pub fn new(name: impl Into<String>, robot: &str, object: &str, target: &str) -> Self {
        Scenario {
            name: name.into(),
            initial: Initial {
                robot: robot.into(),
                object: object.into(),
                target: target.into(),
            },
            extensions: Extensions::default(),
            engine: EngineChoice::Both,
            staged: Vec::new(),
            perturbations: Vec::new(),
            idle_steps: 0,
            max_steps: default_max_steps(),
        }
    }

    pub fn with_extensions(mut self, ext: Extensions) -> Self {
        self.extensions = ext;
        self
    }

    pub fn perturb(mut self, step: usize, perturbation: Perturbation) -> Self {
        self.perturbations.push(Timed { step, perturbation });
        self
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| HarnessError::Scenario(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Scenario(format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Scenario::from_json(text).expect("bundled scenario is valid"))
    }

    pub fn suite() -> Vec<Self> {
        BUILTIN
            .iter()
            .map(|(_, text)| Scenario::from_json(text).expect("bundled scenario is valid"))
            .collect()
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Scenario(format!("{}: {m}", self.name)));
        if self.perturbations.windows(2).any(|w| w[0].step > w[1].step) {
            return bad("perturbation steps must be nondecreasing".into());
        }
        if self.staged.windows(2).any(|w| w[0].step > w[1].step) {
            return bad("staged loads must be in step order".into());
        }
        for s in &self.staged {
            let enabled = match s.block.as_str() {
                "recharging" => self.extensions.recharge,
                "docking" => self.extensions.dock,
                other => return bad(format!("`{other}` is not an extension block")),
            };
            if !enabled {
                return bad(format!("staged block `{}` is not enabled", s.block));
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        Ok(())
    }

    /// Extensions in force at `step`, counting staged loads already applied.
    pub fn extensions_at(&self, step: usize) -> Extensions {
        let pending = |block: &str| {
            self.staged
                .iter()
                .any(|s| s.block == block && s.step > step)
        };
        Extensions {
            recharge: self.extensions.recharge && !pending("recharging"),
            dock: self.extensions.dock && !pending("docking"),
        }
    }

    /// Corpus blocks loaded before the first step.
    pub fn initial_blocks(&self) -> Vec<&'static str> {
        let ext = self.extensions_at(0);
        let staged_at_zero = |b: &str| self.staged.iter().any(|s| s.block == b && s.step == 0);
        let mut blocks = vec!["delivery"];
        if ext.recharge && !staged_at_zero("recharging") {
            blocks.push("recharging");
        }
        if ext.dock && !staged_at_zero("docking") {
            blocks.push("docking");
        }
        blocks
    }

    /// Last step that still has scheduled input.
    pub fn last_scheduled_step(&self) -> Option<usize> {
        self.perturbations
            .iter()
            .map(|p| p.step)
            .chain(self.staged.iter().map(|s| s.step))
            .max()
    }
}
