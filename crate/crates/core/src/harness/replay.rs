use serde::Serialize;

use crate::engine::{Engine, ENGINE_ACTOR};
use crate::graph::{Event, LOAD_BLOCK, SYSTEM};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReplayOutcome {
    Pass {
        events: usize,
    },
    /// First seq at which the regenerated log differs from the original.
    Diverged {
        seq: u64,
        expected: Option<String>,
        actual: Option<String>,
        reason: String,
    },
}

impl ReplayOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ReplayOutcome::Pass { .. })
    }
}

fn parse(log: &str) -> Result<Vec<Event>, ReplayOutcome> {
    log.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| ReplayOutcome::Diverged {
                seq: i as u64 + 1,
                expected: Some(line.to_string()),
                actual: None,
                reason: format!("unreadable line: {e}"),
            })
        })
        .collect()
}

/// Feeds the log's non-engine events into a fresh engine in order. Engine
/// events are left for the cascades to regenerate.
pub fn rebuild(log: &str) -> Result<Engine, ReplayOutcome> {
    let events = parse(log)?;
    let mut engine = Engine::new();
    for e in events.iter().filter(|e| e.actor != ENGINE_ACTOR) {
        let applied = if e.base == SYSTEM && e.property == LOAD_BLOCK {
            engine
                .load_source(&e.value.render(), &e.actor)
                .map(drop)
                .map_err(|err| err.to_string())
        } else {
            engine
                .inject(&e.actor, &e.base, &e.property, e.value.clone())
                .map(drop)
                .map_err(|err| err.to_string())
        };
        if let Err(reason) = applied {
            // Report an earlier mismatch in preference to the failure it caused.
            let regenerated = engine.export_log();
            if let Some(d) = first_difference(log, &regenerated, e.seq) {
                return Err(d);
            }
            return Err(ReplayOutcome::Diverged {
                seq: e.seq,
                expected: Some(serde_json::to_string(e).expect("events serialize")),
                actual: None,
                reason: format!("re-injection rejected: {reason}"),
            });
        }
    }
    Ok(engine)
}

fn first_difference(original: &str, regenerated: &str, before_seq: u64) -> Option<ReplayOutcome> {
    let a: Vec<&str> = original.lines().filter(|l| !l.trim().is_empty()).collect();
    let b: Vec<&str> = regenerated.lines().collect();
    let n = a
        .len()
        .max(b.len())
        .min(before_seq.saturating_sub(1) as usize);
    (0..n)
        .find(|&i| a.get(i) != b.get(i))
        .map(|i| ReplayOutcome::Diverged {
            seq: i as u64 + 1,
            expected: a.get(i).map(|s| s.to_string()),
            actual: b.get(i).map(|s| s.to_string()),
            reason: "regenerated event differs".into(),
        })
}

/// Replays `log` and requires the regenerated log to match it byte for byte.
pub fn replay_check(log: &str) -> ReplayOutcome {
    let engine = match rebuild(log) {
        Ok(e) => e,
        Err(d) => return d,
    };
    let regenerated = engine.export_log();
    if regenerated == log {
        return ReplayOutcome::Pass {
            events: engine.graph().len(),
        };
    }
    first_difference(log, &regenerated, u64::MAX).unwrap_or_else(|| ReplayOutcome::Diverged {
        seq: engine.graph().last_seq() + 1,
        expected: None,
        actual: None,
        reason: "logs differ outside event lines".into(),
    })
}
