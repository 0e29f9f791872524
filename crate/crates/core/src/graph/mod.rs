//! Append-only temporal event graph with an incrementally maintained
//! projection and a JSONL log format.

mod event;
mod projection;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use event::{event_id, Event, NewEvent};
pub use projection::{IndividualInfo, ProjectedState};

use crate::expr::MEMBERSHIP;

/// Pseudo-individual that owns block-load events.
pub const SYSTEM: &str = "$System";
/// Property of the event recording a loaded block's canonical text.
pub const LOAD_BLOCK: &str = "$LoadBlock";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("cause `{0}` is not in the graph")]
    DanglingCause(String),
    #[error("individual `{0}` already exists")]
    DuplicateIndividual(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("line {line}: {message}")]
    SchemaMismatch { line: usize, message: String },
    #[error("line {line}: seq {found} after {previous}")]
    NonMonotoneSeq {
        line: usize,
        previous: u64,
        found: u64,
    },
    #[error("line {line}: cause `{cause}` is not an earlier event")]
    DanglingCause { line: usize, cause: String },
    #[error("line {line}: id `{found}` does not match content (expected `{expected}`)")]
    IdMismatch {
        line: usize,
        found: String,
        expected: String,
    },
    #[error("line {line}: {source}")]
    Rejected { line: usize, source: GraphError },
}

#[derive(Debug, Clone, Default)]
pub struct EventGraph {
    events: Vec<Event>,
    by_id: HashMap<String, u64>,
    state: ProjectedState,
    /// Declared properties; `None` accepts any property.
    schema: Option<BTreeSet<String>>,
}

impl EventGraph {
    /// A graph that accepts any property name.
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph that rejects properties until they are declared.
    pub fn with_schema() -> Self {
        EventGraph {
            schema: Some(BTreeSet::new()),
            ..Self::default()
        }
    }

    pub fn declare_property(&mut self, name: impl Into<String>) {
        if let Some(schema) = &mut self.schema {
            schema.insert(name.into());
        }
    }

    pub fn append(&mut self, e: NewEvent) -> Result<&Event, GraphError> {
        let creating = e.property == MEMBERSHIP;
        let known = self.state.individual(&e.base).is_some();
        if creating && known {
            return Err(GraphError::DuplicateIndividual(e.base));
        }
        if !creating && !known && e.base != SYSTEM {
            return Err(GraphError::UnknownIndividual(e.base));
        }
        let reserved = e.property == MEMBERSHIP || e.property == LOAD_BLOCK;
        if let Some(schema) = &self.schema {
            if !reserved && !schema.contains(&e.property) {
                return Err(GraphError::UnknownProperty(e.property));
            }
        }
        if let Some(cause) = &e.cause {
            if !self.by_id.contains_key(cause) {
                return Err(GraphError::DanglingCause(cause.clone()));
            }
        }
        let seq = self.events.len() as u64 + 1;
        let id = event_id(seq, &e.base, &e.property, &e.value);
        Ok(self.push(Event {
            seq,
            id,
            base: e.base,
            property: e.property,
            value: e.value,
            model: e.model,
            cause: e.cause,
            actor: e.actor,
        }))
    }

    fn push(&mut self, e: Event) -> &Event {
        self.by_id.insert(e.id.clone(), e.seq);
        self.state.apply(&e);
        self.events.push(e);
        self.events.last().expect("just pushed")
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn get(&self, id: &str) -> Option<&Event> {
        self.by_id
            .get(id)
            .map(|seq| &self.events[*seq as usize - 1])
    }

    /// The live projection of the full log.
    pub fn state(&self) -> &ProjectedState {
        &self.state
    }

    /// Projection of the first `upto` events, recomputed from scratch.
    pub fn project(&self, upto: u64) -> ProjectedState {
        let n = (upto as usize).min(self.events.len());
        ProjectedState::fold(&self.events[..n])
    }

    pub fn history(
        &self,
        individual: &str,
        property: Option<&str>,
    ) -> Result<Vec<&Event>, GraphError> {
        if self.state.individual(individual).is_none() && individual != SYSTEM {
            return Err(GraphError::UnknownIndividual(individual.to_string()));
        }
        Ok(self
            .events
            .iter()
            .filter(|e| e.base == individual && property.is_none_or(|p| e.property == p))
            .collect())
    }

    /// One JSON object per line, in seq order.
    pub fn export_jsonl(&self) -> String {
        export_jsonl(&self.events)
    }

    /// Rebuild a schemaless graph from a log, checking seq continuity,
    /// ids and causes.
    pub fn import_jsonl(text: &str) -> Result<EventGraph, ImportError> {
        let mut g = EventGraph::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let e: Event =
                serde_json::from_str(raw).map_err(|err| ImportError::SchemaMismatch {
                    line,
                    message: err.to_string(),
                })?;
            let previous = g.last_seq();
            if e.seq != previous + 1 {
                return Err(ImportError::NonMonotoneSeq {
                    line,
                    previous,
                    found: e.seq,
                });
            }
            let expected = event_id(e.seq, &e.base, &e.property, &e.value);
            if e.id != expected {
                return Err(ImportError::IdMismatch {
                    line,
                    found: e.id,
                    expected,
                });
            }
            if let Some(cause) = &e.cause {
                if !g.by_id.contains_key(cause) {
                    return Err(ImportError::DanglingCause {
                        line,
                        cause: cause.clone(),
                    });
                }
            }
            let appended = g
                .append(NewEvent {
                    base: e.base.clone(),
                    property: e.property.clone(),
                    value: e.value.clone(),
                    model: e.model.clone(),
                    cause: e.cause.clone(),
                    actor: e.actor.clone(),
                })
                .map_err(|source| ImportError::Rejected { line, source })?;
            debug_assert_eq!(*appended, e);
        }
        Ok(g)
    }
}

pub fn export_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{StateView, Value};

    fn ev(base: &str, property: &str, value: Value, cause: Option<&str>) -> NewEvent {
        NewEvent {
            base: base.into(),
            property: property.into(),
            value,
            model: "M".into(),
            cause: cause.map(String::from),
            actor: "operator".into(),
        }
    }

    fn create(g: &mut EventGraph, id: &str) -> String {
        g.append(ev(id, MEMBERSHIP, Value::str("C"), None))
            .unwrap()
            .id
            .clone()
    }

    fn sample() -> EventGraph {
        let mut g = EventGraph::new();
        let r = create(&mut g, "Robot 1");
        create(&mut g, "Loc A");
        let first = g
            .append(ev(
                "Robot 1",
                "location",
                Value::reference("Loc A"),
                Some(&r),
            ))
            .unwrap()
            .id
            .clone();
        g.append(ev(
            "Robot 1",
            "batteryLevel",
            Value::Num(100.0),
            Some(&first),
        ))
        .unwrap();
        g.append(ev("Robot 1", "batteryLevel", Value::Num(15.0), Some(&r)))
            .unwrap();
        g
    }

    #[test]
    fn seqs_are_contiguous_and_causes_precede() {
        let g = sample();
        for (i, e) in g.events().iter().enumerate() {
            assert_eq!(e.seq, i as u64 + 1);
            if let Some(c) = &e.cause {
                assert!(g.get(c).unwrap().seq < e.seq);
            }
        }
    }

    #[test]
    fn repeated_assignment_keeps_history_and_latest_value() {
        let mut g = sample();
        let r = g.state().individual("Robot 1").unwrap().creation_id.clone();
        g.append(ev("Robot 1", "took", Value::Bool(true), Some(&r)))
            .unwrap();
        g.append(ev("Robot 1", "took", Value::Bool(true), Some(&r)))
            .unwrap();
        assert_eq!(g.history("Robot 1", Some("took")).unwrap().len(), 2);
        assert_eq!(g.state().value("Robot 1", "took"), Value::Bool(true));
        assert_eq!(g.state().value("Robot 1", "batteryLevel"), Value::Num(15.0));
    }

    #[test]
    fn append_preconditions() {
        let mut g = EventGraph::with_schema();
        assert_eq!(
            g.append(ev("Ghost", "location", Value::Null, None))
                .unwrap_err(),
            GraphError::UnknownIndividual("Ghost".into())
        );
        create(&mut g, "R");
        assert_eq!(
            g.append(ev("R", "location", Value::Null, None))
                .unwrap_err(),
            GraphError::UnknownProperty("location".into())
        );
        g.declare_property("location");
        assert_eq!(
            g.append(ev("R", "location", Value::Null, Some("nope")))
                .unwrap_err(),
            GraphError::DanglingCause("nope".into())
        );
        assert!(matches!(
            g.append(ev("R", MEMBERSHIP, Value::str("C"), None)),
            Err(GraphError::DuplicateIndividual(_))
        ));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn every_prefix_projection_matches_incremental_fold() {
        let g = sample();
        let mut incremental = ProjectedState::default();
        assert_eq!(g.project(0), incremental);
        for e in g.events() {
            incremental.apply(e);
            assert_eq!(g.project(e.seq), incremental);
        }
        assert_eq!(&incremental, g.state());
    }

    #[test]
    fn history_of_untouched_property_is_empty() {
        let g = sample();
        assert!(g.history("Robot 1", Some("dock")).unwrap().is_empty());
        assert!(g.history("Nobody", None).is_err());
        assert_eq!(g.history("Robot 1", None).unwrap().len(), 4);
    }

    #[test]
    fn export_import_round_trip() {
        let g = sample();
        let text = g.export_jsonl();
        let back = EventGraph::import_jsonl(&text).unwrap();
        assert_eq!(back.events(), g.events());
        assert_eq!(back.state(), g.state());
        assert_eq!(back.export_jsonl(), text);
        assert_eq!(EventGraph::new().export_jsonl(), "");
        assert!(EventGraph::import_jsonl("").unwrap().is_empty());
    }

    #[test]
    fn import_rejects_tampering() {
        let text = sample().export_jsonl();
        let lines: Vec<&str> = text.lines().collect();

        let mut dangling: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        let mut e: Event = serde_json::from_str(&dangling[3]).unwrap();
        e.cause = Some("ffffffffffff".into());
        dangling[3] = serde_json::to_string(&e).unwrap();
        assert!(matches!(
            EventGraph::import_jsonl(&dangling.join("\n")),
            Err(ImportError::DanglingCause { line: 4, .. })
        ));

        let skipped = [lines[0], lines[2]].join("\n");
        assert!(matches!(
            EventGraph::import_jsonl(&skipped),
            Err(ImportError::NonMonotoneSeq { line: 2, .. })
        ));

        let edited = text.replacen("\"Loc A\"}", "\"Loc B\"}", 1);
        assert!(matches!(
            EventGraph::import_jsonl(&edited),
            Err(ImportError::IdMismatch { .. })
        ));

        assert!(matches!(
            EventGraph::import_jsonl("{\"seq\":1}"),
            Err(ImportError::SchemaMismatch { line: 1, .. })
        ));
    }

    #[test]
    fn members_follow_creation_order() {
        let g = sample();
        assert_eq!(g.state().members("M"), ["Robot 1", "Loc A"]);
        assert!(g.state().members("Other").is_empty());
    }
}
