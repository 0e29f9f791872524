use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::expr::Value;

/// An immutable record of one change. Field order is the log's column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub seq: u64,
    pub id: String,
    pub base: String,
    pub property: String,
    pub value: Value,
    pub model: String,
    pub cause: Option<String>,
    pub actor: String,
}

/// An event before the graph assigns its `seq` and `id`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewEvent {
    pub base: String,
    pub property: String,
    pub value: Value,
    pub model: String,
    pub cause: Option<String>,
    pub actor: String,
}

/// 12 hex digits of SHA-256 over seq, base, property and the value's
/// canonical JSON, separated by NUL.
pub fn event_id(seq: u64, base: &str, property: &str, value: &Value) -> String {
    let mut h = Sha256::new();
    h.update(seq.to_string().as_bytes());
    for part in [base, property] {
        h.update([0u8]);
        h.update(part.as_bytes());
    }
    h.update([0u8]);
    h.update(serde_json::to_string(value).unwrap_or_default().as_bytes());
    h.finalize()[..6]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
