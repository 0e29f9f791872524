//! The benchmark model blocks, embedded.

/// View vocabulary every engine starts with.
pub const PRELUDE: &str = include_str!("../corpus/prelude.bsl");
pub const DELIVERY: &str = include_str!("../corpus/delivery.bsl");
pub const RECHARGING: &str = include_str!("../corpus/recharging.bsl");
pub const DOCKING: &str = include_str!("../corpus/docking.bsl");

/// Look a block up by its short name.
pub fn block(name: &str) -> Option<&'static str> {
    match name {
        "prelude" => Some(PRELUDE),
        "delivery" => Some(DELIVERY),
        "recharging" => Some(RECHARGING),
        "docking" => Some(DOCKING),
        _ => None,
    }
}
