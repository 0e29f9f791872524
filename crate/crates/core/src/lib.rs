pub mod bsl;
pub mod bt;
pub mod corpus;
pub mod engine;
pub mod expr;
pub mod graph;
pub mod harness;
pub mod server;
