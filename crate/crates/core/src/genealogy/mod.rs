//! Ulam–Harris labels, the append-only event log, and Newick export.

mod label;
mod log;
mod newick;

use thiserror::Error;

pub use label::{is_ancestor, lcp, Label};
pub use log::{Event, EventLog, Lifespan, NodeId, PopulationSnapshot};
pub use newick::{format_significant, to_newick, TreeNode};

#[derive(Debug, Error)]
pub enum GenealogyError {
    #[error("`{0}` is not a valid label (expected dot-separated positive integers)")]
    BadLabel(String),
    #[error("individual `{0}` is not alive")]
    NotAlive(String),
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("event time {time} precedes previous event at {previous}")]
    TimeOrder { time: f64, previous: f64 },
    #[error("event time {0} is negative or not finite")]
    InvalidTime(f64),
    #[error("event log csv, line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
