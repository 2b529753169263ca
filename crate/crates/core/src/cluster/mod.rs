//! Simulated storage cluster: ingestion, failure injection, repair,
//! data-collector reads and traffic accounting.

mod metrics;
pub mod packing;
pub mod policy;
mod sim;
mod trace;

pub use metrics::{metrics_report, EventTotals, MetricsReport, RepairMetric};
pub use packing::{IngestHeader, Packer, Radix, U16Le, HEADER_BYTES};
pub use policy::{ExplicitHelpers, HelperPolicy, HighestId, LowestId, ParityFirst};
pub use sim::{replay, Cluster, ClusterOptions, NodeState, NodeStatus, RepairOutcome};
pub use trace::{parse_trace, EventKind, TraceRecord, Transfer};

use thiserror::Error;

use crate::code::CodeError;
use crate::registry::UnknownName;
use crate::repair::RepairError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("field of size {q} cannot hold the {packer} packing")]
    FieldTooSmall { q: u64, packer: &'static str },
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("node {0} has already failed")]
    AlreadyFailed(usize),
    #[error("cannot fail node {requested} while node {failed} awaits repair")]
    DoubleFailure { failed: usize, requested: usize },
    #[error("no failed node to repair")]
    NoFailure,
    #[error("node {0} is not live")]
    NodeFailed(usize),
    #[error("bad node subset: {0}")]
    BadSubset(String),
    #[error("helper policy {policy} found only {available} live helpers, need {needed}")]
    NotEnoughHelpers {
        policy: &'static str,
        available: usize,
        needed: usize,
    },
    #[error("corrupt payload: {0}")]
    Corrupt(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error("replay diverged at epoch {epoch}: {detail}")]
    ReplayDivergence { epoch: u64, detail: String },
    #[error(transparent)]
    UnknownStrategy(#[from] UnknownName),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Code(#[from] CodeError),
}
