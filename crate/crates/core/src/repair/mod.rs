//! Single-node repair: projections, rebasing, alignment and rank checks.

mod align;
mod bandwidth;
pub mod exponents;
pub mod projection;
mod ranks;
mod rebase;
pub mod scheme;

pub use align::{
    canonical_helpers, choose_basis, plan_repair, prepare_setup, repair_node, repair_systematic, AlignedRepairPlan,
    AlignmentSetup, HelperDownload, RepairResult,
};
pub use bandwidth::{alignment_download_subsymbols, format_decimal, gamma_formula};
pub use ranks::{verify_repair_ranks, NodeRankCheck, RankReport};
pub use rebase::{rebase, RebasedView};
pub use scheme::{AlignmentScheme, PreparedRepair, RepairScheme};

use thiserror::Error;

use crate::code::CodeError;
use crate::field::FieldError;
use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("wrong helper set: {0}")]
    WrongHelperShape(String),
    #[error("singular basis: {0}")]
    SingularBasis(String),
    #[error("desired-signal rank {rank} below required {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("no block available from node {0}")]
    MissingBlock(usize),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("scheme {scheme} cannot repair this code: {reason}")]
    Unsupported { scheme: String, reason: String },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
