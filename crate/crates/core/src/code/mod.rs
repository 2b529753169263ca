//! Code parameters, random construction, encoding, decoding and MDS checks.

mod descriptor;
pub mod generator;
mod instance;
mod params;

pub use descriptor::{describe_code, load_code, load_code_with, DescriptorError, DESCRIPTOR_MAGIC, DESCRIPTOR_VERSION};
pub use generator::{CoefficientGenerator, DEFAULT_GENERATOR};
pub use instance::{
    construct_code, construct_with, BlockStore, CodeInstance, CodeOrigin, Decoder, InformationUnit, MdsReport,
    NodeRole, StoredBlock, SubsetCheck, VerificationSummary, MAX_ALPHA_SUB, MAX_ATTEMPTS,
};
pub use params::{cutset_point, derive_params, CodeParams, CutsetPoint, DerivedParams};

use thiserror::Error;

use crate::field::FieldError;
use crate::linalg::LinalgError;
use crate::registry::UnknownName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("code too large: {0}")]
    TooLarge(String),
    #[error("construction failed after {attempts} attempts; last failure: {reason}")]
    ConstructionFailed { attempts: u32, reason: String },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("encoding submatrix G[{parity},{unit}] has a zero diagonal entry")]
    ZeroCoefficient { parity: usize, unit: usize },
    #[error("malformed submatrix set: {0}")]
    Shape(String),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("bad node subset: {0}")]
    BadSubset(String),
    #[error("nodes {0:?} do not determine the source")]
    SingularSubset(Vec<usize>),
    #[error(transparent)]
    UnknownGenerator(#[from] UnknownName),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
