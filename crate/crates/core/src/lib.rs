//! Exact-repair MDS storage codes built by interference alignment over
//! prime fields, with a single-failure cluster simulator.

pub mod cluster;
pub mod code;
pub mod field;
pub mod linalg;
pub mod registry;
pub mod repair;
pub mod scalar;
pub mod subsets;

pub use code::{construct_code, describe_code, load_code, CodeError, CodeInstance, CodeParams};
pub use field::{FieldElement, PrimeField};
pub use num_rational::BigRational;
pub use repair::{gamma_formula, repair_node, repair_systematic, RepairError, RepairResult};
