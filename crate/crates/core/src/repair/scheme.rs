//! Repair schemes, registered by name.

use std::sync::Arc;

use super::align::{check_helpers, plan_repair, AlignedRepairPlan, RepairResult};
use super::ranks::{verify_repair_ranks, RankReport};
use super::RepairError;
use crate::code::{BlockStore, CodeInstance};
use crate::registry::{Named, Registry};
use crate::scalar::Scalar42Scheme;

pub trait RepairScheme: Named + Send + Sync {
    fn supports(&self, code: &CodeInstance) -> bool;

    /// Per-node repair rank checks for `code`.
    fn verify(&self, code: &CodeInstance) -> RankReport;

    fn prepare(
        &self,
        code: &CodeInstance,
        failed: usize,
        helpers: &[usize],
    ) -> Result<Box<dyn PreparedRepair>, RepairError>;
}

/// A repair with all linear algebra done, runnable on any stripe.
pub trait PreparedRepair: Send + Sync {
    fn failed(&self) -> usize;
    fn helpers(&self) -> &[usize];
    fn execute(&self, store: &dyn BlockStore) -> Result<RepairResult, RepairError>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct AlignmentScheme;

impl Named for AlignmentScheme {
    fn name(&self) -> &'static str {
        "alignment"
    }
}

impl RepairScheme for AlignmentScheme {
    fn supports(&self, _code: &CodeInstance) -> bool {
        true
    }

    fn verify(&self, code: &CodeInstance) -> RankReport {
        verify_repair_ranks(code)
    }

    fn prepare(
        &self,
        code: &CodeInstance,
        failed: usize,
        helpers: &[usize],
    ) -> Result<Box<dyn PreparedRepair>, RepairError> {
        check_helpers(code, failed, helpers)?;
        Ok(Box::new(plan_repair(code, failed, helpers)?))
    }
}

impl PreparedRepair for AlignedRepairPlan {
    fn failed(&self) -> usize {
        AlignedRepairPlan::failed(self)
    }

    fn helpers(&self) -> &[usize] {
        AlignedRepairPlan::helpers(self)
    }

    fn execute(&self, store: &dyn BlockStore) -> Result<RepairResult, RepairError> {
        AlignedRepairPlan::execute(self, store)
    }
}

pub fn default_registry() -> Registry<dyn RepairScheme> {
    let mut reg: Registry<dyn RepairScheme> = Registry::new("repair scheme");
    reg.register(Arc::new(Scalar42Scheme));
    reg.register(Arc::new(AlignmentScheme));
    reg
}

/// First registered scheme that supports `code`.
pub fn select(code: &CodeInstance) -> Arc<dyn RepairScheme> {
    select_from(&default_registry(), code).expect("alignment supports every code")
}

pub fn select_from(reg: &Registry<dyn RepairScheme>, code: &CodeInstance) -> Option<Arc<dyn RepairScheme>> {
    reg.iter().find(|s| s.supports(code)).cloned()
}
