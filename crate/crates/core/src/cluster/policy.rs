//! Helper selection for a newcomer.

use std::sync::Arc;

use super::ClusterError;
use crate::code::CodeInstance;
use crate::registry::{Named, Registry};

pub trait HelperPolicy: Named + Send + Sync {
    /// Picks `d` helpers among `live` (ascending ids, failed node excluded).
    fn select(&self, code: &CodeInstance, failed: usize, live: &[usize]) -> Result<Vec<usize>, ClusterError>;
}

fn take(
    policy: &'static str,
    d: usize,
    ordered: impl Iterator<Item = usize>,
    available: usize,
) -> Result<Vec<usize>, ClusterError> {
    if available < d {
        return Err(ClusterError::NotEnoughHelpers {
            policy,
            available,
            needed: d,
        });
    }
    let mut out: Vec<usize> = ordered.take(d).collect();
    out.sort_unstable();
    Ok(out)
}

/// The `d` lowest live ids.
#[derive(Debug, Default, Clone, Copy)]
pub struct LowestId;

impl Named for LowestId {
    fn name(&self) -> &'static str {
        "lowest-id"
    }
}

impl HelperPolicy for LowestId {
    fn select(&self, code: &CodeInstance, _failed: usize, live: &[usize]) -> Result<Vec<usize>, ClusterError> {
        take(self.name(), code.d(), live.iter().copied(), live.len())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct HighestId;

impl Named for HighestId {
    fn name(&self) -> &'static str {
        "highest-id"
    }
}

impl HelperPolicy for HighestId {
    fn select(&self, code: &CodeInstance, _failed: usize, live: &[usize]) -> Result<Vec<usize>, ClusterError> {
        take(self.name(), code.d(), live.iter().rev().copied(), live.len())
    }
}

/// Parity nodes first, then systematic nodes, lowest ids first in each.
#[derive(Debug, Default, Clone, Copy)]
pub struct ParityFirst;

impl Named for ParityFirst {
    fn name(&self) -> &'static str {
        "parity-first"
    }
}

impl HelperPolicy for ParityFirst {
    fn select(&self, code: &CodeInstance, _failed: usize, live: &[usize]) -> Result<Vec<usize>, ClusterError> {
        let k = code.k();
        let ordered = live
            .iter()
            .filter(|&&n| n > k)
            .chain(live.iter().filter(|&&n| n <= k))
            .copied();
        take(self.name(), code.d(), ordered, live.len())
    }
}

/// A fixed helper list, used for exhaustive sweeps and trace replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitHelpers(pub Vec<usize>);

impl Named for ExplicitHelpers {
    fn name(&self) -> &'static str {
        "explicit"
    }
}

impl HelperPolicy for ExplicitHelpers {
    fn select(&self, code: &CodeInstance, failed: usize, live: &[usize]) -> Result<Vec<usize>, ClusterError> {
        for &h in &self.0 {
            if h == 0 || h > code.n() {
                return Err(ClusterError::UnknownNode(h));
            }
            if h == failed || !live.contains(&h) {
                return Err(ClusterError::NodeFailed(h));
            }
        }
        Ok(self.0.clone())
    }
}

pub fn default_registry() -> Registry<dyn HelperPolicy> {
    let mut reg: Registry<dyn HelperPolicy> = Registry::new("helper policy");
    reg.register(Arc::new(LowestId));
    reg.register(Arc::new(HighestId));
    reg.register(Arc::new(ParityFirst));
    reg
}
