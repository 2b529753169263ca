use rayon::prelude::*;

use super::align::{canonical_helpers, prepare_setup};
use crate::code::CodeInstance;

/// Rank check for repairing one node from its canonical helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRankCheck {
    pub node: usize,
    pub helpers: Vec<usize>,
    pub basis: Vec<usize>,
    pub desired_rank: usize,
    pub required_rank: usize,
    /// Every interference direction lies in the span of `Vbar`.
    pub containment: bool,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankReport {
    pub nodes: Vec<NodeRankCheck>,
}

impl RankReport {
    pub fn passed_count(&self) -> usize {
        self.nodes.iter().filter(|c| c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.nodes.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<String> {
        self.nodes.iter().find(|c| !c.passed).map(|c| match &c.note {
            Some(note) => format!("repair of node {}: {note}", c.node),
            None => format!(
                "repair of node {} from {:?}: desired rank {}/{}",
                c.node, c.helpers, c.desired_rank, c.required_rank
            ),
        })
    }
}

/// Checks alignment repair of every node from its canonical helper set.
pub fn verify_repair_ranks(code: &CodeInstance) -> RankReport {
    let nodes = (1..=code.n())
        .into_par_iter()
        .map(|node| {
            let helpers = canonical_helpers(code, node);
            match prepare_setup(code, node, &helpers) {
                Ok(setup) => {
                    let desired_rank = setup.desired_rank();
                    let required_rank = setup.required_rank();
                    let containment = setup.projection().containment_holds();
                    NodeRankCheck {
                        node,
                        basis: setup.basis().to_vec(),
                        helpers,
                        desired_rank,
                        required_rank,
                        containment,
                        passed: containment && desired_rank == required_rank,
                        note: None,
                    }
                }
                Err(e) => NodeRankCheck {
                    node,
                    helpers,
                    basis: Vec::new(),
                    desired_rank: 0,
                    required_rank: code.alpha_sub(),
                    containment: false,
                    passed: false,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    RankReport { nodes }
}
