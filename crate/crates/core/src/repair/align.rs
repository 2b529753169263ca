//! Interference-alignment repair of a single failed node.
//!
//! In basis coordinates the failed node is one of `k` "systematic" slots.
//! The other `k-1` basis nodes send their block projected on `Vbar`, the
//! remaining `d-k+1` helpers send theirs projected on `V`. Interference from
//! every non-failed slot inside a `V` projection equals one entry of that
//! slot's `Vbar` download, found by an exponent-increment lookup, so it is
//! subtracted exactly. What remains is a square system in the failed block.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::projection::{build_projection_sets, ProjectionSet};
use super::rebase::rebase;
use super::RepairError;
use crate::code::{BlockStore, CodeInstance, NodeRole, StoredBlock};
use crate::field::FieldElement;
use crate::linalg::{DiagonalMatrix, FieldMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelperDownload {
    pub node: usize,
    pub subsymbols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairResult {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub restored: StoredBlock,
    pub downloads: Vec<HelperDownload>,
    /// Subsymbols per unit of capacity (`m^N`).
    pub unit_subsymbols: usize,
}

impl RepairResult {
    pub fn total_subsymbols(&self) -> usize {
        self.downloads.iter().map(|d| d.subsymbols).sum()
    }

    /// Repair bandwidth in capacity units.
    pub fn gamma_measured(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.total_subsymbols()),
            BigInt::from(self.unit_subsymbols),
        )
    }
}

/// Checks the helper list and returns it sorted.
pub(crate) fn check_helpers(code: &CodeInstance, failed: usize, helpers: &[usize]) -> Result<Vec<usize>, RepairError> {
    code.node_role(failed).map_err(|_| RepairError::UnknownNode(failed))?;
    if helpers.len() != code.d() {
        return Err(RepairError::WrongHelperShape(format!(
            "need d = {} helpers, got {}",
            code.d(),
            helpers.len()
        )));
    }
    let mut sorted = helpers.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(RepairError::WrongHelperShape(format!(
            "duplicate helper in {helpers:?}"
        )));
    }
    if let Some(&bad) = sorted.iter().find(|&&h| h == 0 || h > code.n()) {
        return Err(RepairError::UnknownNode(bad));
    }
    if sorted.contains(&failed) {
        return Err(RepairError::WrongHelperShape(format!(
            "failed node {failed} cannot help repair itself"
        )));
    }
    Ok(sorted)
}

/// The default helper set for a node: the `d` lowest other ids.
pub fn canonical_helpers(code: &CodeInstance, failed: usize) -> Vec<usize> {
    (1..=code.n()).filter(|&n| n != failed).take(code.d()).collect()
}

/// Basis for repairing `failed`: the failed node plus the first `k-1`
/// helpers, systematic ids first, all in ascending order.
pub fn choose_basis(code: &CodeInstance, failed: usize, helpers: &[usize]) -> Vec<usize> {
    let mut ordered: Vec<usize> = helpers.to_vec();
    ordered.sort_by_key(|&h| (h > code.k(), h));
    let mut basis: Vec<usize> = ordered.into_iter().take(code.k() - 1).collect();
    basis.push(failed);
    basis.sort_unstable();
    basis
}

/// Everything needed to repair one node, before the desired system is
/// inverted. Rank verification inspects this directly.
#[derive(Debug, Clone)]
pub struct AlignmentSetup {
    failed: usize,
    role: NodeRole,
    failed_slot: usize,
    basis: Vec<usize>,
    helpers: Vec<usize>,
    basis_helpers: Vec<(usize, usize)>,
    parity_helpers: Vec<usize>,
    projection: ProjectionSet,
    /// Row `(a, c)`: `(G_f^(a) V[:, c])^t`.
    desired: FieldMatrix,
    k: usize,
}

impl AlignmentSetup {
    fn new(
        code: &CodeInstance,
        failed: usize,
        helpers: Vec<usize>,
        basis: Vec<usize>,
        parity_helpers: Vec<usize>,
        parity_coeffs: Vec<Vec<DiagonalMatrix>>,
    ) -> Result<Self, RepairError> {
        let field = code.field();
        let k = code.k();
        let dim = code.alpha_sub();
        let failed_slot = basis
            .iter()
            .position(|&b| b == failed)
            .expect("failed node is in basis");
        let basis_helpers = basis
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != failed_slot)
            .map(|(s, &n)| (n, s))
            .collect();

        // Generator order: (helper, interference slot), lexicographic.
        let generators: Vec<DiagonalMatrix> = parity_coeffs
            .iter()
            .flat_map(|coeffs| {
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s != failed_slot)
                    .map(|(_, g)| g.clone())
            })
            .collect();
        let m = u32::try_from(code.params().m).map_err(|_| RepairError::Dimension("m too large".into()))?;
        let projection = build_projection_sets(field, dim, generators, m)?;

        let v = projection.v();
        let rows = parity_coeffs.len() * v.cols();
        let mut desired = FieldMatrix::zeros(field, rows, dim);
        for (a, coeffs) in parity_coeffs.iter().enumerate() {
            let g = coeffs[failed_slot].entries();
            for c in 0..v.cols() {
                for (j, &gj) in g.iter().enumerate() {
                    desired.set(a * v.cols() + c, j, field.mul(gj, v.get(j, c)));
                }
            }
        }

        Ok(Self {
            failed,
            role: code.node_role(failed)?,
            failed_slot,
            basis,
            helpers,
            basis_helpers,
            parity_helpers,
            projection,
            desired,
            k,
        })
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    pub fn parity_helpers(&self) -> &[usize] {
        &self.parity_helpers
    }

    pub fn projection(&self) -> &ProjectionSet {
        &self.projection
    }

    /// The desired-signal matrix, one row per downloaded parity equation.
    pub fn desired(&self) -> &FieldMatrix {
        &self.desired
    }

    pub fn desired_rank(&self) -> usize {
        self.desired.rank()
    }

    pub fn required_rank(&self) -> usize {
        self.desired.cols()
    }

    fn generator_index(&self, helper_pos: usize, slot: usize) -> usize {
        let local = if slot > self.failed_slot { slot - 1 } else { slot };
        helper_pos * (self.k - 1) + local
    }

    pub fn into_plan(self) -> Result<AlignedRepairPlan, RepairError> {
        let solver = self.desired.inverse().map_err(|_| RepairError::RankDeficient {
            rank: self.desired.rank(),
            required: self.desired.cols(),
        })?;
        Ok(AlignedRepairPlan { setup: self, solver })
    }
}

/// A repair ready to run against node contents; reusable across stripes.
#[derive(Debug, Clone)]
pub struct AlignedRepairPlan {
    setup: AlignmentSetup,
    solver: FieldMatrix,
}

impl AlignedRepairPlan {
    pub fn setup(&self) -> &AlignmentSetup {
        &self.setup
    }

    pub fn failed(&self) -> usize {
        self.setup.failed
    }

    pub fn helpers(&self) -> &[usize] {
        &self.setup.helpers
    }

    /// What parity-like helper `node` transmits: `block^t V`.
    pub fn parity_payload(&self, block: &[FieldElement]) -> Result<Vec<FieldElement>, RepairError> {
        Ok(self.setup.projection.v().vec_mul(block)?)
    }

    /// What a basis helper transmits: `block^t Vbar`.
    pub fn basis_payload(&self, block: &[FieldElement]) -> Result<Vec<FieldElement>, RepairError> {
        Ok(self.setup.projection.vbar().vec_mul(block)?)
    }

    pub fn execute(&self, store: &dyn BlockStore) -> Result<RepairResult, RepairError> {
        let s = &self.setup;
        let field = s.desired.field();
        let fetch = |n: usize| store.block(n).ok_or(RepairError::MissingBlock(n));

        let basis_msgs: Vec<(usize, Vec<FieldElement>)> = s
            .basis_helpers
            .iter()
            .map(|&(n, slot)| Ok((slot, self.basis_payload(fetch(n)?)?)))
            .collect::<Result<_, RepairError>>()?;
        let parity_msgs: Vec<Vec<FieldElement>> = s
            .parity_helpers
            .iter()
            .map(|&n| self.parity_payload(fetch(n)?))
            .collect::<Result<_, _>>()?;

        let cols = s.projection.v().cols();
        let mut clean = Vec::with_capacity(parity_msgs.len() * cols);
        for (a, y) in parity_msgs.iter().enumerate() {
            for (c, &yc) in y.iter().enumerate() {
                let interference = basis_msgs.iter().fold(0, |acc, (slot, z)| {
                    let t = s.generator_index(a, *slot);
                    field.add(acc, z[s.projection.shifted_column(c, t)])
                });
                clean.push(field.sub(yc, interference));
            }
        }
        let data = self.solver.mul_vec(&clean)?;

        let mut downloads: Vec<HelperDownload> = basis_msgs
            .iter()
            .zip(&s.basis_helpers)
            .map(|((_, z), &(n, _))| HelperDownload {
                node: n,
                subsymbols: z.len(),
            })
            .chain(parity_msgs.iter().zip(&s.parity_helpers).map(|(y, &n)| HelperDownload {
                node: n,
                subsymbols: y.len(),
            }))
            .collect();
        downloads.sort_by_key(|d| d.node);

        Ok(RepairResult {
            failed: s.failed,
            helpers: s.helpers.clone(),
            restored: StoredBlock {
                node_id: s.failed,
                role: s.role,
                data,
            },
            downloads,
            unit_subsymbols: cols,
        })
    }
}

/// Builds the alignment setup for any failed node and helper set, rebasing
/// onto [`choose_basis`] coordinates.
pub fn prepare_setup(code: &CodeInstance, failed: usize, helpers: &[usize]) -> Result<AlignmentSetup, RepairError> {
    let helpers = check_helpers(code, failed, helpers)?;
    let basis = choose_basis(code, failed, &helpers);
    let parity_helpers: Vec<usize> = helpers.iter().copied().filter(|h| !basis.contains(h)).collect();
    let view = rebase(code, &basis)?;
    let coeffs = parity_helpers
        .iter()
        .map(|&h| {
            view.coefficients(h)
                .expect("non-basis node has primed coefficients")
                .to_vec()
        })
        .collect();
    AlignmentSetup::new(code, failed, helpers, basis, parity_helpers, coeffs)
}

pub fn plan_repair(code: &CodeInstance, failed: usize, helpers: &[usize]) -> Result<AlignedRepairPlan, RepairError> {
    prepare_setup(code, failed, helpers)?.into_plan()
}

/// Repairs systematic node `failed` from the other `k-1` systematic nodes
/// and `d-k+1` parity nodes, working directly with the original encoding
/// submatrices.
pub fn repair_systematic(
    code: &CodeInstance,
    failed: usize,
    helpers: &[usize],
    store: &dyn BlockStore,
) -> Result<RepairResult, RepairError> {
    let helpers = check_helpers(code, failed, helpers)?;
    if !matches!(code.node_role(failed)?, NodeRole::Systematic(_)) {
        return Err(RepairError::WrongHelperShape(format!(
            "node {failed} is not systematic"
        )));
    }
    let systematic = helpers.iter().filter(|&&h| h <= code.k()).count();
    if systematic != code.k() - 1 {
        return Err(RepairError::WrongHelperShape(format!(
            "need all {} other systematic nodes as helpers, got {systematic}",
            code.k() - 1
        )));
    }
    let basis: Vec<usize> = (1..=code.k()).collect();
    let parity_helpers: Vec<usize> = helpers.iter().copied().filter(|&h| h > code.k()).collect();
    let coeffs = parity_helpers
        .iter()
        .map(|&h| code.node_coefficients(h))
        .collect::<Result<Vec<_>, _>>()?;
    AlignmentSetup::new(code, failed, helpers, basis, parity_helpers, coeffs)?
        .into_plan()?
        .execute(store)
}

/// Repairs any node from any `d` helpers.
pub fn repair_node(
    code: &CodeInstance,
    failed: usize,
    helpers: &[usize],
    store: &dyn BlockStore,
) -> Result<RepairResult, RepairError> {
    plan_repair(code, failed, helpers)?.execute(store)
}
