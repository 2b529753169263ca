//! The fixed (4,2) scalar code over GF(5).
//!
//! Node 1 stores `a`, node 2 stores `b`, node 3 stores `A1 a + B1 b` and
//! node 4 stores `A2 a + B2 b`, with `A1 = diag(1,2)`, `A2 = diag(2,1)` and
//! `B1 = B2 = I`. Each survivor sends a single symbol during repair.

use std::sync::OnceLock;

use thiserror::Error;

use crate::code::{BlockStore, CodeInstance, CodeOrigin, CodeParams, NodeRole, StoredBlock};
use crate::field::{FieldElement, PrimeField};
use crate::linalg::{DiagonalMatrix, FieldMatrix};
use crate::registry::Named;
use crate::repair::{
    rebase, HelperDownload, NodeRankCheck, PreparedRepair, RankReport, RepairError, RepairResult, RepairScheme,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("node {0} does not exist in the (4,2) code")]
    UnknownNode(usize),
    #[error("survivor {0} did not provide its block")]
    MissingSurvivor(usize),
    #[error("repair system for node {0} is singular")]
    Singular(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar42Code {
    field: PrimeField,
    pub a1: DiagonalMatrix,
    pub b1: DiagonalMatrix,
    pub a2: DiagonalMatrix,
    pub b2: DiagonalMatrix,
    pub v: Vec<FieldElement>,
}

impl Default for Scalar42Code {
    fn default() -> Self {
        Self::new()
    }
}

impl Scalar42Code {
    pub fn new() -> Self {
        let field = PrimeField::new(5).expect("5 is prime");
        let d = |x: u64, y: u64| DiagonalMatrix::new(field, vec![x, y]);
        Self {
            field,
            a1: d(1, 2),
            b1: d(1, 1),
            a2: d(2, 1),
            b2: d(1, 1),
            v: vec![1, 1],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn params() -> CodeParams {
        CodeParams::new(4, 2, 3, 1, 5, 0)
    }

    fn pair_rank(&self, x: &DiagonalMatrix, y: &DiagonalMatrix) -> usize {
        let cols = [x.apply(&self.v).expect("dim 2"), y.apply(&self.v).expect("dim 2")];
        FieldMatrix::from_columns(self.field, 2, &cols).expect("2x2").rank()
    }

    /// `rank[A1 B1^-1 v, A2 B2^-1 v]`, the condition for repairing node 1.
    pub fn eq_42_1_rank(&self) -> usize {
        let prod = |x: &DiagonalMatrix, y: &DiagonalMatrix| x.mul(&y.inverse().expect("invertible")).expect("dim 2");
        self.pair_rank(&prod(&self.a1, &self.b1), &prod(&self.a2, &self.b2))
    }

    /// `rank[B1 A1^-1 v, B2 A2^-1 v]`, the condition for repairing node 2.
    pub fn eq_42_2_rank(&self) -> usize {
        let prod = |x: &DiagonalMatrix, y: &DiagonalMatrix| x.mul(&y.inverse().expect("invertible")).expect("dim 2");
        self.pair_rank(&prod(&self.b1, &self.a1), &prod(&self.b2, &self.a2))
    }

    /// Submatrices in `CodeInstance` layout.
    pub fn submatrices(&self) -> Vec<Vec<DiagonalMatrix>> {
        vec![
            vec![self.a1.clone(), self.b1.clone()],
            vec![self.a2.clone(), self.b2.clone()],
        ]
    }

    /// Whether `code` is exactly this scalar code.
    pub fn is_embedding(&self, code: &CodeInstance) -> bool {
        let p = code.params();
        let want = Self::params();
        (p.n, p.k, p.d, p.m, p.q) == (want.n, want.k, want.d, want.m, want.q)
            && code
                .submatrices()
                .zip(self.submatrices().into_iter().flatten())
                .all(|((_, g), want)| *g == want)
    }
}

/// The scalar code and its embedding as a verified [`CodeInstance`].
pub fn build_42() -> (Scalar42Code, CodeInstance) {
    let scalar = Scalar42Code::new();
    let code = CodeInstance::from_parts(Scalar42Code::params(), CodeOrigin::Explicit, scalar.submatrices())
        .expect("fixed scalar code is well formed");
    (scalar, code)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarRepair {
    /// `(node, symbol)` in ascending node order.
    pub downloads: Vec<(usize, FieldElement)>,
    pub restored: Vec<FieldElement>,
}

/// Single-symbol repair plan for one node.
///
/// Systematic nodes are repaired directly. Parity nodes are repaired in the
/// primed coordinates where nodes 3 and 4 hold the information, so the
/// systematic nodes play the parity role; the procedure is identical.
#[derive(Debug, Clone)]
pub struct ScalarPlan {
    failed: usize,
    role: NodeRole,
    partner: usize,
    helpers: Vec<usize>,
    /// `(node, u_h)` for the two parity-like helpers.
    projections: Vec<(usize, Vec<FieldElement>)>,
    v: Vec<FieldElement>,
    solver: FieldMatrix,
    field: PrimeField,
}

fn partner_of(failed: usize) -> usize {
    match failed {
        1 => 2,
        2 => 1,
        3 => 4,
        _ => 3,
    }
}

impl ScalarPlan {
    fn build(code: &CodeInstance, v: &[FieldElement], failed: usize) -> Result<(Self, usize, bool), ScalarError> {
        if !(1..=4).contains(&failed) {
            return Err(ScalarError::UnknownNode(failed));
        }
        let field = code.field();
        let partner = partner_of(failed);
        let basis = if failed < partner {
            [failed, partner]
        } else {
            [partner, failed]
        };
        let (f_slot, o_slot) = if failed < partner { (0, 1) } else { (1, 0) };
        let view = rebase(code, &basis).map_err(|_| ScalarError::Singular(failed))?;
        let mut projections = Vec::new();
        let mut rows = Vec::new();
        let mut aligned = true;
        for node in (1..=4).filter(|n| !basis.contains(n)) {
            let coeffs = view.coefficients(node).expect("non-basis node");
            let u = match coeffs[o_slot].inverse() {
                Ok(inv) => inv.apply(v).expect("dim 2"),
                Err(_) => {
                    aligned = false;
                    v.to_vec()
                }
            };
            rows.push(coeffs[f_slot].apply(&u).expect("dim 2"));
            projections.push((node, u));
        }
        let desired = FieldMatrix::from_rows(field, &rows).expect("2x2");
        let rank = desired.rank();
        let solver = desired.inverse().unwrap_or_else(|_| FieldMatrix::zeros(field, 2, 2));
        let plan = Self {
            failed,
            role: code.node_role(failed).expect("node exists"),
            partner,
            helpers: (1..=4).filter(|&n| n != failed).collect(),
            projections,
            v: v.to_vec(),
            solver,
            field,
        };
        Ok((plan, rank, aligned))
    }

    fn run(&self, store: &dyn BlockStore) -> Result<ScalarRepair, ScalarError> {
        let f = self.field;
        let fetch = |n: usize| store.block(n).ok_or(ScalarError::MissingSurvivor(n));
        let z = f.dot(fetch(self.partner)?, &self.v);
        let mut downloads = vec![(self.partner, z)];
        let mut clean = Vec::new();
        for (node, u) in &self.projections {
            let y = f.dot(fetch(*node)?, u);
            downloads.push((*node, y));
            clean.push(f.sub(y, z));
        }
        downloads.sort_unstable();
        let restored = self.solver.mul_vec(&clean).expect("2x2");
        Ok(ScalarRepair { downloads, restored })
    }
}

fn checked_plan(failed: usize) -> Result<ScalarPlan, ScalarError> {
    static EMBEDDED: OnceLock<(Scalar42Code, CodeInstance)> = OnceLock::new();
    let (scalar, code) = EMBEDDED.get_or_init(build_42);
    let (plan, rank, aligned) = ScalarPlan::build(code, &scalar.v, failed)?;
    if rank < 2 || !aligned {
        return Err(ScalarError::Singular(failed));
    }
    Ok(plan)
}

/// Repairs `failed` from the three survivors of the fixed code.
pub fn repair_42(failed: usize, survivors: &dyn BlockStore) -> Result<ScalarRepair, ScalarError> {
    checked_plan(failed)?.run(survivors)
}

/// Repair scheme wrapping the single-symbol procedure.
#[derive(Debug, Default, Clone, Copy)]
pub struct Scalar42Scheme;

impl Named for Scalar42Scheme {
    fn name(&self) -> &'static str {
        "scalar42"
    }
}

impl PreparedRepair for ScalarPlan {
    fn failed(&self) -> usize {
        self.failed
    }

    fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    fn execute(&self, store: &dyn BlockStore) -> Result<RepairResult, RepairError> {
        let out = self.run(store).map_err(|e| match e {
            ScalarError::MissingSurvivor(n) => RepairError::MissingBlock(n),
            ScalarError::UnknownNode(n) => RepairError::UnknownNode(n),
            ScalarError::Singular(_) => RepairError::RankDeficient { rank: 1, required: 2 },
        })?;
        Ok(RepairResult {
            failed: self.failed,
            helpers: self.helpers.clone(),
            restored: StoredBlock {
                node_id: self.failed,
                role: self.role,
                data: out.restored,
            },
            downloads: out
                .downloads
                .iter()
                .map(|&(node, _)| HelperDownload { node, subsymbols: 1 })
                .collect(),
            unit_subsymbols: 1,
        })
    }
}

impl RepairScheme for Scalar42Scheme {
    fn supports(&self, code: &CodeInstance) -> bool {
        Scalar42Code::new().is_embedding(code)
    }

    fn verify(&self, code: &CodeInstance) -> RankReport {
        let v = Scalar42Code::new().v;
        let nodes = (1..=4)
            .map(|node| {
                let helpers: Vec<usize> = (1..=4).filter(|&n| n != node).collect();
                let basis = {
                    let mut b = vec![node, partner_of(node)];
                    b.sort_unstable();
                    b
                };
                match ScalarPlan::build(code, &v, node) {
                    Ok((_, rank, aligned)) => NodeRankCheck {
                        node,
                        helpers,
                        basis,
                        desired_rank: rank,
                        required_rank: 2,
                        containment: aligned,
                        passed: aligned && rank == 2,
                        note: None,
                    },
                    Err(e) => NodeRankCheck {
                        node,
                        helpers,
                        basis,
                        desired_rank: 0,
                        required_rank: 2,
                        containment: false,
                        passed: false,
                        note: Some(e.to_string()),
                    },
                }
            })
            .collect();
        RankReport { nodes }
    }

    fn prepare(
        &self,
        code: &CodeInstance,
        failed: usize,
        helpers: &[usize],
    ) -> Result<Box<dyn PreparedRepair>, RepairError> {
        if !self.supports(code) {
            return Err(RepairError::Unsupported {
                scheme: self.name().into(),
                reason: "only the fixed (4,2) GF(5) code".into(),
            });
        }
        code.node_role(failed).map_err(|_| RepairError::UnknownNode(failed))?;
        let mut sorted = helpers.to_vec();
        sorted.sort_unstable();
        let want: Vec<usize> = (1..=4).filter(|&n| n != failed).collect();
        if sorted != want {
            return Err(RepairError::WrongHelperShape(format!(
                "the (4,2) code repairs node {failed} from {want:?}, got {helpers:?}"
            )));
        }
        let (plan, rank, aligned) =
            ScalarPlan::build(code, &Scalar42Code::new().v, failed).map_err(|_| RepairError::UnknownNode(failed))?;
        if rank < 2 || !aligned {
            return Err(RepairError::RankDeficient { rank, required: 2 });
        }
        Ok(Box::new(plan))
    }
}
