use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::generator::{ChaCha20V1, CoefficientGenerator};
use super::params::{derive_params, CodeParams, DerivedParams};
use super::CodeError;
use crate::field::{FieldElement, PrimeField};
use crate::linalg::{DiagBlockMatrix, DiagonalMatrix};
use crate::repair::scheme;
use crate::subsets::KSubsets;

/// Resampling bound for random construction.
pub const MAX_ATTEMPTS: u32 = 32;

/// Largest per-node subsymbol count accepted for construction. Repair solves
/// a dense `alpha_sub`-square system, so this keeps the work bounded.
pub const MAX_ALPHA_SUB: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    /// Stores information unit `l` (1-based) verbatim.
    Systematic(usize),
    /// Parity node `i` (1-based) storing `Σ_l G_l^(i) w_l`.
    Parity(usize),
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRole::Systematic(l) => write!(f, "systematic({l})"),
            NodeRole::Parity(i) => write!(f, "parity({i})"),
        }
    }
}

/// Where the diagonal entries came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeOrigin {
    Seeded { generator: String, seed: u64, attempt: u32 },
    Explicit,
}

/// Outcome of the MDS and repair-rank checks run when an instance is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationSummary {
    pub mds_passed: usize,
    pub mds_total: usize,
    pub repair_passed: usize,
    pub repair_total: usize,
    pub repair_scheme: String,
    /// First failing condition, if any.
    pub failure: Option<String>,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.mds_passed == self.mds_total && self.repair_passed == self.repair_total
    }
}

impl fmt::Display for VerificationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MDS {}/{}, repair-ranks {}/{}",
            self.mds_passed, self.mds_total, self.repair_passed, self.repair_total
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationUnit {
    /// 1-based unit index.
    pub index: usize,
    pub data: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredBlock {
    /// 1-based node id.
    pub node_id: usize,
    pub role: NodeRole,
    pub data: Vec<FieldElement>,
}

/// Read access to node contents by 1-based node id.
pub trait BlockStore {
    fn block(&self, node: usize) -> Option<&[FieldElement]>;
}

impl BlockStore for [StoredBlock] {
    fn block(&self, node: usize) -> Option<&[FieldElement]> {
        self.iter().find(|b| b.node_id == node).map(|b| b.data.as_slice())
    }
}

impl BlockStore for Vec<StoredBlock> {
    fn block(&self, node: usize) -> Option<&[FieldElement]> {
        self.as_slice().block(node)
    }
}

impl BlockStore for BTreeMap<usize, Vec<FieldElement>> {
    fn block(&self, node: usize) -> Option<&[FieldElement]> {
        self.get(&node).map(Vec::as_slice)
    }
}

/// A concrete code: parameters plus the diagonal encoding submatrices
/// `G_l^(i)` for parity `i` and unit `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeInstance {
    params: CodeParams,
    derived: DerivedParams,
    field: PrimeField,
    /// Indexed `(i-1)*k + (l-1)`.
    submatrices: Vec<DiagonalMatrix>,
    origin: CodeOrigin,
    verification: VerificationSummary,
}

impl CodeInstance {
    /// Assembles and verifies an instance from explicit submatrices,
    /// `submatrices[i-1][l-1] = G_l^(i)`.
    pub fn from_parts(
        params: CodeParams,
        origin: CodeOrigin,
        submatrices: Vec<Vec<DiagonalMatrix>>,
    ) -> Result<Self, CodeError> {
        let mut code = Self::unverified(params, origin, submatrices)?;
        code.verification = code.run_verification();
        Ok(code)
    }

    pub(crate) fn unverified(
        params: CodeParams,
        origin: CodeOrigin,
        submatrices: Vec<Vec<DiagonalMatrix>>,
    ) -> Result<Self, CodeError> {
        params.validate()?;
        let derived = derive_params(&params)?;
        if derived.alpha_sub > MAX_ALPHA_SUB {
            return Err(CodeError::TooLarge(format!(
                "alpha_sub = {} exceeds {MAX_ALPHA_SUB}",
                derived.alpha_sub
            )));
        }
        let field = PrimeField::new(params.q)?;
        if submatrices.len() != params.parity_count() {
            return Err(CodeError::Shape(format!(
                "expected {} parity rows, found {}",
                params.parity_count(),
                submatrices.len()
            )));
        }
        let mut flat = Vec::with_capacity(params.parity_count() * params.k);
        for (i, row) in submatrices.into_iter().enumerate() {
            if row.len() != params.k {
                return Err(CodeError::Shape(format!(
                    "parity {} has {} submatrices, expected {}",
                    i + 1,
                    row.len(),
                    params.k
                )));
            }
            for (l, g) in row.into_iter().enumerate() {
                if g.dim() != derived.alpha_sub || g.field() != field {
                    return Err(CodeError::Shape(format!(
                        "G[{},{}] has dimension {}, expected {}",
                        i + 1,
                        l + 1,
                        g.dim(),
                        derived.alpha_sub
                    )));
                }
                if !g.is_invertible() {
                    return Err(CodeError::ZeroCoefficient {
                        parity: i + 1,
                        unit: l + 1,
                    });
                }
                flat.push(g);
            }
        }
        Ok(Self {
            params,
            derived,
            field,
            submatrices: flat,
            origin,
            verification: VerificationSummary {
                mds_passed: 0,
                mds_total: 0,
                repair_passed: 0,
                repair_total: 0,
                repair_scheme: String::new(),
                failure: Some("not verified".into()),
            },
        })
    }

    fn run_verification(&self) -> VerificationSummary {
        let mds = self.verify_mds();
        let scheme = scheme::select(self);
        let ranks = scheme.verify(self);
        let failure = mds
            .subsets
            .iter()
            .find(|s| !s.passed)
            .map(|s| format!("MDS subset {:?} has rank {}/{}", s.nodes, s.rank, mds.required_rank))
            .or_else(|| ranks.first_failure());
        VerificationSummary {
            mds_passed: mds.passed_count(),
            mds_total: mds.subsets.len(),
            repair_passed: ranks.passed_count(),
            repair_total: ranks.nodes.len(),
            repair_scheme: scheme.name().to_string(),
            failure,
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn origin(&self) -> &CodeOrigin {
        &self.origin
    }

    pub fn verification(&self) -> &VerificationSummary {
        &self.verification
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn alpha_sub(&self) -> usize {
        self.derived.alpha_sub
    }

    /// `G_l^(i)`, both indices 1-based.
    pub fn submatrix(&self, parity: usize, unit: usize) -> &DiagonalMatrix {
        assert!((1..=self.params.parity_count()).contains(&parity) && (1..=self.k()).contains(&unit));
        &self.submatrices[(parity - 1) * self.k() + (unit - 1)]
    }

    pub fn submatrices(&self) -> impl Iterator<Item = ((usize, usize), &DiagonalMatrix)> {
        let k = self.k();
        self.submatrices
            .iter()
            .enumerate()
            .map(move |(idx, g)| ((idx / k + 1, idx % k + 1), g))
    }

    pub fn node_role(&self, node: usize) -> Result<NodeRole, CodeError> {
        match node {
            0 => Err(CodeError::UnknownNode(node)),
            l if l <= self.k() => Ok(NodeRole::Systematic(l)),
            p if p <= self.n() => Ok(NodeRole::Parity(p - self.k())),
            _ => Err(CodeError::UnknownNode(node)),
        }
    }

    /// The node's encoding row: `k` diagonal blocks mapping the information
    /// units to its stored block.
    pub fn node_coefficients(&self, node: usize) -> Result<Vec<DiagonalMatrix>, CodeError> {
        let dim = self.alpha_sub();
        Ok(match self.node_role(node)? {
            NodeRole::Systematic(l) => (1..=self.k())
                .map(|u| {
                    if u == l {
                        DiagonalMatrix::identity(self.field, dim)
                    } else {
                        DiagonalMatrix::zeros(self.field, dim)
                    }
                })
                .collect(),
            NodeRole::Parity(i) => (1..=self.k()).map(|l| self.submatrix(i, l).clone()).collect(),
        })
    }

    /// Stacks the encoding rows of `nodes` into a blocked composite matrix.
    pub fn composite(&self, nodes: &[usize]) -> Result<DiagBlockMatrix, CodeError> {
        let rows = nodes
            .iter()
            .map(|&n| self.node_coefficients(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DiagBlockMatrix::from_block_rows(self.field, self.alpha_sub(), &rows)?)
    }

    /// Encodes one stripe of `k` units (each `alpha_sub` long) into `n`
    /// node blocks.
    pub fn encode_stripe(&self, units: &[&[FieldElement]]) -> Result<Vec<Vec<FieldElement>>, CodeError> {
        let alpha = self.alpha_sub();
        if units.len() != self.k() {
            return Err(CodeError::LengthMismatch {
                expected: self.k(),
                found: units.len(),
            });
        }
        if let Some(bad) = units.iter().find(|u| u.len() != alpha) {
            return Err(CodeError::LengthMismatch {
                expected: alpha,
                found: bad.len(),
            });
        }
        let f = self.field;
        let mut out: Vec<Vec<FieldElement>> = units.iter().map(|u| u.to_vec()).collect();
        for i in 1..=self.params.parity_count() {
            let mut acc = vec![0; alpha];
            for (l, unit) in units.iter().enumerate() {
                let g = self.submatrix(i, l + 1).entries();
                for ((a, &gj), &wj) in acc.iter_mut().zip(g).zip(unit.iter()) {
                    *a = f.add(*a, f.mul(gj, wj));
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn encode(&self, units: &[InformationUnit]) -> Result<Vec<StoredBlock>, CodeError> {
        let mut ordered: Vec<&InformationUnit> = units.iter().collect();
        ordered.sort_by_key(|u| u.index);
        if ordered.iter().enumerate().any(|(i, u)| u.index != i + 1) {
            return Err(CodeError::BadSubset(format!("units must be indexed 1..={}", self.k())));
        }
        let slices: Vec<&[FieldElement]> = ordered.iter().map(|u| u.data.as_slice()).collect();
        let blocks = self.encode_stripe(&slices)?;
        blocks
            .into_iter()
            .enumerate()
            .map(|(i, data)| {
                Ok(StoredBlock {
                    node_id: i + 1,
                    role: self.node_role(i + 1)?,
                    data,
                })
            })
            .collect()
    }

    /// Checks every k-subset of nodes for a full-rank composite matrix.
    /// Subsets are reported in lexicographic order.
    pub fn verify_mds(&self) -> MdsReport {
        let subsets: Vec<Vec<usize>> = KSubsets::new(self.n(), self.k())
            .map(|s| s.into_iter().map(|i| i + 1).collect())
            .collect();
        let checks = subsets
            .into_par_iter()
            .map(|nodes| {
                let rank = self.composite(&nodes).map(|c| c.rank()).unwrap_or(0);
                SubsetCheck {
                    passed: rank == self.derived.total_sub,
                    nodes,
                    rank,
                }
            })
            .collect();
        MdsReport {
            required_rank: self.derived.total_sub,
            subsets: checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCheck {
    pub nodes: Vec<usize>,
    pub rank: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    pub required_rank: usize,
    pub subsets: Vec<SubsetCheck>,
}

impl MdsReport {
    pub fn passed_count(&self) -> usize {
        self.subsets.iter().filter(|s| s.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.subsets.iter().all(|s| s.passed)
    }
}

/// Reconstructs the information units from the blocks of `k` nodes.
#[derive(Debug, Clone)]
pub struct Decoder {
    nodes: Vec<usize>,
    inverse: DiagBlockMatrix,
}

impl Decoder {
    pub fn new(code: &CodeInstance, nodes: &[usize]) -> Result<Self, CodeError> {
        if nodes.len() != code.k() {
            return Err(CodeError::BadSubset(format!(
                "need {} nodes, got {}",
                code.k(),
                nodes.len()
            )));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != nodes.len() {
            return Err(CodeError::BadSubset(format!("duplicate node in {nodes:?}")));
        }
        let inverse = code
            .composite(nodes)?
            .inverse()
            .map_err(|_| CodeError::SingularSubset(nodes.to_vec()))?;
        Ok(Self {
            nodes: nodes.to_vec(),
            inverse,
        })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Decodes one stripe; `blocks[i]` belongs to `nodes()[i]`.
    pub fn decode(&self, blocks: &[&[FieldElement]]) -> Result<Vec<Vec<FieldElement>>, CodeError> {
        Ok(self.inverse.apply(blocks)?)
    }

    pub fn decode_from(&self, store: &dyn BlockStore) -> Result<Vec<Vec<FieldElement>>, CodeError> {
        let blocks = self
            .nodes
            .iter()
            .map(|&n| store.block(n).ok_or(CodeError::UnknownNode(n)))
            .collect::<Result<Vec<_>, _>>()?;
        self.decode(&blocks)
    }
}

fn draw_submatrices(
    params: &CodeParams,
    derived: &DerivedParams,
    field: PrimeField,
    generator: &dyn CoefficientGenerator,
    attempt: u32,
) -> Vec<Vec<DiagonalMatrix>> {
    let alpha = derived.alpha_sub;
    let k = params.k;
    let draws = generator.draw_nonzero(field, params.seed, attempt, params.parity_count() * k * alpha);
    draws
        .chunks(k * alpha)
        .map(|row| {
            row.chunks(alpha)
                .map(|d| DiagonalMatrix::new(field, d.to_vec()))
                .collect()
        })
        .collect()
}

/// Regenerates the submatrices for one specific attempt without retrying.
pub(crate) fn seeded_attempt(
    params: CodeParams,
    generator: &dyn CoefficientGenerator,
    attempt: u32,
) -> Result<CodeInstance, CodeError> {
    params.validate()?;
    let derived = derive_params(&params)?;
    if derived.alpha_sub > MAX_ALPHA_SUB {
        return Err(CodeError::TooLarge(format!(
            "alpha_sub = {} exceeds {MAX_ALPHA_SUB}",
            derived.alpha_sub
        )));
    }
    let field = PrimeField::new(params.q)?;
    let subs = draw_submatrices(&params, &derived, field, generator, attempt);
    let origin = CodeOrigin::Seeded {
        generator: generator.name().to_string(),
        seed: params.seed,
        attempt,
    };
    CodeInstance::from_parts(params, origin, subs)
}

/// Random construction with the default generator.
pub fn construct_code(params: CodeParams) -> Result<CodeInstance, CodeError> {
    construct_with(params, &ChaCha20V1)
}

/// Draws diagonal entries uniformly from the nonzero field elements,
/// verifies the MDS property and every repair rank condition, and resamples
/// with the next attempt index on failure.
pub fn construct_with(params: CodeParams, generator: &dyn CoefficientGenerator) -> Result<CodeInstance, CodeError> {
    let mut reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let code = seeded_attempt(params, generator, attempt)?;
        if code.verification.passed() {
            return Ok(code);
        }
        reason = code.verification.failure.clone().unwrap_or_default();
    }
    Err(CodeError::ConstructionFailed {
        attempts: MAX_ATTEMPTS,
        reason,
    })
}
