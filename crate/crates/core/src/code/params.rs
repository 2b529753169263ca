use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::CodeError;
use crate::field::is_prime;

/// User-facing code parameters.
///
/// `n` nodes, the first `k` systematic; a failed node is repaired from `d`
/// helpers; every stored symbol is split into `m^N` subsymbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub q: u64,
    pub seed: u64,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize, m: usize, q: u64, seed: u64) -> Self {
        Self { n, k, d, m, q, seed }
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        check_nkd(self.n, self.k, self.d)?;
        if self.m == 0 {
            return Err(CodeError::Inadmissible("m must be at least 1".into()));
        }
        if !is_prime(self.q) {
            return Err(CodeError::Inadmissible(format!("q = {} is not prime", self.q)));
        }
        Ok(())
    }

    /// Number of parity nodes, `n - k`.
    pub fn parity_count(&self) -> usize {
        self.n - self.k
    }

    /// `d - k + 1`: storage per node in units, and the number of parity-like
    /// helpers in an aligned repair.
    pub fn redundancy(&self) -> usize {
        self.d + 1 - self.k
    }
}

pub(crate) fn check_nkd(n: usize, k: usize, d: usize) -> Result<(), CodeError> {
    if k == 0 || k >= n {
        return Err(CodeError::Inadmissible(format!("need 1 <= k < n, got n={n} k={k}")));
    }
    if d < k || d > n - 1 {
        return Err(CodeError::Inadmissible(format!(
            "need k <= d <= n-1, got n={n} k={k} d={d}"
        )));
    }
    Ok(())
}

/// Sizes that follow from [`CodeParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// `N = (k-1)(d-k+1)`, the number of interference generators.
    pub exponents: usize,
    /// `B = m^N` subsymbols per unit-capacity symbol.
    pub split: usize,
    /// Subsymbols stored per node, `(d-k+1)·m^N`.
    pub alpha_sub: usize,
    /// Subsymbols per information unit (equals `alpha_sub`).
    pub unit_len: usize,
    /// Source subsymbols per stripe, `k·alpha_sub`.
    pub total_sub: usize,
    /// File size in capacity units, `k(d-k+1)`.
    pub file_units: usize,
    /// Columns of the systematic-helper projection, `(m+1)^N`.
    pub wide_split: usize,
}

pub fn derive_params(p: &CodeParams) -> Result<DerivedParams, CodeError> {
    check_nkd(p.n, p.k, p.d)?;
    if p.m == 0 {
        return Err(CodeError::Inadmissible("m must be at least 1".into()));
    }
    let r = p.redundancy();
    let exponents = (p.k - 1) * r;
    let too_big = || CodeError::TooLarge(format!("(m+1)^N overflows for m={} N={exponents}", p.m));
    let n_exp = u32::try_from(exponents).map_err(|_| too_big())?;
    let split = p.m.checked_pow(n_exp).ok_or_else(too_big)?;
    let wide_split = (p.m + 1).checked_pow(n_exp).ok_or_else(too_big)?;
    let alpha_sub = r.checked_mul(split).ok_or_else(too_big)?;
    let total_sub = p.k.checked_mul(alpha_sub).ok_or_else(too_big)?;
    Ok(DerivedParams {
        exponents,
        split,
        alpha_sub,
        unit_len: alpha_sub,
        total_sub,
        file_units: p.k * r,
        wide_split,
    })
}

/// The minimum-storage point of the storage/repair-bandwidth tradeoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutsetPoint {
    pub file_size: BigRational,
    /// Storage per node.
    pub alpha: BigRational,
    /// Total repair download.
    pub gamma: BigRational,
    /// Per-helper repair download, `gamma / d`.
    pub beta: BigRational,
}

impl CutsetPoint {
    /// Bandwidth of naive repair (download the whole file) over `gamma`,
    /// which works out to `k(d-k+1)/d`.
    pub fn reduction_factor(&self) -> BigRational {
        &self.file_size / &self.gamma
    }
}

pub fn cutset_point(n: usize, k: usize, d: usize, file_size: u64) -> Result<CutsetPoint, CodeError> {
    check_nkd(n, k, d)?;
    if file_size == 0 {
        return Err(CodeError::Inadmissible("file size must be positive".into()));
    }
    let int = |x: u64| BigRational::from_integer(BigInt::from(x));
    let file = int(file_size);
    let alpha = &file / int(k as u64);
    let gamma = &alpha * int(d as u64) / int((d + 1 - k) as u64);
    let beta = &gamma / int(d as u64);
    Ok(CutsetPoint {
        file_size: file,
        alpha,
        gamma,
        beta,
    })
}
