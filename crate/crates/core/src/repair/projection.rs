use super::exponents::enumerate_exponents;
use super::RepairError;
use crate::field::{FieldElement, PrimeField};
use crate::linalg::{DiagonalMatrix, FieldMatrix};

/// Projection matrices used by alignment repair.
///
/// Parity-like helpers project onto `V` (exponents in `1..=m`), the other
/// basis helpers onto `Vbar` (exponents in `1..=m+1`). Each column is
/// `(Π_t g_t^{e_t}) w` for the all-ones vector `w`, so multiplying a column
/// of `V` by any generator lands exactly on a column of `Vbar`.
#[derive(Debug, Clone)]
pub struct ProjectionSet {
    m: u32,
    generators: Vec<DiagonalMatrix>,
    v: FieldMatrix,
    vbar: FieldMatrix,
    /// `shift[c * N + t]`: column of `Vbar` equal to `g_t · V[:, c]`.
    shift: Vec<usize>,
}

impl ProjectionSet {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn generators(&self) -> &[DiagonalMatrix] {
        &self.generators
    }

    pub fn v(&self) -> &FieldMatrix {
        &self.v
    }

    pub fn vbar(&self) -> &FieldMatrix {
        &self.vbar
    }

    /// Column of `Vbar` equal to generator `t` applied to column `c` of `V`.
    #[inline]
    pub fn shifted_column(&self, c: usize, t: usize) -> usize {
        self.shift[c * self.generators.len() + t]
    }

    /// Checks `g_t · V[:, c] == Vbar[:, shifted_column(c, t)]` entry by entry
    /// for every generator and column.
    pub fn containment_holds(&self) -> bool {
        (0..self.v.cols()).all(|c| {
            let col = self.v.column(c);
            self.generators.iter().enumerate().all(|(t, g)| {
                g.apply(&col).expect("generator dims match") == self.vbar.column(self.shifted_column(c, t))
            })
        })
    }
}

fn columns(
    field: PrimeField,
    powers: &[Vec<Vec<FieldElement>>],
    dim: usize,
    count: usize,
    range: u32,
) -> Vec<Vec<FieldElement>> {
    enumerate_exponents(count, range)
        .into_iter()
        .map(|e| {
            let mut col = vec![1 % field.modulus(); dim];
            for (t, &exp) in e.0.iter().enumerate() {
                for (x, &p) in col.iter_mut().zip(&powers[t][exp as usize]) {
                    *x = field.mul(*x, p);
                }
            }
            col
        })
        .collect()
}

/// Builds `V` and `Vbar` from the ordered interference generators.
pub fn build_projection_sets(
    field: PrimeField,
    dim: usize,
    generators: Vec<DiagonalMatrix>,
    m: u32,
) -> Result<ProjectionSet, RepairError> {
    if m == 0 {
        return Err(RepairError::Dimension("m must be at least 1".into()));
    }
    if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
        return Err(RepairError::Dimension(format!(
            "generator of dimension {} in a projection of dimension {dim}",
            g.dim()
        )));
    }
    let count = generators.len();
    // powers[t][p] = diag(g_t)^p for p in 0..=m+1
    let powers: Vec<Vec<Vec<FieldElement>>> = generators
        .iter()
        .map(|g| (0..=m + 1).map(|p| g.pow(p as u64).entries().to_vec()).collect())
        .collect();
    let v_cols = columns(field, &powers, dim, count, m);
    let vbar_cols = columns(field, &powers, dim, count, m + 1);

    let mut shift = Vec::with_capacity(v_cols.len() * count);
    for e in enumerate_exponents(count, m) {
        for t in 0..count {
            shift.push(e.incremented(t).index(m + 1));
        }
    }

    Ok(ProjectionSet {
        m,
        v: FieldMatrix::from_columns(field, dim, &v_cols)?,
        vbar: FieldMatrix::from_columns(field, dim, &vbar_cols)?,
        generators,
        shift,
    })
}
