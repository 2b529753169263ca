use super::{DiagonalMatrix, FieldMatrix, LinalgError};
use crate::field::{FieldElement, PrimeField};

/// A block matrix whose blocks are all `dim × dim` diagonal matrices.
///
/// Such a matrix is permutation-similar to a block-diagonal matrix with
/// `dim` small blocks, one per diagonal coordinate (the "slices"). Rank,
/// inversion and products therefore reduce to `dim` independent small
/// problems, which is how composite encoding matrices are handled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagBlockMatrix {
    field: PrimeField,
    block_rows: usize,
    block_cols: usize,
    dim: usize,
    /// Row-major over blocks; each block holds its diagonal.
    blocks: Vec<Vec<FieldElement>>,
}

impl DiagBlockMatrix {
    pub fn zeros(field: PrimeField, block_rows: usize, block_cols: usize, dim: usize) -> Self {
        Self {
            field,
            block_rows,
            block_cols,
            dim,
            blocks: vec![vec![0; dim]; block_rows * block_cols],
        }
    }

    pub fn identity(field: PrimeField, blocks: usize, dim: usize) -> Self {
        let mut m = Self::zeros(field, blocks, blocks, dim);
        for b in 0..blocks {
            m.set_block(b, b, &DiagonalMatrix::identity(field, dim));
        }
        m
    }

    /// Stacks block rows; every row must hold `block_cols` diagonals of the
    /// same dimension.
    pub fn from_block_rows(field: PrimeField, dim: usize, rows: &[Vec<DiagonalMatrix>]) -> Result<Self, LinalgError> {
        let block_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(field, rows.len(), block_cols, dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != block_cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: (rows.len(), block_cols),
                    found: (rows.len(), row.len()),
                });
            }
            for (c, block) in row.iter().enumerate() {
                if block.dim() != dim {
                    return Err(LinalgError::DimensionMismatch {
                        expected: (dim, dim),
                        found: (block.dim(), block.dim()),
                    });
                }
                m.set_block(r, c, block);
            }
        }
        Ok(m)
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, r: usize, c: usize) -> DiagonalMatrix {
        DiagonalMatrix::new(self.field, self.blocks[r * self.block_cols + c].clone())
    }

    pub fn set_block(&mut self, r: usize, c: usize, block: &DiagonalMatrix) {
        self.blocks[r * self.block_cols + c].copy_from_slice(block.entries());
    }

    /// The `block_rows × block_cols` matrix formed by diagonal coordinate `j`
    /// of every block.
    pub fn slice(&self, j: usize) -> FieldMatrix {
        let data = self.blocks.iter().map(|b| b[j]).collect();
        FieldMatrix::from_vec(self.field, self.block_rows, self.block_cols, data)
            .expect("slice shape matches block grid")
    }

    fn set_slice(&mut self, j: usize, slice: &FieldMatrix) {
        for (b, &x) in self.blocks.iter_mut().zip(slice.as_slice()) {
            b[j] = x;
        }
    }

    pub fn rank(&self) -> usize {
        (0..self.dim).map(|j| self.slice(j).rank()).sum()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.block_rows.min(self.block_cols) * self.dim
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if self.block_rows != self.block_cols {
            return Err(LinalgError::NotSquare {
                rows: self.block_rows * self.dim,
                cols: self.block_cols * self.dim,
            });
        }
        let mut out = Self::zeros(self.field, self.block_rows, self.block_cols, self.dim);
        for j in 0..self.dim {
            out.set_slice(j, &self.slice(j).inverse()?);
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.block_cols != rhs.block_rows || self.dim != rhs.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.block_cols * self.dim, rhs.block_cols * rhs.dim),
                found: (rhs.block_rows * rhs.dim, rhs.block_cols * rhs.dim),
            });
        }
        let mut out = Self::zeros(self.field, self.block_rows, rhs.block_cols, self.dim);
        for j in 0..self.dim {
            out.set_slice(j, &self.slice(j).mul(&rhs.slice(j))?);
        }
        Ok(out)
    }

    /// Applies the matrix to a vector given as `block_cols` pieces of length
    /// `dim`; returns `block_rows` pieces.
    pub fn apply(&self, x: &[&[FieldElement]]) -> Result<Vec<Vec<FieldElement>>, LinalgError> {
        if x.len() != self.block_cols || x.iter().any(|p| p.len() != self.dim) {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.block_cols * self.dim, 1),
                found: (x.iter().map(|p| p.len()).sum(), 1),
            });
        }
        let f = self.field;
        let mut out = vec![vec![0; self.dim]; self.block_rows];
        for (r, piece) in out.iter_mut().enumerate() {
            for (c, xc) in x.iter().enumerate() {
                let block = &self.blocks[r * self.block_cols + c];
                for ((o, &g), &v) in piece.iter_mut().zip(block).zip(xc.iter()) {
                    *o = f.add(*o, f.mul(g, v));
                }
            }
        }
        Ok(out)
    }

    /// Widens to the full dense matrix, block `(r, c)` occupying rows
    /// `r·dim..(r+1)·dim` and columns `c·dim..(c+1)·dim`.
    pub fn to_dense(&self) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(self.field, self.block_rows * self.dim, self.block_cols * self.dim);
        for r in 0..self.block_rows {
            for c in 0..self.block_cols {
                for (j, &x) in self.blocks[r * self.block_cols + c].iter().enumerate() {
                    m.set(r * self.dim + j, c * self.dim + j, x);
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> PrimeField {
        PrimeField::new(11).unwrap()
    }

    fn block_matrix(rows: usize, cols: usize, dim: usize) -> impl Strategy<Value = DiagBlockMatrix> {
        proptest::collection::vec(0u64..11, rows * cols * dim).prop_map(move |v| {
            let grid: Vec<Vec<DiagonalMatrix>> = (0..rows)
                .map(|r| {
                    (0..cols)
                        .map(|c| {
                            let start = (r * cols + c) * dim;
                            DiagonalMatrix::new(f(), v[start..start + dim].to_vec())
                        })
                        .collect()
                })
                .collect();
            DiagBlockMatrix::from_block_rows(f(), dim, &grid).unwrap()
        })
    }

    proptest! {
        #[test]
        fn blocked_rank_matches_dense(m in block_matrix(3, 3, 3)) {
            prop_assert_eq!(m.rank(), m.to_dense().rank());
        }

        #[test]
        fn blocked_inverse_matches_dense(m in block_matrix(2, 2, 3)) {
            match m.inverse() {
                Ok(inv) => prop_assert_eq!(inv.to_dense(), m.to_dense().inverse().unwrap()),
                Err(_) => prop_assert!(m.to_dense().inverse().is_err()),
            }
        }

        #[test]
        fn blocked_product_matches_dense(a in block_matrix(2, 3, 2), b in block_matrix(3, 2, 2)) {
            prop_assert_eq!(a.mul(&b).unwrap().to_dense(), a.to_dense().mul(&b.to_dense()).unwrap());
        }

        #[test]
        fn apply_matches_dense(m in block_matrix(2, 3, 2), x in proptest::collection::vec(0u64..11, 6)) {
            let pieces: Vec<&[u64]> = x.chunks(2).collect();
            let got: Vec<u64> = m.apply(&pieces).unwrap().concat();
            prop_assert_eq!(got, m.to_dense().mul_vec(&x).unwrap());
        }
    }
}
