use super::LinalgError;
use crate::field::{FieldElement, PrimeField};

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, dim: usize) -> Self {
        let mut m = Self::zeros(field, dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from row-major data, reducing every entry.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        let data = data.into_iter().map(|x| field.reduce(x)).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: (rows.len(), cols),
                    found: (rows.len(), r.len()),
                });
            }
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[u64]>>(field: PrimeField, rows: usize, columns: &[C]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(field, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != rows {
                return Err(LinalgError::DimensionMismatch {
                    expected: (rows, columns.len()),
                    found: (col.len(), columns.len()),
                });
            }
            for (r, &x) in col.iter().enumerate() {
                m.data[r * m.cols + c] = field.reduce(x);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: u64) {
        self.data[r * self.cols + c] = self.field.reduce(value);
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(rhs.row(k)) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, 1),
                found: (x.len(), 1),
            });
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), x)).collect())
    }

    /// Computes `x^t · M`, i.e. the inner product of `x` with every column.
    pub fn vec_mul(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        if x.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (1, self.rows),
                found: (1, x.len()),
            });
        }
        let f = self.field;
        let mut out = vec![0; self.cols];
        for (r, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(a, b));
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self, rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.field, self.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * out.cols..(r + 1) * out.cols];
            dst[..self.cols].copy_from_slice(self.row(r));
            dst[self.cols..].copy_from_slice(rhs.row(r));
        }
        Ok(out)
    }

    /// Vertical concatenation of `self` above `rhs`.
    pub fn vstack(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (rhs.rows, self.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Self {
            field: self.field,
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    /// Rank by fraction-free forward elimination; pivots are the first
    /// nonzero entry found in each column.
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut a = self.data.clone();
        let cols = self.cols;
        let mut rank = 0;
        for c in 0..cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| a[r * cols + c] != 0) else {
                continue;
            };
            if p != rank {
                for j in c..cols {
                    a.swap(p * cols + j, rank * cols + j);
                }
            }
            let pivot = a[rank * cols + c];
            for r in rank + 1..self.rows {
                let factor = a[r * cols + c];
                if factor == 0 {
                    continue;
                }
                // row_r <- pivot * row_r - factor * row_rank
                for j in c..cols {
                    let lhs = f.mul(pivot, a[r * cols + j]);
                    let rhs = f.mul(factor, a[rank * cols + j]);
                    a[r * cols + j] = f.sub(lhs, rhs);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.field, n))?;
        let (reduced, pivots) = aug.rref_prefix(n);
        if pivots.len() < n {
            return Err(LinalgError::Singular);
        }
        let mut out = Self::zeros(self.field, n, n);
        for r in 0..n {
            out.data[r * n..(r + 1) * n].copy_from_slice(&reduced.row(r)[n..]);
        }
        Ok(out)
    }

    /// Solves `A x = y` for a matrix with full column rank. Extra rows are
    /// allowed as long as `y` lies in the column span.
    pub fn solve(&self, y: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        if y.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, 1),
                found: (y.len(), 1),
            });
        }
        let rhs = Self::from_vec(self.field, self.rows, 1, y.to_vec())?;
        let aug = self.hstack(&rhs)?;
        let (reduced, pivots) = aug.rref_prefix(self.cols);
        let rank = pivots.len();
        if (rank..self.rows).any(|r| reduced.get(r, self.cols) != 0) {
            return Err(LinalgError::Inconsistent);
        }
        if rank < self.cols {
            return Err(LinalgError::Singular);
        }
        Ok((0..self.cols).map(|r| reduced.get(r, self.cols)).collect())
    }

    /// Gauss-Jordan elimination restricted to pivots in the first
    /// `pivot_cols` columns. Returns the reduced matrix and pivot columns;
    /// pivot rows occupy the top of the result.
    fn rref_prefix(&self, pivot_cols: usize) -> (Self, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let cols = m.cols;
        let mut pivots = Vec::new();
        for c in 0..pivot_cols {
            let row = pivots.len();
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.data[r * cols + c] != 0) else {
                continue;
            };
            if p != row {
                for j in 0..cols {
                    m.data.swap(p * cols + j, row * cols + j);
                }
            }
            let inv = f.inv(m.data[row * cols + c]).expect("pivot is nonzero");
            for j in c..cols {
                m.data[row * cols + j] = f.mul(m.data[row * cols + j], inv);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.data[r * cols + c];
                if factor == 0 {
                    continue;
                }
                for j in c..cols {
                    let delta = f.mul(factor, m.data[row * cols + j]);
                    m.data[r * cols + j] = f.sub(m.data[r * cols + j], delta);
                }
            }
            pivots.push(c);
        }
        (m, pivots)
    }
}
