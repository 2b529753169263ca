use super::{FieldMatrix, LinalgError};
use crate::field::{FieldElement, FieldError, PrimeField};

/// A square diagonal matrix stored as its diagonal.
///
/// Products of diagonal matrices are diagonal and commute; this is the
/// algebraic fact the alignment repair relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalMatrix {
    field: PrimeField,
    diag: Vec<FieldElement>,
}

impl DiagonalMatrix {
    pub fn new(field: PrimeField, diag: Vec<u64>) -> Self {
        let diag = diag.into_iter().map(|x| field.reduce(x)).collect();
        Self { field, diag }
    }

    pub fn identity(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            diag: vec![1 % field.modulus(); dim],
        }
    }

    pub fn zeros(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            diag: vec![0; dim],
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.diag
    }

    pub fn is_invertible(&self) -> bool {
        self.diag.iter().all(|&x| x != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.diag.iter().all(|&x| x == 0)
    }

    fn check_dim(&self, other: usize) -> Result<(), LinalgError> {
        if self.dim() != other {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.dim(), self.dim()),
                found: (other, other),
            });
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.check_dim(rhs.dim())?;
        let f = self.field;
        Ok(Self {
            field: f,
            diag: self.diag.iter().zip(&rhs.diag).map(|(&a, &b)| f.mul(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.check_dim(rhs.dim())?;
        let f = self.field;
        Ok(Self {
            field: f,
            diag: self.diag.iter().zip(&rhs.diag).map(|(&a, &b)| f.add(a, b)).collect(),
        })
    }

    pub fn inverse(&self) -> Result<Self, FieldError> {
        let diag = self.diag.iter().map(|&x| self.field.inv(x)).collect::<Result<_, _>>()?;
        Ok(Self {
            field: self.field,
            diag,
        })
    }

    pub fn pow(&self, exp: u64) -> Self {
        Self {
            field: self.field,
            diag: self.diag.iter().map(|&x| self.field.pow(x, exp)).collect(),
        }
    }

    /// Applies the matrix to a vector (elementwise product).
    pub fn apply(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        self.check_dim(v.len())?;
        let f = self.field;
        Ok(self.diag.iter().zip(v).map(|(&a, &b)| f.mul(a, b)).collect())
    }

    /// Widens to a dense matrix.
    pub fn to_dense(&self) -> FieldMatrix {
        let n = self.dim();
        let mut m = FieldMatrix::zeros(self.field, n, n);
        for (i, &x) in self.diag.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> PrimeField {
        PrimeField::new(65537).unwrap()
    }

    #[test]
    fn dense_widening_agrees_with_compact_product() {
        let a = DiagonalMatrix::new(f(), vec![3, 5, 7]);
        let b = DiagonalMatrix::new(f(), vec![11, 13, 65536]);
        assert_eq!(a.mul(&b).unwrap().to_dense(), a.to_dense().mul(&b.to_dense()).unwrap());
    }

    #[test]
    fn inverse_of_zero_entry_fails() {
        let a = DiagonalMatrix::new(f(), vec![3, 0]);
        assert_eq!(a.inverse(), Err(FieldError::ZeroInverse));
        assert!(!a.is_invertible());
    }

    #[test]
    fn dimension_mismatch() {
        let a = DiagonalMatrix::identity(f(), 2);
        let b = DiagonalMatrix::identity(f(), 3);
        assert!(a.mul(&b).is_err());
        assert!(a.apply(&[1, 2, 3]).is_err());
    }

    proptest! {
        #[test]
        fn products_commute(
            a in proptest::collection::vec(0u64..65537, 8),
            b in proptest::collection::vec(0u64..65537, 8),
        ) {
            let a = DiagonalMatrix::new(f(), a);
            let b = DiagonalMatrix::new(f(), b);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn pow_adds_exponents(a in proptest::collection::vec(1u64..65537, 4), e1 in 0u64..6, e2 in 0u64..6) {
            let a = DiagonalMatrix::new(f(), a);
            prop_assert_eq!(a.pow(e1).mul(&a.pow(e2)).unwrap(), a.pow(e1 + e2));
        }
    }
}
