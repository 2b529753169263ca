//! Exponent vectors indexing the columns of the projection matrices.
//!
//! Column `e = (e_1, ..., e_N)` with entries in `{1, ..., R}` sits at the
//! lexicographic index `Σ (e_j - 1)·R^(N-1-j)`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lexicographic index among vectors with entries in `1..=range`.
    pub fn index(&self, range: u32) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &e| acc * range as usize + (e as usize - 1))
    }

    /// Copy with coordinate `position` increased by one.
    pub fn incremented(&self, position: usize) -> Self {
        let mut v = self.0.clone();
        v[position] += 1;
        Self(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `range^len` vectors over `{1, ..., range}` in lexicographic order.
/// `len = 0` yields the single empty vector.
pub fn enumerate_exponents(len: usize, range: u32) -> Vec<ExponentVector> {
    let mut out = vec![ExponentVector(Vec::with_capacity(len))];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=range).map(move |e| {
                    let mut v = prefix.0.clone();
                    v.push(e);
                    ExponentVector(v)
                })
            })
            .collect();
    }
    out
}
