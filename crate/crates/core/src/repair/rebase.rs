use std::collections::BTreeMap;

use super::RepairError;
use crate::code::{BlockStore, CodeInstance};
use crate::field::FieldElement;
use crate::linalg::{DiagBlockMatrix, DiagonalMatrix};

/// The code re-expressed with the contents of `basis` as the information
/// units.
///
/// If `x_S = M_S w` are the basis contents, every other node stores
/// `E_h w = (E_h M_S^{-1}) x_S`. All blocks involved are diagonal, so the
/// primed coefficients are diagonal too.
#[derive(Debug, Clone)]
pub struct RebasedView {
    basis: Vec<usize>,
    transform: DiagBlockMatrix,
    inverse: DiagBlockMatrix,
    primed: BTreeMap<usize, Vec<DiagonalMatrix>>,
}

pub fn rebase(code: &CodeInstance, basis: &[usize]) -> Result<RebasedView, RepairError> {
    if basis.len() != code.k() {
        return Err(RepairError::SingularBasis(format!(
            "basis needs {} nodes, got {:?}",
            code.k(),
            basis
        )));
    }
    for (i, &node) in basis.iter().enumerate() {
        if node == 0 || node > code.n() {
            return Err(RepairError::UnknownNode(node));
        }
        if basis[..i].contains(&node) {
            return Err(RepairError::SingularBasis(format!("node {node} repeated in {basis:?}")));
        }
    }
    let transform = code.composite(basis)?;
    let inverse = transform
        .inverse()
        .map_err(|_| RepairError::SingularBasis(format!("composite of {basis:?} is singular")))?;
    let mut primed = BTreeMap::new();
    for node in (1..=code.n()).filter(|n| !basis.contains(n)) {
        let row = DiagBlockMatrix::from_block_rows(code.field(), code.alpha_sub(), &[code.node_coefficients(node)?])?;
        let mapped = row.mul(&inverse)?;
        primed.insert(node, (0..code.k()).map(|s| mapped.block(0, s)).collect());
    }
    Ok(RebasedView {
        basis: basis.to_vec(),
        transform,
        inverse,
        primed,
    })
}

impl RebasedView {
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// Composite encoding matrix of the basis nodes.
    pub fn transform(&self) -> &DiagBlockMatrix {
        &self.transform
    }

    pub fn inverse(&self) -> &DiagBlockMatrix {
        &self.inverse
    }

    pub fn slot_of(&self, node: usize) -> Option<usize> {
        self.basis.iter().position(|&b| b == node)
    }

    /// Primed coefficients of a non-basis node, one diagonal per basis slot.
    pub fn coefficients(&self, node: usize) -> Option<&[DiagonalMatrix]> {
        self.primed.get(&node).map(Vec::as_slice)
    }

    pub fn primed(&self) -> &BTreeMap<usize, Vec<DiagonalMatrix>> {
        &self.primed
    }

    /// Recomputes every non-basis node's block from the basis contents.
    pub fn reencode(&self, store: &dyn BlockStore) -> Result<BTreeMap<usize, Vec<FieldElement>>, RepairError> {
        let units: Vec<&[FieldElement]> = self
            .basis
            .iter()
            .map(|&n| store.block(n).ok_or(RepairError::MissingBlock(n)))
            .collect::<Result<_, _>>()?;
        let mut out = BTreeMap::new();
        for (&node, coeffs) in &self.primed {
            let f = coeffs[0].field();
            let mut acc = vec![0; units[0].len()];
            for (g, unit) in coeffs.iter().zip(&units) {
                for ((a, &gj), &x) in acc.iter_mut().zip(g.entries()).zip(unit.iter()) {
                    *a = f.add(*a, f.mul(gj, x));
                }
            }
            out.insert(node, acc);
        }
        Ok(out)
    }
}
