//! Homology of one degree of a cochain complex given by its two adjacent
//! differential matrices.

use crate::linalg::{kernel_basis, Echelon, RationalMatrix, SpanSolver, SparseVec, Subspace, Q};

/// Cycles, boundaries and a chosen complement in one degree.
#[derive(Clone, Debug)]
pub struct HomologyDegree {
    dim: usize,
    outgoing: RationalMatrix,
    boundaries: Subspace,
    representatives: Vec<SparseVec>,
    classes: SpanSolver,
    preimages: SpanSolver,
}

impl HomologyDegree {
    /// `incoming` maps the previous degree here; `outgoing` leaves this degree.
    pub fn new(incoming: &RationalMatrix, outgoing: &RationalMatrix) -> Self {
        let dim = outgoing.ncols();
        debug_assert!(incoming.nrows() == dim || incoming.ncols() == 0);
        let images = incoming.columns();
        let boundaries = Subspace::span(dim, images.iter());
        let cycles = kernel_basis(outgoing);
        let mut ech = Echelon::new();
        for b in boundaries.basis() {
            ech.insert(b);
        }
        let mut representatives = Vec::new();
        for z in cycles.basis() {
            if ech.insert(z).is_some() {
                representatives.push(z.clone());
            }
        }
        let mut gens = representatives.clone();
        gens.extend(boundaries.basis().iter().cloned());
        Self {
            dim,
            outgoing: outgoing.clone(),
            boundaries,
            classes: SpanSolver::new(&gens),
            preimages: SpanSolver::new(&images),
            representatives,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn betti(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[SparseVec] {
        &self.representatives
    }

    pub fn boundaries(&self) -> &Subspace {
        &self.boundaries
    }

    pub fn is_cycle(&self, v: &SparseVec) -> bool {
        self.outgoing.mul_vec(v).is_zero()
    }

    pub fn is_boundary(&self, v: &SparseVec) -> bool {
        self.boundaries.contains(v)
    }

    /// Coordinates of the class of `v` in the representative basis, or `None`
    /// when `v` is not a cycle.
    pub fn class_of(&self, v: &SparseVec) -> Option<Vec<Q>> {
        if !self.is_cycle(v) {
            return None;
        }
        let c = self.classes.solve(v)?;
        Some((0..self.betti()).map(|i| c.get(i)).collect())
    }

    /// Some `y` in the previous degree with `d y = v`.
    pub fn preimage(&self, v: &SparseVec) -> Option<SparseVec> {
        self.preimages.solve(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn circle_like_complex() {
        // C^0 = Q^2 --d0--> C^1 = Q^2, d0 = [[1,-1],[-1,1]]
        let d0 = RationalMatrix::from_i64(&[vec![1, -1], vec![-1, 1]]);
        let zero_out = RationalMatrix::zero(0, 2);
        let h1 = HomologyDegree::new(&d0, &zero_out);
        assert_eq!(h1.betti(), 1);
        let v = SparseVec::from_pairs([(0, q(2)), (1, q(-2))]);
        assert!(h1.is_boundary(&v));
        assert_eq!(h1.class_of(&v), Some(vec![q(0)]));
        let y = h1.preimage(&v).unwrap();
        assert_eq!(d0.mul_vec(&y), v);
        let h0 = HomologyDegree::new(&RationalMatrix::zero(2, 0), &d0);
        assert_eq!(h0.betti(), 1);
    }
}
