//! Cohomology, triple Massey products and indecomposables of a CDGA given by
//! a presentation with differential.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, AlgebraPresentation, AugTarget, GradedElement};
use crate::homology::HomologyDegree;
use crate::linalg::{RationalMatrix, SparseVec, Subspace, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CdgaError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("d^2 != 0 from degree {0}")]
    DifferentialSquare(usize),
    #[error("degree {degree} exceeds the truncation bound {max}")]
    Truncation { degree: usize, max: usize },
    #[error("element of degree {0} is not a cocycle")]
    NotCocycle(usize),
}

/// A validated CDGA truncated at degree `max_degree`.
#[derive(Debug, Clone)]
pub struct CdgaInstance {
    alg: Arc<Algebra>,
    max_degree: usize,
}

/// `((p, i), (q, j))`: class `i` of degree `p` against class `j` of degree `q`.
pub type ClassPair = ((usize, usize), (usize, usize));

/// Per-degree Betti numbers, representative cocycles and products of classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyTable {
    pub max_degree: usize,
    pub betti: BTreeMap<usize, usize>,
    pub representatives: BTreeMap<usize, Vec<GradedElement>>,
    /// `((p, i), (q, j))` to the coordinates of `[e_(p,i)]·[e_(q,j)]` in the
    /// classes of degree `p + q`; recorded while `p + q <= max_degree`.
    pub ring_constants: BTreeMap<ClassPair, Vec<Q>>,
}

impl CohomologyTable {
    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .map(|(&n, &b)| if n % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

/// Outcome of a triple Massey product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MasseyResult {
    Undefined { reason: String },
    Defined(MasseyCoset),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasseyCoset {
    pub degree: usize,
    pub lifts: (GradedElement, GradedElement),
    /// `w = y1·c - (-1)^deg a · a·y2`
    pub representative: GradedElement,
    /// class of `w` in the representative basis of its degree
    pub class: Vec<Q>,
    /// basis of `[a]·H + H·[c]` in class coordinates
    pub indeterminacy: Vec<Vec<Q>>,
    pub contains_zero: bool,
}

impl CdgaInstance {
    pub fn new(pres: AlgebraPresentation, max_degree: usize) -> Result<Self, CdgaError> {
        let alg = Algebra::validated(pres, max_degree + 1)?;
        Self::from_algebra(Arc::new(alg), max_degree)
    }

    pub fn from_algebra(alg: Arc<Algebra>, max_degree: usize) -> Result<Self, CdgaError> {
        let inst = Self { alg, max_degree };
        for n in 0..max_degree {
            let dd = inst
                .d_matrix(n + 1)
                .mul(&inst.d_matrix(n))
                .expect("composable");
            if !dd.is_zero() {
                return Err(CdgaError::DifferentialSquare(n));
            }
        }
        Ok(inst)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn algebra_arc(&self) -> Arc<Algebra> {
        self.alg.clone()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn d_matrix(&self, n: usize) -> RationalMatrix {
        self.alg.d_matrix(n)
    }

    fn check_degree(&self, degree: usize) -> Result<(), CdgaError> {
        if degree > self.max_degree {
            Err(CdgaError::Truncation {
                degree,
                max: self.max_degree,
            })
        } else {
            Ok(())
        }
    }

    pub fn differential(&self, a: &GradedElement) -> Result<GradedElement, CdgaError> {
        self.check_degree(a.degree + 1)?;
        let v = self.alg.coords(a)?;
        Ok(self.alg.element(a.degree + 1, &self.alg.d_coords(a.degree, &v)))
    }

    fn homology_degree(&self, n: usize) -> HomologyDegree {
        let incoming = if n == 0 {
            RationalMatrix::zero(self.alg.dim(0), 0)
        } else {
            self.d_matrix(n - 1)
        };
        HomologyDegree::new(&incoming, &self.d_matrix(n))
    }

    pub fn cohomology(&self) -> CohomologyTable {
        let degrees: Vec<HomologyDegree> =
            (0..=self.max_degree).map(|n| self.homology_degree(n)).collect();
        let mut betti = BTreeMap::new();
        let mut representatives = BTreeMap::new();
        for (n, h) in degrees.iter().enumerate() {
            betti.insert(n, h.betti());
            representatives.insert(
                n,
                h.representatives()
                    .iter()
                    .map(|v| self.alg.element(n, v))
                    .collect(),
            );
        }
        let mut ring_constants = BTreeMap::new();
        for p in 0..=self.max_degree {
            for q in 0..=self.max_degree - p {
                for (i, a) in degrees[p].representatives().iter().enumerate() {
                    for (j, b) in degrees[q].representatives().iter().enumerate() {
                        let prod = self.alg.mul_coords(p, a, q, b);
                        let class = degrees[p + q]
                            .class_of(&prod)
                            .expect("products of cocycles are cocycles");
                        ring_constants.insert(((p, i), (q, j)), class);
                    }
                }
            }
        }
        CohomologyTable {
            max_degree: self.max_degree,
            betti,
            representatives,
            ring_constants,
        }
    }

    /// Class coordinates of a cocycle.
    pub fn class_of(&self, a: &GradedElement) -> Result<Vec<Q>, CdgaError> {
        self.check_degree(a.degree)?;
        let v = self.alg.coords(a)?;
        self.homology_degree(a.degree)
            .class_of(&v)
            .ok_or(CdgaError::NotCocycle(a.degree))
    }

    /// Some `y` with `d y = a`, if `a` is exact.
    pub fn lift(&self, a: &GradedElement) -> Result<Option<GradedElement>, CdgaError> {
        self.check_degree(a.degree)?;
        if a.degree == 0 {
            return Ok(if a.is_zero() {
                Some(GradedElement::zero(0))
            } else {
                None
            });
        }
        let v = self.alg.coords(a)?;
        Ok(self
            .homology_degree(a.degree)
            .preimage(&v)
            .map(|y| self.alg.element(a.degree - 1, &y)))
    }

    /// `<a, b, c>` with lifts chosen by deterministic pivoting.
    pub fn massey_triple(
        &self,
        a: &GradedElement,
        b: &GradedElement,
        c: &GradedElement,
    ) -> Result<MasseyResult, CdgaError> {
        let top = a.degree + b.degree + c.degree;
        if top == 0 {
            return Ok(MasseyResult::Undefined {
                reason: "classes of degree zero".into(),
            });
        }
        self.check_degree(top - 1)?;
        for x in [a, b, c] {
            self.class_of(x)?;
        }
        let ab = self.alg.multiply(a, b)?;
        let bc = self.alg.multiply(b, c)?;
        let y1 = match self.lift(&ab)? {
            Some(y) => y,
            None => {
                return Ok(MasseyResult::Undefined {
                    reason: "[a][b] != 0".into(),
                })
            }
        };
        let y2 = match self.lift(&bc)? {
            Some(y) => y,
            None => {
                return Ok(MasseyResult::Undefined {
                    reason: "[b][c] != 0".into(),
                })
            }
        };
        self.massey_with_lifts(a, b, c, &y1, &y2).map(MasseyResult::Defined)
    }

    /// Massey coset computed from caller-supplied lifts.
    pub fn massey_with_lifts(
        &self,
        a: &GradedElement,
        b: &GradedElement,
        c: &GradedElement,
        y1: &GradedElement,
        y2: &GradedElement,
    ) -> Result<MasseyCoset, CdgaError> {
        let alg = &self.alg;
        let top = a.degree + b.degree + c.degree - 1;
        self.check_degree(top)?;
        let (pa, pc) = (a.degree, c.degree);
        let y1c = alg.coords(&alg.multiply(y1, c)?)?;
        let ay2 = alg.coords(&alg.multiply(a, y2)?)?;
        let mut w = y1c;
        let sign = if pa % 2 == 0 { -Q::one() } else { Q::one() };
        w.add_scaled(&sign, &ay2);
        let representative = alg.element(top, &w);
        let h_top = self.homology_degree(top);
        let class = h_top.class_of(&w).ok_or(CdgaError::NotCocycle(top))?;

        // [a]·H^(top - pa) + H^(top - pc)·[c]
        let va = alg.coords(a)?;
        let vc = alg.coords(c)?;
        let mut spanning = Vec::new();
        for z in self.homology_degree(top - pa).representatives() {
            let prod = alg.mul_coords(pa, &va, top - pa, z);
            spanning.push(h_top.class_of(&prod).expect("cocycle"));
        }
        for z in self.homology_degree(top - pc).representatives() {
            let prod = alg.mul_coords(top - pc, z, pc, &vc);
            spanning.push(h_top.class_of(&prod).expect("cocycle"));
        }
        let dim = h_top.betti();
        let sparse: Vec<SparseVec> = spanning.iter().map(|v| SparseVec::from_dense(v)).collect();
        let indet = Subspace::span(dim, sparse.iter());
        let contains_zero = indet.contains(&SparseVec::from_dense(&class));
        Ok(MasseyCoset {
            degree: top,
            lifts: (y1.clone(), y2.clone()),
            representative,
            class,
            indeterminacy: indet.basis().iter().map(|v| v.to_dense(dim)).collect(),
            contains_zero,
        })
    }

    /// Dimensions of `H^n(K / K^2)` for `K` the augmentation ideal.
    pub fn indecomposables_homotopy(&self, target: AugTarget) -> BTreeMap<usize, usize> {
        let alg = &self.alg;
        let top = self.max_degree + 1;
        let kernels: Vec<Vec<SparseVec>> = (0..=top)
            .map(|n| {
                if n == 0 {
                    Vec::new()
                } else {
                    alg.augmentation_ideal_coords(n, target)
                }
            })
            .collect();
        let decomposables: Vec<Subspace> = (0..=top)
            .map(|n| {
                let mut prods = Vec::new();
                for p in 1..n {
                    for a in &kernels[p] {
                        for b in &kernels[n - p] {
                            prods.push(alg.mul_coords(p, a, n - p, b));
                        }
                    }
                }
                Subspace::span(alg.dim(n), prods.iter())
            })
            .collect();
        let quotient_dim = |n: usize| kernels[n].len() - decomposables[n].dim();
        // rank of the induced d: Q^n -> Q^(n+1)
        let rank = |n: usize| -> usize {
            let images: Vec<SparseVec> = kernels[n].iter().map(|v| alg.d_coords(n, v)).collect();
            decomposables[n + 1].sum(&Subspace::span(alg.dim(n + 1), images.iter())).dim()
                - decomposables[n + 1].dim()
        };
        let ranks: Vec<usize> = (0..=self.max_degree).map(rank).collect();
        (1..=self.max_degree)
            .map(|n| (n, quotient_dim(n) - ranks[n] - ranks[n - 1]))
            .collect()
    }

    pub fn cochain_dims(&self) -> BTreeMap<usize, usize> {
        (0..=self.max_degree).map(|n| (n, self.alg.dim(n))).collect()
    }
}

/// Coordinates of zero in `dim` classes.
pub fn zero_class(dim: usize) -> Vec<Q> {
    vec![Q::zero(); dim]
}
