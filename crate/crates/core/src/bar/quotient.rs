//! The subcomplex `V` of `r`-moves in the over-`k` complex, its contracting
//! homotopy and the quotient realizing the tensor product over `R`.
//!
//! Elements of `V` are handled through tokens `(j, r, x)` standing for
//! `(.., x_j·r, x_(j+1), ..) - (.., x_j, r·x_(j+1), ..)`; the homotopy and
//! the lift of `D` act on tokens. The word `x` may carry one unit slot, which
//! is how moves that fold `R` into a slot of pure base-ring degree arise after
//! normalization.

use num::Zero;

use super::{sign, BarChain, BarConfig, BarError, BarMode, BarWord, Factor, Op, Side};
use crate::linalg::{RationalMatrix, SpanSolver, SparseVec, Subspace, Q};

/// Generator `(.., x_gap·r, x_(gap+1), ..) - (.., x_gap, r·x_(gap+1), ..)` of
/// `V`; positions run from 0 (left factor) to `k + 1` (right factor).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VToken {
    pub gap: usize,
    /// basis element of the base ring
    pub r: Factor,
    pub word: BarWord,
}

impl VToken {
    pub fn degree(&self) -> i64 {
        self.word.complex_degree() + self.r.degree as i64
    }
}

/// Quotient of one degree of the normalized complex by `V`.
#[derive(Clone, Debug)]
pub struct QuotientSlice {
    pub degree: usize,
    /// words whose classes form the quotient basis
    pub words: Vec<BarWord>,
    /// rows: quotient basis, columns: over-`k` basis of this degree
    pub projection: RationalMatrix,
    pub v_dim: usize,
}

impl BarConfig {
    fn require_over_k(&self) -> Result<(), BarError> {
        if self.mode != BarMode::OverK {
            return Err(BarError::BaseMismatch("V lives in the over-k complex".into()));
        }
        Ok(())
    }

    /// `x` with position `pos` multiplied by the base element `r`.
    fn mul_position(&self, x: &BarWord, pos: usize, r: Factor) -> BarChain {
        let k = x.length();
        let mut out = BarChain::zero(x.complex_degree() + r.degree as i64);
        if pos == 0 {
            let rv = self.base_into(Side::Left, r);
            let prod = self.left().mul_coords(
                x.left.degree,
                &SparseVec::unit(x.left.index),
                r.degree,
                &rv,
            );
            for (i, c) in prod.iter() {
                let mut w = x.clone();
                w.left = Factor::new(x.left.degree + r.degree, i);
                out.add_term(w, c.clone());
            }
        } else if pos <= k {
            let s = x.slots[pos - 1];
            let rv = self.base_into(Side::Middle, r);
            let prod = self
                .middle()
                .mul_coords(s.degree, &SparseVec::unit(s.index), r.degree, &rv);
            for (i, c) in prod.iter() {
                let mut w = x.clone();
                w.slots[pos - 1] = Factor::new(s.degree + r.degree, i);
                out.add_term(w, c.clone());
            }
        } else {
            let rv = self.base_into(Side::Right, r);
            let prod = self.right().mul_coords(
                r.degree,
                &rv,
                x.right.degree,
                &SparseVec::unit(x.right.index),
            );
            for (i, c) in prod.iter() {
                let mut w = x.clone();
                w.right = Factor::new(x.right.degree + r.degree, i);
                out.add_term(w, c.clone());
            }
        }
        out
    }

    fn v_eval_raw(&self, t: &VToken) -> BarChain {
        let phi = self.mul_position(&t.word, t.gap, t.r);
        let psi = self.mul_position(&t.word, t.gap + 1, t.r);
        phi.sub(&psi)
    }

    /// The element of the normalized complex a token stands for.
    pub fn v_eval(&self, t: &VToken) -> BarChain {
        self.v_eval_raw(t).normalized()
    }

    pub fn v_eval_combination(&self, ts: &[(VToken, Q)], degree: i64) -> BarChain {
        let mut out = BarChain::zero(degree);
        for (t, c) in ts {
            out.add_scaled(c, &self.v_eval(t));
        }
        out
    }

    /// `s(t) = (-1)^eps_j [(.., x_j·r, 1, x_(j+1), ..) - (.., x_j, r, x_(j+1), ..)]`,
    /// normalized.
    pub fn homotopy_s_token(&self, t: &VToken) -> BarChain {
        let j = t.gap;
        let sg = sign(t.word.eps(j));
        let mut out = BarChain::zero(t.degree() - 1);
        for (w, c) in &self.mul_position(&t.word, j, t.r).terms {
            let mut w = w.clone();
            w.slots.insert(j, Factor::UNIT);
            out.add_term(w, &sg * c);
        }
        let rv = self.base_into(Side::Middle, t.r);
        for (i, c) in rv.iter() {
            let mut w = t.word.clone();
            w.slots.insert(j, Factor::new(t.r.degree, i));
            out.add_term(w, -(&sg * c));
        }
        out.normalized()
    }

    pub fn homotopy_s_combination(&self, ts: &[(VToken, Q)], degree: i64) -> BarChain {
        let mut out = BarChain::zero(degree);
        for (t, c) in ts {
            out.add_scaled(c, &self.homotopy_s_token(t));
        }
        out
    }

    /// Lift of `D` to tokens: `D(eval t) = eval(d_sym t)`.
    pub fn d_sym(&self, t: &VToken) -> Vec<(VToken, Q)> {
        let j = t.gap;
        let mut out = Vec::new();
        for (op, w, c) in self.over_k_terms(&t.word, true, true) {
            let gap = match op {
                Op::Internal(_) => j,
                Op::Merge(q) if q == j => continue,
                Op::Merge(q) if q < j => j - 1,
                Op::Merge(_) => j,
            };
            out.push((
                VToken {
                    gap,
                    r: t.r,
                    word: w,
                },
                c,
            ));
        }
        out
    }

    /// `D s(t) + s(d_sym t) - eval(t)`, which the homotopy identity says is zero.
    pub fn homotopy_residual(&self, t: &VToken) -> BarChain {
        let st = self.homotopy_s_token(t);
        let mut out = self.raw_d(&st).normalized();
        for (t2, c) in self.d_sym(t) {
            out.add_scaled(&c, &self.homotopy_s_token(&t2));
        }
        out.add_scaled(&-Q::from_integer(1.into()), &self.v_eval(t));
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Tokens whose images span `V` in complex degree `n`.
    pub fn v_tokens(&self, n: usize) -> Result<Vec<VToken>, BarError> {
        self.require_over_k()?;
        let mut out = Vec::new();
        for r in self.base_generators() {
            if r.degree > n + 1 {
                continue;
            }
            // no unit slot
            if r.degree <= n {
                for y in self.bar_basis(n - r.degree)?.iter() {
                    for gap in 0..=y.length() {
                        out.push(VToken {
                            gap,
                            r,
                            word: y.clone(),
                        });
                    }
                }
            }
            // one unit slot next to the gap
            if n + 1 - r.degree <= self.max_degree() {
                for y in self.bar_basis(n + 1 - r.degree)?.iter() {
                    for p in 0..=y.length() {
                        let mut x = y.clone();
                        x.slots.insert(p, Factor::UNIT);
                        // unit at position p + 1: gap p + 1 (unit times r) or gap p
                        out.push(VToken {
                            gap: p + 1,
                            r,
                            word: x.clone(),
                        });
                        out.push(VToken { gap: p, r, word: x });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Span of `V` in degree `n`, in coordinates of the over-`k` basis.
    pub fn v_span(&self, n: usize) -> Result<Subspace, BarError> {
        let dim = self.bar_basis(n)?.len();
        let vecs = self
            .v_tokens(n)?
            .iter()
            .map(|t| self.chain_coords(&self.v_eval(t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Subspace::span(dim, vecs.iter()))
    }

    /// Quotient of degree `n` by `V`, with its projection.
    pub fn quotient_over_r(&self, n: usize) -> Result<QuotientSlice, BarError> {
        let v = self.v_span(n)?;
        let basis = self.bar_basis(n)?;
        let dim = basis.len();
        let pivots: std::collections::BTreeSet<usize> = v.pivots().iter().copied().collect();
        let kept: Vec<usize> = (0..dim).filter(|i| !pivots.contains(i)).collect();
        let position: std::collections::HashMap<usize, usize> =
            kept.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let cols: Vec<SparseVec> = (0..dim)
            .map(|i| {
                let red = v.reduce(&SparseVec::unit(i));
                SparseVec::from_pairs(red.iter().map(|(j, c)| (position[&j], c.clone())))
            })
            .collect();
        Ok(QuotientSlice {
            degree: n,
            words: kept.iter().map(|&i| basis[i].clone()).collect(),
            projection: RationalMatrix::from_columns(kept.len(), &cols),
            v_dim: v.dim(),
        })
    }

    /// `s` on an element of `V`, through a decomposition into spanning
    /// tokens chosen by deterministic pivoting. The result depends on that
    /// decomposition; only the token-level identity is canonical.
    pub fn homotopy_s(&self, v: &BarChain) -> Result<BarChain, BarError> {
        let n = usize::try_from(v.degree).map_err(|_| BarError::NotInV)?;
        if v.is_zero() {
            return Ok(BarChain::zero(v.degree - 1));
        }
        let tokens = self.v_tokens(n)?;
        let vecs = tokens
            .iter()
            .map(|t| self.chain_coords(&self.v_eval(t)))
            .collect::<Result<Vec<_>, _>>()?;
        let solver = SpanSolver::new(&vecs);
        let coeffs = solver
            .solve(&self.chain_coords(v)?)
            .ok_or(BarError::NotInV)?;
        let mut out = BarChain::zero(v.degree - 1);
        for (i, c) in coeffs.iter() {
            out.add_scaled(c, &self.homotopy_s_token(&tokens[i]));
        }
        Ok(out)
    }
}
