//! Shuffle product on bar words.

use num::One;

use super::{sign, BarChain, BarConfig, BarError, BarMode, BarWord, Factor};
use crate::linalg::Q;

/// Interleavings of `k` and `l` items as position masks (`true` = first list).
fn shuffles(k: usize, l: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k + l);
    fn go(k: usize, l: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if k == 0 && l == 0 {
            out.push(cur.clone());
            return;
        }
        if k > 0 {
            cur.push(true);
            go(k - 1, l, cur, out);
            cur.pop();
        }
        if l > 0 {
            cur.push(false);
            go(k, l - 1, cur, out);
            cur.pop();
        }
    }
    go(k, l, &mut cur, &mut out);
    out
}

impl BarConfig {
    /// Shuffle product of two words.
    pub fn shuffle_word(&self, a: &BarWord, b: &BarWord) -> BarChain {
        let mut out = BarChain::zero(a.complex_degree() + b.complex_degree());
        let (left_alg, right_alg) = match self.mode {
            BarMode::OverK => (self.left(), Some(self.right())),
            BarMode::OverR => (self.base(), None),
        };
        let lefts = left_alg.mul_basis(a.left.degree, a.left.index, b.left.degree, b.left.index);
        if lefts.is_zero() {
            return out;
        }
        let rights = match right_alg {
            Some(c) => c.mul_basis(a.right.degree, a.right.index, b.right.degree, b.right.index),
            None => crate::linalg::SparseVec::unit(0),
        };
        if rights.is_zero() {
            return out;
        }
        // move b.left past a's slots and right factor, then a.right past b's slots
        let outer = b.left.degree as i64 * (a.suspended_slot_degree() + a.right.degree as i64)
            + a.right.degree as i64 * b.suspended_slot_degree();
        let base_sign = sign(outer);
        let sa: Vec<i64> = a.slots.iter().map(|s| s.degree as i64 - 1).collect();
        let sb: Vec<i64> = b.slots.iter().map(|s| s.degree as i64 - 1).collect();
        for mask in shuffles(a.length(), b.length()) {
            let mut slots: Vec<Factor> = Vec::with_capacity(mask.len());
            let (mut i, mut j) = (0, 0);
            let mut parity = 0i64;
            // suspended degree of b-slots already placed, crossed by later a-slots
            let mut placed_b = 0i64;
            for &first in &mask {
                if first {
                    parity += sa[i] * placed_b;
                    slots.push(a.slots[i]);
                    i += 1;
                } else {
                    placed_b += sb[j];
                    slots.push(b.slots[j]);
                    j += 1;
                }
            }
            let sg = &base_sign * sign(parity);
            for (li, lc) in lefts.iter() {
                for (ri, rc) in rights.iter() {
                    let w = BarWord::new(
                        Factor::new(a.left.degree + b.left.degree, li),
                        slots.clone(),
                        Factor::new(a.right.degree + b.right.degree, ri),
                    );
                    out.add_term(w, &sg * lc * rc);
                }
            }
        }
        out
    }

    pub fn shuffle_mul(&self, p: &BarChain, q: &BarChain) -> Result<BarChain, BarError> {
        self.check_degree(p.degree + q.degree)?;
        Ok(self.shuffle_raw(p, q))
    }

    /// Unchecked product; the operands may contain unit slots.
    pub(crate) fn shuffle_raw(&self, p: &BarChain, q: &BarChain) -> BarChain {
        let mut out = BarChain::zero(p.degree + q.degree);
        for (a, x) in &p.terms {
            for (b, y) in &q.terms {
                out.add_scaled(&(x * y), &self.shuffle_word(a, b));
            }
        }
        out
    }

    /// Shuffle product of chains from two configurations with the same inputs.
    pub fn shuffle_across(&self, other: &BarConfig, p: &BarChain, q: &BarChain) -> Result<BarChain, BarError> {
        if !self.same_inputs(other) {
            return Err(BarError::IncompatibleConfigs);
        }
        self.shuffle_mul(p, q)
    }

    /// The unit word as a chain.
    pub fn unit_chain(&self) -> BarChain {
        let mut c = BarChain::zero(0);
        c.add_term(BarWord::unit(), Q::one());
        c
    }
}
