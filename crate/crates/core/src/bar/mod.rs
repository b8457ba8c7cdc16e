//! The normalized two-sided bar complex `B(A, B, C)` and its version over the
//! base ring.
//!
//! A word `(a | w1 | ... | wk | c)` has complex degree
//! `deg a + sum (deg wi - 1) + deg c` and bar degree `-k`. Signs use
//! `eps_i = deg a + deg w1 + ... + deg wi - i`:
//!
//! | term                      | sign                  |
//! |---------------------------|-----------------------|
//! | `d a`                     | `+1`                  |
//! | `d wi`                    | `(-1)^(eps_(i-1) + 1)`|
//! | `d c`                     | `(-1)^eps_k`          |
//! | merge `a·w1`              | `-(-1)^eps_0`         |
//! | merge `wi·w(i+1)`         | `-(-1)^eps_i`         |
//! | merge `wk·c`              | `(-1)^eps_(k-1)`      |
//!
//! Outer merges act through `B -> R_B`, followed by the inclusion of the base
//! generators into `A` or `C` by name.

mod quotient;
mod shuffle;

pub use quotient::{VToken, QuotientSlice};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, RwLock};

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{rename_poly, Algebra, AlgebraError, AlgebraPresentation, AugTarget, Poly};
use crate::linalg::{Echelon, RationalMatrix, SpanSolver, SparseVec, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BarError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("middle algebra is not simply connected: slot space is nonzero in degree 1")]
    NotSimplyConnected,
    #[error("degree {degree} exceeds the truncation bound {max}")]
    DegreeOverflow { degree: i64, max: usize },
    #[error("augmentation ideal is not a free R-module in degree {0}")]
    NotFree(usize),
    #[error("base generator '{0}' is a zero divisor in both outer factors")]
    ZeroDivisor(String),
    #[error("over-R mode needs both outer factors equal to the base ring: {0}")]
    BaseMismatch(String),
    #[error("base generator '{0}' is not a cocycle")]
    BaseNotClosed(String),
    #[error("chains belong to different configurations")]
    IncompatibleConfigs,
    #[error("element is not in the span of V")]
    NotInV,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BarMode {
    OverK,
    OverR,
}

/// A basis element of one factor: degree and index into that degree's basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Factor {
    pub degree: usize,
    pub index: usize,
}

impl Factor {
    pub const UNIT: Factor = Factor {
        degree: 0,
        index: 0,
    };

    pub fn new(degree: usize, index: usize) -> Self {
        Self { degree, index }
    }

    pub fn is_unit(&self) -> bool {
        self.degree == 0
    }
}

/// Basis tensor `(left | slots | right)`.
///
/// Over `k` the slots index the normal-form bases of the middle algebra; over
/// `R` they index the chosen `R`-module basis of the augmentation ideal and
/// `right` is always the unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BarWord {
    pub left: Factor,
    pub slots: Vec<Factor>,
    pub right: Factor,
}

impl BarWord {
    pub fn unit() -> Self {
        Self {
            left: Factor::UNIT,
            slots: Vec::new(),
            right: Factor::UNIT,
        }
    }

    pub fn new(left: Factor, slots: Vec<Factor>, right: Factor) -> Self {
        Self { left, slots, right }
    }

    pub fn length(&self) -> usize {
        self.slots.len()
    }

    pub fn bar_degree(&self) -> i64 {
        -(self.slots.len() as i64)
    }

    pub fn tensor_degree(&self) -> usize {
        self.left.degree + self.slots.iter().map(|s| s.degree).sum::<usize>() + self.right.degree
    }

    pub fn complex_degree(&self) -> i64 {
        self.tensor_degree() as i64 - self.slots.len() as i64
    }

    /// Degree of the slots after suspension.
    pub fn suspended_slot_degree(&self) -> i64 {
        self.slots.iter().map(|s| s.degree as i64 - 1).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.slots.iter().all(|s| !s.is_unit())
    }

    /// `deg left + deg w1 + ... + deg wi - i`
    pub fn eps(&self, i: usize) -> i64 {
        self.left.degree as i64
            + self.slots[..i].iter().map(|s| s.degree as i64).sum::<i64>()
            - i as i64
    }
}

fn sign(parity: i64) -> Q {
    if parity.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Rational combination of words of one complex degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BarChain {
    pub degree: i64,
    pub terms: BTreeMap<BarWord, Q>,
}

impl BarChain {
    pub fn zero(degree: i64) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn word(w: BarWord) -> Self {
        let mut c = Self::zero(w.complex_degree());
        c.terms.insert(w, Q::one());
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: BarWord, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &BarChain) {
        for (w, x) in &other.terms {
            self.add_term(w.clone(), c * x);
        }
    }

    pub fn scaled(&self, c: &Q) -> BarChain {
        let mut out = BarChain::zero(self.degree);
        out.add_scaled(c, self);
        out
    }

    pub fn sub(&self, other: &BarChain) -> BarChain {
        let mut out = self.clone();
        out.add_scaled(&-Q::one(), other);
        out
    }

    /// Drops words with a unit slot.
    pub fn normalized(mut self) -> BarChain {
        self.terms.retain(|w, _| w.is_normalized());
        self
    }
}

/// `R`-module basis data of the augmentation ideal in one degree.
#[derive(Debug)]
struct RDegree {
    /// middle-algebra coordinates of the chosen basis elements
    gens: Vec<SparseVec>,
    /// `(r, g)` pairs whose products `r·g` form a basis of this degree
    products: Vec<(Factor, Factor)>,
    solver: SpanSolver,
}

#[derive(Debug, Default)]
struct Caches {
    basis: BTreeMap<usize, Arc<Vec<BarWord>>>,
    index: BTreeMap<usize, Arc<HashMap<BarWord, usize>>>,
    phi_left: HashMap<Factor, SparseVec>,
    phi_right: HashMap<Factor, SparseVec>,
    base_into: HashMap<(u8, Factor), SparseVec>,
    r_degrees: BTreeMap<usize, Arc<RDegree>>,
}

/// Face of the differential: `Internal(p)` applies `d` at position `p`
/// (0 is the left factor, `k + 1` the right one); `Merge(g)` multiplies
/// positions `g` and `g + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    Internal(usize),
    Merge(usize),
}

/// Which factor an element of the base ring is carried into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Middle,
    Right,
}

impl Side {
    fn tag(self) -> u8 {
        self as u8
    }
}

/// Inputs of a bar complex truncated at complex degree `max_degree`.
#[derive(Debug)]
pub struct BarConfig {
    left: Arc<Algebra>,
    middle: Arc<Algebra>,
    right: Arc<Algebra>,
    base: Arc<Algebra>,
    mode: BarMode,
    max_degree: usize,
    caches: RwLock<Caches>,
}

impl BarConfig {
    pub fn new(
        left: Arc<Algebra>,
        middle: Arc<Algebra>,
        right: Arc<Algebra>,
        mode: BarMode,
        max_degree: usize,
    ) -> Result<Self, BarError> {
        let base_pres = AlgebraPresentation::polynomial_ring(
            "R",
            middle.presentation().base_generators(),
        )?;
        let base = Arc::new(Algebra::new(base_pres));
        for g in middle.presentation().r_generators() {
            if !middle.presentation().differential_of(*g).is_zero() {
                return Err(BarError::BaseNotClosed(middle.gens().get(*g).name.clone()));
            }
        }
        if mode == BarMode::OverR {
            for (side, alg) in [("left", &left), ("right", &right)] {
                let p = alg.presentation();
                if p.gens().generators() != base.gens().generators() || !p.relations().is_empty() {
                    return Err(BarError::BaseMismatch(format!(
                        "{side} factor '{}' is not the base ring",
                        alg.name()
                    )));
                }
            }
        }
        let cfg = Self {
            left,
            middle,
            right,
            base,
            mode,
            max_degree,
            caches: RwLock::new(Caches::default()),
        };
        cfg.check_non_zero_divisors()?;
        Ok(cfg)
    }

    /// `B(R, H, R)` for an algebra `H` over its base ring.
    pub fn two_sided(middle: Arc<Algebra>, mode: BarMode, max_degree: usize) -> Result<Self, BarError> {
        let base = Arc::new(Algebra::new(AlgebraPresentation::polynomial_ring(
            "R",
            middle.presentation().base_generators(),
        )?));
        Self::new(base.clone(), middle, base, mode, max_degree)
    }

    pub fn left(&self) -> &Algebra {
        &self.left
    }

    pub fn middle(&self) -> &Algebra {
        &self.middle
    }

    pub fn right(&self) -> &Algebra {
        &self.right
    }

    pub fn base(&self) -> &Algebra {
        &self.base
    }

    pub fn mode(&self) -> BarMode {
        self.mode
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn same_inputs(&self, other: &BarConfig) -> bool {
        self.mode == other.mode
            && self.left.presentation() == other.left.presentation()
            && self.middle.presentation() == other.middle.presentation()
            && self.right.presentation() == other.right.presentation()
    }

    fn check_non_zero_divisors(&self) -> Result<(), BarError> {
        let n = self.max_degree;
        for (g, gen) in self.base.gens().generators().iter().enumerate() {
            let r = Factor::new(gen.degree, self.base_generator_index(g));
            let ok = [Side::Left, Side::Right].into_iter().any(|side| {
                let alg = self.side_algebra(side);
                let rv = self.base_into(side, r);
                !rv.is_zero()
                    && (0..=n.saturating_sub(gen.degree)).all(|m| {
                        let cols: Vec<SparseVec> = (0..alg.dim(m))
                            .map(|i| alg.mul_coords(gen.degree, &rv, m, &SparseVec::unit(i)))
                            .collect();
                        RationalMatrix::from_columns(alg.dim(m + gen.degree), &cols).rank()
                            == cols.len()
                    })
            });
            if !ok {
                return Err(BarError::ZeroDivisor(gen.name.clone()));
            }
        }
        Ok(())
    }

    /// Basis index of base generator `g` within its degree of `R`.
    fn base_generator_index(&self, g: usize) -> usize {
        let gens = self.base.gens();
        let d = gens.get(g).degree;
        let p = Poly::generator(gens.len(), g);
        let v = self.base.reduce(&p, d).expect("degree");
        v.leading().expect("generator is nonzero").0
    }

    /// Base generators as factors of `R`.
    pub fn base_generators(&self) -> Vec<Factor> {
        (0..self.base.gens().len())
            .map(|g| Factor::new(self.base.gens().get(g).degree, self.base_generator_index(g)))
            .collect()
    }

    fn side_algebra(&self, side: Side) -> &Algebra {
        match side {
            Side::Left => &self.left,
            Side::Middle => &self.middle,
            Side::Right => &self.right,
        }
    }

    /// Image of a basis element of `R` in one of the three factors.
    pub(crate) fn base_into(&self, side: Side, r: Factor) -> SparseVec {
        let key = (side.tag(), r);
        if let Some(v) = self.caches.read().unwrap().base_into.get(&key) {
            return v.clone();
        }
        let alg = self.side_algebra(side);
        let p = rename_poly(&self.base.basis_poly(r.degree, r.index), self.base.gens(), alg.gens());
        let v = alg.reduce(&p, r.degree).expect("degree");
        self.caches.write().unwrap().base_into.insert(key, v.clone());
        v
    }

    /// Structure map `B -> A` (or `B -> C`) on a basis element of `B`.
    fn phi(&self, side: Side, b: Factor) -> SparseVec {
        {
            let c = self.caches.read().unwrap();
            let map = if side == Side::Left { &c.phi_left } else { &c.phi_right };
            if let Some(v) = map.get(&b) {
                return v.clone();
            }
        }
        let target = self.side_algebra(side);
        let eps = self.middle.augment_poly(&self.middle.basis_poly(b.degree, b.index));
        let p = rename_poly(&eps, self.middle.gens(), target.gens());
        let v = target.reduce(&p, b.degree).expect("degree");
        let mut c = self.caches.write().unwrap();
        let map = if side == Side::Left { &mut c.phi_left } else { &mut c.phi_right };
        map.insert(b, v.clone());
        v
    }

    fn r_degree(&self, n: usize) -> Result<Arc<RDegree>, BarError> {
        if let Some(r) = self.caches.read().unwrap().r_degrees.get(&n) {
            return Ok(r.clone());
        }
        let h = &self.middle;
        let kernel = if n == 0 {
            Vec::new()
        } else {
            h.augmentation_ideal_coords(n, AugTarget::OverR)
        };
        let mut products = Vec::new();
        let mut vectors = Vec::new();
        for m in 1..=n {
            if self.base.dim(m) == 0 {
                continue;
            }
            let lower = self.r_degree(n - m)?;
            for ri in 0..self.base.dim(m) {
                let r = Factor::new(m, ri);
                let rv = self.base_into(Side::Middle, r);
                for (gi, g) in lower.gens.iter().enumerate() {
                    products.push((r, Factor::new(n - m, gi)));
                    vectors.push(h.mul_coords(m, &rv, n - m, g));
                }
            }
        }
        let mut ech = Echelon::new();
        for v in &vectors {
            ech.insert(v);
        }
        if ech.rank() != vectors.len() {
            return Err(BarError::NotFree(n));
        }
        let mut gens = Vec::new();
        for v in &kernel {
            if ech.insert(v).is_some() {
                gens.push(v.clone());
            }
        }
        if vectors.len() + gens.len() != kernel.len() {
            return Err(BarError::NotFree(n));
        }
        for (gi, g) in gens.iter().enumerate() {
            products.push((Factor::UNIT, Factor::new(n, gi)));
            vectors.push(g.clone());
        }
        let rd = Arc::new(RDegree {
            solver: SpanSolver::new(&vectors),
            gens,
            products,
        });
        self.caches.write().unwrap().r_degrees.insert(n, rd.clone());
        Ok(rd)
    }

    /// Number of slot basis elements of degree `n`.
    pub fn slot_dim(&self, n: usize) -> Result<usize, BarError> {
        match self.mode {
            BarMode::OverK => Ok(if n == 0 { 0 } else { self.middle.dim(n) }),
            BarMode::OverR => Ok(if n == 0 { 0 } else { self.r_degree(n)?.gens.len() }),
        }
    }

    /// Middle-algebra coordinates of a slot basis element.
    pub fn slot_element(&self, s: Factor) -> Result<SparseVec, BarError> {
        match self.mode {
            BarMode::OverK => Ok(SparseVec::unit(s.index)),
            BarMode::OverR => {
                if s.is_unit() {
                    return Ok(SparseVec::unit(0));
                }
                Ok(self.r_degree(s.degree)?.gens[s.index].clone())
            }
        }
    }

    /// Expansion of an augmentation-ideal element in the `R`-module basis.
    fn expand_over_r(&self, n: usize, v: &SparseVec) -> Result<Vec<(Factor, Factor, Q)>, BarError> {
        if v.is_zero() {
            return Ok(Vec::new());
        }
        let rd = self.r_degree(n)?;
        let c = rd.solver.solve(v).ok_or(BarError::NotFree(n))?;
        Ok(c.iter()
            .map(|(i, x)| (rd.products[i].0, rd.products[i].1, x.clone()))
            .collect())
    }

    fn outer_dim(&self, side: Side, n: usize) -> usize {
        match (self.mode, side) {
            (BarMode::OverR, Side::Right) => usize::from(n == 0),
            _ => self.side_algebra(side).dim(n),
        }
    }

    fn check_degree(&self, n: i64) -> Result<(), BarError> {
        if n > self.max_degree as i64 {
            Err(BarError::DegreeOverflow {
                degree: n,
                max: self.max_degree,
            })
        } else {
            Ok(())
        }
    }

    /// All normalized words of complex degree `n`, in a fixed order.
    pub fn bar_basis(&self, n: usize) -> Result<Arc<Vec<BarWord>>, BarError> {
        self.check_degree(n as i64)?;
        if let Some(b) = self.caches.read().unwrap().basis.get(&n) {
            return Ok(b.clone());
        }
        if self.slot_dim(1)? > 0 {
            return Err(BarError::NotSimplyConnected);
        }
        let slot_dims: Vec<usize> = (0..=n + 1).map(|d| self.slot_dim(d)).collect::<Result<_, _>>()?;
        let mut words = Vec::new();
        for k in 0..=n {
            for p in 0..=n {
                let lp = self.outer_dim(Side::Left, p);
                if lp == 0 {
                    continue;
                }
                for q in 0..=n - p {
                    let rq = self.outer_dim(Side::Right, q);
                    if rq == 0 {
                        continue;
                    }
                    let rest = n - p - q;
                    let mut comps = Vec::new();
                    compositions(rest, k, &mut Vec::new(), &mut comps);
                    for comp in comps {
                        let slot_degrees: Vec<usize> = comp.iter().map(|s| s + 1).collect();
                        if slot_degrees.iter().any(|&d| slot_dims[d] == 0) {
                            continue;
                        }
                        for li in 0..lp {
                            for ri in 0..rq {
                                let mut choice = vec![0usize; k];
                                loop {
                                    words.push(BarWord::new(
                                        Factor::new(p, li),
                                        slot_degrees
                                            .iter()
                                            .zip(&choice)
                                            .map(|(&d, &i)| Factor::new(d, i))
                                            .collect(),
                                        Factor::new(q, ri),
                                    ));
                                    if !advance(&mut choice, |i| slot_dims[slot_degrees[i]]) {
                                        break;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let words = Arc::new(words);
        let index: HashMap<BarWord, usize> =
            words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut c = self.caches.write().unwrap();
        c.basis.insert(n, words.clone());
        c.index.insert(n, Arc::new(index));
        Ok(words)
    }

    pub fn basis_index(&self, n: usize) -> Result<Arc<HashMap<BarWord, usize>>, BarError> {
        self.bar_basis(n)?;
        Ok(self.caches.read().unwrap().index[&n].clone())
    }

    /// Internal differential `d` on one word.
    pub fn d_word(&self, w: &BarWord) -> Result<BarChain, BarError> {
        let mut out = BarChain::zero(w.complex_degree() + 1);
        let k = w.length();
        match self.mode {
            BarMode::OverK => {
                for (_, v, c) in self.over_k_terms(w, true, false) {
                    out.add_term(v, c);
                }
            }
            BarMode::OverR => {
                for s in 0..k {
                    let sl = w.slots[s];
                    let g = self.slot_element(sl)?;
                    let dg = self.middle.d_coords(sl.degree, &g);
                    let sg = sign(w.eps(s) + 1);
                    for (r, g2, c) in self.expand_over_r(sl.degree + 1, &dg)? {
                        let mut v = w.clone();
                        v.slots[s] = g2;
                        self.fold_left(&mut out, v, w.left, r, &(&sg * &c));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adds `c · (left·r | rest)` to `out`, expanding the product in `R`.
    fn fold_left(&self, out: &mut BarChain, mut word: BarWord, left: Factor, r: Factor, c: &Q) {
        let prod = self
            .base
            .mul_basis(left.degree, left.index, r.degree, r.index);
        for (i, x) in prod.iter() {
            word.left = Factor::new(left.degree + r.degree, i);
            out.add_term(word.clone(), c * x);
        }
    }

    /// Merge differential `delta` on one word.
    pub fn delta_word(&self, w: &BarWord) -> Result<BarChain, BarError> {
        let mut out = BarChain::zero(w.complex_degree() + 1);
        let k = w.length();
        if k == 0 {
            return Ok(out);
        }
        match self.mode {
            BarMode::OverK => {
                for (_, v, c) in self.over_k_terms(w, false, true) {
                    out.add_term(v, c);
                }
            }
            BarMode::OverR => {
                // outer merges vanish: the outer factors see slots through eps
                for s in 0..k - 1 {
                    let (a, b) = (w.slots[s], w.slots[s + 1]);
                    let av = self.slot_element(a)?;
                    let bv = self.slot_element(b)?;
                    let n = a.degree + b.degree;
                    let prod = self.middle.mul_coords(a.degree, &av, b.degree, &bv);
                    let sg = -sign(w.eps(s + 1));
                    for (r, g, c) in self.expand_over_r(n, &prod)? {
                        let mut slots = w.slots[..s].to_vec();
                        slots.push(g);
                        slots.extend_from_slice(&w.slots[s + 2..]);
                        let v = BarWord::new(w.left, slots, w.right);
                        self.fold_left(&mut out, v, w.left, r, &(&sg * &c));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Terms of `d` and/or `delta` on an over-`k` word, tagged by the face
    /// that produced them. Unit slots are allowed.
    pub(crate) fn over_k_terms(&self, w: &BarWord, with_d: bool, with_delta: bool) -> Vec<(Op, BarWord, Q)> {
        let mut out = Vec::new();
        let k = w.length();
        if with_d {
            for (i, c) in self.left.d_basis(w.left.degree, w.left.index).iter() {
                let mut v = w.clone();
                v.left = Factor::new(w.left.degree + 1, i);
                out.push((Op::Internal(0), v, c.clone()));
            }
            for s in 0..k {
                let sl = w.slots[s];
                if sl.is_unit() {
                    continue;
                }
                let sg = sign(w.eps(s) + 1);
                for (i, c) in self.middle.d_basis(sl.degree, sl.index).iter() {
                    let mut v = w.clone();
                    v.slots[s] = Factor::new(sl.degree + 1, i);
                    out.push((Op::Internal(s + 1), v, &sg * c));
                }
            }
            let sg = sign(w.eps(k));
            for (i, c) in self.right.d_basis(w.right.degree, w.right.index).iter() {
                let mut v = w.clone();
                v.right = Factor::new(w.right.degree + 1, i);
                out.push((Op::Internal(k + 1), v, &sg * c));
            }
        }
        if with_delta && k > 0 {
            // a·w1
            let w1 = w.slots[0];
            let phi = self.phi(Side::Left, w1);
            let prod = self.left.mul_coords(
                w.left.degree,
                &SparseVec::unit(w.left.index),
                w1.degree,
                &phi,
            );
            let sg = -sign(w.eps(0));
            for (i, c) in prod.iter() {
                out.push((
                    Op::Merge(0),
                    BarWord::new(
                        Factor::new(w.left.degree + w1.degree, i),
                        w.slots[1..].to_vec(),
                        w.right,
                    ),
                    &sg * c,
                ));
            }
            for s in 0..k - 1 {
                let (a, b) = (w.slots[s], w.slots[s + 1]);
                let prod = self.middle.mul_basis(a.degree, a.index, b.degree, b.index);
                let sg = -sign(w.eps(s + 1));
                for (i, c) in prod.iter() {
                    let mut slots = w.slots[..s].to_vec();
                    slots.push(Factor::new(a.degree + b.degree, i));
                    slots.extend_from_slice(&w.slots[s + 2..]);
                    out.push((Op::Merge(s + 1), BarWord::new(w.left, slots, w.right), &sg * c));
                }
            }
            // wk·c
            let wk = w.slots[k - 1];
            let phi = self.phi(Side::Right, wk);
            let prod = self.right.mul_coords(
                wk.degree,
                &phi,
                w.right.degree,
                &SparseVec::unit(w.right.index),
            );
            let sg = sign(w.eps(k - 1));
            for (i, c) in prod.iter() {
                out.push((
                    Op::Merge(k),
                    BarWord::new(
                        w.left,
                        w.slots[..k - 1].to_vec(),
                        Factor::new(wk.degree + w.right.degree, i),
                    ),
                    &sg * c,
                ));
            }
        }
        out
    }

    /// `D = d + delta` on one word.
    pub fn differential_word(&self, w: &BarWord) -> Result<BarChain, BarError> {
        let mut out = self.d_word(w)?;
        out.add_scaled(&Q::one(), &self.delta_word(w)?);
        Ok(out)
    }

    fn apply(
        &self,
        ch: &BarChain,
        f: impl Fn(&BarWord) -> Result<BarChain, BarError>,
    ) -> Result<BarChain, BarError> {
        let mut out = BarChain::zero(ch.degree + 1);
        for (w, c) in &ch.terms {
            out.add_scaled(c, &f(w)?);
        }
        Ok(out)
    }

    /// `(d + delta)(ch)`; the chain must sit below the truncation degree.
    pub fn bar_d(&self, ch: &BarChain) -> Result<BarChain, BarError> {
        self.check_degree(ch.degree + 1)?;
        self.apply(ch, |w| self.differential_word(w))
    }

    pub fn d_internal(&self, ch: &BarChain) -> Result<BarChain, BarError> {
        self.check_degree(ch.degree + 1)?;
        self.apply(ch, |w| self.d_word(w))
    }

    pub fn delta(&self, ch: &BarChain) -> Result<BarChain, BarError> {
        self.check_degree(ch.degree + 1)?;
        self.apply(ch, |w| self.delta_word(w))
    }

    /// Unchecked `D`, also valid on words with unit slots.
    pub(crate) fn raw_d(&self, ch: &BarChain) -> BarChain {
        self.apply(ch, |w| self.differential_word(w)).expect("over-k words")
    }

    /// Coordinates of a chain in the basis of its degree.
    pub fn chain_coords(&self, ch: &BarChain) -> Result<SparseVec, BarError> {
        let n = usize::try_from(ch.degree).map_err(|_| BarError::DegreeOverflow {
            degree: ch.degree,
            max: self.max_degree,
        })?;
        let index = self.basis_index(n)?;
        let mut v = SparseVec::new();
        for (w, c) in &ch.terms {
            v.add_to(index[w], c.clone());
        }
        Ok(v)
    }

    pub fn chain_from_coords(&self, n: usize, v: &SparseVec) -> Result<BarChain, BarError> {
        let basis = self.bar_basis(n)?;
        let mut out = BarChain::zero(n as i64);
        for (i, c) in v.iter() {
            out.add_term(basis[i].clone(), c.clone());
        }
        Ok(out)
    }

    /// Matrix of `D` from complex degree `n` to `n + 1` (needs `n < max_degree`).
    pub fn differential_matrix(&self, n: usize) -> Result<RationalMatrix, BarError> {
        let src = self.bar_basis(n)?;
        let rows = self.bar_basis(n + 1)?.len();
        let index = self.basis_index(n + 1)?;
        let cols = src
            .iter()
            .map(|w| {
                let ch = self.differential_word(w)?;
                let mut v = SparseVec::new();
                for (w2, c) in &ch.terms {
                    v.add_to(index[w2], c.clone());
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, BarError>>()?;
        Ok(RationalMatrix::from_columns(rows, &cols))
    }

    /// Whether all three factors have zero differential, in which case `D`
    /// preserves tensor degree.
    pub fn differentials_vanish(&self) -> bool {
        !self.left.presentation().has_differential()
            && !self.middle.presentation().has_differential()
            && !self.right.presentation().has_differential()
    }

    /// Middle-algebra element carried by a slot, as a polynomial.
    pub fn slot_poly(&self, s: Factor) -> Result<Poly, BarError> {
        Ok(self.middle.coords_to_poly(s.degree, &self.slot_element(s)?))
    }

    pub fn display_word(&self, w: &BarWord) -> String {
        self.display_word_with(w, |p| p)
    }

    /// Like [`display_word`](Self::display_word), with `slot` applied to each
    /// slot polynomial first.
    pub fn display_word_with(&self, w: &BarWord, slot: impl Fn(Poly) -> Poly) -> String {
        let mut out = String::from("(");
        let left = self.left.basis_poly(w.left.degree, w.left.index);
        out.push_str(&left.display(self.left.gens()));
        for s in &w.slots {
            out.push_str(" | ");
            let p = slot(self.slot_poly(*s).unwrap_or_default());
            let text = p.display(self.middle.gens());
            if p.len() > 1 {
                let _ = write!(out, "({text})");
            } else {
                out.push_str(&text);
            }
        }
        out.push_str(" | ");
        let right = match self.mode {
            BarMode::OverR => "1".to_string(),
            BarMode::OverK => self
                .right
                .basis_poly(w.right.degree, w.right.index)
                .display(self.right.gens()),
        };
        out.push_str(&right);
        out.push(')');
        out
    }

    pub fn display_chain(&self, ch: &BarChain) -> String {
        crate::algebra::fmt_terms(
            ch.terms
                .iter()
                .map(|(w, c)| (self.display_word(w), c.clone())),
        )
    }
}

/// Compositions of `n` into exactly `k` positive parts.
fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 0 {
        if n == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if n < k {
        return;
    }
    for first in 1..=n - (k - 1) {
        prefix.push(first);
        compositions(n - first, k - 1, prefix, out);
        prefix.pop();
    }
}

/// Odometer step over `choice[i] < limit(i)`; false after the last tuple.
fn advance(choice: &mut [usize], limit: impl Fn(usize) -> usize) -> bool {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < limit(i) {
            return true;
        }
        choice[i] = 0;
    }
    false
}

#[cfg(test)]
mod tests;
