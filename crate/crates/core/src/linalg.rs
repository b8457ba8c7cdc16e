//! Exact sparse linear algebra over the rationals.
//!
//! Every rank and kernel in the crate goes through this module. Pivoting is
//! deterministic (leftmost nonzero column, earliest row), so repeated runs
//! produce identical bases and representatives.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Sparse vector with only nonzero entries stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: BTreeMap<usize, Q>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::new();
        v.entries.insert(i, Q::one());
        v
    }

    pub fn from_dense(values: &[Q]) -> Self {
        let mut v = Self::new();
        for (i, x) in values.iter().enumerate() {
            v.add_to(i, x.clone());
        }
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Q)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (i, x) in pairs {
            v.add_to(i, x);
        }
        v
    }

    pub fn to_dense(&self, len: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); len];
        for (&i, x) in &self.entries {
            out[i] = x.clone();
        }
        out
    }

    pub fn get(&self, i: usize) -> Q {
        self.entries.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn get_ref(&self, i: usize) -> Option<&Q> {
        self.entries.get(&i)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn leading(&self) -> Option<(usize, &Q)> {
        self.entries.iter().next().map(|(&i, x)| (i, x))
    }

    /// Largest stored index, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.entries.iter().map(|(&i, x)| (i, x))
    }

    pub fn add_to(&mut self, i: usize, x: Q) {
        if x.is_zero() {
            return;
        }
        match self.entries.entry(i) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(x);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += x;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: &Q, other: &SparseVec) {
        if c.is_zero() {
            return;
        }
        for (&i, x) in &other.entries {
            self.add_to(i, c * x);
        }
    }

    pub fn scale(&mut self, c: &Q) {
        if c.is_zero() {
            self.entries.clear();
            return;
        }
        for x in self.entries.values_mut() {
            *x *= c;
        }
    }

    pub fn scaled(&self, c: &Q) -> SparseVec {
        let mut v = self.clone();
        v.scale(c);
        v
    }

    pub fn dot(&self, other: &SparseVec) -> Q {
        let mut acc = Q::zero();
        for (i, x) in self.iter() {
            if let Some(y) = other.get_ref(i) {
                acc += x * y;
            }
        }
        acc
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(i, x)| (i, x.to_string())))
            .finish()
    }
}

/// Sparse matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseVec>,
}

impl RationalMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: vec![SparseVec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            rows: (0..n).map(SparseVec::unit).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        Self {
            nrows: rows.len(),
            ncols,
            rows: rows.iter().map(|r| SparseVec::from_dense(r)).collect(),
        }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let rows: Vec<Vec<Q>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| q(x)).collect())
            .collect();
        Self::from_dense(&rows)
    }

    pub fn from_rows(ncols: usize, rows: Vec<SparseVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.max_index().is_none_or(|m| m < ncols)));
        Self {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(nrows: usize, columns: &[SparseVec]) -> Self {
        let mut rows = vec![SparseVec::new(); nrows];
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter() {
                rows[i].add_to(j, x.clone());
            }
        }
        Self {
            nrows,
            ncols: columns.len(),
            rows,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.rows[i].entries.remove(&j);
        self.rows[i].add_to(j, x);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(SparseVec::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_columns(self.ncols, &self.rows)
    }

    pub fn columns(&self) -> Vec<SparseVec> {
        self.transpose().rows
    }

    pub fn mul_vec(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, row) in self.rows.iter().enumerate() {
            out.add_to(i, row.dot(v));
        }
        out
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix, LinalgError> {
        if self.ncols != other.nrows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ncols,
                found: other.nrows,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = SparseVec::new();
                for (k, x) in row.iter() {
                    acc.add_scaled(x, &other.rows[k]);
                }
                acc
            })
            .collect();
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            rows,
        })
    }

    pub fn rank(&self) -> usize {
        rank_of(self.rows.iter().cloned())
    }
}

/// Incremental row echelon form.
///
/// Rows are stored with a leading coefficient of one and kept fully reduced
/// against each other, so the stored rows always form the RREF of what has
/// been inserted.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVec)> {
        self.pivots.iter().map(|(&c, r)| (c, r))
    }

    /// Reduces `v` so that it vanishes on every pivot column.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        for (col, row) in &self.pivots {
            if let Some(c) = v.get_ref(*col).cloned() {
                v.add_scaled(&-c, row);
            }
        }
        v
    }

    /// Inserts a vector; returns its new pivot column when it was independent.
    pub fn insert(&mut self, v: &SparseVec) -> Option<usize> {
        let mut v = self.reduce(v);
        let (col, lead) = match v.leading() {
            Some((c, x)) => (c, x.clone()),
            None => return None,
        };
        v.scale(&lead.recip());
        for row in self.pivots.values_mut() {
            if let Some(c) = row.get_ref(col).cloned() {
                row.add_scaled(&-c, &v);
            }
        }
        self.pivots.insert(col, v);
        Some(col)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }
}

/// Rank of a set of vectors, computed without back substitution.
pub fn rank_of<I: IntoIterator<Item = SparseVec>>(rows: I) -> usize {
    let mut pivots: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for row in rows {
        let mut v = row;
        loop {
            let (col, lead) = match v.leading() {
                Some((c, x)) => (c, x.clone()),
                None => break,
            };
            match pivots.get(&col) {
                Some(p) => {
                    let c = -lead;
                    v.add_scaled(&c, p);
                }
                None => {
                    v.scale(&lead.recip());
                    pivots.insert(col, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut ech = Echelon::new();
    for row in &m.rows {
        ech.insert(row);
    }
    let pivots = ech.pivot_columns();
    let mut rows: Vec<SparseVec> = ech.pivots.into_values().collect();
    rows.resize(m.nrows, SparseVec::new());
    (RationalMatrix::from_rows(m.ncols, rows), pivots)
}

/// Linear subspace of `Q^ambient_dim`, stored by its RREF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<SparseVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: (0..ambient_dim).map(SparseVec::unit).collect(),
            pivots: (0..ambient_dim).collect(),
        }
    }

    pub fn span<'a, I: IntoIterator<Item = &'a SparseVec>>(ambient_dim: usize, vectors: I) -> Self {
        let mut ech = Echelon::new();
        for v in vectors {
            ech.insert(v);
        }
        Self::from_echelon(ambient_dim, ech)
    }

    fn from_echelon(ambient_dim: usize, ech: Echelon) -> Self {
        let pivots = ech.pivot_columns();
        let basis = ech.pivots.into_values().collect();
        Self {
            ambient_dim,
            basis,
            pivots,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.coordinates(v).is_some()
    }

    /// Coefficients of `v` over the stored basis, or `None` if `v` is outside.
    fn coordinates(&self, v: &SparseVec) -> Option<Vec<Q>> {
        let coeffs: Vec<Q> = self.pivots.iter().map(|&p| v.get(p)).collect();
        let mut rest = v.clone();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            rest.add_scaled(&-c.clone(), b);
        }
        rest.is_zero().then_some(coeffs)
    }

    /// Projects `v` to the canonical representative of `v + self`, which
    /// vanishes on every pivot column.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut rest = v.clone();
        for (&p, b) in self.pivots.iter().zip(&self.basis) {
            if let Some(c) = rest.get_ref(p).cloned() {
                rest.add_scaled(&-c, b);
            }
        }
        rest
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.ambient_dim, self.basis.iter().chain(other.basis.iter()))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }
}

/// Basis of the null space `{v : m v = 0}`.
pub fn kernel_basis(m: &RationalMatrix) -> Subspace {
    let (r, pivots) = rref(m);
    let n = m.ncols();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut vectors = Vec::new();
    for free in (0..n).filter(|c| !pivot_set.contains(c)) {
        let mut v = SparseVec::unit(free);
        for (row_idx, &p) in pivots.iter().enumerate() {
            let x = r.get(row_idx, free);
            v.add_to(p, -x);
        }
        vectors.push(v);
    }
    Subspace::span(n, vectors.iter())
}

/// Coefficients expressing `v` in the basis of `span`, or `Ok(None)` if `v`
/// lies outside it.
pub fn solve_modulo(v: &SparseVec, span: &Subspace) -> Result<Option<Vec<Q>>, LinalgError> {
    if let Some(m) = v.max_index() {
        if m >= span.ambient_dim {
            return Err(LinalgError::DimensionMismatch {
                expected: span.ambient_dim,
                found: m + 1,
            });
        }
    }
    Ok(span.coordinates(v))
}

/// Dense-vector wrapper around [`solve_modulo`].
pub fn solve_modulo_dense(v: &[Q], span: &Subspace) -> Result<Option<Vec<Q>>, LinalgError> {
    if v.len() != span.ambient_dim {
        return Err(LinalgError::DimensionMismatch {
            expected: span.ambient_dim,
            found: v.len(),
        });
    }
    solve_modulo(&SparseVec::from_dense(v), span)
}

/// Expresses vectors as combinations of a fixed generating list.
///
/// Unlike [`Subspace`], coordinates refer to the original (not necessarily
/// echelon) generators, which is what class extraction and lift computations
/// need.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    len: usize,
    // pivot column -> (row, combination of generators producing the row)
    pivots: BTreeMap<usize, (SparseVec, SparseVec)>,
    independent: Vec<usize>,
}

impl SpanSolver {
    pub fn new(generators: &[SparseVec]) -> Self {
        let mut pivots: BTreeMap<usize, (SparseVec, SparseVec)> = BTreeMap::new();
        let mut independent = Vec::new();
        for (g, v) in generators.iter().enumerate() {
            let mut row = v.clone();
            let mut combo = SparseVec::unit(g);
            loop {
                let (col, lead) = match row.leading() {
                    Some((c, x)) => (c, x.clone()),
                    None => break,
                };
                match pivots.get(&col) {
                    Some((prow, pcombo)) => {
                        let c = -lead;
                        row.add_scaled(&c, prow);
                        combo.add_scaled(&c, pcombo);
                    }
                    None => {
                        let inv = lead.recip();
                        row.scale(&inv);
                        combo.scale(&inv);
                        pivots.insert(col, (row, combo));
                        independent.push(g);
                        break;
                    }
                }
            }
        }
        Self {
            len: generators.len(),
            pivots,
            independent,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn generator_count(&self) -> usize {
        self.len
    }

    /// Indices of generators that were independent of their predecessors.
    pub fn independent(&self) -> &[usize] {
        &self.independent
    }

    /// Some combination `c` with `sum c_g generators[g] = v`, if one exists.
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        let mut rest = v.clone();
        let mut coeffs = SparseVec::new();
        loop {
            let (col, lead) = match rest.leading() {
                Some((c, x)) => (c, x.clone()),
                None => return Some(coeffs),
            };
            let (prow, pcombo) = self.pivots.get(&col)?;
            rest.add_scaled(&-lead.clone(), prow);
            coeffs.add_scaled(&lead, pcombo);
        }
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn is_negative(x: &Q) -> bool {
    x.is_negative()
}
