//! `Tor_H(R, R)` for an augmented algebra `H` over its base ring `R`, read off
//! the truncated bar complex `B(R, H, R)`, with representative cocycles,
//! shuffle-ring constants and cross-checks against the over-`k` complex and a
//! CDGA model.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, AlgebraPresentation, Poly};
use crate::bar::{BarChain, BarConfig, BarError, BarMode, BarWord, Factor};
use crate::cdga::{CdgaInstance, ClassPair};
use crate::linalg::{kernel_basis, rank_of, solve_modulo, RationalMatrix, SparseVec, Subspace, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Bar(#[from] BarError),
    #[error("generator '{0}' has nonzero differential; Tor needs a cohomology ring")]
    NonzeroDifferential(String),
    #[error("over-k and over-R Betti numbers differ in degree {degree}: {over_k} vs {over_r}")]
    ModeDisagreement { degree: usize, over_k: usize, over_r: usize },
    #[error("extracted generator in degree {0} is not a cocycle")]
    NotCocycle(usize),
    #[error("cross-check needs mode both or an oracle model")]
    NothingToCompare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TorMode {
    OverR,
    OverK,
    Both,
}

#[derive(Clone, Debug)]
pub struct TorRequest {
    pub algebra: AlgebraPresentation,
    pub max_degree: usize,
    pub mode: TorMode,
    pub want_ring: bool,
    pub want_representatives: bool,
}

impl TorRequest {
    /// Over-`R` request with representatives and no ring data.
    pub fn new(algebra: AlgebraPresentation, max_degree: usize) -> Self {
        Self {
            algebra,
            max_degree,
            mode: TorMode::OverR,
            want_ring: false,
            want_representatives: true,
        }
    }

    pub fn mode(mut self, mode: TorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn ring(mut self, on: bool) -> Self {
        self.want_ring = on;
        self
    }

    pub fn representatives(mut self, on: bool) -> Self {
        self.want_representatives = on;
        self
    }
}

/// A basis class of `Tor` in one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorGenerator {
    pub degree: usize,
    pub chain: BarChain,
    pub display: String,
    /// the chain with base-ring terms dropped from each slot, when that
    /// changes anything (over `R`, `x + u` becomes `x`)
    pub projected: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Product {
    /// coordinates over the generators of the product degree
    Class(Vec<Q>),
    OutsideTruncation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorResult {
    pub max_degree: usize,
    /// complex the generators and ring data come from
    pub mode: BarMode,
    pub betti: BTreeMap<usize, usize>,
    /// filled in mode `Both`
    pub over_k_betti: Option<BTreeMap<usize, usize>>,
    pub generators: BTreeMap<usize, Vec<TorGenerator>>,
    /// `((p, i), (q, j))` to the product of generator `i` of degree `p` with
    /// generator `j` of degree `q`
    pub ring_constants: BTreeMap<ClassPair, Product>,
    /// `(r, (p, i))` to `r` times generator `i` of degree `p`
    pub r_module_structure: BTreeMap<(String, (usize, usize)), Product>,
}

/// One tensor-degree block of a complex degree.
#[derive(Debug)]
struct Block {
    outgoing: RationalMatrix,
    boundaries: Subspace,
    /// RREF basis of cycle normal forms modulo boundaries
    classes: Subspace,
}

#[derive(Debug)]
struct DegreeHomology {
    blocks: Vec<Block>,
    block_of: Vec<(usize, usize)>,
    representatives: Vec<SparseVec>,
}

impl DegreeHomology {
    fn betti(&self) -> usize {
        self.representatives.len()
    }

    fn restrict(&self, b: usize, v: &SparseVec) -> SparseVec {
        SparseVec::from_pairs(
            v.iter()
                .filter(|(i, _)| self.block_of[*i].0 == b)
                .map(|(i, c)| (self.block_of[i].1, c.clone())),
        )
    }

    /// Class coordinates of a cycle, or `None` when `v` is not a cycle.
    fn class_of(&self, v: &SparseVec) -> Option<Vec<Q>> {
        let mut out = Vec::with_capacity(self.betti());
        for (b, block) in self.blocks.iter().enumerate() {
            let part = self.restrict(b, v);
            if !block.outgoing.mul_vec(&part).is_zero() {
                return None;
            }
            let nf = block.boundaries.reduce(&part);
            let c = solve_modulo(&nf, &block.classes)
                .expect("block dimensions")
                .expect("cycle normal forms lie in the class span");
            out.extend(c);
        }
        Some(out)
    }
}

/// Splits `0..words.len()` by tensor degree, or keeps one block.
fn partition(words: &[BarWord], split: bool) -> Vec<Vec<usize>> {
    if !split {
        return vec![(0..words.len()).collect()];
    }
    let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, w) in words.iter().enumerate() {
        by.entry(w.tensor_degree()).or_default().push(i);
    }
    by.into_values().collect()
}

fn keyed_partition(words: &[BarWord], split: bool) -> HashMap<usize, Vec<usize>> {
    let mut by: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        by.entry(if split { w.tensor_degree() } else { 0 }).or_default().push(i);
    }
    by
}

fn submatrix(m: &RationalMatrix, rows: &[usize], cols: &[usize]) -> RationalMatrix {
    let pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let picked = rows
        .iter()
        .map(|&r| {
            SparseVec::from_pairs(
                m.row(r)
                    .iter()
                    .filter_map(|(c, x)| pos.get(&c).map(|&p| (p, x.clone()))),
            )
        })
        .collect();
    RationalMatrix::from_rows(cols.len(), picked)
}

/// The complex `B(R, H, R)` in one mode, solved in degrees `0..=max_degree`.
#[derive(Debug)]
struct TorComplex {
    cfg: BarConfig,
    max_degree: usize,
    degrees: Vec<DegreeHomology>,
}

impl TorComplex {
    fn build(h: Arc<Algebra>, mode: BarMode, max_degree: usize) -> Result<Self, TorError> {
        let cfg = BarConfig::two_sided(h, mode, max_degree + 1)?;
        let split = cfg.differentials_vanish();
        let bases = (0..=max_degree + 1)
            .into_par_iter()
            .map(|n| cfg.bar_basis(n))
            .collect::<Result<Vec<_>, _>>()?;
        let matrices = (0..=max_degree)
            .into_par_iter()
            .map(|n| cfg.differential_matrix(n))
            .collect::<Result<Vec<_>, _>>()?;
        let degrees = (0..=max_degree)
            .into_par_iter()
            .map(|n| {
                let words = &bases[n];
                let parts = partition(words, split);
                let prev = if n == 0 {
                    HashMap::new()
                } else {
                    keyed_partition(&bases[n - 1], split)
                };
                let next = keyed_partition(&bases[n + 1], split);
                let mut block_of = vec![(0, 0); words.len()];
                let mut blocks = Vec::new();
                let mut representatives = Vec::new();
                for (b, indices) in parts.into_iter().enumerate() {
                    for (p, &i) in indices.iter().enumerate() {
                        block_of[i] = (b, p);
                    }
                    let key = if split { words[indices[0]].tensor_degree() } else { 0 };
                    let empty = Vec::new();
                    let outgoing = submatrix(&matrices[n], next.get(&key).unwrap_or(&empty), &indices);
                    let boundaries = match prev.get(&key) {
                        Some(src) => {
                            let incoming = submatrix(&matrices[n - 1], &indices, src);
                            Subspace::span(indices.len(), incoming.columns().iter())
                        }
                        None => Subspace::zero(indices.len()),
                    };
                    let forms: Vec<SparseVec> = kernel_basis(&outgoing)
                        .basis()
                        .iter()
                        .map(|z| boundaries.reduce(z))
                        .collect();
                    let classes = Subspace::span(indices.len(), forms.iter());
                    for r in classes.basis() {
                        representatives.push(SparseVec::from_pairs(
                            r.iter().map(|(p, c)| (indices[p], c.clone())),
                        ));
                    }
                    blocks.push(Block {
                        outgoing,
                        boundaries,
                        classes,
                    });
                }
                DegreeHomology {
                    blocks,
                    block_of,
                    representatives,
                }
            })
            .collect();
        Ok(Self {
            cfg,
            max_degree,
            degrees,
        })
    }

    /// Betti numbers from ranks alone.
    fn betti_by_rank(h: Arc<Algebra>, mode: BarMode, max_degree: usize) -> Result<BTreeMap<usize, usize>, TorError> {
        let cfg = BarConfig::two_sided(h, mode, max_degree + 1)?;
        let split = cfg.differentials_vanish();
        let bases = (0..=max_degree + 1)
            .into_par_iter()
            .map(|n| cfg.bar_basis(n))
            .collect::<Result<Vec<_>, _>>()?;
        // ranks[n]: rank of D from degree n, summed over blocks
        let ranks = (0..=max_degree)
            .into_par_iter()
            .map(|n| {
                let m = cfg.differential_matrix(n)?;
                let next = keyed_partition(&bases[n + 1], split);
                let mut total = 0;
                for indices in partition(&bases[n], split) {
                    let key = if split { bases[n][indices[0]].tensor_degree() } else { 0 };
                    if let Some(rows) = next.get(&key) {
                        total += rank_of(submatrix(&m, rows, &indices).columns());
                    }
                }
                Ok(total)
            })
            .collect::<Result<Vec<usize>, TorError>>()?;
        Ok((0..=max_degree)
            .map(|n| {
                let incoming = if n == 0 { 0 } else { ranks[n - 1] };
                (n, bases[n].len() - ranks[n] - incoming)
            })
            .collect())
    }

    fn betti(&self) -> BTreeMap<usize, usize> {
        self.degrees.iter().enumerate().map(|(n, d)| (n, d.betti())).collect()
    }

    fn chain(&self, n: usize, v: &SparseVec) -> BarChain {
        self.cfg.chain_from_coords(n, v).expect("degree in range")
    }

    fn generators(&self) -> Result<BTreeMap<usize, Vec<TorGenerator>>, TorError> {
        let base = self.cfg.middle().presentation().r_generators().to_vec();
        let drop_base = |p: Poly| {
            let mut out = Poly::zero();
            for (m, c) in p.terms() {
                if !m.supported_on(&base) {
                    out.add_term(m.clone(), c.clone());
                }
            }
            out
        };
        let mut out = BTreeMap::new();
        for (n, d) in self.degrees.iter().enumerate() {
            let mut gens = Vec::new();
            for v in &d.representatives {
                let chain = self.chain(n, v);
                if !self.cfg.bar_d(&chain)?.is_zero() {
                    return Err(TorError::NotCocycle(n));
                }
                let display = self.cfg.display_chain(&chain);
                let projected = crate::algebra::fmt_terms(
                    chain
                        .terms
                        .iter()
                        .map(|(w, c)| (self.cfg.display_word_with(w, drop_base), c.clone())),
                );
                gens.push(TorGenerator {
                    degree: n,
                    chain,
                    projected: (projected != display).then_some(projected),
                    display,
                });
            }
            out.insert(n, gens);
        }
        Ok(out)
    }

    fn class_of_chain(&self, ch: &BarChain) -> Product {
        let n = match usize::try_from(ch.degree) {
            Ok(n) if n <= self.max_degree => n,
            _ => return Product::OutsideTruncation,
        };
        let v = self.cfg.chain_coords(ch).expect("normalized words");
        Product::Class(self.degrees[n].class_of(&v).expect("products of cycles are cycles"))
    }

    fn ring_constants(&self) -> BTreeMap<ClassPair, Product> {
        let mut keys = Vec::new();
        for p in 0..=self.max_degree {
            for q in 0..=self.max_degree {
                for i in 0..self.degrees[p].betti() {
                    for j in 0..self.degrees[q].betti() {
                        keys.push(((p, i), (q, j)));
                    }
                }
            }
        }
        keys.into_par_iter()
            .map(|((p, i), (q, j))| {
                let prod = if p + q > self.max_degree {
                    Product::OutsideTruncation
                } else {
                    let a = self.chain(p, &self.degrees[p].representatives[i]);
                    let b = self.chain(q, &self.degrees[q].representatives[j]);
                    let ab = self.cfg.shuffle_mul(&a, &b).expect("degree in range");
                    self.class_of_chain(&ab)
                };
                (((p, i), (q, j)), prod)
            })
            .collect()
    }

    fn r_module_structure(&self) -> BTreeMap<(String, (usize, usize)), Product> {
        let mut out = BTreeMap::new();
        let names: Vec<String> = self
            .cfg
            .base()
            .gens()
            .generators()
            .iter()
            .map(|g| g.name.clone())
            .collect();
        for (r, name) in self.cfg.base_generators().into_iter().zip(names) {
            let rw = BarChain::word(BarWord::new(r, Vec::new(), Factor::UNIT));
            for (p, d) in self.degrees.iter().enumerate() {
                for i in 0..d.betti() {
                    let prod = if p + r.degree > self.max_degree {
                        Product::OutsideTruncation
                    } else {
                        let a = self.chain(p, &d.representatives[i]);
                        let ra = self.cfg.shuffle_mul(&rw, &a).expect("degree in range");
                        self.class_of_chain(&ra)
                    };
                    out.insert((name.clone(), (p, i)), prod);
                }
            }
        }
        out
    }
}

fn require_cohomology_ring(pres: &AlgebraPresentation) -> Result<(), TorError> {
    for (g, gen) in pres.gens().generators().iter().enumerate() {
        if !pres.differential_of(g).is_zero() {
            return Err(TorError::NonzeroDifferential(gen.name.clone()));
        }
    }
    Ok(())
}

fn prepare(req: &TorRequest) -> Result<Arc<Algebra>, TorError> {
    require_cohomology_ring(&req.algebra)?;
    Ok(Arc::new(Algebra::validated(req.algebra.clone(), req.max_degree + 2)?))
}

/// Checks an algebra supplied by the caller against the request.
fn adopt(h: &Algebra, req: &TorRequest) -> Result<(), TorError> {
    require_cohomology_ring(h.presentation())?;
    h.validate(req.max_degree + 2)?;
    Ok(())
}

fn check_agreement(over_k: &BTreeMap<usize, usize>, over_r: &BTreeMap<usize, usize>) -> Result<(), TorError> {
    for (&n, &b) in over_r {
        let k = over_k.get(&n).copied().unwrap_or(0);
        if k != b {
            return Err(TorError::ModeDisagreement {
                degree: n,
                over_k: k,
                over_r: b,
            });
        }
    }
    Ok(())
}

fn primary_mode(mode: TorMode) -> BarMode {
    match mode {
        TorMode::OverK => BarMode::OverK,
        TorMode::OverR | TorMode::Both => BarMode::OverR,
    }
}

fn run_on(h: Arc<Algebra>, req: &TorRequest, ring: bool, enforce: bool) -> Result<TorResult, TorError> {
    let mode = primary_mode(req.mode);
    let n = req.max_degree;
    let over_k_betti = if req.mode == TorMode::Both {
        Some(TorComplex::betti_by_rank(h.clone(), BarMode::OverK, n)?)
    } else {
        None
    };
    let mut result = TorResult {
        max_degree: n,
        mode,
        betti: BTreeMap::new(),
        over_k_betti,
        generators: BTreeMap::new(),
        ring_constants: BTreeMap::new(),
        r_module_structure: BTreeMap::new(),
    };
    if req.want_representatives || ring {
        let complex = TorComplex::build(h, mode, n)?;
        result.betti = complex.betti();
        if req.want_representatives {
            result.generators = complex.generators()?;
        }
        if ring {
            result.ring_constants = complex.ring_constants();
            result.r_module_structure = complex.r_module_structure();
        }
    } else {
        result.betti = TorComplex::betti_by_rank(h, mode, n)?;
    }
    if enforce {
        if let Some(k) = &result.over_k_betti {
            check_agreement(k, &result.betti)?;
        }
    }
    Ok(result)
}

/// Betti numbers and (if requested) representatives of `Tor_H(R, R)` in
/// degrees `0..=max_degree`.
pub fn tor_betti(req: &TorRequest) -> Result<TorResult, TorError> {
    run_on(prepare(req)?, req, false, true)
}

/// [`tor_betti`] plus shuffle-ring constants and the action of the base
/// generators.
pub fn tor_ring_constants(req: &TorRequest) -> Result<TorResult, TorError> {
    run_on(prepare(req)?, req, true, true)
}

/// Either of the above, following `req.want_ring`, on an algebra built by
/// the caller from `req.algebra` (for instance with seeded degree bases).
pub fn tor_on(h: Arc<Algebra>, req: &TorRequest) -> Result<TorResult, TorError> {
    adopt(&h, req)?;
    run_on(h, req, req.want_ring, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    ModeBetti,
    OracleBetti,
    OracleRing,
}

impl CheckKind {
    pub fn tag(self) -> &'static str {
        match self {
            CheckKind::ModeBetti => "mode-betti",
            CheckKind::OracleBetti => "oracle-betti",
            CheckKind::OracleRing => "oracle-ring",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub check: CheckKind,
    pub degree: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub max_degree: usize,
    pub betti: BTreeMap<usize, usize>,
    pub over_k_betti: Option<BTreeMap<usize, usize>>,
    pub oracle_betti: Option<BTreeMap<usize, usize>>,
    /// `(p, q)` to the ranks of multiplication `Tor^p x Tor^q -> Tor^(p+q)`
    /// and of the oracle's `H^p x H^q -> H^(p+q)`
    pub ring_ranks: BTreeMap<(usize, usize), (usize, usize)>,
    pub divergences: Vec<Divergence>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn first_divergence(&self) -> Option<&Divergence> {
        self.divergences.iter().min_by_key(|d| (d.degree, d.check))
    }
}

/// Rank of `(p, q)` multiplication from a table of products.
fn product_rank<'a, I>(entries: I, p: usize, q: usize) -> usize
where
    I: IntoIterator<Item = (&'a ClassPair, &'a [Q])>,
{
    rank_of(
        entries
            .into_iter()
            .filter(|(((a, _), (b, _)), _)| *a == p && *b == q)
            .map(|(_, v)| SparseVec::from_dense(v)),
    )
}

/// Compares the primary result with the over-`k` complex (mode `Both`) and
/// with the cohomology of an oracle model.
pub fn crosscheck(req: &TorRequest, oracle: Option<&CdgaInstance>) -> Result<CrosscheckReport, TorError> {
    crosscheck_on(prepare(req)?, req, oracle).map(|(_, r)| r)
}

/// [`crosscheck`] on a caller-built algebra, also returning the Tor result
/// it compared. Ring data is computed whenever an oracle is given.
pub fn crosscheck_on(
    h: Arc<Algebra>,
    req: &TorRequest,
    oracle: Option<&CdgaInstance>,
) -> Result<(TorResult, CrosscheckReport), TorError> {
    if req.mode != TorMode::Both && oracle.is_none() {
        return Err(TorError::NothingToCompare);
    }
    adopt(&h, req)?;
    let result = run_on(h, req, req.want_ring || oracle.is_some(), false)?;
    let report = compare(&result, oracle);
    Ok((result, report))
}

fn compare(result: &TorResult, oracle: Option<&CdgaInstance>) -> CrosscheckReport {
    let n = result.max_degree;
    let betti = &result.betti;
    let mut divergences = Vec::new();
    if let Some(k) = &result.over_k_betti {
        for (&d, &b) in betti {
            if k[&d] != b {
                divergences.push(Divergence {
                    check: CheckKind::ModeBetti,
                    degree: d,
                    detail: format!("over-k {} vs over-R {}", k[&d], b),
                });
            }
        }
    }
    let mut oracle_betti = None;
    let mut ring_ranks = BTreeMap::new();
    if let Some(model) = oracle {
        let table = model.cohomology();
        let top = n.min(model.max_degree());
        for d in 0..=top {
            if table.betti[&d] != betti[&d] {
                divergences.push(Divergence {
                    check: CheckKind::OracleBetti,
                    degree: d,
                    detail: format!("oracle {} vs Tor {}", table.betti[&d], betti[&d]),
                });
            }
        }
        let tor_ring: BTreeMap<_, &[Q]> = result
            .ring_constants
            .iter()
            .filter_map(|(k, v)| match v {
                Product::Class(c) => Some((k, c.as_slice())),
                Product::OutsideTruncation => None,
            })
            .collect();
        for p in 0..=top {
            for q in 0..=top - p {
                let t = product_rank(tor_ring.iter().map(|(k, v)| (*k, *v)), p, q);
                let o = product_rank(
                    table.ring_constants.iter().map(|(k, v)| (k, v.as_slice())),
                    p,
                    q,
                );
                if t != o {
                    divergences.push(Divergence {
                        check: CheckKind::OracleRing,
                        degree: p + q,
                        detail: format!("rank of degree ({p}, {q}) products: oracle {o} vs Tor {t}"),
                    });
                }
                ring_ranks.insert((p, q), (t, o));
            }
        }
        oracle_betti = Some(table.betti.range(..=top).map(|(&a, &b)| (a, b)).collect());
    }
    CrosscheckReport {
        max_degree: n,
        betti: betti.clone(),
        over_k_betti: result.over_k_betti.clone(),
        oracle_betti,
        ring_ranks,
        divergences,
    }
}

/// Whether a nonzero chain consists of slot-free words `(r | 1)`.
pub fn is_unit_word_multiple(ch: &BarChain) -> bool {
    ch.terms.keys().all(|w| w.length() == 0 && w.right == Factor::UNIT) && !ch.is_zero()
}

/// The identity class in degree 0.
pub fn unit_class() -> Vec<Q> {
    vec![Q::one()]
}
