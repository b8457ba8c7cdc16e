//! Exhaustive structural checks on a truncated bar complex: `D^2 = 0`,
//! `d delta + delta d = 0`, the shuffle laws, the derivation property, the
//! `V` subcomplex and its homotopy, and agreement of the over-`k` quotient
//! with the over-`R` complex.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{Algebra, AlgebraPresentation};
use crate::bar::{BarChain, BarConfig, BarError, BarMode, BarWord};
use crate::linalg::{q, Subspace};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    /// number of basis elements, pairs or tokens examined
    pub cases: usize,
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub max_degree: usize,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

fn sign_of(parity: i64) -> num::BigRational {
    if parity.rem_euclid(2) == 0 {
        q(1)
    } else {
        q(-1)
    }
}

/// Runs `f` on every case, stopping at the first failure message.
fn run<T: Sync>(
    name: String,
    cases: &[T],
    f: impl Fn(&T) -> Result<Option<String>, BarError> + Sync,
) -> CheckOutcome {
    let failure = cases.par_iter().find_map_first(|c| match f(c) {
        Ok(x) => x,
        Err(e) => Some(format!("error: {e}")),
    });
    CheckOutcome {
        name,
        cases: cases.len(),
        failure,
    }
}

fn words_up_to(cfg: &BarConfig, n: usize) -> Result<Vec<BarWord>, BarError> {
    let mut out = Vec::new();
    for m in 0..=n {
        out.extend(cfg.bar_basis(m)?.iter().cloned());
    }
    Ok(out)
}

fn deg(w: &BarWord) -> usize {
    w.complex_degree() as usize
}

fn d_squared(cfg: &BarConfig, tag: &str, n: usize) -> Result<CheckOutcome, BarError> {
    let words = words_up_to(cfg, n.saturating_sub(2))?;
    Ok(run(format!("{tag}/d-squared"), &words, |w| {
        let once = cfg.bar_d(&BarChain::word(w.clone()))?;
        let twice = cfg.bar_d(&once)?;
        Ok((!twice.is_zero()).then(|| format!("D^2 {} != 0", cfg.display_word(w))))
    }))
}

fn anticommute(cfg: &BarConfig, tag: &str, n: usize) -> Result<CheckOutcome, BarError> {
    let words = words_up_to(cfg, n.saturating_sub(2))?;
    Ok(run(format!("{tag}/d-delta-anticommute"), &words, |w| {
        let ch = BarChain::word(w.clone());
        let d = cfg.d_internal(&ch)?;
        let de = cfg.delta(&ch)?;
        let mut sum = cfg.delta(&d)?;
        sum.add_scaled(&q(1), &cfg.d_internal(&de)?);
        let dd = cfg.d_internal(&d)?;
        let ee = cfg.delta(&de)?;
        Ok((!(sum.is_zero() && dd.is_zero() && ee.is_zero()))
            .then(|| format!("d delta + delta d on {}", cfg.display_word(w))))
    }))
}

/// Pairs of words of positive degree with total degree at most `n`.
fn pairs(words: &[BarWord], n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in words.iter().enumerate() {
        for (j, b) in words.iter().enumerate() {
            if deg(a) > 0 && deg(b) > 0 && deg(a) + deg(b) <= n {
                out.push((i, j));
            }
        }
    }
    out
}

fn shuffle_laws(cfg: &BarConfig, tag: &str, n: usize) -> Result<Vec<CheckOutcome>, BarError> {
    let words = words_up_to(cfg, n)?;
    let word = |i: usize| BarChain::word(words[i].clone());
    let prs = pairs(&words, n);
    let unit = cfg.unit_chain();
    let unit_check = run(format!("{tag}/shuffle-unit"), &words, |w| {
        let a = BarChain::word(w.clone());
        let l = cfg.shuffle_mul(&unit, &a)?;
        let r = cfg.shuffle_mul(&a, &unit)?;
        Ok((l != a || r != a).then(|| format!("unit on {}", cfg.display_word(w))))
    });
    let comm = run(format!("{tag}/shuffle-commutative"), &prs, |&(i, j)| {
        let (a, b) = (word(i), word(j));
        let ab = cfg.shuffle_mul(&a, &b)?;
        let ba = cfg.shuffle_mul(&b, &a)?;
        let sg = sign_of((deg(&words[i]) * deg(&words[j])) as i64);
        Ok((ab != ba.scaled(&sg))
            .then(|| format!("{} * {}", cfg.display_word(&words[i]), cfg.display_word(&words[j]))))
    });
    let mut triples = Vec::new();
    for &(i, j) in &prs {
        for (k, c) in words.iter().enumerate() {
            if deg(c) > 0 && deg(&words[i]) + deg(&words[j]) + deg(c) <= n {
                triples.push((i, j, k));
            }
        }
    }
    let assoc = run(format!("{tag}/shuffle-associative"), &triples, |&(i, j, k)| {
        let (a, b, c) = (word(i), word(j), word(k));
        let l = cfg.shuffle_mul(&cfg.shuffle_mul(&a, &b)?, &c)?;
        let r = cfg.shuffle_mul(&a, &cfg.shuffle_mul(&b, &c)?)?;
        Ok((l != r).then(|| {
            format!(
                "({} * {}) * {}",
                cfg.display_word(&words[i]),
                cfg.display_word(&words[j]),
                cfg.display_word(&words[k])
            )
        }))
    });
    let dprs: Vec<(usize, usize)> = prs
        .iter()
        .copied()
        .filter(|&(i, j)| deg(&words[i]) + deg(&words[j]) < n)
        .collect();
    let deriv = run(format!("{tag}/shuffle-derivation"), &dprs, |&(i, j)| {
        let (a, b) = (word(i), word(j));
        let lhs = cfg.bar_d(&cfg.shuffle_mul(&a, &b)?)?;
        let mut rhs = cfg.shuffle_mul(&cfg.bar_d(&a)?, &b)?;
        rhs.add_scaled(
            &sign_of(deg(&words[i]) as i64),
            &cfg.shuffle_mul(&a, &cfg.bar_d(&b)?)?,
        );
        Ok((lhs != rhs).then(|| {
            format!(
                "D({} * {})",
                cfg.display_word(&words[i]),
                cfg.display_word(&words[j])
            )
        }))
    });
    Ok(vec![unit_check, comm, assoc, deriv])
}

fn v_checks(cfg: &BarConfig, n: usize, over_r: Option<&BarConfig>) -> Result<Vec<CheckOutcome>, BarError> {
    let spans: Vec<Subspace> = (0..=n).map(|m| cfg.v_span(m)).collect::<Result<_, _>>()?;
    let mut elems = Vec::new();
    for (m, s) in spans.iter().enumerate() {
        for v in s.basis() {
            elems.push((m, cfg.chain_from_coords(m, v)?));
        }
    }
    let closed = run("over-k/v-subcomplex".to_string(), &elems, |(m, v)| {
        if *m >= n {
            return Ok(None);
        }
        let dv = cfg.bar_d(v)?;
        Ok((!spans[m + 1].contains(&cfg.chain_coords(&dv)?))
            .then(|| format!("D({}) leaves V", cfg.display_chain(v))))
    });
    let mut cases = Vec::new();
    for (e, (m, _)) in elems.iter().enumerate() {
        for k in 0..=n - m {
            for w in cfg.bar_basis(k)?.iter() {
                cases.push((e, w.clone()));
            }
        }
    }
    let ideal = run("over-k/v-shuffle-ideal".to_string(), &cases, |(e, w)| {
        let (m, v) = &elems[*e];
        let p = cfg.shuffle_mul(v, &BarChain::word(w.clone()))?;
        Ok((!spans[m + deg(w)].contains(&cfg.chain_coords(&p)?))
            .then(|| format!("{} * {} leaves V", cfg.display_chain(v), cfg.display_word(w))))
    });
    let mut tokens = Vec::new();
    for m in 0..n {
        tokens.extend(cfg.v_tokens(m)?);
    }
    let homotopy = run("over-k/homotopy".to_string(), &tokens, |t| {
        let res = cfg.homotopy_residual(t);
        Ok((!res.is_zero()).then(|| format!("Ds + sD - id = {} on {t:?}", cfg.display_chain(&res))))
    });
    let mut out = vec![closed, ideal, homotopy];
    if let Some(r) = over_r {
        let degrees: Vec<usize> = (0..=n).collect();
        out.push(run("quotient-dimension".to_string(), &degrees, |&m| {
            let quotient = cfg.quotient_over_r(m)?.words.len();
            let direct = r.bar_basis(m)?.len();
            Ok((quotient != direct).then(|| format!("degree {m}: quotient {quotient} vs over-R {direct}")))
        }));
    }
    Ok(out)
}

/// All checks on `B(R, H, R)` in degrees `0..=max_degree`, over `k` and
/// (when the augmentation ideal is `R`-free) over `R`.
pub fn run_suite(pres: &AlgebraPresentation, max_degree: usize) -> Result<SuiteReport, BarError> {
    let n = max_degree;
    let h = Arc::new(Algebra::validated(pres.clone(), n + 2)?);
    let over_k = BarConfig::two_sided(h.clone(), BarMode::OverK, n)?;
    let over_r = if pres.has_differential() {
        None
    } else {
        Some(BarConfig::two_sided(h, BarMode::OverR, n)?)
    };
    let mut checks = Vec::new();
    let configs: Vec<(&str, &BarConfig)> = std::iter::once(("over-k", &over_k))
        .chain(over_r.iter().map(|c| ("over-R", c)))
        .collect();
    for (tag, cfg) in &configs {
        checks.push(d_squared(cfg, tag, n)?);
        checks.push(anticommute(cfg, tag, n)?);
        checks.extend(shuffle_laws(cfg, tag, n)?);
    }
    checks.extend(v_checks(&over_k, n, over_r.as_ref())?);
    checks.retain(|c| c.cases > 0 || c.failure.is_some());
    Ok(SuiteReport {
        max_degree: n,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn suite_passes_on_standard_inputs() {
        for p in [catalog::s2_circle(), catalog::point(), catalog::sphere()] {
            let r = run_suite(&p, 5).unwrap();
            for c in &r.checks {
                assert!(c.passed(), "{}: {:?}", c.name, c.failure);
            }
            assert!(r.checks.iter().any(|c| c.name == "over-k/shuffle-associative"));
        }
    }

    #[test]
    fn suite_runs_v_checks_only_with_a_base_ring() {
        let r = run_suite(&catalog::sphere(), 4).unwrap();
        assert!(r.checks.iter().all(|c| c.name != "over-k/homotopy"));
        let r = run_suite(&catalog::s2_circle(), 4).unwrap();
        assert!(r.checks.iter().any(|c| c.name == "over-k/homotopy" && c.cases > 0));
    }
}
