use std::sync::Arc;

use num::Zero;

use super::*;
use crate::algebra::{parse_poly, Algebra, AlgebraPresentation};
use crate::catalog;
use crate::linalg::{q, rank_of, Subspace};
use num::Signed;

fn alg(p: AlgebraPresentation) -> Arc<Algebra> {
    Arc::new(Algebra::validated(p, 10).unwrap())
}

fn s2_circle(mode: BarMode, n: usize) -> BarConfig {
    BarConfig::two_sided(alg(catalog::s2_circle()), mode, n).unwrap()
}

fn sphere_over_k(n: usize) -> BarConfig {
    BarConfig::two_sided(alg(catalog::sphere()), BarMode::OverK, n).unwrap()
}

fn point(mode: BarMode, n: usize) -> BarConfig {
    BarConfig::two_sided(alg(catalog::point()), mode, n).unwrap()
}

/// Over-`k` word with slots given as monomial strings in the middle algebra.
fn word(cfg: &BarConfig, left: &str, slots: &[&str], right: &str) -> BarWord {
    let f = |a: &Algebra, t: &str| {
        let e = a.reduce_any(&parse_poly(a.gens(), t).unwrap(), 0).unwrap();
        let v = a.coords(&e).unwrap();
        assert_eq!(v.nnz(), 1, "{t} is a basis monomial");
        Factor::new(e.degree, v.leading().unwrap().0)
    };
    BarWord::new(
        f(cfg.left(), left),
        slots.iter().map(|s| f(cfg.middle(), s)).collect(),
        f(cfg.right(), right),
    )
}

#[test]
fn sphere_has_one_word_per_degree() {
    let cfg = sphere_over_k(8);
    for n in 0..=8 {
        let b = cfg.bar_basis(n).unwrap();
        assert_eq!(b.len(), 1, "degree {n}");
        assert_eq!(b[0].length(), n);
    }
    assert_eq!(cfg.bar_basis(0).unwrap()[0], BarWord::unit());
    assert_eq!(cfg.display_word(&cfg.bar_basis(3).unwrap()[0]), "(1 | x | x | x | 1)");
}

#[test]
fn over_r_degree_one_is_xi() {
    let cfg = s2_circle(BarMode::OverR, 6);
    let b = cfg.bar_basis(1).unwrap();
    assert_eq!(b.len(), 1);
    let p = cfg.slot_poly(b[0].slots[0]).unwrap();
    let h = cfg.middle();
    let xi = parse_poly(h.gens(), "x + u").unwrap();
    let c = p.terms().next().unwrap().1.clone();
    assert_eq!(p, xi.scaled(&c));
}

#[test]
fn degree_past_truncation_is_rejected() {
    let cfg = sphere_over_k(3);
    assert!(matches!(cfg.bar_basis(4), Err(BarError::DegreeOverflow { .. })));
    let top = BarChain::word(cfg.bar_basis(3).unwrap()[0].clone());
    assert!(matches!(cfg.bar_d(&top), Err(BarError::DegreeOverflow { .. })));
}

#[test]
fn degree_one_middle_is_rejected() {
    let cfg = BarConfig::two_sided(alg(catalog::lambda_uxy()), BarMode::OverK, 4).unwrap();
    assert_eq!(cfg.bar_basis(2).unwrap_err(), BarError::NotSimplyConnected);
}

#[test]
fn d_on_single_slot_is_leibniz_value() {
    let cfg = BarConfig::two_sided(alg(catalog::lambda_uxy()), BarMode::OverK, 4).unwrap();
    let w = word(&cfg, "1", &["y"], "1");
    let d = cfg.d_word(&w).unwrap();
    assert_eq!(d.len(), 1);
    let (w2, c) = d.terms.iter().next().unwrap();
    assert_eq!(cfg.display_word(w2), "(1 | u*x | 1)");
    assert_eq!(c.abs(), q(1));
}

#[test]
fn delta_of_xi_xi_is_twice_u_xi() {
    let cfg = s2_circle(BarMode::OverR, 6);
    let xi = cfg.bar_basis(1).unwrap()[0].slots[0];
    let w = BarWord::new(Factor::UNIT, vec![xi, xi], Factor::UNIT);
    let d = cfg.delta_word(&w).unwrap();
    assert_eq!(d.len(), 1);
    let (w2, c) = d.terms.iter().next().unwrap();
    assert_eq!(w2.slots, vec![xi]);
    assert_eq!(cfg.display_word(w2), "(u | (x + u) | 1)");
    // slot scaling: xi itself may be a multiple of x + u
    let lead = cfg.slot_poly(xi).unwrap().terms().next().unwrap().1.clone();
    assert_eq!(c.abs(), (q(2) * lead).abs());
}

#[test]
fn single_slot_outer_merges_cancel_over_r() {
    let over_k = s2_circle(BarMode::OverK, 6);
    let w = word(&over_k, "1", &["x"], "1");
    let d = over_k.bar_d(&BarChain::word(w)).unwrap();
    // (u | 1) - (1 | u), which is the move of u across the tensor sign
    assert_eq!(d.len(), 2);
    let v = over_k.v_span(2).unwrap();
    assert!(v.contains(&over_k.chain_coords(&d).unwrap()));

    let over_r = s2_circle(BarMode::OverR, 6);
    let xi = over_r.bar_basis(1).unwrap()[0].clone();
    assert!(over_r.bar_d(&BarChain::word(xi)).unwrap().is_zero());
}

fn check_d_squared(cfg: &BarConfig, n: usize) {
    for m in 0..n.saturating_sub(1) {
        for w in cfg.bar_basis(m).unwrap().iter() {
            let once = cfg.bar_d(&BarChain::word(w.clone())).unwrap();
            assert!(cfg.bar_d(&once).unwrap().is_zero(), "D^2 on {}", cfg.display_word(w));
        }
    }
}

#[test]
fn d_squared_vanishes() {
    check_d_squared(&s2_circle(BarMode::OverK, 7), 7);
    check_d_squared(&s2_circle(BarMode::OverR, 10), 10);
    check_d_squared(&point(BarMode::OverK, 7), 7);
    check_d_squared(&point(BarMode::OverR, 7), 7);
    check_d_squared(&sphere_over_k(8), 8);
}

/// `k[b] ⊗ ⋀(c)` with `dc = b^2`, a middle algebra with nonzero differential.
fn koszul_middle() -> BarConfig {
    let p = AlgebraPresentation::builder("K")
        .generator("b", 2)
        .generator("c", 3)
        .differential("c", "b^2")
        .build()
        .unwrap();
    BarConfig::two_sided(alg(p), BarMode::OverK, 9).unwrap()
}

#[test]
fn d_and_delta_anticommute() {
    let cfg = koszul_middle();
    for m in 0..8 {
        for w in cfg.bar_basis(m).unwrap().iter() {
            let ch = BarChain::word(w.clone());
            let d = cfg.d_internal(&ch).unwrap();
            let de = cfg.delta(&ch).unwrap();
            assert!(cfg.d_internal(&d).unwrap().is_zero());
            assert!(cfg.delta(&de).unwrap().is_zero());
            let mut sum = cfg.delta(&d).unwrap();
            sum.add_scaled(&q(1), &cfg.d_internal(&de).unwrap());
            assert!(sum.is_zero(), "d delta + delta d on {}", cfg.display_word(w));
        }
    }
}

#[test]
fn shuffle_examples() {
    let over_r = s2_circle(BarMode::OverR, 8);
    let xi = BarChain::word(over_r.bar_basis(1).unwrap()[0].clone());
    let unit = over_r.unit_chain();
    assert_eq!(over_r.shuffle_mul(&unit, &xi).unwrap(), xi);
    assert!(over_r.shuffle_mul(&xi, &xi).unwrap().is_zero());
    let u = BarChain::word(BarWord::new(Factor::new(2, 0), vec![], Factor::UNIT));
    let uxi = over_r.shuffle_mul(&u, &xi).unwrap();
    assert_eq!(uxi.len(), 1);
    let w = uxi.terms.keys().next().unwrap();
    assert_eq!((w.left, w.slots.len()), (Factor::new(2, 0), 1));
}

#[test]
fn d_is_a_shuffle_derivation() {
    for cfg in [s2_circle(BarMode::OverK, 7), koszul_middle(), s2_circle(BarMode::OverR, 8)] {
        let words: Vec<BarWord> = (0..=3)
            .flat_map(|m| cfg.bar_basis(m).unwrap().iter().cloned().collect::<Vec<_>>())
            .collect();
        for a in &words {
            for b in &words {
                let (pa, pb) = (BarChain::word(a.clone()), BarChain::word(b.clone()));
                let lhs = cfg.bar_d(&cfg.shuffle_mul(&pa, &pb).unwrap()).unwrap();
                let mut rhs = cfg.shuffle_mul(&cfg.bar_d(&pa).unwrap(), &pb).unwrap();
                let sg = if a.complex_degree() % 2 == 0 { q(1) } else { q(-1) };
                rhs.add_scaled(&sg, &cfg.shuffle_mul(&pa, &cfg.bar_d(&pb).unwrap()).unwrap());
                assert_eq!(lhs, rhs, "{} * {}", cfg.display_word(a), cfg.display_word(b));
            }
        }
    }
}

#[test]
fn shuffle_commutative_and_associative() {
    let cfg = s2_circle(BarMode::OverK, 7);
    let words: Vec<BarWord> = (0..=2)
        .flat_map(|m| cfg.bar_basis(m).unwrap().iter().cloned().collect::<Vec<_>>())
        .collect();
    for a in &words {
        for b in &words {
            let (pa, pb) = (BarChain::word(a.clone()), BarChain::word(b.clone()));
            let ab = cfg.shuffle_mul(&pa, &pb).unwrap();
            let ba = cfg.shuffle_mul(&pb, &pa).unwrap();
            let sg = if a.complex_degree() * b.complex_degree() % 2 == 0 { q(1) } else { q(-1) };
            assert_eq!(ab, ba.scaled(&sg));
            for c in &words {
                let pc = BarChain::word(c.clone());
                let l = cfg.shuffle_mul(&ab, &pc).unwrap();
                let r = cfg.shuffle_mul(&pa, &cfg.shuffle_mul(&pb, &pc).unwrap()).unwrap();
                assert_eq!(l, r);
            }
        }
    }
}

#[test]
fn quotient_matches_over_r_dimensions() {
    let over_k = s2_circle(BarMode::OverK, 7);
    let over_r = s2_circle(BarMode::OverR, 7);
    for n in 0..=6 {
        let qs = over_k.quotient_over_r(n).unwrap();
        assert_eq!(qs.words.len(), over_r.bar_basis(n).unwrap().len(), "degree {n}");
    }
    let q0 = over_k.quotient_over_r(0).unwrap();
    assert_eq!(q0.words, vec![BarWord::unit()]);
}

#[test]
fn quotient_in_degree_three_bar_minus_one() {
    let cfg = s2_circle(BarMode::OverK, 6);
    let basis = cfg.bar_basis(3).unwrap();
    let short: Vec<&BarWord> = basis.iter().filter(|w| w.length() == 1).collect();
    assert_eq!(short.len(), 6);
    let qs = cfg.quotient_over_r(3).unwrap();
    assert_eq!(qs.words.iter().filter(|w| w.length() == 1).count(), 1);
    let project = |w: BarWord| {
        let v = cfg.chain_coords(&BarChain::word(w)).unwrap();
        qs.projection.mul_vec(&v)
    };
    assert!(!project(word(&cfg, "1", &["u*x"], "1")).is_zero());
    assert!(project(word(&cfg, "1", &["u^2"], "1")).is_zero());
    assert_eq!(
        project(word(&cfg, "u", &["x"], "1")),
        project(word(&cfg, "1", &["x"], "u"))
    );
}

#[test]
fn scalar_token_is_zero() {
    let cfg = s2_circle(BarMode::OverK, 6);
    let t = VToken {
        gap: 1,
        r: Factor::UNIT,
        word: word(&cfg, "u", &["x", "u"], "1"),
    };
    assert!(cfg.v_eval(&t).is_zero());
    assert!(cfg.homotopy_s_token(&t).is_zero());
}

#[test]
fn homotopy_identity_on_spanning_tokens() {
    for cfg in [s2_circle(BarMode::OverK, 6), point(BarMode::OverK, 6)] {
        for n in 0..=5 {
            for t in cfg.v_tokens(n).unwrap() {
                let res = cfg.homotopy_residual(&t);
                assert!(res.is_zero(), "{:?}: {}", t, cfg.display_chain(&res));
            }
        }
    }
}

#[test]
fn homotopy_on_xi_move() {
    let cfg = s2_circle(BarMode::OverK, 6);
    let u = cfg.base_generators()[0];
    let tx = VToken { gap: 0, r: u, word: word(&cfg, "1", &["x"], "1") };
    let tu = VToken { gap: 0, r: u, word: word(&cfg, "1", &["u"], "1") };
    // (u | xi | 1) - (1 | u xi | 1)
    let v_tokens = [(tx, q(1)), (tu, q(1))];
    let v = cfg.v_eval_combination(&v_tokens, 3);
    assert!(!v.is_zero());
    let s = cfg.homotopy_s_combination(&v_tokens, 2);
    let mut ds_sd = cfg.bar_d(&s).unwrap();
    let dv: Vec<(VToken, Q)> = v_tokens
        .iter()
        .flat_map(|(t, c)| cfg.d_sym(t).into_iter().map(move |(t2, c2)| (t2, c * c2)))
        .collect();
    assert_eq!(cfg.v_eval_combination(&dv, 4), cfg.bar_d(&v).unwrap());
    ds_sd.add_scaled(&q(1), &cfg.homotopy_s_combination(&dv, 3));
    assert_eq!(ds_sd, v);
    assert!(cfg.homotopy_s(&BarChain::zero(3)).unwrap().is_zero());
}

#[test]
fn v_is_a_subcomplex_and_acyclic() {
    let cfg = s2_circle(BarMode::OverK, 7);
    let spans: Vec<Subspace> = (0..=6).map(|n| cfg.v_span(n).unwrap()).collect();
    let mut ranks = Vec::new();
    for n in 0..6 {
        let images: Vec<SparseVec> = spans[n]
            .basis()
            .iter()
            .map(|v| {
                let ch = cfg.chain_from_coords(n, v).unwrap();
                cfg.chain_coords(&cfg.bar_d(&ch).unwrap()).unwrap()
            })
            .collect();
        for im in &images {
            assert!(spans[n + 1].contains(im));
        }
        ranks.push(rank_of(images));
    }
    for n in 1..6 {
        assert_eq!(spans[n].dim(), ranks[n] + ranks[n - 1], "H^{n}(V) = 0");
    }
}

#[test]
fn v_is_a_shuffle_ideal() {
    let cfg = s2_circle(BarMode::OverK, 7);
    for n in 0..=3 {
        for t in cfg.v_tokens(n).unwrap() {
            let v = cfg.v_eval(&t);
            if v.is_zero() {
                continue;
            }
            for m in 0..=(6 - n).min(3) {
                let span = cfg.v_span(n + m).unwrap();
                for w in cfg.bar_basis(m).unwrap().iter() {
                    let p = cfg.shuffle_mul(&v, &BarChain::word(w.clone())).unwrap();
                    assert!(span.contains(&cfg.chain_coords(&p).unwrap()));
                }
            }
        }
    }
}

#[test]
fn zero_divisor_rejected() {
    let h = alg(catalog::s2_circle());
    let k = Arc::new(Algebra::new(AlgebraPresentation::ground_field()));
    let e = BarConfig::new(k.clone(), h, k, BarMode::OverK, 4).unwrap_err();
    assert_eq!(e, BarError::ZeroDivisor("u".into()));
}

#[test]
fn torsion_ideal_is_not_free() {
    let p = AlgebraPresentation::builder("T")
        .generator("u", 2)
        .generator("x", 2)
        .r_generator("u")
        .relation("u*x")
        .build()
        .unwrap();
    let cfg = BarConfig::two_sided(alg(p), BarMode::OverR, 6).unwrap();
    assert_eq!(cfg.bar_basis(5).unwrap_err(), BarError::NotFree(4));
}

#[test]
fn over_r_basis_is_small() {
    let cfg = s2_circle(BarMode::OverR, 7);
    assert_eq!(cfg.bar_basis(7).unwrap().len(), 4);
    assert!(cfg.slot_dim(4).unwrap().is_zero());
}
