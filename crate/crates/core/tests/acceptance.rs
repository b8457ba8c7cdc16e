//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use bartor::algebra::{parse_poly, Algebra, GradedElement};
use bartor::bar::{BarConfig, BarMode};
use bartor::catalog;
use bartor::cdga::{CdgaInstance, MasseyResult};
use bartor::invariants::run_suite;
use bartor::linalg::Q;
use bartor::tor::{crosscheck, tor_betti, tor_ring_constants, Product, TorMode, TorRequest};
use num::{One, Zero};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_ones(b: &BTreeMap<usize, usize>, n: usize) -> bool {
    (0..=n).all(|d| b.get(&d) == Some(&1))
}

/// Expected generator shapes written out by hand: `(1 | x | ... | x | 1)`
/// with `n` slots in odd degree `n`, `(u^m | 1)` in degree `2m`.
fn expected_shape(n: usize) -> String {
    if n % 2 == 1 {
        format!("(1 | {} | 1)", vec!["x"; n].join(" | "))
    } else {
        match n / 2 {
            0 => "(1 | 1)".to_string(),
            1 => "(u | 1)".to_string(),
            m => format!("(u^{m} | 1)"),
        }
    }
}

fn criterion_1() -> Outcome {
    let n = 12;
    let r = tor_betti(&TorRequest::new(catalog::s2_circle(), n)).map_err(|e| e.to_string())?;
    ensure(all_ones(&r.betti, n), || format!("betti {:?}", r.betti))?;
    for d in 0..=n {
        let g = &r.generators[&d][0];
        let shown = if d % 2 == 1 {
            g.projected.clone().unwrap_or_default()
        } else {
            g.display.clone()
        };
        ensure(shown == expected_shape(d), || format!("degree {d}: {shown}"))?;
    }
    Ok(format!("betti 1 in degrees 0..{n}; g3 = {}", r.generators[&3][0].projected.clone().unwrap_or_default()))
}

fn criterion_2() -> Outcome {
    let n = 12;
    let r = tor_ring_constants(&TorRequest::new(catalog::s2_circle(), n).ring(true))
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (((p, _), (q, _)), prod) in &r.ring_constants {
        let Product::Class(c) = prod else { continue };
        checked += 1;
        let odd_involved = p % 2 == 1 || q % 2 == 1;
        if *p > 0 && *q > 0 && odd_involved {
            ensure(c.iter().all(Zero::is_zero), || format!("g{p} * g{q} = {c:?}, expected 0"))?;
        } else {
            // units and u-powers: (u^a|1)(u^b|1) = (u^(a+b)|1)
            ensure(c.len() == 1 && c[0].is_one(), || {
                format!("g{p} * g{q} = {c:?}, expected the generator")
            })?;
        }
    }
    for ((name, (p, _)), prod) in &r.r_module_structure {
        let Product::Class(c) = prod else { continue };
        let zero = c.iter().all(Zero::is_zero);
        ensure(name == "u" && (zero == (p % 2 == 1)), || format!("{name} * g{p} = {c:?}"))?;
    }
    Ok(format!("{checked} products in range; x_i x_j = 0, u x_i = 0, u^a u^b = u^(a+b)"))
}

fn criterion_3() -> Outcome {
    let n = 8;
    for (name, p) in [("circle", catalog::s2_circle()), ("point", catalog::point())] {
        let r = tor_betti(&TorRequest::new(p.clone(), n).mode(TorMode::Both)).map_err(|e| e.to_string())?;
        let k = r.over_k_betti.clone().ok_or("no over-k table")?;
        ensure(k == r.betti, || format!("{name}: over-R {:?} over-k {k:?}", r.betti))?;
        let h = Arc::new(Algebra::validated(p, n + 3).map_err(|e| e.to_string())?);
        let cfg = BarConfig::two_sided(h, BarMode::OverK, n + 1).map_err(|e| e.to_string())?;
        let mut tokens = 0;
        for m in 0..=n {
            for t in cfg.v_tokens(m).map_err(|e| e.to_string())? {
                tokens += 1;
                let res = cfg.homotopy_residual(&t);
                ensure(res.is_zero(), || format!("{name}: Ds + sD - id = {} on {t:?}", cfg.display_chain(&res)))?;
            }
        }
        if name == "circle" {
            ensure(tokens > 0, || "no V tokens".into())?;
        }
    }
    Ok(format!("over-k = over-R through degree {n} (circle, point); Ds + sD = id on V tokens"))
}

fn element(inst: &CdgaInstance, text: &str) -> Result<GradedElement, String> {
    let alg = inst.algebra();
    let p = parse_poly(alg.gens(), text).map_err(|e| e.to_string())?;
    alg.reduce_any(&p, 0).map_err(|e| e.to_string())
}

fn criterion_4() -> Outcome {
    let n = 10;
    let oracle = CdgaInstance::new(catalog::lambda_uxy(), n).map_err(|e| e.to_string())?;
    let table = oracle.cohomology();
    ensure(all_ones(&table.betti, n), || format!("oracle betti {:?}", table.betti))?;
    let alg = oracle.algebra();
    let reps: Vec<String> = (0..=n).map(|d| alg.display(&table.representatives[&d][0])).collect();
    ensure(reps[3] == "x*y" && reps[5] == "x*y^2", || format!("oracle generators {reps:?}"))?;
    let ux = &table.ring_constants[&((2, 0), (1, 0))];
    ensure(ux.iter().all(Zero::is_zero), || format!("u*x = {ux:?}"))?;
    let req = TorRequest::new(catalog::s2_circle(), n).ring(true);
    let report = crosscheck(&req, Some(&oracle)).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("{:?}", report.first_divergence()))?;
    ensure(report.ring_ranks.values().all(|(a, b)| a == b), || "ring ranks".into())?;
    Ok(format!(
        "betti agree through {n}; {} multiplication ranks agree; u*x = 0, xy and xy^2 generate",
        report.ring_ranks.len()
    ))
}

fn criterion_5() -> Outcome {
    let inst = CdgaInstance::new(catalog::lambda_uxy(), 6).map_err(|e| e.to_string())?;
    let (x, u) = (element(&inst, "x")?, element(&inst, "u")?);
    match inst.massey_triple(&x, &u, &x).map_err(|e| e.to_string())? {
        MasseyResult::Undefined { reason } => Err(format!("undefined: {reason}")),
        MasseyResult::Defined(c) => {
            ensure(!c.contains_zero, || "coset contains zero".into())?;
            ensure(c.indeterminacy.is_empty(), || format!("indeterminacy {:?}", c.indeterminacy))?;
            let two = Q::from_integer(2.into());
            ensure(c.class.len() == 1 && (c.class[0] == two || c.class[0] == -two), || {
                format!("class {:?}", c.class)
            })?;
            Ok(format!("<x,u,x> = {} [xy], indeterminacy 0", c.class[0]))
        }
    }
}

fn criterion_6() -> Outcome {
    let n = 8;
    let mut total = 0;
    for (name, p) in [
        ("circle", catalog::s2_circle()),
        ("point", catalog::point()),
        ("sphere", catalog::sphere()),
    ] {
        let r = run_suite(&p, n).map_err(|e| e.to_string())?;
        for c in &r.checks {
            ensure(c.passed(), || format!("{name} {}: {}", c.name, c.failure.clone().unwrap_or_default()))?;
            total += c.cases;
        }
        for need in ["d-squared", "d-delta-anticommute", "shuffle-commutative", "shuffle-associative", "shuffle-derivation"] {
            ensure(r.checks.iter().any(|c| c.name.ends_with(need)), || format!("{name}: {need} missing"))?;
        }
        if name != "sphere" {
            ensure(r.checks.iter().any(|c| c.name == "over-k/v-shuffle-ideal"), || format!("{name}: V checks missing"))?;
        }
    }
    Ok(format!("{total} cases exact through degree {n} (circle, point, sphere)"))
}

fn criterion_7() -> Outcome {
    let n = 12;
    let r = tor_betti(&TorRequest::new(catalog::sphere(), n).mode(TorMode::OverK)).map_err(|e| e.to_string())?;
    // brute force: the only normalized words are (1|x|...|x|1), one per degree
    let h = Arc::new(Algebra::validated(catalog::sphere(), n + 2).map_err(|e| e.to_string())?);
    let cfg = BarConfig::two_sided(h, BarMode::OverK, n).map_err(|e| e.to_string())?;
    for d in 0..=n {
        let words = cfg.bar_basis(d).map_err(|e| e.to_string())?.len();
        ensure(words == 1, || format!("degree {d}: {words} words"))?;
    }
    let oracle = CdgaInstance::new(catalog::loop_sphere_model(), n).map_err(|e| e.to_string())?;
    let ob = oracle.cohomology().betti;
    ensure(all_ones(&r.betti, n), || format!("bar betti {:?}", r.betti))?;
    ensure(ob == r.betti, || format!("oracle {ob:?} vs bar {:?}", r.betti))?;
    Ok(format!("betti 1 in degrees 0..{n}, equal to the exterior-polynomial oracle"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("circle action Betti numbers and generators", criterion_1),
        ("circle action ring structure", criterion_2),
        ("over-k agrees with over-R; contracting homotopy", criterion_3),
        ("minimal model cross-check", criterion_4),
        ("Massey product witness", criterion_5),
        ("structural invariant suite", criterion_6),
        ("sphere against its loop-space oracle", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
