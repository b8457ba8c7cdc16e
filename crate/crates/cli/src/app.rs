//! Subcommands, exit codes and report assembly.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use bartor::algebra::{parse_poly, Algebra, AlgebraError, AlgebraSlice, AugTarget, GradedElement};
use bartor::bar::BarError;
use bartor::cdga::{CdgaError, CdgaInstance, MasseyResult};
use bartor::invariants::run_suite;
use bartor::linalg::{fmt_q, Q};
use bartor::tor::{crosscheck_on, tor_on, Product, TorError, TorMode, TorRequest};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::Zero;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::document::{algebra_reason, parse_document, DocError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bartor", version, about = "Exact Tor, cohomology and Massey products over the rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tor of an augmented algebra over its base ring
    Tor(TorArgs),
    /// Cohomology of a CDGA
    Cohomology(CohomologyArgs),
    /// Triple Massey product of three cocycles
    Massey(MasseyArgs),
    /// Pseudo-dual homotopy groups (cohomology of the indecomposables)
    Homotopy(HomotopyArgs),
    /// Structural invariant suite on the bar complex
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// presentation file
    file: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_degree: usize,
    #[arg(long, value_enum, default_value_t = Output::Human)]
    output: Output,
    /// directory for memoized degree bases, keyed by input digest
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    OverR,
    OverK,
    Both,
}

#[derive(Args, Debug)]
struct TorArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Mode::OverR)]
    mode: Mode,
    /// shuffle-ring constants and the base ring action
    #[arg(long)]
    ring: bool,
    /// list representative cocycles
    #[arg(long)]
    representatives: bool,
    /// CDGA model whose cohomology should agree with Tor
    #[arg(long)]
    oracle: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CohomologyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    ring: bool,
    #[arg(long)]
    representatives: bool,
}

#[derive(Args, Debug)]
struct MasseyArgs {
    #[command(flatten)]
    common: Common,
    /// three comma-separated cocycles, e.g. `x,u,x`
    #[arg(long)]
    classes: String,
}

#[derive(Args, Debug)]
struct HomotopyArgs {
    #[command(flatten)]
    common: Common,
    /// indecomposables relative to the base ring (over-r) or to k (over-k)
    #[arg(long, value_enum, default_value_t = Mode::OverR)]
    mode: Mode,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
}

/// What a run prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// A failed run: exit code, reason code and message, plus optional location.
#[derive(Debug, Clone)]
struct Failure {
    code: i32,
    reason: String,
    message: String,
    line: Option<usize>,
    column: Option<usize>,
    /// partial results to keep in the report
    details: Option<Value>,
}

impl Failure {
    fn new(code: i32, reason: &str, message: impl Into<String>) -> Self {
        Self {
            code,
            reason: reason.to_string(),
            message: message.into(),
            line: None,
            column: None,
            details: None,
        }
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Self {
            line: e.line(),
            column: e.column(),
            ..Failure::new(EXIT_INPUT, e.reason(), e.to_string())
        }
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        Failure::new(EXIT_INPUT, algebra_reason(&e), e.to_string())
    }
}

impl From<BarError> for Failure {
    fn from(e: BarError) -> Self {
        let (code, reason) = match &e {
            BarError::Algebra(a) => return a.clone().into(),
            BarError::NotSimplyConnected => (EXIT_INPUT, "not-simply-connected"),
            BarError::DegreeOverflow { .. } => (EXIT_TRUNCATION, "truncation"),
            BarError::NotFree(_) => (EXIT_INPUT, "not-free"),
            BarError::ZeroDivisor(_) => (EXIT_INPUT, "zero-divisor"),
            BarError::BaseMismatch(_) => (EXIT_INPUT, "base-mismatch"),
            BarError::BaseNotClosed(_) => (EXIT_INPUT, "base-not-closed"),
            BarError::IncompatibleConfigs | BarError::NotInV => (EXIT_INVARIANT, "internal"),
        };
        Failure::new(code, reason, e.to_string())
    }
}

impl From<TorError> for Failure {
    fn from(e: TorError) -> Self {
        let (code, reason) = match &e {
            TorError::Algebra(a) => return a.clone().into(),
            TorError::Bar(b) => return b.clone().into(),
            TorError::NonzeroDifferential(_) => (EXIT_INPUT, "nonzero-differential"),
            TorError::ModeDisagreement { .. } => (EXIT_INVARIANT, "mode-disagreement"),
            TorError::NotCocycle(_) => (EXIT_INVARIANT, "not-cocycle"),
            TorError::NothingToCompare => (EXIT_INPUT, "usage"),
        };
        Failure::new(code, reason, e.to_string())
    }
}

impl From<CdgaError> for Failure {
    fn from(e: CdgaError) -> Self {
        let (code, reason) = match &e {
            CdgaError::Algebra(a) => return a.clone().into(),
            CdgaError::DifferentialSquare(_) => (EXIT_INPUT, "d-squared"),
            CdgaError::Truncation { .. } => (EXIT_TRUNCATION, "truncation"),
            CdgaError::NotCocycle(_) => (EXIT_INPUT, "not-cocycle"),
        };
        Failure::new(code, reason, e.to_string())
    }
}

/// Loaded input shared by all subcommands.
struct Input {
    path: String,
    digest: String,
    algebra: Arc<Algebra>,
}

/// Degree through which each subcommand needs the algebra validated.
fn validation_degree(c: &Command) -> usize {
    match c {
        Command::Tor(a) => a.common.max_degree + 2,
        Command::Check(a) => a.common.max_degree + 2,
        _ => common_of(c).max_degree + 1,
    }
}

fn load(common: &Common, validate_to: usize) -> Result<Input, Failure> {
    let path = common.file.display().to_string();
    let text = std::fs::read_to_string(&common.file)
        .map_err(|e| Failure::new(EXIT_INPUT, "io", format!("{path}: {e}")))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let doc = parse_document(&text)?;
    let algebra = Arc::new(Algebra::new(doc.presentation.clone()));
    if let Some(dir) = &common.cache_dir {
        for slice in read_cache(dir, &digest) {
            algebra.seed_slice(slice);
        }
    }
    algebra
        .validate(validate_to)
        .map_err(|e| Failure::from(doc.locate(e)))?;
    Ok(Input {
        path,
        digest,
        algebra,
    })
}

fn cache_file(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("{digest}.slices.json"))
}

/// Cached slices for `digest`; unreadable or stale files are ignored.
fn read_cache(dir: &Path, digest: &str) -> Vec<AlgebraSlice> {
    let Ok(text) = std::fs::read_to_string(cache_file(dir, digest)) else {
        return Vec::new();
    };
    let Ok(slices) = serde_json::from_str::<Vec<AlgebraSlice>>(&text) else {
        return Vec::new();
    };
    slices.into_iter().filter_map(AlgebraSlice::restore).collect()
}

fn write_cache(dir: &Path, input: &Input) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let slices: Vec<AlgebraSlice> = input
        .algebra
        .cached_slices()
        .iter()
        .map(|s| (**s).clone())
        .collect();
    let text = serde_json::to_string(&slices).map_err(|e| e.to_string())?;
    std::fs::write(cache_file(dir, &input.digest), text).map_err(|e| e.to_string())
}

fn q_str(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn class_json(v: &[Q]) -> Value {
    Value::Array(v.iter().map(q_str).collect())
}

fn betti_json<'a>(b: impl IntoIterator<Item = (&'a usize, &'a usize)>) -> Value {
    Value::Array(b.into_iter().map(|(_, &x)| json!(x)).collect())
}

/// `g2.0 - 1/2*g2.1` style text for a class vector in degree `n`.
fn class_text(n: usize, v: &[Q]) -> String {
    bartor::algebra::fmt_terms(
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (format!("g{n}.{i}"), c.clone())),
    )
}

fn betti_table(out: &mut String, betti: &[(usize, Vec<String>)], headers: &[&str]) {
    let _ = write!(out, "{:>6}", "degree");
    for h in headers {
        let _ = write!(out, "  {h:>8}");
    }
    out.push('\n');
    for (n, cols) in betti {
        let _ = write!(out, "{n:>6}");
        for c in cols {
            let _ = write!(out, "  {c:>8}");
        }
        out.push('\n');
    }
}

struct Report {
    json: Map<String, Value>,
    human: String,
}

impl Report {
    fn new(command: &str, input: &Input, max_degree: usize) -> Self {
        let mut json = Map::new();
        json.insert("command".into(), json!(command));
        json.insert("input".into(), json!(input.path));
        json.insert("input_digest".into(), json!(input.digest));
        json.insert("max_degree".into(), json!(max_degree));
        let human = format!(
            "{command} {} (algebra {}, degrees 0..{max_degree})\nsha256 {}\n",
            input.path,
            input.algebra.name(),
            input.digest
        );
        Self { json, human }
    }
}

fn mode_name(m: TorMode) -> &'static str {
    match m {
        TorMode::OverR => "over-R",
        TorMode::OverK => "over-k",
        TorMode::Both => "both",
    }
}

fn tor(args: &TorArgs, input: &Input, rep: &mut Report) -> Result<(), Failure> {
    let n = args.common.max_degree;
    let mode = match args.mode {
        Mode::OverR => TorMode::OverR,
        Mode::OverK => TorMode::OverK,
        Mode::Both => TorMode::Both,
    };
    let json_out = args.common.output == Output::Json;
    let req = TorRequest::new(input.algebra.presentation().clone(), n)
        .mode(mode)
        .ring(args.ring)
        .representatives(args.representatives || json_out);
    let oracle = match &args.oracle {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_INPUT, "io", format!("{}: {e}", path.display())))?;
            let doc = parse_document(&text)?;
            Some(CdgaInstance::new(doc.presentation, n)?)
        }
        None => None,
    };
    let (result, report) = if mode == TorMode::Both || oracle.is_some() {
        let (r, c) = crosscheck_on(input.algebra.clone(), &req, oracle.as_ref())?;
        (r, Some(c))
    } else {
        (tor_on(input.algebra.clone(), &req)?, None)
    };
    let j = &mut rep.json;
    let h = &mut rep.human;
    j.insert("mode".into(), json!(mode_name(mode)));
    j.insert("betti".into(), betti_json(&result.betti));
    let _ = writeln!(h, "mode {}", mode_name(mode));
    let mut rows = Vec::new();
    for (&d, &b) in &result.betti {
        let mut cols = vec![b.to_string()];
        if let Some(k) = &result.over_k_betti {
            cols.push(k[&d].to_string());
        }
        rows.push((d, cols));
    }
    let headers: &[&str] = if result.over_k_betti.is_some() {
        &["over-R", "over-k"]
    } else {
        &["betti"]
    };
    betti_table(h, &rows, headers);
    if let Some(k) = &result.over_k_betti {
        j.insert("over_k_betti".into(), betti_json(k));
    }
    if !result.generators.is_empty() {
        let mut gens = Vec::new();
        for (d, list) in &result.generators {
            for (i, g) in list.iter().enumerate() {
                let terms: Vec<Value> = g
                    .chain
                    .terms
                    .iter()
                    .map(|(w, c)| {
                        json!({
                            "word": w_display(&result, g, w),
                            "bar_degree": w.bar_degree(),
                            "coefficient": fmt_q(c),
                        })
                    })
                    .collect();
                gens.push(json!({
                    "degree": d,
                    "index": i,
                    "display": g.display,
                    "projected": g.projected,
                    "terms": terms,
                }));
            }
        }
        j.insert("generators".into(), Value::Array(gens));
    }
    if args.representatives {
        h.push_str("generators\n");
        for (d, list) in &result.generators {
            for (i, g) in list.iter().enumerate() {
                let _ = write!(h, "  g{d}.{i} = {}", g.display);
                if let Some(p) = &g.projected {
                    let _ = write!(h, "   [slots mod R: {p}]");
                }
                h.push('\n');
            }
        }
    }
    if args.ring {
        let mut rc = Vec::new();
        let mut outside = 0;
        h.push_str("ring\n");
        for (((p, i), (q, jj)), prod) in &result.ring_constants {
            let (val, text) = match prod {
                Product::Class(c) => (class_json(c), class_text(p + q, c)),
                Product::OutsideTruncation => (Value::Null, String::new()),
            };
            rc.push(json!({
                "left": [p, i],
                "right": [q, jj],
                "product": val,
                "outside_truncation": matches!(prod, Product::OutsideTruncation),
            }));
            if matches!(prod, Product::OutsideTruncation) {
                outside += 1;
            } else if p <= q && *p > 0 {
                let _ = writeln!(h, "  g{p}.{i} * g{q}.{jj} = {text}");
            }
        }
        let _ = writeln!(h, "  ({outside} products outside truncation)");
        j.insert("ring_constants".into(), Value::Array(rc));
        let mut ra = Vec::new();
        h.push_str("base ring action\n");
        for ((r, (p, i)), prod) in &result.r_module_structure {
            let val = match prod {
                Product::Class(c) => {
                    let _ = writeln!(h, "  {r} * g{p}.{i} = {}", class_text(p + degree_of(input, r), c));
                    class_json(c)
                }
                Product::OutsideTruncation => Value::Null,
            };
            ra.push(json!({"r": r, "class": [p, i], "product": val}));
        }
        j.insert("r_module_structure".into(), Value::Array(ra));
    }
    if let Some(c) = report {
        let divergences: Vec<Value> = c
            .divergences
            .iter()
            .map(|d| json!({"check": d.check.tag(), "degree": d.degree, "detail": d.detail}))
            .collect();
        let first = c
            .first_divergence()
            .map(|d| json!({"check": d.check.tag(), "degree": d.degree, "detail": d.detail}));
        let ring_ranks: Vec<Value> = c
            .ring_ranks
            .iter()
            .map(|(&(p, q), &(t, o))| json!({"degrees": [p, q], "tor": t, "oracle": o}))
            .collect();
        let cj = json!({
            "passed": c.passed(),
            "over_k_betti": c.over_k_betti.as_ref().map(betti_json),
            "oracle_betti": c.oracle_betti.as_ref().map(betti_json),
            "ring_ranks": ring_ranks,
            "divergences": divergences,
            "first_divergence": first,
        });
        j.insert("crosscheck".into(), cj.clone());
        let mut paths = Vec::new();
        if c.over_k_betti.is_some() {
            paths.push("over-k");
        }
        if c.oracle_betti.is_some() {
            paths.push("oracle");
        }
        if c.passed() {
            let _ = writeln!(h, "crosscheck: pass ({})", paths.join(", "));
        } else {
            let d = c.first_divergence().expect("failed report has a divergence");
            let _ = writeln!(h, "crosscheck: FAIL at degree {} [{}] {}", d.degree, d.check.tag(), d.detail);
            let mut f = Failure::new(
                EXIT_INVARIANT,
                "crosscheck-failed",
                format!("first divergence in degree {}: {}", d.degree, d.detail),
            );
            f.details = Some(cj);
            return Err(f);
        }
    }
    Ok(())
}

fn degree_of(input: &Input, r: &str) -> usize {
    let gens = input.algebra.gens();
    gens.index_of(r).map(|g| gens.get(g).degree).unwrap_or(0)
}

fn w_display(_result: &bartor::tor::TorResult, g: &bartor::tor::TorGenerator, w: &bartor::bar::BarWord) -> String {
    // the generator's display lists words in the same order as its terms
    let idx = g.chain.terms.keys().position(|k| k == w).unwrap_or(0);
    split_terms(&g.display).get(idx).cloned().unwrap_or_default()
}

/// Splits a `fmt_terms` rendering of words back into the word texts.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                if depth == 0 {
                    cur.clear();
                }
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
                if depth == 0 {
                    out.push(cur.clone());
                }
            }
            _ if depth > 0 => cur.push(c),
            _ => {}
        }
    }
    out
}

fn cdga(input: &Input, n: usize) -> Result<CdgaInstance, Failure> {
    input.algebra.validate(n + 1)?;
    Ok(CdgaInstance::from_algebra(input.algebra.clone(), n)?)
}

fn cohomology(args: &CohomologyArgs, input: &Input, rep: &mut Report) -> Result<(), Failure> {
    let n = args.common.max_degree;
    let inst = cdga(input, n)?;
    let table = inst.cohomology();
    let alg = inst.algebra();
    let j = &mut rep.json;
    let h = &mut rep.human;
    j.insert("betti".into(), betti_json(&table.betti));
    j.insert(
        "euler_characteristic".into(),
        json!(table.euler_characteristic()),
    );
    let rows: Vec<(usize, Vec<String>)> = table
        .betti
        .iter()
        .map(|(&d, &b)| (d, vec![b.to_string(), alg.dim(d).to_string()]))
        .collect();
    betti_table(h, &rows, &["betti", "cochains"]);
    let mut gens = Vec::new();
    for (d, list) in &table.representatives {
        for (i, e) in list.iter().enumerate() {
            gens.push(json!({"degree": d, "index": i, "representative": alg.display(e)}));
        }
    }
    j.insert("generators".into(), Value::Array(gens));
    if args.representatives {
        h.push_str("generators\n");
        for (d, list) in &table.representatives {
            for (i, e) in list.iter().enumerate() {
                let _ = writeln!(h, "  g{d}.{i} = {}", alg.display(e));
            }
        }
    }
    if args.ring {
        let mut rc = Vec::new();
        h.push_str("ring\n");
        for (((p, i), (q, jj)), c) in &table.ring_constants {
            rc.push(json!({"left": [p, i], "right": [q, jj], "product": class_json(c)}));
            if p <= q && *p > 0 {
                let _ = writeln!(h, "  g{p}.{i} * g{q}.{jj} = {}", class_text(p + q, c));
            }
        }
        j.insert("ring_constants".into(), Value::Array(rc));
    }
    Ok(())
}

fn parse_class(input: &Input, text: &str) -> Result<GradedElement, Failure> {
    let alg = &input.algebra;
    let p = parse_poly(alg.gens(), text.trim())
        .map_err(|e| Failure::new(EXIT_INPUT, "syntax", format!("class '{}': {e}", text.trim())))?;
    if p.is_zero() {
        return Err(Failure::new(EXIT_INPUT, "zero-class", format!("class '{}' is zero", text.trim())));
    }
    let d = p.homogeneous_degree(alg.gens()).ok_or_else(|| {
        Failure::new(EXIT_INPUT, "homogeneity", format!("class '{}' is not homogeneous", text.trim()))
    })?;
    let v = alg.reduce(&p, d)?;
    Ok(alg.element(d, &v))
}

fn massey(args: &MasseyArgs, input: &Input, rep: &mut Report) -> Result<(), Failure> {
    let n = args.common.max_degree;
    let parts: Vec<&str> = args.classes.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::new(EXIT_INPUT, "usage", "--classes needs exactly three entries"));
    }
    let inst = cdga(input, n)?;
    let cls = parts
        .iter()
        .map(|t| parse_class(input, t))
        .collect::<Result<Vec<_>, _>>()?;
    let alg = inst.algebra();
    let j = &mut rep.json;
    let h = &mut rep.human;
    let names: Vec<String> = cls.iter().map(|c| alg.display(c)).collect();
    j.insert("classes".into(), json!(names));
    let label = format!("<[{}], [{}], [{}]>", names[0], names[1], names[2]);
    match inst.massey_triple(&cls[0], &cls[1], &cls[2])? {
        MasseyResult::Undefined { reason } => {
            j.insert("defined".into(), json!(false));
            j.insert("undefined_reason".into(), json!(reason));
            let _ = writeln!(h, "{label} is undefined: {reason}");
        }
        MasseyResult::Defined(c) => {
            j.insert("defined".into(), json!(true));
            j.insert("degree".into(), json!(c.degree));
            j.insert("lifts".into(), json!([alg.display(&c.lifts.0), alg.display(&c.lifts.1)]));
            j.insert("representative".into(), json!(alg.display(&c.representative)));
            j.insert("class".into(), class_json(&c.class));
            j.insert(
                "indeterminacy".into(),
                Value::Array(c.indeterminacy.iter().map(|v| class_json(v)).collect()),
            );
            j.insert("contains_zero".into(), json!(c.contains_zero));
            let _ = writeln!(h, "{label} in degree {}", c.degree);
            let _ = writeln!(h, "  lifts: {} ; {}", alg.display(&c.lifts.0), alg.display(&c.lifts.1));
            let _ = writeln!(h, "  representative: {}", alg.display(&c.representative));
            let _ = writeln!(h, "  class: {}", class_text(c.degree, &c.class));
            let _ = writeln!(h, "  indeterminacy dimension: {}", c.indeterminacy.len());
            let _ = writeln!(h, "  contains zero: {}", if c.contains_zero { "yes" } else { "no" });
        }
    }
    Ok(())
}

fn homotopy(args: &HomotopyArgs, input: &Input, rep: &mut Report) -> Result<(), Failure> {
    let n = args.common.max_degree;
    let inst = cdga(input, n)?;
    let targets: Vec<(&str, AugTarget)> = match args.mode {
        Mode::OverR => vec![("over-R", AugTarget::OverR)],
        Mode::OverK => vec![("over-k", AugTarget::OverK)],
        Mode::Both => vec![("over-R", AugTarget::OverR), ("over-k", AugTarget::OverK)],
    };
    let tables: Vec<_> = targets
        .iter()
        .map(|(name, t)| (*name, inst.indecomposables_homotopy(*t)))
        .collect();
    for (name, t) in &tables {
        let key = format!("pi_{}", name.replace('-', "_").to_lowercase());
        rep.json.insert(key, Value::Object(t.iter().map(|(d, x)| (d.to_string(), json!(x))).collect()));
    }
    let rows: Vec<(usize, Vec<String>)> = (1..=n)
        .map(|d| (d, tables.iter().map(|(_, t)| t[&d].to_string()).collect()))
        .collect();
    let headers: Vec<&str> = tables.iter().map(|(name, _)| *name).collect();
    betti_table(&mut rep.human, &rows, &headers);
    Ok(())
}

fn check(args: &CheckArgs, input: &Input, rep: &mut Report) -> Result<(), Failure> {
    let n = args.common.max_degree;
    input.algebra.validate(n + 2)?;
    let suite = run_suite(input.algebra.presentation(), n)?;
    let checks: Vec<Value> = suite
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "cases": c.cases, "passed": c.passed(), "failure": c.failure}))
        .collect();
    rep.json.insert("checks".into(), Value::Array(checks.clone()));
    for c in &suite.checks {
        let _ = write!(
            rep.human,
            "{:<30} {:>8} cases  {}",
            c.name,
            c.cases,
            if c.passed() { "pass" } else { "FAIL" }
        );
        if let Some(f) = &c.failure {
            let _ = write!(rep.human, "  {f}");
        }
        rep.human.push('\n');
    }
    if !suite.passed() {
        let first = suite.checks.iter().find(|c| !c.passed()).expect("a failed check");
        let mut f = Failure::new(
            EXIT_INVARIANT,
            "check-failed",
            format!("{}: {}", first.name, first.failure.clone().unwrap_or_default()),
        );
        f.details = Some(Value::Array(checks));
        return Err(f);
    }
    Ok(())
}

fn render(rep: Report, output: Output, failure: Option<&Failure>) -> String {
    let mut json = rep.json;
    let mut human = rep.human;
    match failure {
        None => {
            json.insert("status".into(), json!("ok"));
            json.insert("exit_code".into(), json!(EXIT_OK));
        }
        Some(f) => {
            json.insert("status".into(), json!("error"));
            json.insert("exit_code".into(), json!(f.code));
            json.insert("reason".into(), json!(f.reason));
            json.insert("message".into(), json!(f.message));
            if let Some(l) = f.line {
                json.insert("line".into(), json!(l));
            }
            if let Some(c) = f.column {
                json.insert("column".into(), json!(c));
            }
            if let Some(d) = &f.details {
                json.entry("details").or_insert(d.clone());
            }
            let _ = writeln!(human, "error: {}", f.message);
            let _ = writeln!(human, "reason: {}", f.reason);
        }
    }
    match output {
        Output::Json => {
            let mut s = serde_json::to_string_pretty(&Value::Object(json)).expect("serializable");
            s.push('\n');
            s
        }
        Output::Human => human,
    }
}

fn common_of(c: &Command) -> &Common {
    match c {
        Command::Tor(a) => &a.common,
        Command::Cohomology(a) => &a.common,
        Command::Massey(a) => &a.common,
        Command::Homotopy(a) => &a.common,
        Command::Check(a) => &a.common,
    }
}

fn name_of(c: &Command) -> &'static str {
    match c {
        Command::Tor(_) => "tor",
        Command::Cohomology(_) => "cohomology",
        Command::Massey(_) => "massey",
        Command::Homotopy(_) => "homotopy",
        Command::Check(_) => "check",
    }
}

/// Runs one invocation; `argv` includes the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                _ => Outcome {
                    stdout: "reason: usage\n".to_string(),
                    stderr: text,
                    code: EXIT_INPUT,
                },
            };
        }
    };
    let common = common_of(&cli.command);
    let command = name_of(&cli.command);
    let input = match load(common, validation_degree(&cli.command)) {
        Ok(i) => i,
        Err(f) => {
            let mut json = Map::new();
            json.insert("command".into(), json!(command));
            json.insert("input".into(), json!(common.file.display().to_string()));
            json.insert("max_degree".into(), json!(common.max_degree));
            let rep = Report {
                json,
                human: format!("{command} {}\n", common.file.display()),
            };
            return Outcome {
                stdout: render(rep, common.output, Some(&f)),
                stderr: format!("bartor: {}\n", f.message),
                code: f.code,
            };
        }
    };
    let mut rep = Report::new(command, &input, common.max_degree);
    let result = match &cli.command {
        Command::Tor(a) => tor(a, &input, &mut rep),
        Command::Cohomology(a) => cohomology(a, &input, &mut rep),
        Command::Massey(a) => massey(a, &input, &mut rep),
        Command::Homotopy(a) => homotopy(a, &input, &mut rep),
        Command::Check(a) => check(a, &input, &mut rep),
    };
    let mut stderr = String::new();
    if let Some(dir) = &common.cache_dir {
        if let Err(e) = write_cache(dir, &input) {
            let _ = writeln!(stderr, "bartor: cache not written: {e}");
        }
    }
    let failure = result.err();
    if let Some(f) = &failure {
        let _ = writeln!(stderr, "bartor: {}", f.message);
    }
    let _ = writeln!(stderr, "time: {:.3}s", start.elapsed().as_secs_f64());
    Outcome {
        stdout: render(rep, common.output, failure.as_ref()),
        stderr,
        code: failure.map(|f| f.code).unwrap_or(EXIT_OK),
    }
}
