//! The line-oriented presentation format.
//!
//! ```text
//! algebra H
//! generator u degree 2
//! generator x degree 2
//! rbase u
//! relation x^2 - u^2
//! augment x -> -u
//! differential y -> u*x
//! ```
//!
//! `#` starts a comment. Every generator must be declared before any line
//! that mentions it.

use std::fmt::Write as _;

use bartor::algebra::{parse_poly, AlgebraError, AlgebraPresentation, Generator, GeneratorSet, Poly};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}{source}", location(*.line))]
    Semantic {
        line: Option<usize>,
        source: AlgebraError,
    },
}

fn location(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl DocError {
    /// Stable machine-readable reason.
    pub fn reason(&self) -> &'static str {
        match self {
            DocError::Syntax { .. } => "syntax",
            DocError::Semantic { source, .. } => algebra_reason(source),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            DocError::Syntax { line, .. } => Some(*line),
            DocError::Semantic { line, .. } => *line,
        }
    }

    pub fn column(&self) -> Option<usize> {
        match self {
            DocError::Syntax { column, .. } => Some(*column),
            DocError::Semantic { .. } => None,
        }
    }
}

/// Reason code for an algebra validation failure.
pub fn algebra_reason(e: &AlgebraError) -> &'static str {
    use AlgebraError::*;
    match e {
        DuplicateGenerator(_) => "duplicate-generator",
        DegreeZeroGenerator(_) => "degree-zero-generator",
        UnknownGenerator(_) => "unknown-generator",
        Expr { .. } => "syntax",
        NonHomogeneous(_) => "homogeneity",
        OddBaseGenerator(_) => "odd-base-generator",
        AugmentationOutsideBase(_) => "augmentation-outside-base",
        AugmentationDegree { .. } => "augmentation-degree",
        AugmentationNotIdentity(_) => "augmentation-not-identity",
        AugmentationKillsRelation(_) => "augmentation-on-relation",
        AugmentationNotChainMap(_) => "augmentation-not-chain-map",
        BaseRingNotFree(_) => "base-ring-not-free",
        DifferentialDegree { .. } => "differential-degree",
        DifferentialNotWellDefined(_) => "differential-not-well-defined",
        DifferentialSquare(_) => "d-squared",
        NotNormalForm(_) => "not-normal-form",
        DegreeMismatch(..) => "degree-mismatch",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Directive {
    Generator,
    Rbase,
    Relation,
    Augment,
    Differential,
}

/// Parsed document together with the line each entry came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentationDocument {
    pub presentation: AlgebraPresentation,
    entries: Vec<(Directive, String, usize)>,
}

impl PresentationDocument {
    /// Attaches a source line to a validation error where the error names
    /// one.
    pub fn locate(&self, e: AlgebraError) -> DocError {
        let line = locate_in(&self.entries, &e);
        DocError::Semantic { line, source: e }
    }
}

fn locate_in(entries: &[(Directive, String, usize)], e: &AlgebraError) -> Option<usize> {
    use AlgebraError::*;
    let find = |d: Directive, name: &str| {
        entries
            .iter()
            .filter(|(k, n, _)| *k == d && n == name)
            .map(|e| e.2)
            .next_back()
    };
    match e {
        DuplicateGenerator(n) | DegreeZeroGenerator(n) => find(Directive::Generator, n),
        OddBaseGenerator(n) => find(Directive::Rbase, n),
        AugmentationOutsideBase(n) | AugmentationNotIdentity(n) => find(Directive::Augment, n),
        AugmentationDegree { name, .. } => find(Directive::Augment, name),
        DifferentialDegree { name, .. } => find(Directive::Differential, name),
        DifferentialSquare(n) => find(Directive::Differential, n),
        _ => None,
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Whitespace-separated words of a line with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

struct Parser {
    name: Option<String>,
    gens: Vec<Generator>,
    rbase: Vec<String>,
    relations: Vec<String>,
    augment: Vec<(String, String)>,
    differential: Vec<(String, String)>,
    entries: Vec<(Directive, String, usize)>,
}

impl Parser {
    fn syntax(line: usize, column: usize, message: impl Into<String>) -> DocError {
        DocError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn declared(&self) -> GeneratorSet {
        GeneratorSet::new(self.gens.clone(), &[])
    }

    /// Parses an expression starting at byte `offset` of line `line`.
    fn expression(&self, line: usize, offset: usize, text: &str) -> Result<Poly, DocError> {
        if text.trim().is_empty() {
            return Err(Self::syntax(line, offset + 1, "missing expression"));
        }
        let gens = self.declared();
        parse_poly(&gens, text).map_err(|e| Self::syntax(line, offset + e.offset + 1, e.message))
    }

    fn known(&self, line: usize, column: usize, name: &str) -> Result<(), DocError> {
        if self.gens.iter().any(|g| g.name == name) {
            Ok(())
        } else {
            Err(Self::syntax(line, column, format!("generator '{name}' is not declared")))
        }
    }

    /// `NAME -> EXPR` after a directive keyword.
    fn mapping<'a>(&self, ln: usize, raw: &'a str, after: usize) -> Result<(String, usize, &'a str), DocError> {
        let rest = &raw[after..];
        let arrow = rest
            .find("->")
            .ok_or_else(|| Self::syntax(ln, after + 1, "expected 'NAME -> EXPR'"))?;
        let lhs = rest[..arrow].trim();
        let lhs_col = after + rest.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
        if !is_ident(lhs) {
            return Err(Self::syntax(ln, lhs_col, "expected a generator name before '->'"));
        }
        self.known(ln, lhs_col, lhs)?;
        let expr_start = after + arrow + 2;
        Ok((lhs.to_string(), expr_start, &raw[expr_start..]))
    }

    fn line(&mut self, ln: usize, raw: &str) -> Result<(), DocError> {
        let ws = words(raw);
        let Some(&(col, keyword)) = ws.first() else {
            return Ok(());
        };
        let after = col - 1 + keyword.len();
        match keyword {
            "algebra" => {
                if self.name.is_some() {
                    return Err(Self::syntax(ln, col, "duplicate 'algebra' line"));
                }
                match ws.as_slice() {
                    [_, (_, name)] if is_ident(name) => self.name = Some(name.to_string()),
                    [_, (c, _), ..] => return Err(Self::syntax(ln, *c, "expected 'algebra NAME'")),
                    _ => return Err(Self::syntax(ln, after + 1, "expected 'algebra NAME'")),
                }
            }
            "generator" => match ws.as_slice() {
                [_, (nc, name), (dc, kw), (vc, value)] => {
                    if !is_ident(name) {
                        return Err(Self::syntax(ln, *nc, format!("invalid generator name '{name}'")));
                    }
                    if *kw != "degree" {
                        return Err(Self::syntax(ln, *dc, "expected 'degree'"));
                    }
                    let degree: usize = value
                        .parse()
                        .map_err(|_| Self::syntax(ln, *vc, format!("invalid degree '{value}'")))?;
                    self.gens.push(Generator {
                        name: name.to_string(),
                        degree,
                    });
                    self.entries.push((Directive::Generator, name.to_string(), ln));
                }
                _ => return Err(Self::syntax(ln, col, "expected 'generator NAME degree N'")),
            },
            "rbase" => {
                if ws.len() < 2 {
                    return Err(Self::syntax(ln, after + 1, "expected 'rbase NAME ...'"));
                }
                for &(c, name) in &ws[1..] {
                    self.known(ln, c, name)?;
                    self.rbase.push(name.to_string());
                    self.entries.push((Directive::Rbase, name.to_string(), ln));
                }
            }
            "relation" => {
                let text = &raw[after..];
                let p = self.expression(ln, after, text)?;
                if p.homogeneous_degree(&self.declared()).is_none() && !p.is_zero() {
                    let degrees = p.degrees(&self.declared());
                    return Err(DocError::Semantic {
                        line: Some(ln),
                        source: AlgebraError::NonHomogeneous(format!(
                            "relation {} (degrees {degrees:?})",
                            text.trim()
                        )),
                    });
                }
                self.relations.push(text.trim().to_string());
                self.entries.push((Directive::Relation, String::new(), ln));
            }
            "augment" | "differential" => {
                let (name, start, text) = self.mapping(ln, raw, after)?;
                self.expression(ln, start, text)?;
                let entry = (name.clone(), text.trim().to_string());
                if keyword == "augment" {
                    self.augment.push(entry);
                    self.entries.push((Directive::Augment, name, ln));
                } else {
                    self.differential.push(entry);
                    self.entries.push((Directive::Differential, name, ln));
                }
            }
            other => return Err(Self::syntax(ln, col, format!("unknown directive '{other}'"))),
        }
        Ok(())
    }
}

/// Parses and validates the structural rules of a presentation; degree-wise
/// checks happen when the algebra is built to a truncation degree.
pub fn parse_document(text: &str) -> Result<PresentationDocument, DocError> {
    let mut p = Parser {
        name: None,
        gens: Vec::new(),
        rbase: Vec::new(),
        relations: Vec::new(),
        augment: Vec::new(),
        differential: Vec::new(),
        entries: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        p.line(i + 1, code)?;
    }
    let name = p.name.clone().ok_or_else(|| Parser::syntax(1, 1, "missing 'algebra NAME' line"))?;
    let mut b = AlgebraPresentation::builder(&name);
    for g in &p.gens {
        b = b.generator(&g.name, g.degree);
    }
    for r in &p.rbase {
        b = b.r_generator(r);
    }
    for r in &p.relations {
        b = b.relation(r);
    }
    for (n, e) in &p.augment {
        b = b.augment(n, e);
    }
    for (n, e) in &p.differential {
        b = b.differential(n, e);
    }
    let presentation = b.build().map_err(|e| DocError::Semantic {
        line: locate_in(&p.entries, &e),
        source: e,
    })?;
    Ok(PresentationDocument {
        presentation,
        entries: p.entries,
    })
}

pub fn parse_presentation(text: &str) -> Result<AlgebraPresentation, DocError> {
    parse_document(text).map(|d| d.presentation)
}

/// Canonical text of a presentation: declarations in order, then `rbase`,
/// relations, explicit augmentations and differentials.
pub fn render(p: &AlgebraPresentation) -> String {
    let gens = p.gens();
    let mut out = String::new();
    let _ = writeln!(out, "algebra {}", p.name);
    for g in gens.generators() {
        let _ = writeln!(out, "generator {} degree {}", g.name, g.degree);
    }
    if !p.r_generators().is_empty() {
        let names: Vec<&str> = p
            .r_generators()
            .iter()
            .map(|&g| gens.get(g).name.as_str())
            .collect();
        let _ = writeln!(out, "rbase {}", names.join(" "));
    }
    for r in p.relations() {
        let _ = writeln!(out, "relation {}", r.display(gens));
    }
    for (g, gen) in gens.generators().iter().enumerate() {
        let a = p.augmentation_of(g);
        if !p.r_generators().contains(&g) && !a.is_zero() {
            let _ = writeln!(out, "augment {} -> {}", gen.name, a.display(gens));
        }
    }
    for (g, gen) in gens.generators().iter().enumerate() {
        let d = p.differential_of(g);
        if !d.is_zero() {
            let _ = writeln!(out, "differential {} -> {}", gen.name, d.display(gens));
        }
    }
    out
}
