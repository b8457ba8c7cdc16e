use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{fmt_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
}

impl Generator {
    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Exponent vector indexed by generator declaration order. Odd generators
/// carry exponent zero or one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(ngens: usize) -> Self {
        Monomial(vec![0; ngens])
    }

    pub fn generator(ngens: usize, g: usize) -> Self {
        let mut e = vec![0; ngens];
        e[g] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// True when only generators from `allowed` occur.
    pub fn supported_on(&self, allowed: &[usize]) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(g, &e)| e == 0 || allowed.contains(&g))
    }
}

/// The generating set of a free graded-commutative algebra, with the
/// monomial order used for normal forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    gens: Vec<Generator>,
    // generator indices from most to least significant
    order: Vec<usize>,
}

impl GeneratorSet {
    /// `low` lists generators ranked below all others (the polynomial base
    /// ring); the rest keep declaration order.
    pub fn new(gens: Vec<Generator>, low: &[usize]) -> Self {
        let mut order: Vec<usize> = (0..gens.len()).filter(|g| !low.contains(g)).collect();
        order.extend((0..gens.len()).filter(|g| low.contains(g)));
        Self { gens, order }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn get(&self, g: usize) -> &Generator {
        &self.gens[g]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn degree(&self, m: &Monomial) -> usize {
        m.0.iter()
            .zip(&self.gens)
            .map(|(&e, g)| e as usize * g.degree)
            .sum()
    }

    /// Compares two monomials of equal degree; `Greater` means more significant.
    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
        for &g in &self.order {
            match a.0[g].cmp(&b.0[g]) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// Product of monomials in the free graded-commutative algebra, with the
    /// Koszul sign from reordering odd generators into declaration order.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut negative = false;
        // odd generators of `a` standing after an odd generator of `b`
        let mut odd_in_a_after = 0u32;
        let mut out = Vec::with_capacity(a.0.len());
        for g in (0..self.gens.len()).rev() {
            let (ea, eb) = (a.0[g], b.0[g]);
            if self.gens[g].is_odd() {
                if ea + eb > 1 {
                    return None;
                }
                if eb == 1 && odd_in_a_after % 2 == 1 {
                    negative = !negative;
                }
                if ea == 1 {
                    odd_in_a_after += 1;
                }
            }
            out.push(ea + eb);
        }
        out.reverse();
        Some((negative, Monomial(out)))
    }

    /// All free monomials of degree `n`, most significant first.
    pub fn monomials_of_degree(&self, n: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u32; self.gens.len()];
        self.enumerate(0, n, &mut current, &mut out);
        out.sort_by(|a, b| self.cmp_monomials(b, a));
        out
    }

    fn enumerate(&self, g: usize, remaining: usize, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if g == self.gens.len() {
            if remaining == 0 {
                out.push(Monomial(current.clone()));
            }
            return;
        }
        let d = self.gens[g].degree;
        let max = if self.gens[g].is_odd() {
            1.min(remaining / d)
        } else {
            remaining / d
        };
        for e in 0..=max {
            current[g] = e as u32;
            self.enumerate(g + 1, remaining - e * d, current, out);
        }
        current[g] = 0;
    }

    pub fn fmt_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(g, &e)| {
                if e == 1 {
                    self.gens[g].name.clone()
                } else {
                    format!("{}^{}", self.gens[g].name, e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Polynomial in the free graded-commutative algebra on a [`GeneratorSet`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(ngens: usize, c: Q) -> Self {
        Self::term(Monomial::one(ngens), c)
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn generator(ngens: usize, g: usize) -> Self {
        Self::term(Monomial::generator(ngens, g), Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Q, other: &Poly) {
        for (m, x) in &other.terms {
            self.add_term(m.clone(), c * x);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(&Q::one(), other);
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(&-Q::one(), other);
        p
    }

    pub fn scaled(&self, c: &Q) -> Poly {
        let mut p = Poly::zero();
        p.add_scaled(c, self);
        p
    }

    pub fn mul(&self, other: &Poly, gens: &GeneratorSet) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = gens.mul_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32, gens: &GeneratorSet) -> Poly {
        let mut out = Poly::constant(gens.len(), Q::one());
        for _ in 0..e {
            out = out.mul(self, gens);
        }
        out
    }

    /// Degrees of the terms; a homogeneous nonzero polynomial has exactly one.
    pub fn degrees(&self, gens: &GeneratorSet) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|m| gens.degree(m)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous_degree(&self, gens: &GeneratorSet) -> Option<usize> {
        match self.degrees(gens).as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    pub fn display(&self, gens: &GeneratorSet) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut ordered: Vec<(&Monomial, &Q)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| {
            gens.degree(b.0)
                .cmp(&gens.degree(a.0))
                .then_with(|| gens.cmp_monomials(b.0, a.0))
        });
        fmt_terms(ordered.into_iter().map(|(m, c)| (gens.fmt_monomial(m), c.clone())))
    }
}

/// Renders `c1*t1 + c2*t2 - ...` with unit coefficients suppressed.
pub fn fmt_terms<I: IntoIterator<Item = (String, Q)>>(terms: I) -> String {
    let mut out = String::new();
    for (i, (name, c)) in terms.into_iter().enumerate() {
        let neg = crate::linalg::is_negative(&c);
        let mag = if neg { -c } else { c };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag.is_one() {
            out.push_str(&name);
        } else if name == "1" {
            out.push_str(&fmt_q(&mag));
        } else {
            out.push_str(&format!("{}*{}", fmt_q(&mag), name));
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    fn gens() -> GeneratorSet {
        GeneratorSet::new(
            vec![
                Generator { name: "a".into(), degree: 1 },
                Generator { name: "b".into(), degree: 3 },
                Generator { name: "u".into(), degree: 2 },
            ],
            &[2],
        )
    }

    #[test]
    fn odd_generators_anticommute() {
        let g = gens();
        let a = Poly::generator(3, 0);
        let b = Poly::generator(3, 1);
        let ab = a.mul(&b, &g);
        let ba = b.mul(&a, &g);
        assert_eq!(ab, ba.scaled(&q(-1)));
        assert!(a.mul(&a, &g).is_zero());
    }

    #[test]
    fn even_generators_commute() {
        let g = gens();
        let a = Poly::generator(3, 0);
        let u = Poly::generator(3, 2);
        assert_eq!(a.mul(&u, &g), u.mul(&a, &g));
    }

    #[test]
    fn monomial_enumeration_respects_parity() {
        let g = gens();
        // degree 4: a*b, u^2
        let ms = g.monomials_of_degree(4);
        assert_eq!(ms.len(), 2);
        // a ranks above u, so a*b leads
        assert_eq!(g.fmt_monomial(&ms[0]), "a*b");
        let ms = g.monomials_of_degree(2);
        assert_eq!(ms.len(), 1);
        assert_eq!(g.monomials_of_degree(0).len(), 1);
    }

    #[test]
    fn display_orders_terms() {
        let g = gens();
        let p = Poly::generator(3, 2)
            .pow(2, &g)
            .sub(&Poly::generator(3, 0).mul(&Poly::generator(3, 1), &g));
        assert_eq!(p.display(&g), "-a*b + u^2");
    }
}
