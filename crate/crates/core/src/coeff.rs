//! Exact coefficient ring: polynomials in named scalar symbols over the
//! Gaussian rationals.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const M2: &str = "m2";
pub const XI: &str = "xi";
pub const ETA: &str = "eta";
pub const INV_PI2: &str = "ipi2";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    MassSquared,
    CouplingParameter,
    CurvatureConstant,
    NumericConstant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarSymbol {
    pub name: String,
    pub kind: SymbolKind,
    pub latex: String,
}

/// Declared scalar symbols; names are unique.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    symbols: BTreeMap<String, ScalarSymbol>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        let mut t = SymbolTable { symbols: BTreeMap::new() };
        t.declare(M2, SymbolKind::MassSquared, "m^{2}").unwrap();
        t.declare(XI, SymbolKind::CouplingParameter, "\\xi").unwrap();
        t.declare(ETA, SymbolKind::CouplingParameter, "\\eta").unwrap();
        t.declare(INV_PI2, SymbolKind::NumericConstant, "\\pi^{-2}").unwrap();
        t
    }
}

impl SymbolTable {
    pub fn declare(&mut self, name: &str, kind: SymbolKind, latex: &str) -> Result<(), String> {
        if self.symbols.contains_key(name) {
            return Err(format!("scalar symbol `{name}` already declared"));
        }
        self.symbols.insert(name.to_string(), ScalarSymbol { name: name.to_string(), kind, latex: latex.to_string() });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ScalarSymbol> {
        self.symbols.get(name)
    }

    pub fn latex(&self, name: &str) -> String {
        self.symbols.get(name).map(|s| s.latex.clone()).unwrap_or_else(|| name.to_string())
    }
}

/// `re + i im` with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }
    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }
    pub fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }
    pub fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn add(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
    pub fn mul(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
    pub fn neg(&self) -> GaussRat {
        GaussRat::new(-&self.re, -&self.im)
    }
    /// None for zero.
    pub fn inv(&self) -> Option<GaussRat> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(GaussRat::new(&self.re / &n, -&self.im / &n))
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}i)", self.re, -&self.im)
                } else {
                    write!(f, "({}+{}i)", self.re, self.im)
                }
            }
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Serde adapter writing a rational as its `n/d` string.
pub mod rat_string {
    use super::parse_rat;
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
    }
}

/// Monomial in scalar symbols: sorted `(name, power)` pairs, powers ≥ 1.
pub type SymMono = Vec<(String, u32)>;

fn mono_mul(a: &SymMono, b: &SymMono) -> SymMono {
    let mut m: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (s, p) in b {
        *m.entry(s.clone()).or_insert(0) += p;
    }
    m.into_iter().collect()
}

/// Polynomial in scalar symbols with Gaussian-rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CoeffElem {
    terms: BTreeMap<SymMono, GaussRat>,
}

impl CoeffElem {
    pub fn zero() -> Self {
        CoeffElem::default()
    }

    pub fn one() -> Self {
        CoeffElem::constant(GaussRat::one())
    }

    pub fn i() -> Self {
        CoeffElem::constant(GaussRat::i())
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        CoeffElem { terms }
    }

    pub fn int(n: i64) -> Self {
        CoeffElem::rational(rat(n, 1))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        CoeffElem::rational(rat(n, d))
    }

    pub fn rational(r: BigRational) -> Self {
        CoeffElem::constant(GaussRat::real(r))
    }

    pub fn sym(name: &str) -> Self {
        CoeffElem::sym_pow(name, 1)
    }

    pub fn sym_pow(name: &str, p: u32) -> Self {
        if p == 0 {
            return CoeffElem::one();
        }
        let mut terms = BTreeMap::new();
        terms.insert(vec![(name.to_string(), p)], GaussRat::one());
        CoeffElem { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (SymMono, GaussRat)>) -> Self {
        let mut c = CoeffElem::zero();
        for (m, g) in it {
            let mut m = m;
            m.retain(|(_, p)| *p > 0);
            m.sort();
            c.add_term(m, g);
        }
        c
    }

    fn add_term(&mut self, m: SymMono, g: GaussRat) {
        if g.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e = e.add(&g);
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, g);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|g| g == GaussRat::one()).unwrap_or(false)
    }

    /// Some if the element has no symbol dependence.
    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_constant().filter(|g| g.is_real()).map(|g| g.re)
    }

    pub fn scale(&self, g: &GaussRat) -> CoeffElem {
        if g.is_zero() {
            return CoeffElem::zero();
        }
        CoeffElem { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(g))).collect() }
    }

    pub fn scale_rat(&self, r: &BigRational) -> CoeffElem {
        self.scale(&GaussRat::real(r.clone()))
    }

    pub fn pow(&self, k: u32) -> CoeffElem {
        let mut acc = CoeffElem::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn symbols(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.keys().flat_map(|m| m.iter().map(|(s, _)| s.clone())).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        self.terms.keys().map(|m| m.iter().find(|(s, _)| s == name).map(|(_, p)| *p).unwrap_or(0)).max().unwrap_or(0)
    }

    /// Coefficient of `name^deg`, as a polynomial in the remaining symbols.
    pub fn coefficient_of(&self, name: &str, deg: u32) -> CoeffElem {
        let mut out = CoeffElem::zero();
        for (m, c) in &self.terms {
            let p = m.iter().find(|(s, _)| s == name).map(|(_, p)| *p).unwrap_or(0);
            if p == deg {
                let rest: SymMono = m.iter().filter(|(s, _)| s != name).cloned().collect();
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Replace every occurrence of `name` by `value`.
    pub fn substitute(&self, name: &str, value: &CoeffElem) -> CoeffElem {
        let mut out = CoeffElem::zero();
        for (m, c) in &self.terms {
            let p = m.iter().find(|(s, _)| s == name).map(|(_, p)| *p).unwrap_or(0);
            let rest: SymMono = m.iter().filter(|(s, _)| s != name).cloned().collect();
            let base = CoeffElem::from_terms([(rest, c.clone())]);
            out = &out + &(&base * &value.pow(p));
        }
        out
    }

    pub fn to_latex(&self, table: &SymbolTable) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut s = String::new();
            let syms: String = m
                .iter()
                .map(|(n, p)| {
                    let l = table.latex(n);
                    if *p == 1 {
                        l
                    } else {
                        format!("\\left({l}\\right)^{{{p}}}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" ");
            let num = gauss_latex(c);
            if syms.is_empty() {
                s.push_str(&num);
            } else if num == "1" {
                s.push_str(&syms);
            } else if num == "-1" {
                s.push('-');
                s.push_str(&syms);
            } else {
                s.push_str(&num);
                s.push(' ');
                s.push_str(&syms);
            }
            parts.push(s);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

fn rat_latex(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -r.numer(), r.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

fn gauss_latex(g: &GaussRat) -> String {
    match (g.re.is_zero(), g.im.is_zero()) {
        (_, true) => rat_latex(&g.re),
        (true, false) => {
            if g.im.is_one() {
                "i".into()
            } else if (-&g.im).is_one() {
                "-i".into()
            } else {
                format!("{} i", rat_latex(&g.im))
            }
        }
        (false, false) => {
            let im = if g.im.is_negative() {
                format!(" - {} i", rat_latex(&-&g.im))
            } else {
                format!(" + {} i", rat_latex(&g.im))
            };
            format!("\\left({}{}\\right)", rat_latex(&g.re), im)
        }
    }
}

impl fmt::Display for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let syms: Vec<String> =
                    m.iter().map(|(n, p)| if *p == 1 { n.clone() } else { format!("{n}^{p}") }).collect();
                if syms.is_empty() {
                    c.to_string()
                } else {
                    format!("{}*{}", c, syms.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &CoeffElem {
    type Output = CoeffElem;
    fn add(self, o: &CoeffElem) -> CoeffElem {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &CoeffElem {
    type Output = CoeffElem;
    fn sub(self, o: &CoeffElem) -> CoeffElem {
        self + &(-o)
    }
}

impl Neg for &CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        CoeffElem { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }
}

impl Mul for &CoeffElem {
    type Output = CoeffElem;
    fn mul(self, o: &CoeffElem) -> CoeffElem {
        let mut out = CoeffElem::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(mono_mul(ma, mb), ca.mul(cb));
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr for CoeffElem {
            type Output = CoeffElem;
            fn $f(self, o: CoeffElem) -> CoeffElem {
                (&self).$f(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    symbols: BTreeMap<String, u32>,
    re: String,
    im: String,
}

impl Serialize for CoeffElem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr { symbols: m.iter().cloned().collect(), re: c.re.to_string(), im: c.im.to_string() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        let mut terms = Vec::new();
        for t in v {
            let re = parse_rat(&t.re).ok_or_else(|| serde::de::Error::custom("bad rational"))?;
            let im = parse_rat(&t.im).ok_or_else(|| serde::de::Error::custom("bad rational"))?;
            terms.push((t.symbols.into_iter().collect(), GaussRat::new(re, im)));
        }
        Ok(CoeffElem::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_is_minus_one() {
        assert_eq!(&CoeffElem::i() * &CoeffElem::i(), CoeffElem::int(-1));
    }

    #[test]
    fn substitution_and_extraction() {
        let c = &CoeffElem::sym(ETA) * &CoeffElem::int(4) - CoeffElem::one();
        assert_eq!(c.coefficient_of(ETA, 1), CoeffElem::int(4));
        assert_eq!(c.coefficient_of(ETA, 0), CoeffElem::int(-1));
        assert!(c.substitute(ETA, &CoeffElem::frac(1, 4)).is_zero());
    }
}
