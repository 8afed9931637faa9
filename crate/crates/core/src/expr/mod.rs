//! Symbolic expression IR: monomials over abstract spacetime points with
//! exact coefficients and λ/ℏ bookkeeping.

mod canon;
mod display;

pub use canon::Symmetry;
pub use display::{index_latex, point_latex};

use crate::coeff::CoeffElem;
use crate::error::{EngineError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub String);

impl Point {
    pub fn new(s: &str) -> Self {
        Point(s.to_string())
    }
    pub fn name(&self) -> &str {
        &self.0
    }
    /// Names starting with `#` are reserved for canonical renaming.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('#')
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "label")]
pub enum Binding {
    Free,
    Integrated(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Index {
    pub name: String,
    pub up: bool,
}

impl Index {
    pub fn down(name: &str) -> Self {
        Index { name: name.to_string(), up: false }
    }
    pub fn up(name: &str) -> Self {
        Index { name: name.to_string(), up: true }
    }
    pub fn raised(&self) -> Self {
        Index { name: self.name.clone(), up: !self.up }
    }
}

/// One derivative-type operator acting on a slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DOp {
    Cov(Index),
    Box,
    P0,
}

impl DOp {
    pub fn index(&self) -> Option<&Index> {
        match self {
            DOp::Cov(i) => Some(i),
            _ => None,
        }
    }
}

/// Operators in application order: `ops[0]` acts first.
pub type Ops = Vec<DOp>;

pub fn ops_have_indices(ops: &[DOp]) -> bool {
    ops.iter().any(|o| matches!(o, DOp::Cov(_)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    H,
    HF,
    HAF,
    Delta,
    DeltaA,
    DeltaR,
    DiracDelta,
    W,
    /// Symmetric part of H.
    Hs,
    /// Placeholder kernel for template contractions.
    Slot(u8),
    Zero,
}

impl KernelKind {
    pub fn name(&self) -> String {
        match self {
            KernelKind::Slot(k) => format!("K{k}"),
            k => format!("{k:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tensor {
    Metric,
    InverseMetric,
    Einstein,
    Ricci,
    RicciScalar,
    Weyl,
    /// Coincidence limit v₁(z,z) of the second Hadamard coefficient.
    V1,
}

impl Tensor {
    pub fn rank(&self) -> usize {
        match self {
            Tensor::Metric | Tensor::InverseMetric | Tensor::Einstein | Tensor::Ricci => 2,
            Tensor::RicciScalar | Tensor::V1 => 0,
            Tensor::Weyl => 4,
        }
    }
    pub fn is_symmetric(&self) -> bool {
        matches!(self, Tensor::Metric | Tensor::InverseMetric | Tensor::Einstein | Tensor::Ricci)
    }
    pub fn is_curvature(&self) -> bool {
        matches!(self, Tensor::Einstein | Tensor::Ricci | Tensor::RicciScalar | Tensor::Weyl)
    }
}

/// Operator applied to a field power at one point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldOp {
    Box,
    P0,
    NablaPair(Index, Index),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Factor {
    Field { at: Point, ops: Ops, exp: u32 },
    Kernel { kind: KernelKind, at: [Point; 2], ops: [Ops; 2], exp: u32 },
    Geom { tensor: Tensor, at: Point, idx: Vec<Index>, ops: Ops, exp: u32 },
    TestFn { label: String, at: Point, ops: Ops, exp: u32 },
    Applied { op: FieldOp, at: Point, power: u32 },
}

impl Factor {
    pub fn field(at: &Point) -> Factor {
        Factor::Field { at: at.clone(), ops: vec![], exp: 1 }
    }
    pub fn field_pow(at: &Point, exp: u32) -> Factor {
        Factor::Field { at: at.clone(), ops: vec![], exp }
    }
    pub fn field_ops(at: &Point, ops: Ops) -> Factor {
        Factor::Field { at: at.clone(), ops, exp: 1 }
    }
    pub fn kernel(kind: KernelKind, p: &Point, q: &Point, exp: u32) -> Factor {
        Factor::Kernel { kind, at: [p.clone(), q.clone()], ops: [vec![], vec![]], exp }
    }
    pub fn kernel_ops(kind: KernelKind, p: &Point, q: &Point, ops: [Ops; 2]) -> Factor {
        Factor::Kernel { kind, at: [p.clone(), q.clone()], ops, exp: 1 }
    }
    pub fn geom(tensor: Tensor, at: &Point, idx: Vec<Index>) -> Factor {
        Factor::Geom { tensor, at: at.clone(), idx, ops: vec![], exp: 1 }
    }
    pub fn test_fn(label: &str, at: &Point) -> Factor {
        Factor::TestFn { label: label.to_string(), at: at.clone(), ops: vec![], exp: 1 }
    }

    pub fn exp(&self) -> u32 {
        match self {
            Factor::Field { exp, .. }
            | Factor::Kernel { exp, .. }
            | Factor::Geom { exp, .. }
            | Factor::TestFn { exp, .. } => *exp,
            Factor::Applied { .. } => 1,
        }
    }

    pub fn set_exp(&mut self, e: u32) {
        match self {
            Factor::Field { exp, .. }
            | Factor::Kernel { exp, .. }
            | Factor::Geom { exp, .. }
            | Factor::TestFn { exp, .. } => *exp = e,
            Factor::Applied { .. } => {}
        }
    }

    pub fn points(&self) -> Vec<&Point> {
        match self {
            Factor::Kernel { at, .. } => vec![&at[0], &at[1]],
            Factor::Field { at, .. }
            | Factor::Geom { at, .. }
            | Factor::TestFn { at, .. }
            | Factor::Applied { at, .. } => vec![at],
        }
    }

    pub fn points_mut(&mut self) -> Vec<&mut Point> {
        match self {
            Factor::Kernel { at, .. } => at.iter_mut().collect(),
            Factor::Field { at, .. }
            | Factor::Geom { at, .. }
            | Factor::TestFn { at, .. }
            | Factor::Applied { at, .. } => vec![at],
        }
    }

    pub fn indices(&self) -> Vec<&Index> {
        fn ops_idx<'a>(ops: &'a Ops, v: &mut Vec<&'a Index>) {
            for o in ops {
                if let DOp::Cov(i) = o {
                    v.push(i);
                }
            }
        }
        let mut v = Vec::new();
        match self {
            Factor::Field { ops, .. } | Factor::TestFn { ops, .. } => ops_idx(ops, &mut v),
            Factor::Kernel { ops, .. } => {
                ops_idx(&ops[0], &mut v);
                ops_idx(&ops[1], &mut v);
            }
            Factor::Geom { idx, ops, .. } => {
                v.extend(idx.iter());
                ops_idx(ops, &mut v);
            }
            Factor::Applied { op: FieldOp::NablaPair(a, b), .. } => {
                v.push(a);
                v.push(b);
            }
            Factor::Applied { .. } => {}
        }
        v
    }

    pub fn indices_mut(&mut self) -> Vec<&mut Index> {
        fn ops_idx<'a>(ops: &'a mut Ops, v: &mut Vec<&'a mut Index>) {
            for o in ops.iter_mut() {
                if let DOp::Cov(i) = o {
                    v.push(i);
                }
            }
        }
        let mut v = Vec::new();
        match self {
            Factor::Field { ops, .. } | Factor::TestFn { ops, .. } => ops_idx(ops, &mut v),
            Factor::Kernel { ops, .. } => {
                let [a, b] = ops;
                ops_idx(a, &mut v);
                ops_idx(b, &mut v);
            }
            Factor::Geom { idx, ops, .. } => {
                v.extend(idx.iter_mut());
                ops_idx(ops, &mut v);
            }
            Factor::Applied { op: FieldOp::NablaPair(a, b), .. } => {
                v.push(a);
                v.push(b);
            }
            Factor::Applied { .. } => {}
        }
        v
    }

    /// Equal up to the exponent.
    pub fn same_base(&self, o: &Factor) -> bool {
        let mut a = self.clone();
        let mut b = o.clone();
        a.set_exp(1);
        b.set_exp(1);
        a == b
    }

    /// Powers merge only when no index is carried.
    pub fn mergeable(&self) -> bool {
        !matches!(self, Factor::Applied { .. }) && self.indices().is_empty()
    }

    pub fn is_field(&self) -> bool {
        matches!(self, Factor::Field { .. } | Factor::Applied { .. })
    }

    /// Total number of φ's carried.
    pub fn field_degree(&self) -> u32 {
        match self {
            Factor::Field { exp, .. } => *exp,
            Factor::Applied { power, .. } => *power,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exp() == 0 {
            return Err(EngineError::Structural("factor with zero exponent".into()));
        }
        if let Factor::Geom { tensor, idx, .. } = self {
            if idx.len() != tensor.rank() {
                return Err(EngineError::Structural(format!(
                    "{tensor:?} carries {} indices, rank is {}",
                    idx.len(),
                    tensor.rank()
                )));
            }
        }
        Ok(())
    }
}

/// `coeff · λ^lambda · ℏ^hbar · Π factors`, integrated over the integrated points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: CoeffElem,
    pub lambda: u32,
    pub hbar: i32,
    pub factors: Vec<Factor>,
    pub points: BTreeMap<Point, Binding>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::scalar(CoeffElem::one())
    }

    pub fn scalar(c: CoeffElem) -> Self {
        Monomial { coeff: c, lambda: 0, hbar: 0, factors: vec![], points: BTreeMap::new() }
    }

    pub fn with_factor(mut self, f: Factor) -> Self {
        for p in f.points() {
            self.points.entry(p.clone()).or_insert(Binding::Free);
        }
        self.factors.push(f);
        self
    }

    pub fn integrate(mut self, p: &Point, label: &str) -> Self {
        self.points.insert(p.clone(), Binding::Integrated(label.to_string()));
        self
    }

    pub fn with_coeff(mut self, c: CoeffElem) -> Self {
        self.coeff = c;
        self
    }

    pub fn with_orders(mut self, lambda: u32, hbar: i32) -> Self {
        self.lambda = lambda;
        self.hbar = hbar;
        self
    }

    pub fn field_degree(&self) -> u32 {
        self.factors.iter().map(|f| f.field_degree()).sum()
    }

    pub fn has_field(&self) -> bool {
        self.factors.iter().any(|f| f.is_field())
    }

    pub fn is_integrated(&self, p: &Point) -> bool {
        matches!(self.points.get(p), Some(Binding::Integrated(_)))
    }

    pub fn free_points(&self) -> Vec<Point> {
        self.points.iter().filter(|(_, b)| **b == Binding::Free).map(|(p, _)| p.clone()).collect()
    }

    /// Occurrences of each index name.
    pub fn index_counts(&self) -> BTreeMap<String, Vec<bool>> {
        let mut m: BTreeMap<String, Vec<bool>> = BTreeMap::new();
        for f in &self.factors {
            for i in f.indices() {
                m.entry(i.name.clone()).or_default().push(i.up);
            }
        }
        m
    }

    pub fn dummy_indices(&self) -> Vec<String> {
        self.index_counts().into_iter().filter(|(_, v)| v.len() == 2).map(|(k, _)| k).collect()
    }

    pub fn free_indices(&self) -> Vec<Index> {
        let mut out = Vec::new();
        for (k, v) in self.index_counts() {
            if v.len() == 1 {
                out.push(Index { name: k, up: v[0] });
            }
        }
        out
    }

    pub fn all_index_names(&self) -> BTreeSet<String> {
        self.index_counts().into_keys().collect()
    }

    /// Remove points no factor references.
    pub fn prune_points(&mut self) {
        let used: BTreeSet<Point> = self.factors.iter().flat_map(|f| f.points().into_iter().cloned()).collect();
        self.points.retain(|p, _| used.contains(p));
        for p in used {
            self.points.entry(p).or_insert(Binding::Free);
        }
    }

    pub fn rename_point(&mut self, from: &Point, to: &Point) {
        for f in &mut self.factors {
            for p in f.points_mut() {
                if p == from {
                    *p = to.clone();
                }
            }
        }
        if let Some(b) = self.points.remove(from) {
            self.points.entry(to.clone()).or_insert(b);
        }
    }

    pub fn rename_index(&mut self, from: &str, to: &str) {
        for f in &mut self.factors {
            for i in f.indices_mut() {
                if i.name == from {
                    i.name = to.to_string();
                }
            }
        }
    }

    /// Index name not present in this monomial.
    pub fn fresh_index(&self, hint: &str) -> String {
        let used = self.all_index_names();
        (0..).map(|k| format!("{hint}{k}")).find(|n| !used.contains(n)).unwrap()
    }

    pub fn fresh_point(&self, hint: &str) -> Point {
        (0..).map(|k| Point(format!("{hint}{k}"))).find(|p| !self.points.contains_key(p)).unwrap()
    }

    /// Copy of `o` whose integrated points and dummy indices avoid the names used here.
    pub fn rename_apart(&self, o: &Monomial) -> Monomial {
        let mut b = o.clone();
        let mut used: BTreeSet<Point> = self.points.keys().cloned().collect();
        used.extend(b.points.keys().cloned());
        for p in o.points.keys() {
            if o.is_integrated(p) && self.points.contains_key(p) {
                let fresh = (0..).map(|k| Point(format!("#r{k}"))).find(|q| !used.contains(q)).unwrap();
                used.insert(fresh.clone());
                b.rename_point(p, &fresh);
            }
        }
        let mut names = self.all_index_names();
        names.extend(b.all_index_names());
        let mine = self.all_index_names();
        for d in o.dummy_indices() {
            if mine.contains(&d) {
                let fresh = (0..).map(|k| format!("#s{k}")).find(|n| !names.contains(n)).unwrap();
                names.insert(fresh.clone());
                b.rename_index(&d, &fresh);
            }
        }
        b
    }

    /// Product with a monomial already renamed apart.
    pub fn join(&self, b: &Monomial) -> Monomial {
        let mut points = self.points.clone();
        for (p, bd) in &b.points {
            points.entry(p.clone()).or_insert(bd.clone());
        }
        let mut factors = self.factors.clone();
        factors.extend(b.factors.iter().cloned());
        Monomial {
            coeff: &self.coeff * &b.coeff,
            lambda: self.lambda + b.lambda,
            hbar: self.hbar + b.hbar,
            factors,
            points,
        }
    }

    /// Pointwise product.
    pub fn mul(&self, o: &Monomial) -> Monomial {
        self.join(&self.rename_apart(o))
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.factors {
            f.validate()?;
            for p in f.points() {
                if !self.points.contains_key(p) {
                    return Err(EngineError::Structural(format!("undeclared point `{p}`")));
                }
            }
        }
        for (p, b) in &self.points {
            if let Binding::Integrated(label) = b {
                let carries = self
                    .factors
                    .iter()
                    .any(|f| matches!(f, Factor::TestFn { label: l, at, .. } if l == label && at == p));
                if !carries {
                    return Err(EngineError::Structural(format!(
                        "integrated point `{p}` lacks its test function `{label}`"
                    )));
                }
            }
        }
        for (name, occ) in self.index_counts() {
            if occ.len() > 2 {
                return Err(EngineError::Structural(format!("index `{name}` occurs {} times", occ.len())));
            }
            if occ.len() == 2 && occ[0] == occ[1] {
                return Err(EngineError::Structural(format!("index `{name}` contracted with equal positions")));
            }
        }
        Ok(())
    }
}

/// Canonical sum of monomials with λ-truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymExpr {
    pub truncation: Option<u32>,
    monomials: Vec<Monomial>,
}

impl Default for SymExpr {
    fn default() -> Self {
        SymExpr::zero()
    }
}

fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Orders in λ and ℏ, factors and point bindings: everything but the coefficient.
type MonomialKey = (u32, i32, Vec<Factor>, BTreeMap<Point, Binding>);

impl SymExpr {
    pub fn zero() -> Self {
        SymExpr { truncation: None, monomials: vec![] }
    }

    pub fn one() -> Self {
        SymExpr::from_monomial(Monomial::one())
    }

    pub fn from_monomial(m: Monomial) -> Self {
        SymExpr::from_monomials(None, vec![m])
    }

    /// Canonicalizes and merges like terms; monomials beyond `truncation` are dropped.
    pub fn from_monomials(truncation: Option<u32>, ms: Vec<Monomial>) -> Self {
        SymExpr::build(truncation, ms, Symmetry::None)
    }

    pub fn build(truncation: Option<u32>, ms: Vec<Monomial>, sym: Symmetry) -> Self {
        let mut acc: BTreeMap<MonomialKey, CoeffElem> = BTreeMap::new();
        for m in ms {
            if truncation.is_some_and(|t| m.lambda > t) {
                continue;
            }
            if let Some(c) = canon::canonical_monomial(&m, sym) {
                let key = (c.lambda, c.hbar, c.factors, c.points);
                let e = acc.entry(key).or_default();
                *e = &*e + &c.coeff;
            }
        }
        let monomials = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((lambda, hbar, factors, points), coeff)| Monomial { coeff, lambda, hbar, factors, points })
            .collect();
        SymExpr { truncation, monomials }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn into_monomials(self) -> Vec<Monomial> {
        self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn with_truncation(&self, t: Option<u32>) -> SymExpr {
        SymExpr::from_monomials(t, self.monomials.clone())
    }

    pub fn canonicalize(&self) -> SymExpr {
        SymExpr::build(self.truncation, self.monomials.clone(), Symmetry::None)
    }

    pub fn canonicalize_with(&self, sym: Symmetry) -> SymExpr {
        SymExpr::build(self.truncation, self.monomials.clone(), sym)
    }

    pub fn add(&self, o: &SymExpr) -> SymExpr {
        let mut ms = self.monomials.clone();
        ms.extend(o.monomials.iter().cloned());
        SymExpr::from_monomials(min_trunc(self.truncation, o.truncation), ms)
    }

    pub fn neg(&self) -> SymExpr {
        self.mul_scalar(&CoeffElem::int(-1))
    }

    pub fn sub(&self, o: &SymExpr) -> SymExpr {
        self.add(&o.neg())
    }

    pub fn mul_scalar(&self, c: &CoeffElem) -> SymExpr {
        let ms = self
            .monomials
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.coeff = &m.coeff * c;
                m
            })
            .collect();
        SymExpr::from_monomials(self.truncation, ms)
    }

    /// Multiply every monomial by `λ^l ℏ^h`.
    pub fn shift_orders(&self, l: u32, h: i32) -> SymExpr {
        let ms = self
            .monomials
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.lambda += l;
                m.hbar += h;
                m
            })
            .collect();
        SymExpr::from_monomials(self.truncation, ms)
    }

    /// Pointwise product.
    pub fn mul(&self, o: &SymExpr) -> SymExpr {
        let t = min_trunc(self.truncation, o.truncation);
        let mut ms = Vec::new();
        for a in &self.monomials {
            for b in &o.monomials {
                if t.is_some_and(|t| a.lambda + b.lambda > t) {
                    continue;
                }
                ms.push(a.mul(b));
            }
        }
        SymExpr::from_monomials(t, ms)
    }

    pub fn equal(&self, o: &SymExpr) -> bool {
        self.canonicalize().monomials == o.canonicalize().monomials
    }

    /// Structural equality after kernel-symmetric canonicalization.
    pub fn equal_with(&self, o: &SymExpr, sym: Symmetry) -> bool {
        self.canonicalize_with(sym).monomials == o.canonicalize_with(sym).monomials
    }

    pub fn lambda_part(&self, k: u32) -> SymExpr {
        SymExpr {
            truncation: self.truncation,
            monomials: self.monomials.iter().filter(|m| m.lambda == k).cloned().collect(),
        }
    }

    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> SymExpr {
        SymExpr { truncation: self.truncation, monomials: self.monomials.iter().filter(|m| pred(m)).cloned().collect() }
    }

    pub fn map_coeffs(&self, f: impl Fn(&CoeffElem) -> CoeffElem) -> SymExpr {
        let ms = self
            .monomials
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.coeff = f(&m.coeff);
                m
            })
            .collect();
        SymExpr::from_monomials(self.truncation, ms)
    }

    pub fn substitute(&self, sym: &str, value: &CoeffElem) -> SymExpr {
        self.map_coeffs(|c| c.substitute(sym, value))
    }

    pub fn max_lambda(&self) -> u32 {
        self.monomials.iter().map(|m| m.lambda).max().unwrap_or(0)
    }

    pub fn field_degree(&self) -> u32 {
        self.monomials.iter().map(|m| m.field_degree()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.monomials.iter().try_for_each(|m| m.validate())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("SymExpr serializes")
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display::write_expr(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display::write_monomial(self, f)
    }
}

impl SymExpr {
    pub fn to_latex(&self) -> String {
        display::expr_latex(self, &crate::coeff::SymbolTable::default())
    }
}
