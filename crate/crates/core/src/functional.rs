//! Polynomial functionals of the field and their calculus.

use crate::calculus::{collapse_delta, expand_applied};
use crate::coeff::CoeffElem;
use crate::error::{EngineError, Result};
use crate::expr::{DOp, Factor, KernelKind, Monomial, Ops, Point, SymExpr};

/// Polynomial functional; `body` monomials carry the field at labelled points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    pub body: SymExpr,
}

impl From<SymExpr> for Functional {
    fn from(body: SymExpr) -> Self {
        Functional { body }
    }
}

impl Functional {
    pub fn new(body: SymExpr) -> Self {
        Functional { body }
    }

    /// The identity functional `1`.
    pub fn identity() -> Self {
        Functional::new(SymExpr::one())
    }

    pub fn zero() -> Self {
        Functional::new(SymExpr::zero())
    }

    /// Maximal total field exponent over monomials.
    pub fn degree(&self) -> u32 {
        self.body.field_degree()
    }

    /// Monomials whose field factors all sit at one point.
    pub fn is_local(&self) -> bool {
        self.body.monomials().iter().all(|m| {
            let mut pts = m.factors.iter().filter(|f| f.is_field()).flat_map(|f| f.points());
            match pts.next() {
                None => true,
                Some(p) => pts.all(|q| q == p),
            }
        })
    }

    pub fn add(&self, o: &Functional) -> Functional {
        Functional::new(self.body.add(&o.body))
    }

    pub fn scale(&self, c: &CoeffElem) -> Functional {
        Functional::new(self.body.mul_scalar(c))
    }

    pub fn truncated(&self, n: u32) -> Functional {
        Functional::new(self.body.with_truncation(Some(n)))
    }
}

/// ∫ f(x) φᵏ(x) dx.
pub fn phi_k(k: u32, label: &str) -> Functional {
    let x = Point::new("x");
    let m = Monomial::one()
        .with_factor(Factor::field_pow(&x, k))
        .with_factor(Factor::test_fn(label, &x))
        .integrate(&x, label);
    Functional::new(SymExpr::from_monomial(m))
}

/// Φ_f = ∫ f φ.
pub fn phi(label: &str) -> Functional {
    phi_k(1, label)
}

/// ∫ h(x) (D₁φ)(x) (D₂φ)(x) dx for operator sequences D₁, D₂.
pub fn decorated_quadratic(label: &str, d1: Ops, d2: Ops) -> Functional {
    let x = Point::new("x");
    let m = Monomial::one()
        .with_factor(Factor::field_ops(&x, d1))
        .with_factor(Factor::field_ops(&x, d2))
        .with_factor(Factor::test_fn(label, &x))
        .integrate(&x, label);
    Functional::new(SymExpr::from_monomial(m))
}

/// The unsmeared local field power φᵏ(z) at a free point.
pub fn local_power(k: u32, z: &Point) -> Functional {
    Functional::new(SymExpr::from_monomial(Monomial::one().with_factor(Factor::field_pow(z, k))))
}

pub fn pointwise_product(f: &Functional, g: &Functional) -> Functional {
    Functional::new(f.body.mul(&g.body))
}

/// δF/δφ(p). Integrated field points are collapsed onto `p`.
pub fn functional_derivative(f: &Functional, p: &Point) -> Result<Functional> {
    for m in f.body.monomials() {
        if m.points.contains_key(p) {
            return Err(EngineError::LabelCollision(p.0.clone()));
        }
    }
    let mut out = Vec::new();
    for m in f.body.monomials() {
        for (c, fs) in expand_applied(&m.factors, None) {
            let mut base = m.clone();
            base.coeff = &m.coeff * &c;
            base.factors = fs;
            out.extend(derivative_monomial(&base, p));
        }
    }
    Ok(Functional::new(SymExpr::from_monomials(f.body.truncation, out)))
}

fn derivative_monomial(m: &Monomial, p: &Point) -> Vec<Monomial> {
    let mut out = Vec::new();
    for (i, f) in m.factors.iter().enumerate() {
        let Factor::Field { at, ops, exp } = f else { continue };
        let mut n = m.clone();
        n.coeff = &m.coeff * &CoeffElem::int(*exp as i64);
        n.factors[i].set_exp(exp - 1);
        n.factors.retain(|g| g.exp() > 0);
        let delta = Factor::kernel_ops(KernelKind::DiracDelta, at, p, [ops.clone(), vec![]]);
        n = n.with_factor(delta);
        let pos = n.factors.len() - 1;
        if n.is_integrated(at) {
            out.extend(collapse_delta(&n, pos, 0));
        } else {
            out.push(n);
        }
    }
    out
}

/// Sub-sum of monomials without field factors.
pub fn vacuum_eval(f: &Functional) -> SymExpr {
    f.body.filter(|m| !m.has_field())
}

/// ∫ F^{(k)}(p₁..p_k) η₁(p₁)…η_k(p_k): pair derivative points with test directions and collapse.
pub fn smear(f: &Functional, pairs: &[(Point, &str)]) -> Functional {
    let mut ms = Vec::new();
    for m in f.body.monomials() {
        let mut n = m.clone();
        for (p, label) in pairs {
            n = n.with_factor(Factor::test_fn(label, p)).integrate(p, label);
        }
        ms.push(n);
    }
    let mut e = SymExpr::from_monomials(f.body.truncation, ms);
    loop {
        let mut changed = false;
        let mut next = Vec::new();
        for m in e.monomials() {
            match crate::calculus::collapsible_delta(m) {
                Some((pos, slot)) => {
                    changed = true;
                    next.extend(collapse_delta(m, pos, slot));
                }
                None => next.push(m.clone()),
            }
        }
        e = SymExpr::from_monomials(e.truncation, next);
        if !changed {
            break;
        }
    }
    Functional::new(e)
}

/// Cov operator shorthand.
pub fn d(name: &str, up: bool) -> DOp {
    DOp::Cov(crate::expr::Index { name: name.to_string(), up })
}
