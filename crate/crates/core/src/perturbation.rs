//! S-matrix, its ⋆-inverse, the Bogoliubov map and interacting vacuum
//! expectation values, truncated in λ.

use crate::coeff::{rat, CoeffElem, GaussRat};
use crate::deformation::star_expr;
use crate::error::{EngineError, Result};
use crate::expr::{Factor, KernelKind, Monomial, Ops, Point, SymExpr};
use crate::functional::{vacuum_eval, Functional};
use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

pub const DEFAULT_ORDER: u32 = 2;

/// Above this order the number of contraction patterns grows quickly.
pub const BLOWUP_WARNING_ORDER: u32 = 3;

/// V = −(1/n!) ∫ φⁿ h.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub n: u32,
    pub label: String,
}

impl InteractionSpec {
    pub fn new(n: u32) -> Result<Self> {
        InteractionSpec::with_label(n, "h")
    }

    pub fn with_label(n: u32, label: &str) -> Result<Self> {
        if !(n == 3 || n == 4) {
            return Err(EngineError::Unsupported(format!("interaction power {n}; only 3 and 4")));
        }
        Ok(InteractionSpec { n, label: label.to_string() })
    }

    pub fn factorial(&self) -> BigInt {
        (1..=self.n).map(BigInt::from).product()
    }

    /// The interaction functional V (no λ).
    pub fn functional(&self) -> Functional {
        let x = Point::new("x");
        let c = BigRational::new(BigInt::from(-1), self.factorial());
        let m = Monomial::scalar(CoeffElem::rational(c))
            .with_factor(Factor::field_pow(&x, self.n))
            .with_factor(Factor::test_fn(&self.label, &x))
            .integrate(&x, &self.label);
        Functional::new(SymExpr::from_monomial(m))
    }

    /// Right-hand side of the field equation P₀φ = −(λ/(n−1)!) φ^{n−1}, as
    /// derived from the action with the potential term λV.
    pub fn eom_coefficient(&self) -> CoeffElem {
        let f: BigInt = (1..self.n).map(BigInt::from).product();
        CoeffElem::rational(BigRational::new(BigInt::from(-1), f))
    }
}

fn power_series(v: &Functional, n: u32, sign: i64, kind: KernelKind) -> Functional {
    let t = Some(n);
    let mut total = SymExpr::one().with_truncation(t);
    let mut power = SymExpr::one().with_truncation(t);
    let mut fact = 1i64;
    for k in 1..=n {
        power = if k == 1 { v.body.with_truncation(t) } else { star_expr(&power, &v.body, kind) };
        fact *= k as i64;
        // (sign · iλ/ℏ)^k / k!
        let mut c = GaussRat::one();
        for _ in 0..k {
            c = c.mul(&GaussRat::new(rat(0, 1), rat(sign, 1)));
        }
        let term = power.mul_scalar(&CoeffElem::constant(c).scale_rat(&rat(1, fact))).shift_orders(k, -(k as i32));
        total = total.add(&term);
    }
    Functional::new(total.with_truncation(t))
}

/// S(λV) = Σ_{k≤N} (1/k!)(iλ/ℏ)ᵏ V⋆_F⋯⋆_F V.
pub fn smatrix(v: &InteractionSpec, n: u32) -> Functional {
    power_series(&v.functional(), n, 1, KernelKind::HF)
}

/// S^{⋆−1}(λV) = Σ_{k≤N} (1/k!)(−iλ/ℏ)ᵏ V⋆_{AF}⋯⋆_{AF} V.
pub fn smatrix_inverse(v: &InteractionSpec, n: u32) -> Functional {
    power_series(&v.functional(), n, -1, KernelKind::HAF)
}

/// R_{λV}(F) = S^{⋆−1} ⋆_H (S ⋆_F F), truncated at λᴺ.
pub fn bogoliubov(f: &Functional, v: &InteractionSpec, n: u32) -> Functional {
    let s = smatrix(v, n);
    let si = smatrix_inverse(v, n);
    let inner = star_expr(&s.body, &f.body.with_truncation(Some(n)), KernelKind::HF);
    Functional::new(star_expr(&si.body, &inner, KernelKind::H))
}

/// vacuum_eval ∘ bogoliubov. Only pairs of equal field degree can contract fully
/// in the outer ⋆_H, so other pairs are skipped.
pub fn interacting_vev(f: &Functional, v: &InteractionSpec, n: u32) -> SymExpr {
    let s = smatrix(v, n);
    let si = smatrix_inverse(v, n);
    let inner = star_expr(&s.body, &f.body.with_truncation(Some(n)), KernelKind::HF);
    let mut ms = Vec::new();
    for a in si.body.monomials() {
        for b in inner.monomials() {
            if a.lambda + b.lambda > n || a.field_degree() != b.field_degree() {
                continue;
            }
            let ea = SymExpr::from_monomial(a.clone());
            let eb = SymExpr::from_monomial(b.clone());
            let prod = star_expr(&ea, &eb, KernelKind::H);
            ms.extend(vacuum_eval(&Functional::new(prod)).into_monomials());
        }
    }
    SymExpr::from_monomials(Some(n), ms)
}

/// The closed λ² form of ⟨R_{λV}(Φ²_f)⟩ at φ = 0, written out by hand:
/// λ²ℏ^{n−1}/(n−1)! ∫ h(x)h(y)f(z) [2H^{n−1}(x,y)H(x,z)H_F(y,z)
/// − H_F^{n−1}(x,y)H_F(x,z)H_F(y,z) − H_AF^{n−1}(x,y)H(x,z)H(y,z)].
pub fn squared_field_target(v: &InteractionSpec, label: &str) -> SymExpr {
    use KernelKind::{H, HAF, HF};
    let (x, y, z) = (Point::new("x"), Point::new("y"), Point::new("z"));
    let f: BigInt = (1..v.n).map(BigInt::from).product();
    let pre = BigRational::new(BigInt::from(1), f);
    let term = |c: i64, k: [KernelKind; 3]| {
        Monomial::scalar(CoeffElem::rational(&pre * BigRational::from_integer(c.into())))
            .with_orders(2, v.n as i32 - 1)
            .with_factor(Factor::kernel(k[0], &x, &y, v.n - 1))
            .with_factor(Factor::kernel(k[1], &x, &z, 1))
            .with_factor(Factor::kernel(k[2], &y, &z, 1))
            .with_factor(Factor::test_fn(&v.label, &x))
            .with_factor(Factor::test_fn(&v.label, &y))
            .with_factor(Factor::test_fn(label, &z))
            .integrate(&x, &v.label)
            .integrate(&y, &v.label)
            .integrate(&z, label)
    };
    SymExpr::from_monomials(Some(2), vec![term(2, [H, H, HF]), term(-1, [HF, HF, HF]), term(-1, [HAF, H, H])])
}

/// Closed form of V_h ⋆_K F_f for F_f = ∫ f(z)(Dφ)(z)(D′φ)(z): only the first
/// three orders of the exponential survive since F is quadratic,
/// V_h F_f − ℏ/(n−1)! ∫ h f [DK D′φ + Dφ D′K] φ^{n−1}(x) − ℏ²/(n−2)! ∫ h f DK D′K φ^{n−2}(x),
/// with D, D′ acting on the second argument of K(x,z).
pub fn useful_product(v: &InteractionSpec, label: &str, d1: Ops, d2: Ops, kind: KernelKind) -> Functional {
    let (x, z) = (Point::new("x"), Point::new("z"));
    let fact = |k: u32| -> BigInt { (1..=k).map(BigInt::from).product() };
    let base = |c: BigRational, hbar: i32| {
        Monomial::scalar(CoeffElem::rational(c))
            .with_orders(0, hbar)
            .with_factor(Factor::test_fn(&v.label, &x))
            .with_factor(Factor::test_fn(label, &z))
            .integrate(&x, &v.label)
            .integrate(&z, label)
    };
    let k = |d: &Ops| Factor::kernel_ops(kind, &x, &z, [vec![], d.clone()]);
    let first = BigRational::new(BigInt::from(-1), fact(v.n - 1));
    let second = BigRational::new(BigInt::from(-1), fact(v.n - 2));
    let ms = vec![
        base(BigRational::new(BigInt::from(-1), fact(v.n)), 0)
            .with_factor(Factor::field_pow(&x, v.n))
            .with_factor(Factor::field_ops(&z, d1.clone()))
            .with_factor(Factor::field_ops(&z, d2.clone())),
        base(first.clone(), 1)
            .with_factor(k(&d1))
            .with_factor(Factor::field_ops(&z, d2.clone()))
            .with_factor(Factor::field_pow(&x, v.n - 1)),
        base(first, 1)
            .with_factor(Factor::field_ops(&z, d1.clone()))
            .with_factor(k(&d2))
            .with_factor(Factor::field_pow(&x, v.n - 1)),
        base(second, 2).with_factor(k(&d1)).with_factor(k(&d2)).with_factor(Factor::field_pow(&x, v.n - 2)),
    ];
    Functional::new(SymExpr::from_monomials(None, ms))
}
