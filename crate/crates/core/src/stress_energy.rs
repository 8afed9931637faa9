//! Free and interacting stress-energy functionals, the second-order divergence
//! and trace pipelines, and the η-solver.
//!
//! The local functional lives at the free point `z` with free indices `mu`, `nu`.
//! Its quantum expectation value is split by order in λ:
//! the λ⁰ part is the state expectation of the Wick-ordered tensor (contractions
//! with the smooth kernel W = Δ₊ − H), the λ² part runs through the Bogoliubov map.

use crate::calculus::expand_applied;
use crate::coeff::{rat, CoeffElem, GaussRat, SymMono, ETA, INV_PI2, M2, XI};
use crate::deformation::{wick_map, wick_order};
use crate::error::{EngineError, Result};
use crate::expr::{DOp, Factor, FieldOp, Index, KernelKind, Monomial, Point, SymExpr, Tensor};
use crate::functional::{local_power, vacuum_eval, Functional};
use crate::perturbation::{interacting_vev, InteractionSpec, DEFAULT_ORDER};
use crate::rewrite::{apply_divergence, apply_rules, reduce_modulo_eom, trace_contract, Background, RuleSet};
use num::{BigInt, BigRational, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

pub const MU: &str = "mu";
pub const NU: &str = "nu";

pub fn z() -> Point {
    Point::new("z")
}

#[derive(Clone, Debug, Serialize)]
pub struct SetSpec {
    /// Interaction power, `None` for the free theory.
    pub n: Option<u32>,
    pub xi: CoeffElem,
    pub eta: CoeffElem,
    pub background: Background,
    #[serde(skip)]
    pub rules: RuleSet,
}

impl SetSpec {
    /// ξ and η symbolic, generic background.
    pub fn new(n: Option<u32>) -> Result<Self> {
        if let Some(k) = n {
            InteractionSpec::new(k)?;
        }
        Ok(SetSpec {
            n,
            xi: CoeffElem::sym(XI),
            eta: CoeffElem::sym(ETA),
            background: Background::generic(),
            rules: RuleSet::default(),
        })
    }

    pub fn with_eta(mut self, eta: BigRational) -> Self {
        self.eta = CoeffElem::rational(eta);
        self
    }

    pub fn with_xi(mut self, xi: BigRational) -> Self {
        self.xi = CoeffElem::rational(xi);
        self
    }

    pub fn with_background(mut self, bg: Background) -> Self {
        self.background = bg;
        self
    }

    pub fn interaction(&self) -> Option<InteractionSpec> {
        self.n.map(|n| InteractionSpec::new(n).expect("validated in SetSpec::new"))
    }
}

/// Substitute the configured ξ and η into rule output (P₀ introduces the ξ symbol).
fn close(spec: &SetSpec, e: SymExpr) -> SymExpr {
    e.substitute(XI, &spec.xi).substitute(ETA, &spec.eta)
}

fn fact(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn term(c: CoeffElem, factors: Vec<Factor>) -> Monomial {
    factors.into_iter().fold(Monomial::scalar(c), |m, f| m.with_factor(f))
}

/// T^η_{μν}[φ](z) including, for interacting specs, −(λ/n!)gΦⁿ and the
/// on-shell vanishing improvement ηg(ΦP₀Φ + (λ/(n−1)!)Φⁿ).
pub fn build_set(spec: &SetSpec) -> Functional {
    let z = z();
    let (mu, nu) = (Index::down(MU), Index::down(NU));
    let g = || Factor::geom(Tensor::Metric, &z, vec![mu.clone(), nu.clone()]);
    let d = |i: &Index| Factor::field_ops(&z, vec![DOp::Cov(i.clone())]);
    let phi2 = Factor::field_pow(&z, 2);
    let xi = &spec.xi;
    let mut ms = vec![
        term(CoeffElem::one(), vec![d(&mu), d(&nu)]),
        term(CoeffElem::frac(-1, 2), vec![g(), d(&Index::up("rho")), d(&Index::down("rho"))]),
        term(&CoeffElem::sym(M2) * &CoeffElem::frac(-1, 2), vec![g(), phi2.clone()]),
        term(xi.clone(), vec![Factor::geom(Tensor::Einstein, &z, vec![mu.clone(), nu.clone()]), phi2]),
        term(xi.clone(), vec![g(), Factor::Applied { op: FieldOp::Box, at: z.clone(), power: 2 }]),
        term(-xi, vec![Factor::Applied { op: FieldOp::NablaPair(nu.clone(), mu.clone()), at: z.clone(), power: 2 }]),
        term(spec.eta.clone(), vec![g(), Factor::field(&z), Factor::field_ops(&z, vec![DOp::P0])]),
    ];
    if let Some(n) = spec.n {
        let pot = CoeffElem::rational(BigRational::new((-1).into(), fact(n)));
        let imp = &spec.eta * &CoeffElem::rational(BigRational::new(1.into(), fact(n - 1)));
        for c in [pot, imp] {
            ms.push(term(c, vec![g(), Factor::field_pow(&z, n)]).with_orders(1, 0));
        }
    }
    Functional::new(SymExpr::from_monomials(None, ms))
}

/// Placeholder A-template: every quadratic monomial of T with field slots
/// (D₁φ)(D₂φ) at z becomes D₁K₁(x,z)D₂K₂(y,z) + D₂K₁(x,z)D₁K₂(y,z).
pub fn a_template(spec: &SetSpec) -> SymExpr {
    let (x, y, zp) = (Point::new("x"), Point::new("y"), z());
    let mut out = Vec::new();
    for m in build_set(spec).body.lambda_part(0).monomials() {
        for (c, fs) in expand_applied(&m.factors, None) {
            let mut slots = Vec::new();
            let mut rest = Vec::new();
            for f in fs {
                match f {
                    Factor::Field { ops, exp, .. } => slots.extend(std::iter::repeat_n(ops, exp as usize)),
                    other => rest.push(other),
                }
            }
            assert_eq!(slots.len(), 2, "stress-energy monomials are quadratic at λ⁰");
            for (a, b) in [(0, 1), (1, 0)] {
                let mut n = m.clone();
                n.coeff = &m.coeff * &c;
                n.factors = rest.clone();
                n.factors.push(Factor::kernel_ops(KernelKind::Slot(1), &x, &zp, [vec![], slots[a].clone()]));
                n.factors.push(Factor::kernel_ops(KernelKind::Slot(2), &y, &zp, [vec![], slots[b].clone()]));
                n.points.insert(x.clone(), crate::expr::Binding::Free);
                n.points.insert(y.clone(), crate::expr::Binding::Free);
                out.push(n);
            }
        }
    }
    SymExpr::from_monomials(None, out)
}

/// Replace the placeholder kernels K₁, K₂ by concrete kinds.
pub fn substitute_kernels(e: &SymExpr, k1: KernelKind, k2: KernelKind) -> SymExpr {
    let ms = e
        .monomials()
        .iter()
        .map(|m| {
            let mut n = m.clone();
            for f in &mut n.factors {
                if let Factor::Kernel { kind, .. } = f {
                    match kind {
                        KernelKind::Slot(1) => *kind = k1,
                        KernelKind::Slot(2) => *kind = k2,
                        _ => {}
                    }
                }
            }
            n
        })
        .collect();
    SymExpr::from_monomials(e.truncation, ms)
}

/// Expectation value in the quasifree Hadamard state of the Wick-ordered
/// λ⁰ part: contractions with W(z,z).
pub fn free_vev(f: &Functional) -> SymExpr {
    let free = Functional::new(f.body.lambda_part(0));
    vacuum_eval(&wick_map(&free, KernelKind::W, &CoeffElem::one()))
}

/// ∇^μ ⟨R_{λV}(T^η)⟩ split by order.
#[derive(Clone, Debug, Serialize)]
pub struct Divergence {
    /// ((1−3η)/4π²) ∂_ν v₁ after background rules.
    pub order0: SymExpr,
    /// Pipeline residual at λ².
    pub order2: SymExpr,
}

impl Divergence {
    pub fn total(&self) -> SymExpr {
        self.order0.add(&self.order2)
    }
}

/// The λ⁰ divergence ((1−3η)/4π²)∂_νv₁(z,z), taken in closed form.
pub fn free_divergence(spec: &SetSpec) -> Result<SymExpr> {
    let c =
        &(&CoeffElem::one() - &(&CoeffElem::int(3) * &spec.eta)) * &(&CoeffElem::frac(1, 4) * &CoeffElem::sym(INV_PI2));
    let m = Monomial::scalar(c).with_factor(Factor::Geom {
        tensor: Tensor::V1,
        at: z(),
        idx: vec![],
        ops: vec![DOp::Cov(Index::down(NU))],
        exp: 1,
    });
    Ok(close(spec, apply_rules(&SymExpr::from_monomial(m), &spec.rules, &spec.background)?))
}

/// ⟨R_{λV}(T^η)⟩ through λ² (zero for the free theory).
pub fn interacting_set_vev(spec: &SetSpec) -> SymExpr {
    match spec.interaction() {
        None => SymExpr::zero(),
        Some(v) => interacting_vev(&build_set(spec), &v, DEFAULT_ORDER),
    }
}

pub fn divergence_order2(spec: &SetSpec) -> Result<Divergence> {
    let order0 = free_divergence(spec)?;
    let vev = interacting_set_vev(spec);
    let div = apply_divergence(&vev, MU, &z())?;
    let order2 = close(spec, apply_rules(&div, &spec.rules, &spec.background)?);
    Ok(Divergence { order0, order2 })
}

/// Unique rational η annihilating `residual`, which must be affine in η.
pub fn solve_eta(residual: &SymExpr) -> Result<BigRational> {
    let mut sol: Option<BigRational> = None;
    let mut any_slope = false;
    for m in residual.monomials() {
        if m.coeff.degree_in(ETA) > 1 {
            return Err(EngineError::EtaSolve("residual is not affine in η".into()));
        }
        let a = m.coeff.coefficient_of(ETA, 0);
        let b = m.coeff.coefficient_of(ETA, 1);
        // group by the remaining symbol monomial; each gives a + bη = 0
        let mut eqs: BTreeMap<SymMono, (Option<GaussRat>, Option<GaussRat>)> = BTreeMap::new();
        for (k, v) in a.terms() {
            eqs.entry(k.clone()).or_default().0 = Some(v.clone());
        }
        for (k, v) in b.terms() {
            eqs.entry(k.clone()).or_default().1 = Some(v.clone());
        }
        for (ac, bc) in eqs.into_values() {
            match (ac, bc) {
                (Some(_), None) => return Err(EngineError::EtaSolve("no η annihilates the residual".into())),
                (None, None) => {}
                (ac, Some(bc)) => {
                    any_slope = true;
                    let eta = match ac {
                        None => GaussRat::zero(),
                        Some(ac) => ac.neg().mul(&bc.inv().expect("nonzero slope")),
                    };
                    if !eta.im.is_zero() {
                        return Err(EngineError::EtaSolve("η would be complex".into()));
                    }
                    match &sol {
                        None => sol = Some(eta.re),
                        Some(s) if *s == eta.re => {}
                        Some(_) => return Err(EngineError::EtaSolve("monomials demand different η".into())),
                    }
                }
            }
        }
    }
    match (sol, any_slope) {
        (Some(s), true) => Ok(s),
        _ => Err(EngineError::EtaSolve("residual does not depend on η".into())),
    }
}

/// η solving the divergence at the highest order present: λ² for interacting
/// specs, the closed-form λ⁰ term for the free theory.
pub fn solve_eta_for(spec: &SetSpec) -> Result<BigRational> {
    let d = divergence_order2(spec)?;
    if spec.n.is_some() {
        solve_eta(&d.order2)
    } else {
        solve_eta(&d.order0)
    }
}

/// g^{μν}⟨R_{λV}(T^η)⟩(z) split by order.
#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub order0: SymExpr,
    pub order2: SymExpr,
}

impl Trace {
    pub fn total(&self) -> SymExpr {
        self.order0.add(&self.order2)
    }
}

pub fn trace_order2(spec: &SetSpec) -> Result<Trace> {
    let t = build_set(spec);
    let order0 = close(spec, trace_contract(&free_vev(&t), &z(), &spec.rules, &spec.background)?);
    let vev = interacting_set_vev(spec);
    let order2 = close(spec, trace_contract(&vev, &z(), &spec.rules, &spec.background)?);
    Ok(Trace { order0, order2 })
}

/// −m²(R⁰ + R²)(Φ²)|₀ at z: the right-hand side of the quartic trace identity.
pub fn quartic_trace_target(spec: &SetSpec) -> Result<SymExpr> {
    let phi2 = local_power(2, &z());
    let r0 = free_vev(&phi2);
    let r2 = match spec.interaction() {
        Some(v) => interacting_vev(&phi2, &v, DEFAULT_ORDER),
        None => SymExpr::zero(),
    };
    let e = r0.add(&r2).mul_scalar(&-&CoeffElem::sym(M2));
    Ok(close(spec, apply_rules(&e, &spec.rules, &spec.background)?))
}

/// The cubic configuration with η = 1/3, ξ = 1/6 on Minkowski space.
pub fn cubic_spec() -> SetSpec {
    SetSpec::new(Some(3))
        .expect("n = 3 is supported")
        .with_eta(rat(1, 3))
        .with_xi(rat(1, 6))
        .with_background(Background::minkowski())
}

pub fn trace_cubic() -> Result<Trace> {
    trace_order2(&cubic_spec())
}

/// (1/4π²)v₁ + (λ²ℏ²/6)∫[H³(x,z) − H_F³(x,z)]h(x)h(z) − (5/3)m²R²(Φ²)|₀
/// with v₁ = m⁴/8, as printed for the cubic interaction.
pub fn cubic_trace_display() -> Result<SymExpr> {
    let spec = cubic_spec();
    let (x, zp) = (Point::new("x"), z());
    let anomaly = Monomial::scalar(&CoeffElem::frac(1, 4) * &CoeffElem::sym(INV_PI2)).with_factor(Factor::geom(
        Tensor::V1,
        &zp,
        vec![],
    ));
    let mut ms = vec![anomaly];
    for (kind, sign) in [(KernelKind::H, 1), (KernelKind::HF, -1)] {
        ms.push(
            Monomial::scalar(CoeffElem::frac(sign, 6))
                .with_orders(2, 2)
                .with_factor(Factor::kernel(kind, &x, &zp, 3))
                .with_factor(Factor::test_fn("h", &x))
                .with_factor(Factor::test_fn("h", &zp))
                .integrate(&x, "h"),
        );
    }
    let v = spec.interaction().expect("cubic");
    let r2 = interacting_vev(&local_power(2, &zp), &v, DEFAULT_ORDER)
        .lambda_part(2)
        .mul_scalar(&(&CoeffElem::frac(-5, 3) * &CoeffElem::sym(M2)));
    let e = SymExpr::from_monomials(Some(DEFAULT_ORDER), ms).add(&r2);
    Ok(close(&spec, apply_rules(&e, &spec.rules, &spec.background)?))
}

/// Classical layer: ∇^μT_{μν} modulo the field equation.
pub fn classical_divergence(spec: &SetSpec) -> Result<SymExpr> {
    let t = build_set(spec);
    let div = apply_divergence(&t.body, MU, &z())?;
    Ok(close(spec, reduce_modulo_eom(&div, spec.interaction().as_ref(), &spec.rules, &spec.background)?))
}

/// Classical layer: g^{μν}T_{μν} modulo the field equation.
pub fn classical_trace(spec: &SetSpec) -> Result<SymExpr> {
    let t = build_set(spec);
    let tr = trace_contract(&t.body, &z(), &spec.rules, &spec.background)?;
    Ok(close(spec, reduce_modulo_eom(&tr, spec.interaction().as_ref(), &spec.rules, &spec.background)?))
}

/// Free layer: g^{μν} α_{−H}(T^η) modulo the free field equation.
pub fn wick_trace(spec: &SetSpec) -> Result<SymExpr> {
    let t = Functional::new(build_set(spec).body.lambda_part(0));
    let w = wick_order(&t, -1);
    let tr = trace_contract(&w.body, &z(), &spec.rules, &spec.background)?;
    Ok(close(spec, reduce_modulo_eom(&tr, None, &spec.rules, &spec.background)?))
}

/// α_{−H}(Φ²)(z) = φ²(z) − H(z,z).
pub fn wick_square() -> SymExpr {
    wick_order(&local_power(2, &z()), -1).body
}

/// Q_{μν} = (1/π²) g_{μν} v₁ after background rules.
pub fn ambiguity_tensor(bg: &Background) -> Result<SymExpr> {
    let zp = z();
    let m = Monomial::scalar(CoeffElem::sym(INV_PI2))
        .with_factor(Factor::geom(Tensor::Metric, &zp, vec![Index::down(MU), Index::down(NU)]))
        .with_factor(Factor::geom(Tensor::V1, &zp, vec![]));
    apply_rules(&SymExpr::from_monomial(m), &RuleSet::default(), bg)
}

/// Q = g^{μν}Q_{μν}.
pub fn ambiguity_trace(bg: &Background) -> Result<SymExpr> {
    trace_contract(&ambiguity_tensor(&Background::generic())?, &z(), &RuleSet::default(), bg)
}
