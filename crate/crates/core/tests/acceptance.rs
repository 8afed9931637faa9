//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use num::BigRational;
use pqset_core::coeff::{rat, CoeffElem, INV_PI2, M2};
use pqset_core::deformation::{star, star_expr, wick_map, wick_order};
use pqset_core::functional::{decorated_quadratic, functional_derivative, phi, phi_k, smear};
use pqset_core::microlocal::{classify_extension, feynman_table, scaling_degree, DistDescriptor, Extension};
use pqset_core::perturbation::{
    interacting_vev, smatrix, smatrix_inverse, squared_field_target, useful_product, InteractionSpec, DEFAULT_ORDER,
};
use pqset_core::rewrite::{apply_rules, Background, Convention, RuleSet};
use pqset_core::stress_energy::*;
use pqset_core::{Factor, KernelKind, Monomial, Point, SymExpr, Symmetry, Tensor};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reduce(e: &SymExpr, rules: &RuleSet) -> SymExpr {
    apply_rules(e, rules, &Background::generic()).expect("rules apply")
}

fn c1_star_square() -> Check {
    let p = star(&phi_k(2, "f"), &phi_k(2, "g"), KernelKind::H);
    let mut seen: Vec<(i32, CoeffElem)> = p.body.monomials().iter().map(|m| (m.hbar, m.coeff.clone())).collect();
    seen.sort_by_key(|(h, _)| *h);
    let want = vec![(0, CoeffElem::int(1)), (1, CoeffElem::int(4)), (2, CoeffElem::int(2))];
    ensure(seen == want, || format!("got {}", p.body))
}

fn c2_odd_vev() -> Check {
    for n in [3, 4] {
        let v = InteractionSpec::new(n).map_err(|e| e.to_string())?;
        let e = reduce(&interacting_vev(&phi("f"), &v, DEFAULT_ORDER), &RuleSet::default());
        ensure(e.is_zero(), || format!("n = {n}: {e}"))?;
    }
    Ok(())
}

fn c3_squared_vev() -> Check {
    for n in [3, 4] {
        let v = InteractionSpec::new(n).map_err(|e| e.to_string())?;
        let got = reduce(&interacting_vev(&phi_k(2, "f"), &v, DEFAULT_ORDER), &RuleSet::default());
        let target = reduce(&squared_field_target(&v, "f"), &RuleSet::default());
        ensure(got.equal(&target), || format!("n = {n}: {got} vs {target}"))?;
    }
    Ok(())
}

fn c4_useful_product() -> Check {
    let cases = common::lemma_cases(24, 7);
    for (i, (n, d1, d2, kind)) in cases.into_iter().enumerate() {
        let v = InteractionSpec::new(n).map_err(|e| e.to_string())?;
        let engine = star(&v.functional(), &decorated_quadratic("f", d1.clone(), d2.clone()), kind).body;
        let closed = useful_product(&v, "f", d1.clone(), d2.clone(), kind).body;
        ensure(engine.equal(&closed), || format!("case {i}: engine differs from closed form"))?;
        let brute = common::fuse_boxes(&common::brute_star(n, &d1, &d2, kind));
        ensure(brute.equal(&common::fuse_boxes(&closed)), || format!("case {i}: brute force differs"))?;
    }
    Ok(())
}

fn c5_eta() -> Check {
    for conv in [Convention::Delta, Convention::IDelta] {
        for n in [3u32, 4] {
            let spec = SetSpec::new(Some(n))
                .map_err(|e| e.to_string())?
                .with_background(Background::minkowski().with_convention(conv));
            let want = rat(1, n as i64);
            let got = solve_eta_for(&spec).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("{conv:?}, n = {n}: η = {got}"))?;
            let at = divergence_order2(&spec.clone().with_eta(want.clone())).map_err(|e| e.to_string())?;
            ensure(at.order2.is_zero(), || format!("{conv:?}, n = {n}: residual {}", at.order2))?;
            for off in [rat(1, 10), rat(-1, 10)] {
                let d = divergence_order2(&spec.clone().with_eta(&want + &off)).map_err(|e| e.to_string())?;
                ensure(!d.order2.is_zero(), || format!("{conv:?}, n = {n}: empty residual at offset {off}"))?;
            }
        }
    }
    Ok(())
}

fn quartic_spec() -> SetSpec {
    SetSpec::new(Some(4))
        .expect("n = 4")
        .with_eta(rat(1, 4))
        .with_xi(rat(1, 6))
        .with_background(Background::minkowski())
}

fn c6_quartic_trace() -> Check {
    let spec = quartic_spec();
    let tr = trace_order2(&spec).map_err(|e| e.to_string())?.total();
    let target = quartic_trace_target(&spec).map_err(|e| e.to_string())?;
    ensure(tr.equal(&target), || format!("trace {tr} vs {target}"))?;
    let massless = tr.substitute(M2, &CoeffElem::zero());
    ensure(massless.is_zero(), || format!("m → 0 leaves {massless}"))
}

fn c7_cubic_trace() -> Check {
    let tr = trace_cubic().map_err(|e| e.to_string())?.total();
    let shown = cubic_trace_display().map_err(|e| e.to_string())?;
    ensure(tr.equal(&shown), || format!("engine − display = {}", tr.sub(&shown)))
}

fn c8_classical_and_free() -> Check {
    let z = z();
    let mass_term = |n: u32| {
        let mut ms = vec![Monomial::scalar(-&CoeffElem::sym(M2)).with_factor(Factor::field_pow(&z, 2))];
        if n > 0 {
            let fact: i64 = (1..=n as i64).product();
            ms.push(
                Monomial::scalar(CoeffElem::frac(n as i64 - 4, fact))
                    .with_orders(1, 0)
                    .with_factor(Factor::field_pow(&z, n)),
            );
        }
        SymExpr::from_monomials(None, ms)
    };
    for n in [None, Some(3), Some(4)] {
        let spec = SetSpec::new(n).map_err(|e| e.to_string())?;
        let div = classical_divergence(&spec).map_err(|e| e.to_string())?;
        ensure(div.is_zero(), || format!("∇T, n = {n:?}: {div}"))?;
        let eta = rat(1, n.unwrap_or(3) as i64);
        let tr = classical_trace(&spec.with_eta(eta).with_xi(rat(1, 6))).map_err(|e| e.to_string())?;
        let want = mass_term(n.unwrap_or(0));
        ensure(tr.equal(&want), || format!("trace, n = {n:?}: {tr}"))?;
    }
    let spec = SetSpec::new(None).map_err(|e| e.to_string())?.with_eta(rat(1, 3)).with_xi(rat(1, 6));
    let got = wick_trace(&spec).map_err(|e| e.to_string())?;
    let anomaly = Monomial::scalar(&CoeffElem::frac(1, 4) * &CoeffElem::sym(INV_PI2)).with_factor(Factor::geom(
        Tensor::V1,
        &z,
        vec![],
    ));
    let want = reduce(&wick_square().mul_scalar(&-&CoeffElem::sym(M2)), &RuleSet::default())
        .add(&SymExpr::from_monomial(anomaly));
    ensure(got.equal(&want), || format!("free trace {got} vs {want}"))
}

fn c9_unitarity() -> Check {
    for n in [3, 4] {
        let v = InteractionSpec::new(n).map_err(|e| e.to_string())?;
        let prod = star_expr(&smatrix_inverse(&v, DEFAULT_ORDER).body, &smatrix(&v, DEFAULT_ORDER).body, KernelKind::H);
        let e = reduce(&prod, &RuleSet::default().with_kernel_relations());
        ensure(e.equal(&SymExpr::one()), || format!("n = {n}: {e}"))?;
    }
    Ok(())
}

fn c10_scaling() -> Check {
    let int = |k: i64| BigRational::from_integer(k.into());
    for n in 2..=8u32 {
        let sd = scaling_degree(&DistDescriptor::delta_at_point(0, n).map_err(|e| e.to_string())?);
        ensure(sd == Some(int(n as i64)), || format!("sd(δ) in dimension {n}: {sd:?}"))?;
    }
    for d in 3..=6u32 {
        for row in feynman_table(d, 1..=6).map_err(|e| e.to_string())? {
            ensure(row.sd == int(((d - 2) * row.k) as i64), || format!("d = {d}, k = {}: sd {}", row.k, row.sd))?;
        }
    }
    for row in feynman_table(4, 1..=6).map_err(|e| e.to_string())? {
        ensure(row.rho == int(2 * row.k as i64 - 4), || format!("d = 4, k = {}: ρ {}", row.k, row.rho))?;
    }
    for row in feynman_table(2, 1..=8).map_err(|e| e.to_string())? {
        ensure(row.extension == Extension::Unique, || format!("d = 2, k = {}: {}", row.k, row.extension))?;
    }
    let half = DistDescriptor::feynman_power(1, 4).map_err(|e| e.to_string())?;
    ensure(classify_extension(&half) == Extension::Unique, || "H_F in d = 4 should extend uniquely".into())
}

fn run_prop<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn c11_properties() -> Check {
    run_prop(
        "⋆ associativity",
        (common::arb_poly("f"), common::arb_poly("g"), common::arb_poly("k"), common::arb_star_kind()),
        |(a, b, c, kind)| {
            let left = star_expr(&star_expr(&a.body, &b.body, kind), &c.body, kind);
            let right = star_expr(&a.body, &star_expr(&b.body, &c.body, kind), kind);
            proptest::prop_assert!(left.equal(&right));
            Ok(())
        },
    )?;
    run_prop("α round trip", common::arb_poly_any(), |f| {
        let back = wick_order(&wick_map(&f, KernelKind::H, &CoeffElem::one()), -1);
        proptest::prop_assert!(back.body.equal(&f.body));
        Ok(())
    })?;
    run_prop("mixed derivatives", common::arb_functional(), |f| {
        let (p, q) = (Point::new("p"), Point::new("q"));
        let pq = functional_derivative(&functional_derivative(&f, &p).unwrap(), &q).unwrap();
        let qp = functional_derivative(&functional_derivative(&f, &q).unwrap(), &p).unwrap();
        let pairs = [(p, "u"), (q, "w")];
        proptest::prop_assert!(smear(&pq, &pairs).body.equal_with(&smear(&qp, &pairs).body, Symmetry::Kernels));
        Ok(())
    })?;
    run_prop("canonicalize idempotent", proptest::collection::vec(common::arb_monomial(), 1..=3), |ms| {
        for sym in [Symmetry::None, Symmetry::Kernels] {
            let once = SymExpr::build(None, ms.clone(), sym);
            proptest::prop_assert_eq!(&once, &once.canonicalize_with(sym));
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Φ² ⋆_H Φ² has monomials 1, 4ℏ, 2ℏ²", c1_star_square),
        ("interacting vev of Φ_f vanishes (n = 3, 4)", c2_odd_vev),
        ("interacting vev of Φ² equals the closed form (n = 3, 4)", c3_squared_vev),
        ("V ⋆ F product lemma: closed form and brute force, 24 decorations", c4_useful_product),
        ("η = 1/n annihilates the divergence, η = 1/n ± 1/10 does not, both conventions", c5_eta),
        ("quartic trace = −m²(R⁰ + R²)(Φ²), zero at m = 0", c6_quartic_trace),
        ("cubic trace equals the printed display including −5/3 m²", c7_cubic_trace),
        ("classical ∇T, trace on shell; free trace −m²:Φ²: + v₁/4π²", c8_classical_and_free),
        ("S⁻¹ ⋆_H S = 1 + O(λ³) with kernel relations (n = 3, 4)", c9_unitarity),
        ("scaling degrees, ρ = 2k − 4 at d = 4, d = 2 always unique", c10_scaling),
        ("property suites: ⋆ assoc, α round trip, mixed derivatives, canonicalize", c11_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("PASS  {:>2}  {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}\n          {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
