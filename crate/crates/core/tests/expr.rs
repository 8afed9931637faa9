mod common;

use pqset_core::coeff::{parse_rat, rat, CoeffElem, GaussRat};
use pqset_core::functional::d;
use pqset_core::{Factor, KernelKind, Monomial, Point, SymExpr, Symmetry, Tensor};
use proptest::prelude::*;

fn p(s: &str) -> Point {
    Point::new(s)
}

/// ∫ f(x) g(y) K(a, b) with a, b ∈ {x, y}.
fn kernel_monomial(kind: KernelKind, a: &str, b: &str) -> Monomial {
    Monomial::one()
        .with_factor(Factor::kernel(kind, &p(a), &p(b), 1))
        .with_factor(Factor::test_fn("f", &p("x")))
        .with_factor(Factor::test_fn("g", &p("y")))
        .integrate(&p("x"), "f")
        .integrate(&p("y"), "g")
}

#[test]
fn integrated_point_names_do_not_matter() {
    let a = SymExpr::from_monomial(kernel_monomial(KernelKind::H, "x", "y"));
    let mut m = kernel_monomial(KernelKind::H, "x", "y");
    m.rename_point(&p("x"), &p("u"));
    m.rename_point(&p("y"), &p("v"));
    let b = SymExpr::from_monomial(m);
    assert!(a.equal(&b));
    assert_eq!(a.add(&b).monomials()[0].coeff, CoeffElem::int(2));
}

#[test]
fn dummy_names_and_positions_do_not_matter() {
    let z = p("z");
    let mk = |name: &str, up_first: bool| {
        Monomial::one()
            .with_factor(Factor::field_ops(&z, vec![d(name, !up_first)]))
            .with_factor(Factor::field_ops(&z, vec![d(name, up_first)]))
    };
    let a = SymExpr::from_monomial(mk("a", true));
    let b = SymExpr::from_monomial(mk("q", false));
    assert!(a.equal(&b));
    assert!(a.sub(&b).is_zero());
}

#[test]
fn kernel_symmetries_apply_only_when_requested() {
    let hf_xy = SymExpr::from_monomial(kernel_monomial(KernelKind::HF, "x", "y"));
    let hf_yx = SymExpr::from_monomial(kernel_monomial(KernelKind::HF, "y", "x"));
    assert!(!hf_xy.equal(&hf_yx));
    assert!(hf_xy.equal_with(&hf_yx, Symmetry::Kernels));

    let d_xy = SymExpr::from_monomial(kernel_monomial(KernelKind::Delta, "x", "y"));
    let d_yx = SymExpr::from_monomial(kernel_monomial(KernelKind::Delta, "y", "x"));
    assert!(d_xy.add(&d_yx).canonicalize_with(Symmetry::Kernels).is_zero());

    let a_xy = SymExpr::from_monomial(kernel_monomial(KernelKind::DeltaA, "x", "y"));
    let r_yx = SymExpr::from_monomial(kernel_monomial(KernelKind::DeltaR, "y", "x"));
    assert!(a_xy.equal_with(&r_yx, Symmetry::Kernels));

    let h_xy = SymExpr::from_monomial(kernel_monomial(KernelKind::H, "x", "y"));
    let h_yx = SymExpr::from_monomial(kernel_monomial(KernelKind::H, "y", "x"));
    assert!(!h_xy.equal_with(&h_yx, Symmetry::Kernels));
}

#[test]
fn antisymmetric_kernel_at_coincident_points_vanishes() {
    let x = p("x");
    let m = Monomial::one().with_factor(Factor::kernel(KernelKind::Delta, &x, &x, 1));
    assert!(SymExpr::from_monomial(m).canonicalize_with(Symmetry::Kernels).is_zero());
}

#[test]
fn covariant_derivatives_on_scalars_commute() {
    let z = p("z");
    let a = Monomial::one().with_factor(Factor::field_ops(&z, vec![d("m", false), d("n", false)]));
    let b = Monomial::one().with_factor(Factor::field_ops(&z, vec![d("n", false), d("m", false)]));
    assert!(SymExpr::from_monomial(a).equal(&SymExpr::from_monomial(b)));
}

#[test]
fn truncation_drops_higher_orders() {
    let m = Monomial::one().with_orders(3, 0);
    assert!(SymExpr::from_monomials(Some(2), vec![m.clone()]).is_zero());
    assert_eq!(SymExpr::from_monomials(Some(3), vec![m]).len(), 1);
}

#[test]
fn validation_rejects_tripled_index_and_undeclared_point() {
    let z = p("z");
    let bad = Monomial::one()
        .with_factor(Factor::field_ops(&z, vec![d("a", false)]))
        .with_factor(Factor::field_ops(&z, vec![d("a", true)]))
        .with_factor(Factor::geom(Tensor::Ricci, &z, vec![pqset_core::Index::down("a"), pqset_core::Index::down("b")]));
    assert!(bad.validate().is_err());
}

#[test]
fn json_round_trip() {
    let e = SymExpr::from_monomial(
        kernel_monomial(KernelKind::HAF, "x", "y")
            .with_coeff(CoeffElem::sym("m2").scale(&GaussRat::new(rat(1, 3), rat(-2, 1)))),
    );
    let s = serde_json::to_string(&e).unwrap();
    let back: SymExpr = serde_json::from_str(&s).unwrap();
    assert_eq!(back, e);
}

#[test]
fn rational_parsing() {
    assert_eq!(parse_rat("-3/6"), Some(rat(-1, 2)));
    assert_eq!(parse_rat("4"), Some(rat(4, 1)));
    assert_eq!(parse_rat("1/0"), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalize_is_idempotent(ms in prop::collection::vec(common::arb_monomial(), 1..=3)) {
        for sym in [Symmetry::None, Symmetry::Kernels] {
            let once = SymExpr::build(None, ms.clone(), sym);
            let twice = once.canonicalize_with(sym);
            prop_assert_eq!(&once, &twice);
        }
    }

    #[test]
    fn canonical_form_ignores_point_names(m in common::arb_monomial()) {
        let mut r = m.clone();
        r.rename_point(&p("x"), &p("q1"));
        r.rename_point(&p("y"), &p("x"));
        r.rename_point(&p("q1"), &p("y"));
        let a = SymExpr::from_monomial(m);
        let b = SymExpr::from_monomial(r);
        prop_assert!(a.equal(&b));
    }

    #[test]
    fn sum_with_negation_vanishes(ms in prop::collection::vec(common::arb_monomial(), 1..=3)) {
        let e = SymExpr::from_monomials(None, ms);
        prop_assert!(e.sub(&e).is_zero());
        prop_assert!(e.add(&e).equal(&e.mul_scalar(&CoeffElem::int(2))));
    }
}
