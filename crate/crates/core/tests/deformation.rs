mod common;

use pqset_core::coeff::CoeffElem;
use pqset_core::deformation::{star, star_expr, time_ordered, wick_map, wick_order};
use pqset_core::functional::{decorated_quadratic, phi, phi_k, Functional};
use pqset_core::perturbation::{useful_product, InteractionSpec};
use pqset_core::{Factor, KernelKind, Monomial, Point, SymExpr, Symmetry};
use proptest::prelude::*;

#[test]
fn phi2_star_phi2_has_three_terms() {
    let p = star(&phi_k(2, "f"), &phi_k(2, "g"), KernelKind::H);
    let mut seen: Vec<(i32, CoeffElem)> = p.body.monomials().iter().map(|m| (m.hbar, m.coeff.clone())).collect();
    seen.sort_by_key(|(h, _)| *h);
    assert_eq!(seen, vec![(0, CoeffElem::int(1)), (1, CoeffElem::int(4)), (2, CoeffElem::int(2))]);
}

#[test]
fn star_with_identity_is_neutral() {
    let f = phi_k(3, "f").add(&phi("g"));
    assert!(star(&Functional::identity(), &f, KernelKind::HF).body.equal(&f.body));
    assert!(star(&f, &Functional::identity(), KernelKind::HF).body.equal(&f.body));
}

#[test]
fn star_of_linear_fields_is_commutator_free_only_for_symmetric_kernels() {
    let a = phi("f");
    let b = phi("g");
    let ab = star(&a, &b, KernelKind::HF).body;
    let ba = star(&b, &a, KernelKind::HF).body;
    assert!(ab.equal_with(&ba, Symmetry::Kernels));
    let ab = star(&a, &b, KernelKind::Delta).body;
    let ba = star(&b, &a, KernelKind::Delta).body;
    assert!(!ab.equal_with(&ba, Symmetry::Kernels));
}

#[test]
fn wick_order_of_square_subtracts_coincident_kernel_without_hbar() {
    let w = wick_order(&phi_k(2, "f"), -1).body;
    let z = Point::new("x");
    let expected = SymExpr::from_monomials(
        None,
        vec![
            Monomial::one()
                .with_factor(Factor::field_pow(&z, 2))
                .with_factor(Factor::test_fn("f", &z))
                .integrate(&z, "f"),
            Monomial::scalar(CoeffElem::int(-1))
                .with_factor(Factor::kernel(KernelKind::H, &z, &z, 1))
                .with_factor(Factor::test_fn("f", &z))
                .integrate(&z, "f"),
        ],
    );
    assert!(w.equal(&expected), "{w}");
}

#[test]
fn time_ordered_is_symmetric() {
    let a = phi_k(2, "f");
    let b = phi_k(3, "g");
    let ab = time_ordered(&[a.clone(), b.clone()]).body;
    let ba = time_ordered(&[b, a]).body;
    assert!(ab.equal_with(&ba, Symmetry::Kernels));
}

#[test]
fn useful_product_matches_closed_form_and_brute_force() {
    for (case, (n, d1, d2, kind)) in common::lemma_cases(24, 7).into_iter().enumerate() {
        let v = InteractionSpec::new(n).unwrap();
        let engine = star(&v.functional(), &decorated_quadratic("f", d1.clone(), d2.clone()), kind).body;
        let closed = useful_product(&v, "f", d1.clone(), d2.clone(), kind).body;
        let brute = common::fuse_boxes(&common::brute_star(n, &d1, &d2, kind));
        let closed_fused = common::fuse_boxes(&closed);
        assert!(engine.equal(&closed), "case {case}: {d1:?} {d2:?} {kind:?}\nengine {engine}\nclosed {closed}");
        assert!(
            brute.equal(&closed_fused),
            "case {case}: {d1:?} {d2:?} {kind:?}\nbrute {brute}\nclosed {closed_fused}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn star_is_associative(a in common::arb_poly("f"), b in common::arb_poly("g"), c in common::arb_poly("k"), kind in common::arb_star_kind()) {
        let left = star_expr(&star_expr(&a.body, &b.body, kind), &c.body, kind);
        let right = star_expr(&a.body, &star_expr(&b.body, &c.body, kind), kind);
        prop_assert!(left.equal(&right), "left {left}\nright {right}");
    }

    #[test]
    fn wick_round_trip_is_identity(f in common::arb_poly_any()) {
        let there = wick_map(&f, KernelKind::H, &CoeffElem::int(1));
        let back = wick_order(&there, -1);
        prop_assert!(back.body.equal(&f.body), "{} vs {}", back.body, f.body);
    }
}
