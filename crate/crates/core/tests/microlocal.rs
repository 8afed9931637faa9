use num::BigRational;
use pqset_core::coeff::{rat, CoeffElem};
use pqset_core::microlocal::*;
use pqset_core::rewrite::Regime;
use proptest::prelude::*;

fn int(k: i64) -> BigRational {
    BigRational::from_integer(k.into())
}

#[test]
fn feynman_powers_in_four_dimensions() {
    let rows = feynman_table(4, 1..=4).unwrap();
    let rho: Vec<BigRational> = rows.iter().map(|r| r.rho.clone()).collect();
    assert_eq!(rho, vec![int(-2), int(0), int(2), int(4)]);
    let sd: Vec<BigRational> = rows.iter().map(|r| r.sd.clone()).collect();
    assert_eq!(sd, vec![int(2), int(4), int(6), int(8)]);
    assert_eq!(rows[0].extension, Extension::Unique);
    assert_eq!(rows[1].extension, Extension::Ambiguous { rho: 0, family_size: 1 });
    assert_eq!(rows[3].extension, Extension::Ambiguous { rho: 4, family_size: 5 });
}

#[test]
fn point_delta_has_degree_equal_to_dimension() {
    for n in 2..=6 {
        let d = DistDescriptor::delta_at_point(0, n).unwrap();
        assert_eq!(scaling_degree(&d), Some(int(n as i64)));
        let d1 = DistDescriptor::delta_at_point(2, n).unwrap();
        assert_eq!(scaling_degree(&d1), Some(int(n as i64 + 2)));
    }
}

#[test]
fn two_dimensional_powers_always_extend_uniquely() {
    for row in feynman_table(2, 1..=8).unwrap() {
        assert_eq!(row.sd, int(0));
        assert_eq!(row.extension, Extension::Unique, "k = {}", row.k);
    }
}

#[test]
fn mild_singularities_and_smooth_functions_are_unique() {
    let half = DistDescriptor::new(Model::Sigma { p: rat(1, 2), log_power: 0 }, 4, 4).unwrap();
    assert_eq!(scaling_degree(&half), Some(int(1)));
    assert_eq!(classify_extension(&half), Extension::Unique);
    assert_eq!(classify_extension(&DistDescriptor::constant(4).unwrap()), Extension::Unique);
    let ess = DistDescriptor::new(Model::Essential, 4, 4).unwrap();
    assert_eq!(classify_extension(&ess), Extension::NoFiniteSd);
    assert_eq!(degree_of_divergence(&ess), None);
}

#[test]
fn fractional_degree_floors() {
    let d = DistDescriptor::new(Model::Sigma { p: rat(9, 4), log_power: 1 }, 4, 4).unwrap();
    assert_eq!(scaling_degree(&d), Some(rat(9, 2)));
    assert_eq!(degree_of_divergence(&d), Some(int(0)));
}

#[test]
fn descriptors_are_validated() {
    assert!(DistDescriptor::new(Model::Delta { order: 0 }, 1, 1).is_err());
    assert!(DistDescriptor::new(Model::Delta { order: 0 }, 4, 5).is_err());
    assert!(DistDescriptor::new(Model::Delta { order: 0 }, 4, 0).is_err());
    assert!(DistDescriptor::new(Model::Sigma { p: rat(-1, 2), log_power: 0 }, 4, 4).is_err());
    assert!(DistDescriptor::feynman_power(1, 1).is_err());
    assert!(feynman_table(1, 1..=2).is_err());
}

#[test]
fn descriptor_json_round_trip() {
    let d = DistDescriptor::feynman_power(3, 4).unwrap();
    let s = serde_json::to_string(&d).unwrap();
    assert!(s.contains("\"p\":\"3\""), "{s}");
    assert_eq!(serde_json::from_str::<DistDescriptor>(&s).unwrap(), d);
}

#[test]
fn coincidence_limit_coefficients() {
    use CurvatureInvariant::*;
    let v = v1_eval(Regime::Generic);
    assert_eq!(v.mass, &CoeffElem::sym_pow("m2", 2) * &CoeffElem::frac(1, 8));
    assert_eq!(v.curvature[&WeylSquared], CoeffElem::frac(1, 720));
    assert_eq!(v.curvature[&RicciSquared], CoeffElem::frac(1, 720));
    assert_eq!(v.curvature[&ScalarSquared], CoeffElem::frac(-1, 2160));
    assert_eq!(v.curvature[&BoxScalar], CoeffElem::frac(1, 720));
    assert_eq!(v.as_coeff(), None);

    let flat = v1_eval(Regime::Minkowski);
    assert_eq!(flat.as_coeff(), Some(&CoeffElem::sym_pow("m2", 2) * &CoeffElem::frac(1, 8)));
    assert_eq!(flat.to_latex(), "\\frac{m^4}{8}");

    // R_{ab}R^{ab} = R²/4: 1/2880 − 1/2160 = −1/8640
    let ds = v1_eval(Regime::MaximallySymmetric);
    assert_eq!(ds.curvature.len(), 1);
    assert_eq!(ds.curvature[&ScalarSquared], CoeffElem::frac(-1, 8640));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn each_extra_power_adds_d_minus_two(dim in 3u32..=8, k in 1u32..=10) {
        let rows = feynman_table(dim, [k, k + 1]).unwrap();
        prop_assert_eq!(&rows[1].sd - &rows[0].sd, int(dim as i64 - 2));
        prop_assert_eq!(rows[0].sd.clone(), int(((dim - 2) * k) as i64));
    }

    #[test]
    fn unique_exactly_below_codimension(num in 0i64..40, den in 1i64..5, dim in 2u32..=8, log in 0u32..3) {
        let d = DistDescriptor::new(Model::Sigma { p: rat(num, den), log_power: log }, dim, dim).unwrap();
        let sd = scaling_degree(&d).unwrap();
        let unique = classify_extension(&d) == Extension::Unique;
        prop_assert_eq!(unique, sd < int(dim as i64));
    }

    #[test]
    fn delta_derivatives_are_never_unique(order in 0u32..6, dim in 2u32..=8) {
        let d = DistDescriptor::delta_at_point(order, dim).unwrap();
        prop_assert_eq!(classify_extension(&d), Extension::Ambiguous { rho: order as i64, family_size: order as i64 + 1 });
    }
}
