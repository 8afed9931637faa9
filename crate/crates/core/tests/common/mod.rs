//! Oracles and proptest strategies shared by the module suites and the
//! acceptance run.
#![allow(dead_code)]

use num::{BigInt, BigRational};
use pqset_core::calculus::{collapse_delta, collapsible_delta};
use pqset_core::coeff::CoeffElem;
use pqset_core::functional::{
    d, decorated_quadratic, functional_derivative, local_power, phi, phi_k, pointwise_product, Functional,
};
use pqset_core::rewrite::{apply_rules, Background, RuleSet};
use pqset_core::{DOp, Factor, KernelKind, Monomial, Ops, Point, SymExpr};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

pub fn unintegrated_v(n: u32, x: &Point) -> Functional {
    let c = BigRational::new(BigInt::from(-1), (1..=n).map(BigInt::from).product());
    Functional::new(SymExpr::from_monomial(
        Monomial::scalar(CoeffElem::rational(c))
            .with_factor(Factor::field_pow(x, n))
            .with_factor(Factor::test_fn("h", x)),
    ))
}

pub fn unintegrated_f(z: &Point, d1: &Ops, d2: &Ops) -> Functional {
    Functional::new(SymExpr::from_monomial(
        Monomial::one()
            .with_factor(Factor::field_ops(z, d1.clone()))
            .with_factor(Factor::field_ops(z, d2.clone()))
            .with_factor(Factor::test_fn("f", z)),
    ))
}

pub fn collapse_all(mut ms: Vec<Monomial>) -> Vec<Monomial> {
    loop {
        let mut changed = false;
        let mut next = Vec::new();
        for m in ms {
            match collapsible_delta(&m) {
                Some((pos, slot)) => {
                    changed = true;
                    next.extend(collapse_delta(&m, pos, slot));
                }
                None => next.push(m),
            }
        }
        ms = next;
        if !changed {
            return ms;
        }
    }
}

/// Exponential series written out: Σ_k ℏᵏ/k! ∫ Π K(p_i,q_i) V^{(k)}(p) F^{(k)}(q),
/// with x and z kept free until every δ has been integrated out.
pub fn brute_star(n: u32, d1: &Ops, d2: &Ops, kind: KernelKind) -> SymExpr {
    let (x, z) = (Point::new("x"), Point::new("z"));
    let mut v = unintegrated_v(n, &x);
    let mut f = unintegrated_f(&z, d1, d2);
    let mut out = Vec::new();
    let mut fact = 1i64;
    for k in 0..=n + 2 {
        if k > 0 {
            fact *= k as i64;
            v = functional_derivative(&v, &Point::new(&format!("p{k}"))).unwrap();
            f = functional_derivative(&f, &Point::new(&format!("q{k}"))).unwrap();
        }
        for a in v.body.monomials() {
            for b in f.body.monomials() {
                let mut m = a.mul(b).with_orders(0, k as i32);
                m.coeff = &m.coeff * &CoeffElem::frac(1, fact);
                for i in 1..=k {
                    let (p, q) = (Point::new(&format!("p{i}")), Point::new(&format!("q{i}")));
                    m = m.with_factor(Factor::kernel(kind, &p, &q, 1)).integrate(&p, "c").integrate(&q, "c");
                }
                out.push(m);
            }
        }
    }
    let out = collapse_all(out).into_iter().map(|m| m.integrate(&x, "h").integrate(&z, "f")).collect();
    SymExpr::from_monomials(None, out)
}

/// Integration by parts spells □ as ∇^a∇_a, possibly with a scalar-commuted
/// derivative in between; fold it back with the two rules that do only that.
pub fn fuse_boxes(e: &SymExpr) -> SymExpr {
    let keep = ["box-formation", "scalar-commute"];
    let rules = RuleSet {
        disabled: RuleSet::registered().into_iter().filter(|r| !keep.contains(r)).map(String::from).collect(),
        kernel_symmetry: false,
        ..RuleSet::default()
    };
    apply_rules(e, &rules, &Background::generic()).unwrap()
}

pub fn random_ops(rng: &mut StdRng, names: [&str; 2]) -> Ops {
    let len = rng.gen_range(0..=2);
    (0..len)
        .map(|i| match rng.gen_range(0..3) {
            0 | 1 => d(names[i], rng.gen_bool(0.5)),
            _ => DOp::Box,
        })
        .collect()
}

pub fn arb_star_kind() -> impl Strategy<Value = KernelKind> {
    prop_oneof![Just(KernelKind::H), Just(KernelKind::HF), Just(KernelKind::Delta), Just(KernelKind::W)]
}

pub fn arb_poly(label: &'static str) -> impl Strategy<Value = Functional> {
    prop::collection::vec((0u32..=3, -3i64..=3), 1..=2).prop_map(move |terms| {
        terms.into_iter().fold(Functional::zero(), |acc, (k, c)| acc.add(&phi_k(k, label).scale(&CoeffElem::int(c))))
    })
}

pub fn arb_poly_any() -> impl Strategy<Value = Functional> {
    let quad = (0usize..3, 0usize..3).prop_map(|(i, j)| {
        let pick = |k: usize| -> Ops {
            match k {
                0 => vec![],
                1 => vec![d("a", false)],
                _ => vec![DOp::Box],
            }
        };
        let (a, b) = (pick(i), pick(j));
        // Contract a lowered ∇_a with a raised one so no index stays free twice.
        let b = if a == vec![d("a", false)] && b == a { vec![d("a", true)] } else { b };
        decorated_quadratic("g", a, b)
    });
    (arb_poly("f"), quad, 0u32..=3).prop_map(|(p, q, k)| p.add(&q).add(&local_power(k, &Point::new("z"))))
}

pub fn arb_any_kind() -> impl Strategy<Value = KernelKind> {
    prop_oneof![
        Just(KernelKind::H),
        Just(KernelKind::HF),
        Just(KernelKind::HAF),
        Just(KernelKind::Delta),
        Just(KernelKind::DeltaA),
        Just(KernelKind::DeltaR),
        Just(KernelKind::W),
    ]
}

/// Random monomial over three integrated points sharing one label, with kernels,
/// fields, one contracted derivative pair and a scalar coefficient.
pub fn arb_monomial() -> impl Strategy<Value = Monomial> {
    let kernel = (arb_any_kind(), 0usize..3, 0usize..3, 1u32..=2);
    (prop::collection::vec(kernel, 1..=3), prop::collection::vec(0u32..=2, 3), 0usize..3, -4i64..=4, any::<bool>())
        .prop_filter("nonzero", |(_, _, _, c, _)| *c != 0)
        .prop_map(|(kernels, fields, dpt, c, dummy)| {
            let pts: Vec<Point> = ["x", "y", "w"].iter().map(|s| Point::new(s)).collect();
            let mut m = Monomial::scalar(CoeffElem::int(c));
            for (kind, i, j, e) in kernels {
                m = m.with_factor(Factor::kernel(kind, &pts[i], &pts[j], e));
            }
            for (pt, e) in pts.iter().zip(fields) {
                if e > 0 {
                    m = m.with_factor(Factor::field_pow(pt, e));
                }
            }
            if dummy {
                m = m
                    .with_factor(Factor::field_ops(&pts[dpt], vec![d("a", false)]))
                    .with_factor(Factor::field_ops(&pts[(dpt + 1) % 3], vec![DOp::Box, d("a", true)]));
            }
            for pt in &pts {
                m = m.with_factor(Factor::test_fn("h", pt)).integrate(pt, "h");
            }
            m
        })
}

/// Undecorated functionals: there the two orders agree structurally once smeared.
/// With derivatives they agree only up to integration by parts (see above).
pub fn arb_functional() -> impl Strategy<Value = Functional> {
    let piece = prop_oneof![
        (1u32..=4).prop_map(|k| phi_k(k, "f")),
        (1u32..=2, 1u32..=2).prop_map(|(a, b)| pointwise_product(&phi_k(a, "f"), &phi_k(b, "g"))),
        (1u32..=3).prop_map(|k| local_power(k, &Point::new("z"))),
        (1u32..=3).prop_map(|k| pointwise_product(&local_power(k, &Point::new("z")), &phi("f"))),
    ];
    prop::collection::vec((piece, -3i64..=3), 1..=3)
        .prop_map(|v| v.into_iter().fold(Functional::zero(), |acc, (f, c)| acc.add(&f.scale(&CoeffElem::int(c)))))
}

/// Seeded decorations (n, D, D′, kernel) for the product lemma.
pub fn lemma_cases(count: usize, seed: u64) -> Vec<(u32, Ops, Ops, KernelKind)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let kinds = [KernelKind::H, KernelKind::HF, KernelKind::HAF, KernelKind::Delta];
    (0..count)
        .map(|case| {
            let n = if case % 2 == 0 { 3 } else { 4 };
            let d1 = random_ops(&mut rng, ["a", "b"]);
            let d2 = random_ops(&mut rng, ["c", "e"]);
            (n, d1, d2, kinds[case % kinds.len()])
        })
        .collect()
}
