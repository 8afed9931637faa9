//! Pointwise differential calculus on factor lists: Leibniz rule, second-order
//! operators, and Dirac-δ collapse against integrated points.

use crate::coeff::{CoeffElem, M2, XI};
use crate::expr::{Binding, DOp, Factor, FieldOp, Index, KernelKind, Monomial, Point, Tensor};
use std::collections::BTreeSet;

pub type Term = (CoeffElem, Vec<Factor>);

fn used_names(factors: &[Factor]) -> BTreeSet<String> {
    factors.iter().flat_map(|f| f.indices().into_iter().map(|i| i.name.clone())).collect()
}

pub fn fresh_index(used: &BTreeSet<String>) -> String {
    (0..).map(|k| format!("#t{k}")).find(|n| !used.contains(n)).unwrap()
}

/// Leibniz rule for one covariant derivative acting on every slot at `at`.
pub fn leibniz(factors: &[Factor], idx: &Index, at: &Point) -> Vec<Term> {
    let mut out = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let slots: Vec<usize> = f.points().iter().enumerate().filter(|(_, p)| **p == at).map(|(s, _)| s).collect();
        for s in slots {
            let mut rest: Vec<Factor> = factors.to_vec();
            let e = f.exp();
            let mut hit = f.clone();
            hit.set_exp(1);
            push_op(&mut hit, s, DOp::Cov(idx.clone()));
            if e > 1 {
                rest[i].set_exp(e - 1);
                rest.push(hit);
            } else {
                rest[i] = hit;
            }
            out.push((CoeffElem::int(e as i64), rest));
        }
    }
    out
}

pub fn push_op(f: &mut Factor, slot: usize, op: DOp) {
    match f {
        Factor::Field { ops, .. } | Factor::Geom { ops, .. } | Factor::TestFn { ops, .. } => ops.push(op),
        Factor::Kernel { ops, .. } => ops[slot].push(op),
        Factor::Applied { .. } => panic!("operator pushed onto an unexpanded application"),
    }
}

/// Replace every `Applied` factor located at `at` (or everywhere) by its Leibniz expansion.
pub fn expand_applied(factors: &[Factor], at: Option<&Point>) -> Vec<Term> {
    let pos =
        factors.iter().position(|f| matches!(f, Factor::Applied { at: p, .. } if at.map(|q| q == p).unwrap_or(true)));
    let Some(pos) = pos else {
        return vec![(CoeffElem::one(), factors.to_vec())];
    };
    let Factor::Applied { op, at: p, power } = &factors[pos] else { unreachable!() };
    let base = vec![Factor::field_pow(p, *power)];
    let mut used = used_names(factors);
    let expanded: Vec<Term> = match op {
        FieldOp::Box => apply_ops(&base, &[DOp::Box], p, &mut used),
        FieldOp::P0 => apply_ops(&base, &[DOp::P0], p, &mut used),
        FieldOp::NablaPair(a, b) => apply_ops(&base, &[DOp::Cov(a.clone()), DOp::Cov(b.clone())], p, &mut used),
    };
    let mut out = Vec::new();
    for (c, fs) in expanded {
        let mut all: Vec<Factor> = factors.to_vec();
        all.remove(pos);
        all.extend(fs);
        for (c2, fs2) in expand_applied(&all, at) {
            out.push((&c * &c2, fs2));
        }
    }
    out
}

/// Apply operators (first element first) at `at` to the whole product.
pub fn apply_ops(factors: &[Factor], ops: &[DOp], at: &Point, used: &mut BTreeSet<String>) -> Vec<Term> {
    used.extend(used_names(factors));
    let mut terms: Vec<Term> = vec![(CoeffElem::one(), factors.to_vec())];
    for op in ops {
        let mut next = Vec::new();
        for (c, fs) in terms {
            for (c2, fs2) in apply_op(&fs, op, at, used) {
                next.push((&c * &c2, fs2));
            }
        }
        terms = next;
    }
    terms
}

fn apply_op(factors: &[Factor], op: &DOp, at: &Point, used: &mut BTreeSet<String>) -> Vec<Term> {
    match op {
        DOp::Cov(i) => leibniz(factors, i, at),
        DOp::Box => {
            let d = fresh_index(used);
            used.insert(d.clone());
            let mut out = Vec::new();
            for (c, fs) in leibniz(factors, &Index::down(&d), at) {
                for (c2, fs2) in leibniz(&fs, &Index::up(&d), at) {
                    out.push((&c * &c2, fs2));
                }
            }
            out
        }
        DOp::P0 => {
            // P₀ = −□ + m² + ξR
            let mut out: Vec<Term> =
                apply_op(factors, &DOp::Box, at, used).into_iter().map(|(c, fs)| (-&c, fs)).collect();
            out.push((CoeffElem::sym(M2), factors.to_vec()));
            let mut with_r = factors.to_vec();
            with_r.push(Factor::geom(Tensor::RicciScalar, at, vec![]));
            out.push((CoeffElem::sym(XI), with_r));
            out
        }
    }
}

/// Apply operators at `at` to the factors of a monomial, producing monomials.
pub fn apply_ops_monomial(m: &Monomial, ops: &[DOp], at: &Point) -> Vec<Monomial> {
    let mut out = Vec::new();
    for (c0, fs) in expand_applied(&m.factors, Some(at)) {
        let mut used = m.all_index_names();
        for (c, fs2) in apply_ops(&fs, ops, at, &mut used) {
            let mut n = m.clone();
            n.coeff = &(&m.coeff * &c0) * &c;
            n.factors = fs2;
            n.prune_points();
            out.push(n);
        }
    }
    out
}

/// Formal adjoint of an operator sequence: reversed order, each `∇` picks up a sign.
pub fn adjoint(ops: &[DOp]) -> (Vec<DOp>, bool) {
    let neg = ops.iter().filter(|o| matches!(o, DOp::Cov(_))).count() % 2 == 1;
    (ops.iter().rev().cloned().collect(), neg)
}

/// Position of a δ with one integrated endpoint, and that endpoint's slot.
pub fn collapsible_delta(m: &Monomial) -> Option<(usize, usize)> {
    m.factors.iter().enumerate().find_map(|(i, f)| match f {
        Factor::Kernel { kind: KernelKind::DiracDelta, at, exp: 1, .. } if at[0] != at[1] => {
            if m.is_integrated(&at[0]) {
                Some((i, 0))
            } else if m.is_integrated(&at[1]) {
                Some((i, 1))
            } else {
                None
            }
        }
        _ => None,
    })
}

/// ∫du g(u) (D_u ⊗ D_v) δ(u,v) = D_v (D_uᵀ g)(v): the operators act at `u`
/// before `u` is renamed to `v`.
pub fn collapse_delta(m: &Monomial, pos: usize, slot: usize) -> Vec<Monomial> {
    let Factor::Kernel { at, ops, .. } = &m.factors[pos] else {
        panic!("collapse_delta on a non-kernel factor");
    };
    let u = at[slot].clone();
    let v = at[1 - slot].clone();
    let (mut total, neg) = adjoint(&ops[slot]);
    total.extend(ops[1 - slot].iter().cloned());
    let mut rest = m.clone();
    rest.factors.remove(pos);
    if neg {
        rest.coeff = -&rest.coeff;
    }
    // Merging two integrated points keeps the smaller label, independent of which one survives.
    let binding = match (m.points.get(&u), rest.points.get(&v).cloned().unwrap_or(Binding::Free)) {
        (Some(Binding::Integrated(a)), Binding::Integrated(b)) => Binding::Integrated(a.clone().min(b)),
        (_, b) => b,
    };
    apply_ops_monomial(&rest, &total, &u)
        .into_iter()
        .map(|mut n| {
            n.rename_point(&u, &v);
            n.points.insert(v.clone(), binding.clone());
            n.prune_points();
            n
        })
        .collect()
}
