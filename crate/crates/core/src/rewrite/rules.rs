use super::{Ctx, FieldEom, Regime, Stage};
use crate::calculus::{apply_ops, collapse_delta, collapsible_delta, expand_applied, Term};
use crate::coeff::{rat, CoeffElem, INV_PI2, M2, XI};
use crate::expr::{Binding, DOp, Factor, Index, KernelKind, Monomial, Ops, Point, Tensor};

pub(super) type RuleFn = fn(&Monomial, &Ctx) -> Option<Vec<Monomial>>;

pub(super) struct RuleDef {
    pub name: &'static str,
    pub stage: Stage,
    pub apply: RuleFn,
}

pub(super) const RULES: &[RuleDef] = &[
    RuleDef { name: "applied-expansion", stage: Stage::Derivative, apply: applied_expansion },
    RuleDef { name: "metric-compatibility", stage: Stage::Derivative, apply: metric_compatibility },
    RuleDef { name: "contracted-bianchi", stage: Stage::Derivative, apply: contracted_bianchi },
    RuleDef { name: "box-formation", stage: Stage::Derivative, apply: box_formation },
    RuleDef { name: "scalar-commute", stage: Stage::Derivative, apply: scalar_commute },
    RuleDef { name: "curvature-commutator", stage: Stage::Derivative, apply: curvature_commutator },
    RuleDef { name: "p0-expansion", stage: Stage::Derivative, apply: p0_expansion },
    RuleDef { name: "wave-operator", stage: Stage::Derivative, apply: wave_operator },
    RuleDef { name: "kernel-eom", stage: Stage::Eom, apply: kernel_eom },
    RuleDef { name: "field-eom", stage: Stage::Eom, apply: field_eom },
    RuleDef { name: "delta-collapse", stage: Stage::Delta, apply: delta_collapse },
    RuleDef { name: "cutoff-flat", stage: Stage::Delta, apply: cutoff_flat },
    RuleDef { name: "feynman-split", stage: Stage::Kernel, apply: feynman_split },
    RuleDef { name: "anti-feynman-split", stage: Stage::Kernel, apply: anti_feynman_split },
    RuleDef { name: "exchange", stage: Stage::Kernel, apply: exchange },
    RuleDef { name: "causal-split", stage: Stage::Kernel, apply: causal_split },
    RuleDef { name: "retarded-advanced-disjoint", stage: Stage::Kernel, apply: disjoint_support },
    RuleDef { name: "metric-absorption", stage: Stage::Trace, apply: metric_absorption },
    RuleDef { name: "einstein-trace", stage: Stage::Trace, apply: einstein_trace },
    RuleDef { name: "ricci-trace", stage: Stage::Trace, apply: ricci_trace },
    RuleDef { name: "weyl-traceless", stage: Stage::Trace, apply: weyl_traceless },
    RuleDef { name: "einstein-expansion", stage: Stage::Trace, apply: einstein_expansion },
    RuleDef { name: "background-curvature", stage: Stage::Background, apply: background_curvature },
    RuleDef { name: "background-v1", stage: Stage::Background, apply: background_v1 },
];

/// Stand-in point for the slot being rewritten while outer operators are distributed.
fn mark() -> Point {
    Point("§".into())
}

/// Replace one unit of factor `pos` by `terms` (slot point written as the marker),
/// apply `rest` at the marker, then rename the marker to `at`.
fn splice(m: &Monomial, pos: usize, at: &Point, terms: Vec<Term>, rest: &[DOp]) -> Vec<Monomial> {
    let mut base = m.clone();
    let e = base.factors[pos].exp();
    if e > 1 {
        base.factors[pos].set_exp(e - 1);
    } else {
        base.factors.remove(pos);
    }
    let mk = mark();
    let mut out = Vec::new();
    for (c, fs) in terms {
        let mut used = m.all_index_names();
        for (c2, fs2) in apply_ops(&fs, rest, &mk, &mut used) {
            let mut n = base.clone();
            n.coeff = &(&m.coeff * &c) * &c2;
            for mut f in fs2 {
                for p in f.points_mut() {
                    if *p == mk {
                        *p = at.clone();
                    }
                }
                n.factors.push(f);
            }
            n.prune_points();
            out.push(n);
        }
    }
    out
}

/// Copy of factor `pos` with exponent 1, slot `s` moved to the marker with ops `ops`.
fn slot_copy(f: &Factor, s: usize, ops: Ops) -> Factor {
    let mut g = f.clone();
    g.set_exp(1);
    let mk = mark();
    match &mut g {
        Factor::Kernel { at, ops: o, .. } => {
            at[s] = mk;
            o[s] = ops;
        }
        Factor::Field { at, ops: o, .. } | Factor::TestFn { at, ops: o, .. } | Factor::Geom { at, ops: o, .. } => {
            *at = mk;
            *o = ops;
        }
        Factor::Applied { .. } => {}
    }
    g
}

struct SlotRef<'a> {
    pos: usize,
    slot: usize,
    at: &'a Point,
    ops: &'a Ops,
    scalar: bool,
    dynamical: bool,
}

fn slots(m: &Monomial) -> Vec<SlotRef<'_>> {
    let mut v = Vec::new();
    for (pos, f) in m.factors.iter().enumerate() {
        match f {
            Factor::Field { at, ops, .. } => v.push(SlotRef { pos, slot: 0, at, ops, scalar: true, dynamical: true }),
            Factor::Kernel { at, ops, .. } => {
                for s in 0..2 {
                    v.push(SlotRef { pos, slot: s, at: &at[s], ops: &ops[s], scalar: true, dynamical: true });
                }
            }
            Factor::TestFn { at, ops, .. } => v.push(SlotRef { pos, slot: 0, at, ops, scalar: true, dynamical: false }),
            Factor::Geom { tensor, at, ops, .. } => v.push(SlotRef {
                pos,
                slot: 0,
                at,
                ops,
                scalar: matches!(tensor, Tensor::RicciScalar | Tensor::V1),
                dynamical: false,
            }),
            Factor::Applied { .. } => {}
        }
    }
    v
}

fn with_ops(m: &Monomial, pos: usize, slot: usize, ops: Ops) -> Monomial {
    let mut n = m.clone();
    match &mut n.factors[pos] {
        Factor::Kernel { ops: o, .. } => o[slot] = ops,
        Factor::Field { ops: o, .. } | Factor::TestFn { ops: o, .. } | Factor::Geom { ops: o, .. } => *o = ops,
        Factor::Applied { .. } => {}
    }
    n
}

fn scalar_prefix(ops: &Ops) -> usize {
    ops.iter().take_while(|o| matches!(o, DOp::P0 | DOp::Box)).count()
}

fn contracts(a: &DOp, b: &DOp) -> bool {
    match (a, b) {
        (DOp::Cov(i), DOp::Cov(j)) => i.name == j.name && i.up != j.up,
        _ => false,
    }
}

fn applied_expansion(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    if !m.factors.iter().any(|f| matches!(f, Factor::Applied { .. })) {
        return None;
    }
    Some(
        expand_applied(&m.factors, None)
            .into_iter()
            .map(|(c, fs)| {
                let mut n = m.clone();
                n.coeff = &m.coeff * &c;
                n.factors = fs;
                n.prune_points();
                n
            })
            .collect(),
    )
}

fn metric_compatibility(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    m.factors
        .iter()
        .any(|f| {
            matches!(f, Factor::Geom { tensor: Tensor::Metric | Tensor::InverseMetric, ops, .. } if !ops.is_empty())
        })
        .then(Vec::new)
}

/// ∇^a G_{ab} = 0, ∇^a R_{ab} = ½ ∇_b R.
fn contracted_bianchi(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for (pos, f) in m.factors.iter().enumerate() {
        let Factor::Geom { tensor, at, idx, ops, .. } = f else { continue };
        if !matches!(tensor, Tensor::Einstein | Tensor::Ricci) || ops.is_empty() {
            continue;
        }
        let DOp::Cov(c) = &ops[0] else { continue };
        let Some(k) = idx.iter().position(|i| i.name == c.name && i.up != c.up) else { continue };
        if *tensor == Tensor::Einstein {
            return Some(vec![]);
        }
        let other = idx[1 - k].clone();
        let mut new_ops = vec![DOp::Cov(other)];
        new_ops.extend(ops[1..].iter().cloned());
        let mut n = m.clone();
        n.coeff = &n.coeff * &CoeffElem::frac(1, 2);
        n.factors[pos] =
            Factor::Geom { tensor: Tensor::RicciScalar, at: at.clone(), idx: vec![], ops: new_ops, exp: 1 };
        return Some(vec![n]);
    }
    None
}

fn box_formation(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for s in slots(m) {
        for i in 0..s.ops.len().saturating_sub(1) {
            if contracts(&s.ops[i], &s.ops[i + 1]) {
                let mut ops = s.ops.clone();
                ops.splice(i..i + 2, [DOp::Box]);
                return Some(vec![with_ops(m, s.pos, s.slot, ops)]);
            }
        }
    }
    None
}

/// ∇^a∇_b∇_a f = ∇_b□f on scalars.
fn scalar_commute(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for s in slots(m) {
        if !s.scalar {
            continue;
        }
        let p = scalar_prefix(s.ops);
        if s.ops.len() >= p + 3 && matches!(s.ops[p + 1], DOp::Cov(_)) && contracts(&s.ops[p], &s.ops[p + 2]) {
            // swap then contract in one step; canonical order would undo a bare swap
            let mut ops = s.ops.clone();
            ops.splice(p..p + 3, [s.ops[p + 1].clone(), DOp::Box]);
            return Some(vec![with_ops(m, s.pos, s.slot, ops)]);
        }
    }
    None
}

/// □∇_ν f = ∇_ν □f + R_{νa} ∇^a f on scalars.
fn curvature_commutator(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for s in slots(m) {
        if !s.scalar {
            continue;
        }
        let p = scalar_prefix(s.ops);
        if s.ops.len() < p + 2 || s.ops[p + 1] != DOp::Box {
            continue;
        }
        let DOp::Cov(nu) = &s.ops[p] else { continue };
        let prefix: Ops = s.ops[..p].to_vec();
        let rest: Ops = s.ops[p + 2..].to_vec();
        let mut swapped = s.ops.clone();
        swapped.swap(p, p + 1);
        let mut out = vec![with_ops(m, s.pos, s.slot, swapped)];
        let a = crate::calculus::fresh_index(&m.all_index_names());
        let mut grad = prefix;
        grad.push(DOp::Cov(Index::up(&a)));
        let ric = Factor::Geom {
            tensor: Tensor::Ricci,
            at: mark(),
            idx: vec![nu.clone(), Index::down(&a)],
            ops: vec![],
            exp: 1,
        };
        let terms = vec![(CoeffElem::one(), vec![slot_copy(&m.factors[s.pos], s.slot, grad), ric])];
        out.extend(splice(m, s.pos, s.at, terms, &rest));
        return Some(out);
    }
    None
}

/// P₀ acting after a covariant derivative is expanded as −□ + m² + ξR.
fn p0_expansion(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for s in slots(m) {
        let Some(i) = s.ops.iter().position(|o| *o == DOp::P0) else { continue };
        if !s.ops[..i].iter().any(|o| matches!(o, DOp::Cov(_))) {
            continue;
        }
        let pre: Ops = s.ops[..i].to_vec();
        let rest: Ops = s.ops[i + 1..].to_vec();
        let f = &m.factors[s.pos];
        let mut boxed = pre.clone();
        boxed.push(DOp::Box);
        let terms = vec![
            (CoeffElem::int(-1), vec![slot_copy(f, s.slot, boxed)]),
            (CoeffElem::sym(M2), vec![slot_copy(f, s.slot, pre.clone())]),
            (CoeffElem::sym(XI), vec![slot_copy(f, s.slot, pre), Factor::geom(Tensor::RicciScalar, &mark(), vec![])]),
        ];
        return Some(splice(m, s.pos, s.at, terms, &rest));
    }
    None
}

/// □K = (m² + ξR)K − P₀K on field and kernel slots.
fn wave_operator(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for s in slots(m) {
        if !s.dynamical {
            continue;
        }
        let j = s.ops.iter().take_while(|o| **o == DOp::P0).count();
        if s.ops.get(j) != Some(&DOp::Box) {
            continue;
        }
        let pre: Ops = s.ops[..j].to_vec();
        let rest: Ops = s.ops[j + 1..].to_vec();
        let f = &m.factors[s.pos];
        let mut p0 = pre.clone();
        p0.push(DOp::P0);
        let terms = vec![
            (CoeffElem::sym(M2), vec![slot_copy(f, s.slot, pre.clone())]),
            (CoeffElem::sym(XI), vec![slot_copy(f, s.slot, pre), Factor::geom(Tensor::RicciScalar, &mark(), vec![])]),
            (CoeffElem::int(-1), vec![slot_copy(f, s.slot, p0)]),
        ];
        return Some(splice(m, s.pos, s.at, terms, &rest));
    }
    None
}

fn v1_factor(at: &Point) -> Factor {
    Factor::geom(Tensor::V1, at, vec![])
}

/// P₀ on a kernel slot: bisolution kernels vanish at separated points, the
/// propagators give δ, and coincident H / W give the v₁ Wick rule.
fn kernel_eom(m: &Monomial, ctx: &Ctx) -> Option<Vec<Monomial>> {
    use KernelKind::*;
    for (pos, f) in m.factors.iter().enumerate() {
        let Factor::Kernel { kind, at, ops, exp } = f else { continue };
        for s in 0..2 {
            if ops[s].first() != Some(&DOp::P0) {
                continue;
            }
            let rest: Ops = ops[s][1..].to_vec();
            let coincident = at[0] == at[1];
            let delta_coeff = match kind {
                H | Hs | W | Delta => {
                    if !coincident {
                        return Some(vec![]);
                    }
                    if *kind == Delta {
                        return Some(vec![]);
                    }
                    if !rest.is_empty() || !ops[1 - s].is_empty() || *exp != 1 || *kind == Hs {
                        continue;
                    }
                    // :φP₀φ: = (3/4π²) v₁, so P₀ on one leg of H(z,z) gives −(3/4π²)v₁
                    let sign = if *kind == W { 3 } else { -3 };
                    let mut n = m.clone();
                    n.coeff = &(&n.coeff * &CoeffElem::frac(sign, 4)) * &CoeffElem::sym(INV_PI2);
                    n.factors[pos] = v1_factor(&at[0]);
                    return Some(vec![n]);
                }
                HF => ctx.bg.convention.feynman_factor(),
                HAF => -&ctx.bg.convention.feynman_factor(),
                DeltaA | DeltaR => {
                    &ctx.bg.convention.feynman_factor()
                        * &CoeffElem::constant(crate::coeff::GaussRat::new(rat(0, 1), rat(-1, 1)))
                }
                DiracDelta | Slot(_) | Zero => continue,
            };
            if *exp != 1 || coincident {
                continue;
            }
            let mut new_ops = ops.clone();
            new_ops[s] = rest;
            let mut n = m.clone();
            n.coeff = &n.coeff * &delta_coeff;
            n.factors[pos] = Factor::Kernel { kind: DiracDelta, at: at.clone(), ops: new_ops, exp: 1 };
            return Some(vec![n]);
        }
    }
    None
}

/// P₀φ → (EOM right-hand side), only inside `reduce_modulo_eom`.
fn field_eom(m: &Monomial, ctx: &Ctx) -> Option<Vec<Monomial>> {
    let eom = ctx.field_eom.as_ref()?;
    for s in slots(m) {
        let Factor::Field { .. } = &m.factors[s.pos] else { continue };
        if s.ops.first() != Some(&DOp::P0) {
            continue;
        }
        let rest: Ops = s.ops[1..].to_vec();
        let FieldEom::Interacting { coeff, power } = eom else {
            return Some(vec![]);
        };
        let terms = vec![(coeff.clone(), vec![Factor::field_pow(&mark(), *power)])];
        let mut out = splice(m, s.pos, s.at, terms, &rest);
        for n in &mut out {
            n.lambda += 1;
        }
        return Some(out);
    }
    None
}

fn delta_collapse(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    let (pos, slot) = collapsible_delta(m)?;
    Some(collapse_delta(m, pos, slot))
}

/// Interaction cutoffs are constant near the free evaluation point.
fn cutoff_flat(m: &Monomial, ctx: &Ctx) -> Option<Vec<Monomial>> {
    m.factors
        .iter()
        .any(|f| match f {
            Factor::TestFn { label, at, ops, .. } => {
                !ops.is_empty()
                    && ctx.rules.cutoff_labels.contains(label)
                    && matches!(m.points.get(at), Some(Binding::Free) | None)
            }
            _ => false,
        })
        .then(Vec::new)
}

/// K^e(p,q) → (A + cB)^e expanded binomially.
fn split_kernel(m: &Monomial, from: KernelKind, a: KernelKind, b: KernelKind, c: CoeffElem) -> Option<Vec<Monomial>> {
    let pos = m.factors.iter().position(|f| matches!(f, Factor::Kernel { kind, .. } if *kind == from))?;
    let Factor::Kernel { at, ops, exp, .. } = &m.factors[pos] else { unreachable!() };
    let mut out = Vec::new();
    let mut binom = 1i64;
    for k in 0..=*exp {
        if k > 0 {
            binom = binom * (*exp - k + 1) as i64 / k as i64;
        }
        let mut n = m.clone();
        n.factors.remove(pos);
        n.coeff = &(&n.coeff * &CoeffElem::int(binom)) * &c.pow(k);
        if exp - k > 0 {
            n.factors.push(Factor::Kernel { kind: a, at: at.clone(), ops: ops.clone(), exp: exp - k });
        }
        if k > 0 {
            n.factors.push(Factor::Kernel { kind: b, at: at.clone(), ops: ops.clone(), exp: k });
        }
        out.push(n);
    }
    Some(out)
}

fn i_times(r: (i64, i64)) -> CoeffElem {
    CoeffElem::constant(crate::coeff::GaussRat::new(rat(0, 1), rat(r.0, r.1)))
}

/// H_F = H + iΔ_A.
fn feynman_split(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    split_kernel(m, KernelKind::HF, KernelKind::H, KernelKind::DeltaA, i_times((1, 1)))
}

/// H_AF = H − iΔ_R.
fn anti_feynman_split(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    split_kernel(m, KernelKind::HAF, KernelKind::H, KernelKind::DeltaR, i_times((-1, 1)))
}

/// H(x,y) − H(y,x) = iΔ(x,y): H = H_s + (i/2)Δ with H_s symmetric.
fn exchange(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    split_kernel(m, KernelKind::H, KernelKind::Hs, KernelKind::Delta, i_times((1, 2)))
}

/// Δ = Δ_R − Δ_A.
fn causal_split(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    let pos = m.factors.iter().position(|f| matches!(f, Factor::Kernel { kind: KernelKind::Delta, .. }))?;
    let Factor::Kernel { at, ops, exp, .. } = &m.factors[pos] else { unreachable!() };
    let mut n = m.clone();
    n.factors[pos] = Factor::Kernel { kind: KernelKind::DeltaR, at: at.clone(), ops: ops.clone(), exp: *exp };
    let mut out = vec![];
    for t in split_kernel(&n, KernelKind::DeltaR, KernelKind::DeltaR, KernelKind::DeltaA, CoeffElem::int(-1))? {
        out.push(t);
    }
    Some(out)
}

/// Δ_A(x,y)Δ_R(x,y) = 0: the supports meet only on a null set.
fn disjoint_support(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for f in &m.factors {
        let Factor::Kernel { kind: KernelKind::DeltaA, at, .. } = f else { continue };
        let hit = m.factors.iter().any(|g| {
            matches!(g, Factor::Kernel { kind: KernelKind::DeltaR, at: b, .. } if b == at)
                || matches!(g, Factor::Kernel { kind: KernelKind::DeltaA, at: b, .. } if b[0] == at[1] && b[1] == at[0] && at[0] != at[1])
        });
        if hit {
            return Some(vec![]);
        }
    }
    None
}

/// g_{ab} X^{a…} = X_b^{…}; g^a_a = 4.
fn metric_absorption(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    for (pos, f) in m.factors.iter().enumerate() {
        let Factor::Geom { tensor: Tensor::Metric | Tensor::InverseMetric, idx, ops, .. } = f else { continue };
        if !ops.is_empty() {
            continue;
        }
        let (a, b) = (&idx[0], &idx[1]);
        if a.name == b.name {
            let mut n = m.clone();
            n.factors.remove(pos);
            n.coeff = &n.coeff * &CoeffElem::int(4);
            n.prune_points();
            return Some(vec![n]);
        }
        for (keep, gone) in [(b, a), (a, b)] {
            let elsewhere = m
                .factors
                .iter()
                .enumerate()
                .any(|(q, g)| q != pos && g.indices().iter().any(|i| i.name == gone.name && i.up != gone.up));
            if !elsewhere {
                continue;
            }
            let mut n = m.clone();
            n.factors.remove(pos);
            for g in &mut n.factors {
                for i in g.indices_mut() {
                    if i.name == gone.name {
                        *i = keep.clone();
                    }
                }
            }
            n.prune_points();
            return Some(vec![n]);
        }
    }
    None
}

fn self_traced(idx: &[Index], i: usize, j: usize) -> bool {
    idx[i].name == idx[j].name && idx[i].up != idx[j].up
}

fn trace_to_scalar(m: &Monomial, which: Tensor, factor: i64) -> Option<Vec<Monomial>> {
    for (pos, f) in m.factors.iter().enumerate() {
        let Factor::Geom { tensor, at, idx, ops, .. } = f else { continue };
        if *tensor != which || !self_traced(idx, 0, 1) {
            continue;
        }
        let mut n = m.clone();
        n.coeff = &n.coeff * &CoeffElem::int(factor);
        n.factors[pos] =
            Factor::Geom { tensor: Tensor::RicciScalar, at: at.clone(), idx: vec![], ops: ops.clone(), exp: 1 };
        return Some(vec![n]);
    }
    None
}

/// g^{ab}G_{ab} = −R.
fn einstein_trace(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    trace_to_scalar(m, Tensor::Einstein, -1)
}

fn ricci_trace(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    trace_to_scalar(m, Tensor::Ricci, 1)
}

fn weyl_traceless(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    m.factors
        .iter()
        .any(|f| match f {
            Factor::Geom { tensor: Tensor::Weyl, idx, .. } => {
                (0..4).any(|i| (i + 1..4).any(|j| self_traced(idx, i, j)))
            }
            _ => false,
        })
        .then(Vec::new)
}

/// G_{ab} = R_{ab} − ½ g_{ab} R.
fn einstein_expansion(m: &Monomial, _: &Ctx) -> Option<Vec<Monomial>> {
    let pos = m.factors.iter().position(|f| matches!(f, Factor::Geom { tensor: Tensor::Einstein, .. }))?;
    let Factor::Geom { at, idx, ops, .. } = &m.factors[pos] else { unreachable!() };
    let mut ric = m.clone();
    ric.factors[pos] =
        Factor::Geom { tensor: Tensor::Ricci, at: at.clone(), idx: idx.clone(), ops: ops.clone(), exp: 1 };
    let mut gr = m.clone();
    gr.coeff = &gr.coeff * &CoeffElem::frac(-1, 2);
    gr.factors[pos] =
        Factor::Geom { tensor: Tensor::RicciScalar, at: at.clone(), idx: vec![], ops: ops.clone(), exp: 1 };
    gr.factors.push(Factor::geom(Tensor::Metric, at, idx.clone()));
    Some(vec![ric, gr])
}

fn background_curvature(m: &Monomial, ctx: &Ctx) -> Option<Vec<Monomial>> {
    match ctx.bg.regime {
        Regime::Generic => None,
        Regime::Minkowski => {
            m.factors.iter().any(|f| matches!(f, Factor::Geom { tensor, .. } if tensor.is_curvature())).then(Vec::new)
        }
        Regime::MaximallySymmetric => {
            for (pos, f) in m.factors.iter().enumerate() {
                let Factor::Geom { tensor, at, idx, ops, .. } = f else { continue };
                if tensor.is_curvature() && !ops.is_empty() || *tensor == Tensor::Weyl {
                    return Some(vec![]);
                }
                let c = match tensor {
                    Tensor::Ricci => CoeffElem::frac(1, 4),
                    Tensor::Einstein => CoeffElem::frac(-1, 4),
                    _ => continue,
                };
                let mut n = m.clone();
                n.coeff = &n.coeff * &c;
                n.factors[pos] = Factor::geom(Tensor::Metric, at, idx.clone());
                n.factors.push(Factor::geom(Tensor::RicciScalar, at, vec![]));
                return Some(vec![n]);
            }
            None
        }
    }
}

fn background_v1(m: &Monomial, ctx: &Ctx) -> Option<Vec<Monomial>> {
    if ctx.bg.regime == Regime::Generic {
        return None;
    }
    for (pos, f) in m.factors.iter().enumerate() {
        let Factor::Geom { tensor: Tensor::V1, ops, exp, .. } = f else { continue };
        if !ops.is_empty() {
            return Some(vec![]);
        }
        if ctx.bg.regime == Regime::Minkowski {
            let v1 = crate::microlocal::v1_eval(Regime::Minkowski).as_coeff()?;
            let mut n = m.clone();
            n.coeff = &n.coeff * &v1.pow(*exp);
            n.factors.remove(pos);
            n.prune_points();
            return Some(vec![n]);
        }
    }
    None
}
