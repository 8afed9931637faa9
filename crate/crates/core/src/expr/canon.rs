use super::{Binding, DOp, Factor, FieldOp, KernelKind, Monomial, Ops, Point, Tensor};
use itertools::Itertools;
use std::collections::{BTreeMap, HashMap, HashSet};

/// Which kernel symmetries canonicalization may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Symmetry {
    /// Kernels are ordered pairs; only dummy renaming and factor reordering.
    #[default]
    None,
    /// Orient kernels: H_F, H_AF, δ, W, H_s symmetric; Δ antisymmetric;
    /// Δ_A(x,y) = Δ_R(y,x). H itself has no symmetry.
    Kernels,
}

/// Above this many renamings a first-appearance heuristic is used instead.
const MAX_CANDIDATES: usize = 50_000;

fn transpose(kind: KernelKind) -> Option<(KernelKind, bool)> {
    use KernelKind::*;
    match kind {
        HF | HAF | DiracDelta | W | Hs => Some((kind, false)),
        Delta => Some((Delta, true)),
        DeltaA => Some((DeltaR, false)),
        DeltaR => Some((DeltaA, false)),
        H | Slot(_) | Zero => None,
    }
}

fn scalar_prefix(ops: &Ops) -> usize {
    ops.iter().take_while(|o| matches!(o, DOp::P0 | DOp::Box)).count()
}

/// Covariant derivatives commute on the first two slots acting on a scalar.
fn sort_scalar_ops(ops: &mut Ops) {
    let p = scalar_prefix(ops);
    if ops.len() >= p + 2 {
        if let (DOp::Cov(_), DOp::Cov(_)) = (&ops[p], &ops[p + 1]) {
            if ops[p + 1] < ops[p] {
                ops.swap(p, p + 1);
            }
        }
    }
}

fn factor_is_scalar(f: &Factor) -> bool {
    match f {
        Factor::Geom { tensor, .. } => matches!(tensor, Tensor::RicciScalar | Tensor::V1),
        _ => true,
    }
}

/// Per-factor normal form. Returns the sign flip, or None if the factor vanishes.
fn normalize_factor(f: &mut Factor, sym: Symmetry) -> Option<bool> {
    let scalar = factor_is_scalar(f);
    let mut neg = false;
    match f {
        Factor::Field { ops, .. } | Factor::TestFn { ops, .. } => sort_scalar_ops(ops),
        Factor::Geom { tensor, idx, ops, .. } => {
            if tensor.is_symmetric() && idx.len() == 2 && idx[1] < idx[0] {
                idx.swap(0, 1);
            }
            if scalar {
                sort_scalar_ops(ops);
            }
        }
        Factor::Applied { op: FieldOp::NablaPair(a, b), .. } => {
            if *b < *a {
                std::mem::swap(a, b);
            }
        }
        Factor::Applied { .. } => {}
        Factor::Kernel { kind, at, ops, exp } => {
            if *kind == KernelKind::Zero {
                return None;
            }
            sort_scalar_ops(&mut ops[0]);
            sort_scalar_ops(&mut ops[1]);
            if sym == Symmetry::Kernels {
                if let Some((tk, anti)) = transpose(*kind) {
                    let first = (&at[0], &ops[0]);
                    let second = (&at[1], &ops[1]);
                    if second < first {
                        at.swap(0, 1);
                        ops.swap(0, 1);
                        *kind = tk;
                        if anti && *exp % 2 == 1 {
                            neg = true;
                        }
                    } else if second == first {
                        if anti {
                            return None;
                        }
                        if tk < *kind {
                            *kind = tk;
                        }
                    }
                }
            }
        }
    }
    Some(neg)
}

/// Rename points and dummies; dummies in `flip` have both occurrences'
/// positions exchanged (X_a Y^a = X^a Y_a).
fn rename(f: &Factor, pmap: &HashMap<Point, Point>, imap: &HashMap<String, String>, flip: &HashSet<String>) -> Factor {
    let mut g = f.clone();
    for p in g.points_mut() {
        if let Some(q) = pmap.get(p) {
            *p = q.clone();
        }
    }
    for i in g.indices_mut() {
        if flip.contains(&i.name) {
            i.up = !i.up;
        }
        if let Some(n) = imap.get(&i.name) {
            i.name = n.clone();
        }
    }
    g
}

/// Normalize, sort and merge a renamed factor list.
fn finish(factors: Vec<Factor>, sym: Symmetry) -> Option<(Vec<Factor>, bool)> {
    let mut neg = false;
    let mut out = Vec::with_capacity(factors.len());
    for mut f in factors {
        if f.exp() == 0 {
            continue;
        }
        neg ^= normalize_factor(&mut f, sym)?;
        out.push(f);
    }
    out.sort();
    let mut merged: Vec<Factor> = Vec::with_capacity(out.len());
    for f in out {
        if let Some(last) = merged.last_mut() {
            if last.mergeable() && last.same_base(&f) {
                let e = last.exp() + f.exp();
                last.set_exp(e);
                continue;
            }
        }
        merged.push(f);
    }
    Some((merged, neg))
}

pub(crate) fn dummy_name(k: usize) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    if k < LETTERS.len() {
        format!("#{}", LETTERS[k] as char)
    } else {
        format!("#z{k}")
    }
}

fn point_name(k: usize) -> Point {
    Point(format!("#{}", k + 1))
}

fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

pub(crate) fn canonical_monomial(m: &Monomial, sym: Symmetry) -> Option<Monomial> {
    if m.coeff.is_zero() {
        return None;
    }
    let mut m = m.clone();
    m.factors.retain(|f| f.exp() > 0);
    m.prune_points();

    let mut groups: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for (p, b) in &m.points {
        if let Binding::Integrated(l) = b {
            groups.entry(l.clone()).or_default().push(p.clone());
        }
    }
    let dummies = m.dummy_indices();

    let point_count: usize = groups.values().map(|g| factorial(g.len())).product();
    let total = point_count.saturating_mul(factorial(dummies.len()));
    let flips: Vec<HashSet<String>> = if total.saturating_mul(1 << dummies.len().min(20)) <= MAX_CANDIDATES {
        (0..1usize << dummies.len())
            .map(|mask| {
                dummies.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, d)| d.clone()).collect()
            })
            .collect()
    } else {
        vec![HashSet::new()]
    };

    let group_perms: Vec<Vec<Vec<usize>>> = groups
        .values()
        .map(|g| {
            if point_count <= MAX_CANDIDATES {
                (0..g.len()).permutations(g.len()).collect()
            } else {
                vec![(0..g.len()).collect()]
            }
        })
        .collect();
    let enumerate_dummies = total <= MAX_CANDIDATES;

    let mut best: Option<(Vec<Factor>, bool, bool)> = None;
    let mut choices: Vec<Vec<&Vec<usize>>> = vec![vec![]];
    for perms in &group_perms {
        choices = choices
            .into_iter()
            .flat_map(|c| {
                perms.iter().map(move |p| {
                    let mut c2 = c.clone();
                    c2.push(p);
                    c2
                })
            })
            .collect();
    }
    for choice in choices {
        let mut pmap: HashMap<Point, Point> = HashMap::new();
        let mut k = 0;
        for (g, perm) in groups.values().zip(choice.iter()) {
            for &j in perm.iter() {
                pmap.insert(g[j].clone(), point_name(k));
                k += 1;
            }
        }
        let dummy_orders: Vec<Vec<usize>> = if enumerate_dummies {
            (0..dummies.len()).permutations(dummies.len()).collect()
        } else {
            vec![first_appearance(&m, &pmap, &dummies, sym)]
        };
        for order in dummy_orders {
            let imap: HashMap<String, String> =
                order.iter().enumerate().map(|(slot, &d)| (dummies[d].clone(), dummy_name(slot))).collect();
            for flip in &flips {
                let renamed: Vec<Factor> = m.factors.iter().map(|f| rename(f, &pmap, &imap, flip)).collect();
                let (key, neg) = finish(renamed, sym)?;
                match &mut best {
                    None => best = Some((key, neg, false)),
                    Some((bk, bneg, conflict)) => {
                        if key < *bk {
                            *bk = key;
                            *bneg = neg;
                            *conflict = false;
                        } else if key == *bk && neg != *bneg {
                            *conflict = true;
                        }
                    }
                }
            }
        }
    }
    let (factors, neg, conflict) = best?;
    if conflict {
        return None;
    }
    let mut points = BTreeMap::new();
    let mut k = 0;
    for (label, g) in &groups {
        for _ in g {
            points.insert(point_name(k), Binding::Integrated(label.clone()));
            k += 1;
        }
    }
    for (p, b) in &m.points {
        if *b == Binding::Free {
            points.insert(p.clone(), Binding::Free);
        }
    }
    let coeff = if neg { -&m.coeff } else { m.coeff.clone() };
    Some(Monomial { coeff, lambda: m.lambda, hbar: m.hbar, factors, points })
}

/// Dummy order by first appearance in the sorted, point-renamed factor list.
fn first_appearance(m: &Monomial, pmap: &HashMap<Point, Point>, dummies: &[String], sym: Symmetry) -> Vec<usize> {
    let blank: HashMap<String, String> = dummies.iter().map(|d| (d.clone(), "#".to_string())).collect();
    let mut tagged: Vec<(Factor, usize)> = m
        .factors
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut g = rename(f, pmap, &blank, &HashSet::new());
            let _ = normalize_factor(&mut g, sym);
            (g, i)
        })
        .collect();
    tagged.sort();
    let mut order = Vec::new();
    for (_, i) in tagged {
        for idx in m.factors[i].indices() {
            if let Some(pos) = dummies.iter().position(|d| *d == idx.name) {
                if !order.contains(&pos) {
                    order.push(pos);
                }
            }
        }
    }
    order
}
