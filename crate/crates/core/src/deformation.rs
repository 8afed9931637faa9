//! Deformed products ⋆_K, Wick-ordering maps α_{cK} and time-ordered products.

use crate::calculus::expand_applied;
use crate::coeff::{rat, CoeffElem};
use crate::expr::{Factor, KernelKind, Monomial, Ops, Point, SymExpr, Symmetry};
use crate::functional::Functional;
use num::{BigInt, BigRational, One};

fn falling(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

fn factorial(n: u32) -> BigInt {
    falling(n, n)
}

struct Slot {
    pos: usize,
    at: Point,
    ops: Ops,
    exp: u32,
}

fn field_slots(factors: &[Factor]) -> Vec<Slot> {
    factors
        .iter()
        .enumerate()
        .filter_map(|(pos, f)| match f {
            Factor::Field { at, ops, exp } => Some(Slot { pos, at: at.clone(), ops: ops.clone(), exp: *exp }),
            _ => None,
        })
        .collect()
}

/// All matrices with row sums ≤ `rows[i]` and column sums ≤ `cols[j]`.
fn contraction_matrices(rows: &[u32], cols: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let (nr, nc) = (rows.len(), cols.len());
    let mut out = Vec::new();
    let mut m = vec![vec![0u32; nc]; nr];
    let mut col_left = cols.to_vec();
    fn go(
        cell: usize,
        nr: usize,
        nc: usize,
        row_left: &mut Vec<u32>,
        col_left: &mut Vec<u32>,
        m: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if cell == nr * nc {
            out.push(m.clone());
            return;
        }
        let (i, j) = (cell / nc, cell % nc);
        let max = row_left[i].min(col_left[j]);
        for c in 0..=max {
            m[i][j] = c;
            row_left[i] -= c;
            col_left[j] -= c;
            go(cell + 1, nr, nc, row_left, col_left, m, out);
            row_left[i] += c;
            col_left[j] += c;
        }
        m[i][j] = 0;
    }
    let mut row_left = rows.to_vec();
    go(0, nr, nc, &mut row_left, &mut col_left, &mut m, &mut out);
    out
}

fn star_monomials(a: &Monomial, b: &Monomial, kind: KernelKind) -> Vec<Monomial> {
    let b = a.rename_apart(b);
    if kind == KernelKind::Zero {
        return vec![a.join(&b)];
    }
    let mut out = Vec::new();
    for (ca, fa) in expand_applied(&a.factors, None) {
        for (cb, fb) in expand_applied(&b.factors, None) {
            let left = field_slots(&fa);
            let right = field_slots(&fb);
            let rows: Vec<u32> = left.iter().map(|s| s.exp).collect();
            let cols: Vec<u32> = right.iter().map(|s| s.exp).collect();
            for c in contraction_matrices(&rows, &cols) {
                let mut num = BigInt::one();
                let mut den = BigInt::one();
                let mut k = 0u32;
                let mut fl = fa.clone();
                let mut fr = fb.clone();
                let mut kernels = Vec::new();
                for (i, ls) in left.iter().enumerate() {
                    let r: u32 = c[i].iter().sum();
                    num *= falling(ls.exp, r);
                    fl[ls.pos].set_exp(ls.exp - r);
                }
                for (j, rs) in right.iter().enumerate() {
                    let s: u32 = c.iter().map(|row| row[j]).sum();
                    num *= falling(rs.exp, s);
                    fr[rs.pos].set_exp(rs.exp - s);
                }
                for (i, ls) in left.iter().enumerate() {
                    for (j, rs) in right.iter().enumerate() {
                        let cij = c[i][j];
                        if cij > 0 {
                            k += cij;
                            den *= factorial(cij);
                            kernels.push(Factor::Kernel {
                                kind,
                                at: [ls.at.clone(), rs.at.clone()],
                                ops: [ls.ops.clone(), rs.ops.clone()],
                                exp: cij,
                            });
                        }
                    }
                }
                let mut m = a.join(&b);
                fl.retain(|f| f.exp() > 0);
                fr.retain(|f| f.exp() > 0);
                m.factors = fl;
                m.factors.extend(fr);
                m.factors.extend(kernels);
                m.hbar += k as i32;
                let w = CoeffElem::rational(BigRational::new(num, den));
                m.coeff = &(&m.coeff * &(&ca * &cb)) * &w;
                m.prune_points();
                out.push(m);
            }
        }
    }
    out
}

/// F ⋆_K G = Σ_k ℏᵏ/k! ⟨K^{⊗k}, F^{(k)} ⊗ G^{(k)}⟩, left point first in every kernel.
pub fn star(f: &Functional, g: &Functional, kind: KernelKind) -> Functional {
    star_expr(&f.body, &g.body, kind).into()
}

pub fn star_expr(f: &SymExpr, g: &SymExpr, kind: KernelKind) -> SymExpr {
    let t = match (f.truncation, g.truncation) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    };
    let mut ms = Vec::new();
    for a in f.monomials() {
        for b in g.monomials() {
            if t.is_some_and(|t| a.lambda + b.lambda > t) {
                continue;
            }
            ms.extend(star_monomials(a, b, kind));
        }
    }
    SymExpr::from_monomials(t, ms)
}

/// One application of D_K = ⟨K, δ²/δφδφ⟩ on a single monomial.
fn contract_once(m: &Monomial, kind: KernelKind) -> Vec<Monomial> {
    let mut out = Vec::new();
    for (c0, fs) in expand_applied(&m.factors, None) {
        let slots = field_slots(&fs);
        for (i, si) in slots.iter().enumerate() {
            for (j, sj) in slots.iter().enumerate() {
                let weight: u32 = if i == j {
                    if si.exp < 2 {
                        continue;
                    }
                    si.exp * (si.exp - 1)
                } else {
                    si.exp * sj.exp
                };
                let mut n = m.clone();
                let mut f = fs.clone();
                if i == j {
                    f[si.pos].set_exp(si.exp - 2);
                } else {
                    f[si.pos].set_exp(si.exp - 1);
                    f[sj.pos].set_exp(sj.exp - 1);
                }
                f.retain(|x| x.exp() > 0);
                f.push(Factor::Kernel {
                    kind,
                    at: [si.at.clone(), sj.at.clone()],
                    ops: [si.ops.clone(), sj.ops.clone()],
                    exp: 1,
                });
                n.factors = f;
                n.coeff = &(&m.coeff * &c0) * &CoeffElem::int(weight as i64);
                out.push(n);
            }
        }
    }
    out
}

/// α_{cK} = exp((c/2)⟨K, δ²/δφδφ⟩). `wick_order(F, -1)` is α_{−H}.
pub fn wick_map(f: &Functional, kind: KernelKind, c: &CoeffElem) -> Functional {
    let half = c.scale_rat(&rat(1, 2));
    let mut total: Vec<Monomial> = f.body.monomials().to_vec();
    let mut current = f.body.clone();
    let mut k = 1i64;
    while !current.is_zero() {
        let mut next = Vec::new();
        for m in current.monomials() {
            for mut n in contract_once(m, kind) {
                n.coeff = &(&n.coeff * &half) * &CoeffElem::frac(1, k);
                next.push(n);
            }
        }
        current = SymExpr::from_monomials(f.body.truncation, next);
        total.extend(current.monomials().iter().cloned());
        k += 1;
    }
    Functional::new(SymExpr::from_monomials(f.body.truncation, total))
}

pub fn wick_order(f: &Functional, sign: i32) -> Functional {
    wick_map(f, KernelKind::H, &CoeffElem::int(sign as i64))
}

/// 𝒯(F₁,…,F_m): iterated ⋆_{H_F}, canonicalized with H_F symmetric.
pub fn time_ordered(fs: &[Functional]) -> Functional {
    let mut acc = Functional::identity();
    for f in fs {
        acc = star(&acc, f, KernelKind::HF);
    }
    Functional::new(acc.body.canonicalize_with(Symmetry::Kernels))
}
