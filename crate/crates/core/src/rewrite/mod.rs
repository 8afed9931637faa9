//! Staged rewrite engine: covariant-derivative calculus, equations of motion,
//! δ-collapse, kernel relations, traces and background simplifications.
//!
//! Stages run in a fixed order, each until no rule fires; the whole sequence
//! repeats until a full pass changes nothing. Every pass is counted against
//! `RuleSet::max_iterations`.

mod rules;

use crate::calculus::apply_ops_monomial;
use crate::coeff::{CoeffElem, GaussRat};
use crate::error::{EngineError, Result};
use crate::expr::{DOp, Factor, Index, Monomial, Point, SymExpr, Symmetry, Tensor};
use crate::perturbation::InteractionSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Derivative,
    Eom,
    Delta,
    Kernel,
    Trace,
    Background,
}

pub const STAGES: [Stage; 6] =
    [Stage::Derivative, Stage::Eom, Stage::Delta, Stage::Kernel, Stage::Trace, Stage::Background];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[default]
    Generic,
    Minkowski,
    MaximallySymmetric,
}

/// Normalization of P₀H_F: `Delta` gives δ, `IDelta` gives iδ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Delta,
    IDelta,
}

impl Convention {
    /// c_F in P₀H_F = c_F δ.
    pub fn feynman_factor(&self) -> CoeffElem {
        match self {
            Convention::Delta => CoeffElem::one(),
            Convention::IDelta => CoeffElem::constant(GaussRat::i()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Background {
    pub regime: Regime,
    pub convention: Convention,
}

impl Background {
    pub fn generic() -> Self {
        Background::default()
    }
    pub fn minkowski() -> Self {
        Background { regime: Regime::Minkowski, ..Default::default() }
    }
    pub fn with_convention(mut self, c: Convention) -> Self {
        self.convention = c;
        self
    }
}

/// Named rules switched on or off, plus engine limits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleSet {
    pub disabled: BTreeSet<String>,
    /// Test-function labels treated as constant near free points (interaction cutoffs).
    pub cutoff_labels: BTreeSet<String>,
    /// Activates the kernel-relation stage (splits H_F, H_AF, H and Δ into H_s, Δ_A, Δ_R).
    pub kernel_relations: bool,
    /// Canonicalize with H_F, H_AF, W, H_s symmetric and Δ antisymmetric.
    pub kernel_symmetry: bool,
    pub max_iterations: usize,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            disabled: BTreeSet::new(),
            cutoff_labels: ["h".to_string()].into(),
            kernel_relations: false,
            kernel_symmetry: true,
            max_iterations: 10_000,
        }
    }
}

impl RuleSet {
    pub fn registered() -> Vec<&'static str> {
        rules::RULES.iter().map(|r| r.name).collect()
    }

    pub fn with_kernel_relations(mut self) -> Self {
        self.kernel_relations = true;
        self
    }

    pub fn without(mut self, name: &str) -> Self {
        self.disabled.insert(name.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let known = RuleSet::registered();
        match self.disabled.iter().find(|d| !known.contains(&d.as_str())) {
            Some(d) => Err(EngineError::UnknownRule(d.clone())),
            None => Ok(()),
        }
    }

    fn symmetry(&self) -> Symmetry {
        if self.kernel_symmetry {
            Symmetry::Kernels
        } else {
            Symmetry::None
        }
    }
}

/// Right-hand side used for P₀φ inside `reduce_modulo_eom`.
#[derive(Clone, Debug)]
pub(crate) enum FieldEom {
    Free,
    Interacting { coeff: CoeffElem, power: u32 },
}

pub(crate) struct Ctx<'a> {
    pub bg: &'a Background,
    pub rules: &'a RuleSet,
    pub field_eom: Option<FieldEom>,
}

fn run(e: &SymExpr, ctx: &Ctx) -> Result<SymExpr> {
    ctx.rules.validate()?;
    let sym = ctx.rules.symmetry();
    let active: Vec<_> = rules::RULES.iter().filter(|r| !ctx.rules.disabled.contains(r.name)).collect();
    let mut cur = e.canonicalize_with(sym);
    let mut passes = 0usize;
    loop {
        let mut changed_any = false;
        for stage in STAGES {
            if stage == Stage::Kernel && !ctx.rules.kernel_relations {
                continue;
            }
            let stage_rules: Vec<_> = active.iter().filter(|r| r.stage == stage).collect();
            loop {
                passes += 1;
                if passes > ctx.rules.max_iterations {
                    return Err(EngineError::IterationCap(ctx.rules.max_iterations));
                }
                let mut changed = false;
                let mut next = Vec::with_capacity(cur.len());
                for m in cur.monomials() {
                    match stage_rules.iter().find_map(|r| (r.apply)(m, ctx)) {
                        Some(out) => {
                            changed = true;
                            next.extend(out);
                        }
                        None => next.push(m.clone()),
                    }
                }
                if !changed {
                    break;
                }
                changed_any = true;
                cur = SymExpr::build(cur.truncation, next, sym);
            }
        }
        if !changed_any {
            return Ok(cur);
        }
    }
}

/// Normal form of `e` under the active rules.
pub fn apply_rules(e: &SymExpr, rules: &RuleSet, bg: &Background) -> Result<SymExpr> {
    run(e, &Ctx { bg, rules, field_eom: None })
}

/// Like `apply_rules`, with P₀φ replaced by the field equation of `v`
/// (or by zero when `v` is `None`).
pub fn reduce_modulo_eom(
    e: &SymExpr,
    v: Option<&InteractionSpec>,
    rules: &RuleSet,
    bg: &Background,
) -> Result<SymExpr> {
    let field_eom = Some(match v {
        None => FieldEom::Free,
        Some(v) => FieldEom::Interacting { coeff: v.eom_coefficient(), power: v.n - 1 },
    });
    run(e, &Ctx { bg, rules, field_eom })
}

fn index_in(m: &Monomial, name: &str) -> Vec<Index> {
    m.factors.iter().flat_map(|f| f.indices().into_iter().cloned()).filter(|i| i.name == name).collect()
}

/// ∇^μ applied at `at` to every monomial, where μ is the free index `index`.
pub fn apply_divergence(e: &SymExpr, index: &str, at: &Point) -> Result<SymExpr> {
    let mut out = Vec::new();
    for m in e.monomials() {
        let occ = index_in(m, index);
        let op = match occ.as_slice() {
            [i] => DOp::Cov(i.raised()),
            [] => return Err(EngineError::IndexMismatch(format!("index {index} absent from a monomial"))),
            _ => return Err(EngineError::IndexContracted(index.to_string())),
        };
        out.extend(apply_ops_monomial(m, &[op], at));
    }
    Ok(SymExpr::from_monomials(e.truncation, out))
}

/// g^{ab}(at) e_{ab}: contracts the two free indices of `e`, then applies the rules.
pub fn trace_contract(e: &SymExpr, at: &Point, rules: &RuleSet, bg: &Background) -> Result<SymExpr> {
    let mut free: Option<Vec<Index>> = None;
    for m in e.monomials() {
        let mut f = m.free_indices();
        f.sort();
        if f.len() != 2 {
            return Err(EngineError::IndexMismatch(format!("expected two free indices, found {}", f.len())));
        }
        match &free {
            None => free = Some(f),
            Some(g) if *g == f => {}
            Some(_) => return Err(EngineError::IndexMismatch("monomials disagree on free indices".into())),
        }
    }
    let Some(free) = free else { return Ok(SymExpr::zero().with_truncation(e.truncation)) };
    let g = Factor::geom(
        if free[0].up { Tensor::Metric } else { Tensor::InverseMetric },
        at,
        vec![free[0].raised(), free[1].raised()],
    );
    let ms: Vec<Monomial> = e.monomials().iter().map(|m| m.clone().with_factor(g.clone())).collect();
    apply_rules(&SymExpr::from_monomials(e.truncation, ms), rules, bg)
}
