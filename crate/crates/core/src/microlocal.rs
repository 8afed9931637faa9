//! Scaling degrees of model diagonal singularities, extension classification,
//! and the coincidence limit v₁(z,z).
//!
//! Scaling degrees are read off closed-form models rather than numeric
//! λ-limits: σ^{−p}·log^q σ scales with degree 2p (σ is quadratic in the
//! transverse coordinates, logs add nothing) and δ^{(j)} on a submanifold of
//! codimension c scales with degree c + j.

use crate::coeff::{rat, CoeffElem, GaussRat};
use crate::error::{EngineError, Result};
use crate::rewrite::Regime;
use num::{BigInt, BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum Model {
    /// σ^{−p} log^q σ near the singular submanifold.
    Sigma {
        #[serde(with = "crate::coeff::rat_string")]
        p: BigRational,
        log_power: u32,
    },
    /// j-th transverse derivative of the δ supported on the submanifold.
    Delta { order: u32 },
    /// Singularity faster than any power (e.g. e^{1/σ}); no finite scaling degree.
    Essential,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistDescriptor {
    pub model: Model,
    /// Ambient dimension.
    pub dim: u32,
    /// Codimension of the singular submanifold.
    pub codim: u32,
}

impl DistDescriptor {
    pub fn new(model: Model, dim: u32, codim: u32) -> Result<Self> {
        if dim < 2 {
            return Err(EngineError::Structural(format!("dimension {dim} < 2")));
        }
        if codim < 1 || codim > dim {
            return Err(EngineError::Structural(format!("codimension {codim} outside 1..={dim}")));
        }
        if let Model::Sigma { p, .. } = &model {
            if p.is_negative() {
                return Err(EngineError::Structural(format!("σ-power {p} is negative")));
            }
        }
        Ok(DistDescriptor { model, dim, codim })
    }

    /// δ_y^{(j)} at a point of ℝ^d.
    pub fn delta_at_point(order: u32, dim: u32) -> Result<Self> {
        DistDescriptor::new(Model::Delta { order }, dim, dim)
    }

    /// A smooth function.
    pub fn constant(dim: u32) -> Result<Self> {
        DistDescriptor::new(Model::Sigma { p: BigRational::zero(), log_power: 0 }, dim, dim)
    }

    /// Leading singularity of H_F^k on the diagonal of M×M, dim M = d.
    /// For d > 2 this is σ^{k(2−d)/2}; for d = 2 only log^k σ survives.
    pub fn feynman_power(k: u32, dim: u32) -> Result<Self> {
        // the ambient check below sees 2d, so d itself is checked here
        if dim < 2 {
            return Err(EngineError::Structural(format!("dimension {dim} < 2")));
        }
        let p = BigRational::new(BigInt::from(k) * BigInt::from(dim - 2), BigInt::from(2));
        let log_power = if dim == 2 { k } else { 0 };
        DistDescriptor::new(Model::Sigma { p, log_power }, 2 * dim, dim)
    }
}

pub fn scaling_degree(desc: &DistDescriptor) -> Option<BigRational> {
    match &desc.model {
        Model::Sigma { p, .. } => Some(p * BigRational::from_integer(2.into())),
        Model::Delta { order } => Some(BigRational::from_integer((desc.codim + order).into())),
        Model::Essential => None,
    }
}

/// ρ = ⌊sd − codim⌋. With the opposite sign every Feynman power in d = 4
/// would get ρ = 4 − 2k, contradicting the renormalization freedom found at k = 2.
pub fn degree_of_divergence(desc: &DistDescriptor) -> Option<BigRational> {
    scaling_degree(desc).map(|sd| (sd - BigRational::from_integer(desc.codim.into())).floor())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Extension {
    /// sd < codim: exactly one extension preserving the scaling degree.
    Unique,
    /// Extensions differ by Σ_{j ≤ ρ} c_j δ^{(j)}_N.
    Ambiguous {
        rho: i64,
        family_size: i64,
    },
    NoFiniteSd,
}

pub fn classify_extension(desc: &DistDescriptor) -> Extension {
    let Some(sd) = scaling_degree(desc) else { return Extension::NoFiniteSd };
    if sd < BigRational::from_integer(desc.codim.into()) {
        return Extension::Unique;
    }
    let rho: i64 = degree_of_divergence(desc).expect("finite sd").to_integer().try_into().expect("ρ fits i64");
    Extension::Ambiguous { family_size: rho + 1, rho }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::Unique => write!(f, "unique"),
            Extension::Ambiguous { rho, .. } => write!(f, "ambiguous (delta^(j), j = 0..{rho})"),
            Extension::NoFiniteSd => write!(f, "no finite scaling degree"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: u32,
    #[serde(with = "crate::coeff::rat_string")]
    pub sd: BigRational,
    #[serde(with = "crate::coeff::rat_string")]
    pub rho: BigRational,
    pub extension: Extension,
}

/// (k, sd, ρ, classification) for H_F^k in dimension d.
pub fn feynman_table(dim: u32, ks: impl IntoIterator<Item = u32>) -> Result<Vec<ScalingRow>> {
    ks.into_iter()
        .map(|k| {
            let desc = DistDescriptor::feynman_power(k, dim)?;
            Ok(ScalingRow {
                k,
                sd: scaling_degree(&desc).expect("σ-model"),
                rho: degree_of_divergence(&desc).expect("σ-model"),
                extension: classify_extension(&desc),
            })
        })
        .collect()
}

/// Local curvature scalars entering v₁(z,z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureInvariant {
    /// C_{abcd}C^{abcd}
    WeylSquared,
    /// R_{ab}R^{ab}
    RicciSquared,
    /// R²
    ScalarSquared,
    /// □R
    BoxScalar,
}

impl CurvatureInvariant {
    pub fn latex(&self) -> &'static str {
        match self {
            CurvatureInvariant::WeylSquared => "C_{abcd}C^{abcd}",
            CurvatureInvariant::RicciSquared => "R_{ab}R^{ab}",
            CurvatureInvariant::ScalarSquared => "R^2",
            CurvatureInvariant::BoxScalar => "\\Box R",
        }
    }
}

/// v₁(z,z) = mass + Σ c_I I for conformal coupling ξ = 1/6.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct V1Formula {
    pub mass: CoeffElem,
    pub curvature: BTreeMap<CurvatureInvariant, CoeffElem>,
}

impl V1Formula {
    pub fn generic() -> Self {
        use CurvatureInvariant::*;
        let r = CoeffElem::frac;
        V1Formula {
            mass: CoeffElem::sym_pow("m2", 2).scale(&GaussRat::real(rat(1, 8))),
            curvature: [
                (WeylSquared, r(1, 720)),
                (RicciSquared, r(1, 720)),
                (ScalarSquared, r(-1, 2160)),
                (BoxScalar, r(1, 720)),
            ]
            .into(),
        }
    }

    /// Drop the invariants that vanish on the given background. On a maximally
    /// symmetric space C = 0, ∇R = 0 and R_{ab}R^{ab} = R²/4.
    pub fn on(&self, regime: Regime) -> Self {
        use CurvatureInvariant::*;
        let mut out = V1Formula { mass: self.mass.clone(), curvature: BTreeMap::new() };
        match regime {
            Regime::Generic => out.curvature = self.curvature.clone(),
            Regime::Minkowski => {}
            Regime::MaximallySymmetric => {
                let mut r2 = self.curvature.get(&ScalarSquared).cloned().unwrap_or_else(CoeffElem::zero);
                if let Some(c) = self.curvature.get(&RicciSquared) {
                    r2 = &r2 + &c.scale_rat(&rat(1, 4));
                }
                if !r2.is_zero() {
                    out.curvature.insert(ScalarSquared, r2);
                }
            }
        }
        out
    }

    /// The value as a coefficient, available once no curvature terms remain.
    pub fn as_coeff(&self) -> Option<CoeffElem> {
        self.curvature.values().all(|c| c.is_zero()).then(|| self.mass.clone())
    }

    pub fn to_latex(&self) -> String {
        let mut s = "\\frac{m^4}{8}".to_string();
        for (inv, c) in &self.curvature {
            match c.as_rational() {
                Some(c) => {
                    let sign = if c.is_negative() { "-" } else { "+" };
                    let a = c.abs();
                    s.push_str(&format!(" {sign} \\frac{{{}}}{{{}}}{}", a.numer(), a.denom(), inv.latex()));
                }
                None => s.push_str(&format!(" + \\left({}\\right){}", c, inv.latex())),
            }
        }
        s
    }
}

pub fn v1_eval(regime: Regime) -> V1Formula {
    V1Formula::generic().on(regime)
}
