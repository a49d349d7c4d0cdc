//! JSON descriptors for bodies, potentials, weights and whole problems.
//! Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use crate::bounds::{GridSpec, WeightFn, WeightSpec};
use crate::error::{GapError, Result};
use crate::geometry::{Body, OneDimConvexFn};
use crate::measures::Potential;

fn one() -> f64 {
    1.0
}

/// One-dimensional convex function: coef·|x/scale|^p, or the two-sided power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Power {
        p: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        coef: f64,
    },
    AsymPower {
        p_plus: f64,
        p_minus: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

impl FnSpec {
    pub fn build(&self) -> Result<OneDimConvexFn> {
        match *self {
            FnSpec::Power { p, scale, coef } => OneDimConvexFn::power(p, scale, coef),
            FnSpec::AsymPower { p_plus, p_minus, scale } => OneDimConvexFn::asym_power(p_plus, p_minus, scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        radius: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
    Box {
        half_width: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
    LpBall {
        p: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
    /// A single potential is repeated along every axis when `dim` is given.
    Orlicz {
        potentials: Vec<FnSpec>,
        #[serde(default)]
        box_bound: Option<f64>,
        #[serde(default)]
        dim: Option<usize>,
    },
    BallComplement {
        radius: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
}

fn need_dim(own: Option<usize>, over: Option<usize>) -> Result<usize> {
    over.or(own).ok_or_else(|| GapError::Descriptor("body needs a dimension (\"dim\" or --dim)".into()))
}

impl BodySpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            BodySpec::Ball { dim, .. }
            | BodySpec::Box { dim, .. }
            | BodySpec::LpBall { dim, .. }
            | BodySpec::BallComplement { dim, .. } => *dim,
            BodySpec::Orlicz { potentials, dim, .. } => {
                dim.or(if potentials.len() > 1 { Some(potentials.len()) } else { None })
            }
        }
    }

    /// Builds the body, with `dim` overriding the descriptor's dimension.
    pub fn build(&self, dim: Option<usize>) -> Result<Body> {
        match self {
            BodySpec::Ball { radius, dim: own } => Body::ball(*radius, need_dim(*own, dim)?),
            BodySpec::Box { half_width, dim: own } => Body::cube(*half_width, need_dim(*own, dim)?),
            BodySpec::LpBall { p, radius, dim: own } => Body::lp_ball(*p, *radius, need_dim(*own, dim)?),
            BodySpec::BallComplement { radius, dim: own } => Body::ball_complement(*radius, need_dim(*own, dim)?),
            BodySpec::Orlicz { potentials, box_bound, dim: own } => {
                let fns: Vec<OneDimConvexFn> = potentials.iter().map(FnSpec::build).collect::<Result<_>>()?;
                let d = dim.or(*own).unwrap_or(fns.len());
                let fns = match fns.len() {
                    1 => vec![fns[0].clone(); d],
                    n if n == d => fns,
                    n => {
                        return Err(GapError::Descriptor(format!("{n} Orlicz potentials for dimension {d}")));
                    }
                };
                Body::orlicz(fns, *box_bound)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Uniform,
    Gaussian,
    RadialPower {
        alpha: f64,
    },
    /// V(x) = Σ vᵢ(xᵢ); a single factor is repeated along every axis.
    Product {
        factors: Vec<FnSpec>,
    },
}

impl PotentialSpec {
    pub fn build(&self, dim: usize) -> Result<Potential> {
        match self {
            PotentialSpec::Uniform => Ok(Potential::Uniform),
            PotentialSpec::Gaussian => Ok(Potential::gaussian()),
            PotentialSpec::RadialPower { alpha } => Potential::radial_power(*alpha),
            PotentialSpec::Product { factors } => {
                let fns: Vec<OneDimConvexFn> = factors.iter().map(FnSpec::build).collect::<Result<_>>()?;
                match fns.len() {
                    1 => Ok(Potential::Product(vec![fns[0].clone(); dim])),
                    n if n == dim => Ok(Potential::Product(fns)),
                    n => Err(GapError::Descriptor(format!("{n} product factors for dimension {dim}"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightDescriptor {
    Identity,
    /// w(r) = Σ cₖ r^k.
    RadialPoly {
        coeffs: Vec<f64>,
    },
    /// w(r) = exp(ε r^α/α).
    RadialExpPower {
        eps: f64,
        alpha: f64,
    },
    /// wᵢ(xᵢ) = cos(βᵢ xᵢ).
    PerCoordinateCos {
        beta: OneOrMany,
    },
    /// w(r) = c + r^{−2}.
    RadialInverseSquare {
        c: f64,
    },
}

impl WeightDescriptor {
    pub fn build(&self) -> Result<WeightSpec> {
        Ok(match self {
            WeightDescriptor::Identity => WeightSpec::Identity,
            WeightDescriptor::RadialPoly { coeffs } => WeightSpec::RadialScalar(WeightFn::radial_poly(coeffs.clone())?),
            WeightDescriptor::RadialExpPower { eps, alpha } => {
                WeightSpec::RadialScalar(WeightFn::radial_exp_power(*eps, *alpha)?)
            }
            WeightDescriptor::PerCoordinateCos { beta } => {
                let betas = match beta {
                    OneOrMany::One(b) => vec![*b],
                    OneOrMany::Many(v) => v.clone(),
                };
                WeightSpec::PerCoordinate(betas.into_iter().map(WeightFn::cos).collect::<Result<_>>()?)
            }
            WeightDescriptor::RadialInverseSquare { c } => {
                WeightSpec::RadialScalar(WeightFn::radial_inverse_square(*c)?)
            }
        })
    }
}

/// Numerical options shared by all commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub seed: u64,
    /// Sturm–Liouville cells.
    pub grid_n: usize,
    /// Highest Galerkin degree.
    pub degree: usize,
    /// Truncation radius for the ball complement.
    #[serde(serialize_with = "crate::report::serialize_opt_f64")]
    pub trunc: Option<f64>,
    pub radial_points: usize,
    pub boundary_samples: usize,
    pub volume_samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            seed: 0,
            grid_n: 4000,
            degree: 6,
            trunc: None,
            radial_points: g.radial_points,
            boundary_samples: g.boundary_samples,
            volume_samples: g.volume_samples,
        }
    }
}

impl Options {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            radial_points: self.radial_points,
            boundary_samples: self.boundary_samples,
            volume_samples: self.volume_samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDescriptor {
    pub body: BodySpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub weight: Option<WeightDescriptor>,
    #[serde(default)]
    pub options: Options,
}

impl ProblemDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GapError::Descriptor(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bodies() {
        let b: BodySpec = serde_json::from_str(r#"{"kind":"ball","radius":2,"dim":3}"#).unwrap();
        assert!(matches!(b.build(None).unwrap(), Body::Ball { radius, dim: 3 } if radius == 2.0));
        let b: BodySpec = serde_json::from_str(r#"{"kind":"lp_ball","p":4}"#).unwrap();
        assert_eq!(b.build(Some(5)).unwrap().dim(), 5);
        assert!(b.build(None).is_err());
        let o: BodySpec = serde_json::from_str(
            r#"{"kind":"orlicz","potentials":[{"form":"asym_power","p_plus":2,"p_minus":3}],"box_bound":1,"dim":3}"#,
        )
        .unwrap();
        assert_eq!(o.build(None).unwrap().dim(), 3);
    }

    #[test]
    fn rejects_unknown_keys_and_kinds() {
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"ball","radius":1,"colour":2}"#).is_err());
        assert!(serde_json::from_str::<BodySpec>(r#"{"kind":"torus","radius":1}"#).is_err());
        assert!(ProblemDescriptor::from_json(r#"{"body":{"kind":"ball","radius":1},"extra":1}"#).is_err());
        assert!(ProblemDescriptor::from_json(r#"{"body":{"kind":"ball","radius":1},"options":{"sed":1}}"#).is_err());
        assert!(ProblemDescriptor::from_json("{not json").is_err());
    }

    #[test]
    fn full_problem_round_trip() {
        let text = r#"{"body":{"kind":"box","half_width":1,"dim":2},
            "potential":{"kind":"product","factors":[{"form":"power","p":2,"coef":0.5}]},
            "weight":{"kind":"per_coordinate_cos","beta":[1.0,1.2]},
            "options":{"seed":7,"grid_n":500}}"#;
        let p = ProblemDescriptor::from_json(text).unwrap();
        assert_eq!(p.options.seed, 7);
        assert_eq!(p.options.degree, Options::default().degree);
        let pot = p.potential.build(2).unwrap();
        assert!(matches!(pot, Potential::Product(ref v) if v.len() == 2));
        assert!(matches!(p.weight.unwrap().build().unwrap(), WeightSpec::PerCoordinate(ref w) if w.len() == 2));
        let again: ProblemDescriptor =
            serde_json::from_str(&serde_json::to_string(&ProblemDescriptor::from_json(text).unwrap()).unwrap())
                .unwrap();
        assert_eq!(again, ProblemDescriptor::from_json(text).unwrap());
    }

    #[test]
    fn potential_constraints_are_enforced() {
        let s: PotentialSpec = serde_json::from_str(r#"{"kind":"radial_power","alpha":1.0}"#).unwrap();
        assert!(s.build(3).is_err());
        let s: PotentialSpec = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert!(s.build(3).unwrap().is_gaussian());
    }
}
