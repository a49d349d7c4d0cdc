use std::path::PathBuf;

use clap::Args;
use gapcert::descriptor::{BodySpec, PotentialSpec, ProblemDescriptor, WeightDescriptor};
use gapcert::{Body, GapError, Potential};

use crate::Failure;

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    /// JSON problem descriptor; flags below override its fields.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// ball, box, lp_ball, ball_complement, or an inline JSON body.
    #[arg(long)]
    pub body: Option<String>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Exponent of an lp_ball.
    #[arg(long)]
    pub p: Option<f64>,
    /// Dimension, or an inclusive sweep such as 2..10.
    #[arg(long)]
    pub dim: Option<String>,
    /// uniform, gaussian, radial_power (needs --alpha), or inline JSON.
    #[arg(long)]
    pub potential: Option<String>,
    /// Exponent of the radial power potential |x|^α/α.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cells of the Sturm–Liouville mesh.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Highest Galerkin polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Truncation radius for the ball complement.
    #[arg(long)]
    pub trunc: Option<f64>,
}

/// A fully resolved problem: descriptor plus the dimensions to run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub desc: ProblemDescriptor,
    pub dims: Vec<usize>,
}

/// One dimension of a problem, built.
pub struct Instance {
    pub dim: usize,
    pub body: Body,
    pub pot: Potential,
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| input(format!("{what}: {e}")))
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>, Failure> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| input(format!("bad dimension {s:?}")));
    let dims: Vec<usize> = match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
            if a > b {
                return Err(input(format!("empty dimension range {s:?}")));
            }
            (a..=b).collect()
        }
        None => vec![num(s)?],
    };
    if dims.iter().any(|&d| d < 2) {
        return Err(input("dimension must be at least 2"));
    }
    Ok(dims)
}

fn body_from_keyword(a: &ProblemArgs, kind: &str) -> Result<BodySpec, Failure> {
    let radius = a.radius.unwrap_or(1.0);
    Ok(match kind {
        "ball" => BodySpec::Ball { radius, dim: None },
        "ball_complement" => BodySpec::BallComplement { radius, dim: None },
        "box" => BodySpec::Box { half_width: a.half_width.or(a.radius).unwrap_or(1.0), dim: None },
        "lp_ball" => BodySpec::LpBall { p: a.p.ok_or_else(|| input("lp_ball needs --p"))?, radius, dim: None },
        "orlicz" => return Err(input("orlicz bodies need an inline JSON body or --spec")),
        other => return Err(input(format!("unknown body {other:?}"))),
    })
}

fn potential_from_keyword(kind: &str, alpha: Option<f64>) -> Result<PotentialSpec, Failure> {
    Ok(match kind {
        "uniform" => PotentialSpec::Uniform,
        "gaussian" => PotentialSpec::Gaussian,
        "radial_power" | "subbotin" => {
            PotentialSpec::RadialPower { alpha: alpha.ok_or_else(|| input("radial_power needs --alpha"))? }
        }
        other => return Err(input(format!("unknown potential {other:?}"))),
    })
}

pub fn parse_weight(s: &str) -> Result<WeightDescriptor, Failure> {
    let s = s.trim();
    if s == "identity" {
        return Ok(WeightDescriptor::Identity);
    }
    if !s.starts_with('{') {
        return Err(input(format!("weight {s:?}: use identity or an inline JSON weight")));
    }
    json("weight", s)
}

impl ProblemArgs {
    pub fn resolve(&self) -> Result<Problem, Failure> {
        let mut desc = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
                Some(ProblemDescriptor::from_json(&text).map_err(|e| input(e.to_string()))?)
            }
            None => None,
        };
        let geometry_flags = self.radius.is_some() || self.half_width.is_some() || self.p.is_some();
        let body = match self.body.as_deref().map(str::trim) {
            Some(b) if b.starts_with('{') => {
                if geometry_flags {
                    return Err(input("--radius/--half-width/--p only apply to a keyword --body"));
                }
                json::<BodySpec>("body", b)?
            }
            Some(b) => body_from_keyword(self, b)?,
            None => {
                if geometry_flags {
                    return Err(input("--radius/--half-width/--p only apply to a keyword --body"));
                }
                match &desc {
                    Some(d) => d.body.clone(),
                    None => return Err(input("no body given (use --body or --spec)")),
                }
            }
        };
        let potential = match self.potential.as_deref().map(str::trim) {
            Some(p) if p.starts_with('{') => json::<PotentialSpec>("potential", p)?,
            Some(p) => potential_from_keyword(p, self.alpha)?,
            None if self.alpha.is_some() => potential_from_keyword("radial_power", self.alpha)?,
            None => desc.as_ref().map(|d| d.potential.clone()).unwrap_or_default(),
        };
        let mut desc = match desc.take() {
            Some(mut d) => {
                d.body = body;
                d.potential = potential;
                d
            }
            None => ProblemDescriptor { body, potential, weight: None, options: Default::default() },
        };
        let o = &mut desc.options;
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(n) = self.grid_n {
            o.grid_n = n;
        }
        if let Some(k) = self.degree {
            o.degree = k;
        }
        if self.trunc.is_some() {
            o.trunc = self.trunc;
        }
        let dims = match &self.dim {
            Some(s) => parse_dims(s)?,
            None => match desc.body.dim() {
                Some(d) => vec![d],
                None => Vec::new(),
            },
        };
        Ok(Problem { desc, dims })
    }
}

impl Problem {
    /// Builds every instance; `fallback_dim` is used when no dimension was given.
    pub fn instances(&self, fallback_dim: Option<usize>) -> Result<Vec<Instance>, Failure> {
        let dims = if self.dims.is_empty() {
            vec![fallback_dim.ok_or_else(|| input("no dimension given (use --dim or \"dim\" in the body)"))?]
        } else {
            self.dims.clone()
        };
        dims.into_iter()
            .map(|d| {
                let body = self.desc.body.build(Some(d)).map_err(input_err)?;
                let pot = self.desc.potential.build(body.dim()).map_err(input_err)?;
                Ok(Instance { dim: body.dim(), body, pot })
            })
            .collect()
    }
}

fn input_err(e: GapError) -> Failure {
    input(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_ranges() {
        assert_eq!(parse_dims("4").unwrap(), vec![4]);
        assert_eq!(parse_dims("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_dims("3..=3").unwrap(), vec![3]);
        assert!(parse_dims("5..2").is_err());
        assert!(parse_dims("1").is_err());
        assert!(parse_dims("x").is_err());
    }

    #[test]
    fn keyword_flags_build_a_descriptor() {
        let a = ProblemArgs {
            body: Some("lp_ball".into()),
            p: Some(3.0),
            dim: Some("2".into()),
            alpha: Some(1.5),
            ..Default::default()
        };
        let p = a.resolve().unwrap();
        assert_eq!(p.dims, vec![2]);
        assert_eq!(p.desc.potential, PotentialSpec::RadialPower { alpha: 1.5 });
        let inst = p.instances(None).unwrap();
        assert_eq!(inst[0].body.kind(), "lp_ball");
    }

    #[test]
    fn inline_json_and_errors() {
        let a = ProblemArgs { body: Some(r#"{"kind":"box","half_width":2,"dim":3}"#.into()), ..Default::default() };
        assert_eq!(a.resolve().unwrap().dims, vec![3]);
        let bad = ProblemArgs { body: Some(r#"{"kind":"box","half_width":2,"oops":1}"#.into()), ..Default::default() };
        assert!(matches!(bad.resolve(), Err(Failure::Input(_))));
        assert!(ProblemArgs::default().resolve().is_err());
        let no_p = ProblemArgs { body: Some("lp_ball".into()), ..Default::default() };
        assert!(no_p.resolve().is_err());
        assert!(parse_weight("cosine").is_err());
        assert_eq!(parse_weight("identity").unwrap(), WeightDescriptor::Identity);
    }
}
