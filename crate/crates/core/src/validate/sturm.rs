use crate::error::{invalid, GapError, Result};
use crate::geometry::{Body, OneDimConvexFn};
use crate::linalg::tridiag_eigenvalue;
use crate::measures::Potential;

/// Spherical-harmonic sector of a radial eigenfunction g(r)·Y_ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    L0,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// rᵢ = r_min + (r_max − r_min)(i/n)^γ.
    Power(f64),
}

#[derive(Debug, Clone)]
pub struct SturmProblem {
    pub dim: usize,
    pub pot: Potential,
    pub r_min: f64,
    pub r_max: f64,
    pub sector: Sector,
    pub n: usize,
    pub grading: Grading,
}

/// Eigenvalue on n and 2n cells and the Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

fn mesh(a: f64, b: f64, n: usize, grading: Grading) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let s = match grading {
                Grading::Uniform => t,
                Grading::Power(g) => t.powf(g),
            };
            if i == n {
                b
            } else {
                a + (b - a) * s
            }
        })
        .collect()
}

/// ln ∫_a^b m by Simpson on one interval, given ln m at a, (a+b)/2, b.
fn ln_simpson(a: f64, b: f64, la: f64, lm: f64, lb: f64) -> (f64, f64) {
    let top = la.max(lm).max(lb);
    let s = (la - top).exp() + 4.0 * (lm - top).exp() + (lb - top).exp();
    (top, ((b - a) / 6.0 * s).ln())
}

fn ln_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// k-th eigenvalue of −(m u')'/m + q u on the given nodes, with Neumann
/// ends except an optional Dirichlet condition at the first node.
///
/// Finite volumes in flux form: dual-cell masses Mᵢ (Simpson), edge
/// conductances m(x_{i+½})/hᵢ, symmetrized as −k/√(MᵢMᵢ₊₁). Everything is
/// assembled from ln m so large powers r^{d−1} never overflow.
fn fv_eigenvalue(
    nodes: &[f64],
    ln_m: &dyn Fn(f64) -> f64,
    q: &dyn Fn(f64) -> f64,
    dirichlet_left: bool,
    k: usize,
) -> f64 {
    let n = nodes.len() - 1;
    let first = usize::from(dirichlet_left);
    let ln_node: Vec<f64> = nodes.iter().map(|&x| ln_m(x)).collect();
    let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let ln_mid: Vec<f64> = mids.iter().map(|&x| ln_m(x)).collect();
    let ln_k: Vec<f64> = (0..n).map(|e| ln_mid[e] - (nodes[e + 1] - nodes[e]).ln()).collect();
    let ln_mass: Vec<f64> = (0..=n)
        .map(|i| {
            let mut acc = f64::NEG_INFINITY;
            if i > 0 {
                let (a, b) = (mids[i - 1], nodes[i]);
                let (top, ls) = ln_simpson(a, b, ln_mid[i - 1], ln_m(0.5 * (a + b)), ln_node[i]);
                acc = ln_add(acc, top + ls);
            }
            if i < n {
                let (a, b) = (nodes[i], mids[i]);
                let (top, ls) = ln_simpson(a, b, ln_node[i], ln_m(0.5 * (a + b)), ln_mid[i]);
                acc = ln_add(acc, top + ls);
            }
            acc
        })
        .collect();
    let mut diag = Vec::with_capacity(n + 1 - first);
    let mut off = Vec::with_capacity(n.saturating_sub(first));
    for i in first..=n {
        let mut t = q(nodes[i]);
        if i > 0 {
            t += (ln_k[i - 1] - ln_mass[i]).exp();
        }
        if i < n {
            t += (ln_k[i] - ln_mass[i]).exp();
            off.push(-(ln_k[i] - 0.5 * (ln_mass[i] + ln_mass[i + 1])).exp());
        }
        diag.push(t);
    }
    tridiag_eigenvalue(&diag, &off, k)
}

fn richardson(coarse: f64, fine: f64) -> SturmEstimate {
    SturmEstimate { coarse, fine, extrapolated: (4.0 * fine - coarse) / 3.0 }
}

/// Smallest eigenvalue (ℓ = 1) or smallest nonzero eigenvalue (ℓ = 0) of
/// −g'' − ((d−1)/r − V'(r)) g' + [ℓ = 1] (d−1)/r² g on [r_min, r_max].
pub fn sturm_gap(problem: &SturmProblem) -> Result<SturmEstimate> {
    let SturmProblem { dim, ref pot, r_min, r_max, sector, n, grading } = *problem;
    if !pot.is_radial() {
        return Err(GapError::NotRadial);
    }
    if n < 32 {
        return Err(invalid(format!("Sturm mesh needs n >= 32, got {n}")));
    }
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(invalid(format!("bad radial range [{r_min}, {r_max}]")));
    }
    let d = dim as f64;
    let ln_m = |r: f64| {
        let v = pot.radial_v(r).expect("radial");
        if d == 1.0 {
            -v
        } else {
            (d - 1.0) * r.ln() - v
        }
    };
    let l1 = sector == Sector::L1;
    let q = |r: f64| if l1 { (d - 1.0) / (r * r) } else { 0.0 };
    let dirichlet = l1 && r_min == 0.0;
    let index = if l1 { 0 } else { 1 };
    let solve = |cells: usize| fv_eigenvalue(&mesh(r_min, r_max, cells, grading), &ln_m, &q, dirichlet, index);
    Ok(richardson(solve(n), solve(2 * n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGap {
    pub value: f64,
    /// Sector attaining the minimum.
    pub sector: Sector,
    pub l0: SturmEstimate,
    pub l1: SturmEstimate,
    /// Truncation radius used for the ball complement.
    pub r_max: Option<f64>,
    /// Value with the truncation radius doubled (ball complement only).
    pub doubled: Option<f64>,
}

fn sectors(
    dim: usize,
    pot: &Potential,
    a: f64,
    b: f64,
    n: usize,
    grading: Grading,
) -> Result<(f64, Sector, SturmEstimate, SturmEstimate)> {
    let mk = |sector| SturmProblem { dim, pot: pot.clone(), r_min: a, r_max: b, sector, n, grading };
    let l0 = sturm_gap(&mk(Sector::L0))?;
    let l1 = sturm_gap(&mk(Sector::L1))?;
    Ok(if l1.extrapolated <= l0.extrapolated {
        (l1.extrapolated, Sector::L1, l0, l1)
    } else {
        (l0.extrapolated, Sector::L0, l0, l1)
    })
}

/// Default truncation radius for the ball complement.
pub(crate) fn default_truncation(radius: f64, dim: usize) -> f64 {
    radius + 10.0 + 3.0 * (dim as f64).sqrt()
}

/// Relative change allowed when the truncation radius is doubled.
const TRUNCATION_TOL: f64 = 1e-4;

/// λ₁ of a radial measure on a ball or ball complement as the smaller of
/// the ℓ = 0 and ℓ = 1 sector gaps.
pub fn radial_gap(pot: &Potential, body: &Body, n: usize, r_max_trunc: Option<f64>) -> Result<RadialGap> {
    if !pot.is_radial() {
        return Err(GapError::NotRadial);
    }
    match body {
        Body::Ball { radius, dim } => {
            let (value, sector, l0, l1) = sectors(*dim, pot, 0.0, *radius, n, Grading::Power(1.5))?;
            Ok(RadialGap { value, sector, l0, l1, r_max: None, doubled: None })
        }
        Body::BallComplement { radius, dim } => {
            let r_max = r_max_trunc.unwrap_or_else(|| default_truncation(*radius, *dim));
            if !(r_max > *radius) {
                return Err(invalid(format!("truncation radius {r_max} must exceed R = {radius}")));
            }
            let (value, sector, l0, l1) = sectors(*dim, pot, *radius, r_max, n, Grading::Uniform)?;
            let outer = *radius + 2.0 * (r_max - radius);
            let (doubled, ..) = sectors(*dim, pot, *radius, outer, 2 * n, Grading::Uniform)?;
            if (doubled - value).abs() > TRUNCATION_TOL * value.abs() {
                return Err(GapError::Truncation { coarse: value, fine: doubled, r_max });
            }
            Ok(RadialGap { value, sector, l0, l1, r_max: Some(r_max), doubled: Some(doubled) })
        }
        _ => Err(GapError::NotApplicable(format!(
            "radial reduction needs a ball or ball complement, got {}",
            body.kind()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductGap {
    pub value: f64,
    /// Axis attaining the minimum.
    pub axis: usize,
    pub per_axis: Vec<SturmEstimate>,
}

/// One-dimensional Neumann gap of e^{−v} on [−R, R].
fn interval_gap(v: Option<&OneDimConvexFn>, r: f64, n: usize) -> SturmEstimate {
    let ln_m = |x: f64| v.map_or(0.0, |v| -v.value(x));
    let q = |_: f64| 0.0;
    let solve = |cells: usize| fv_eigenvalue(&mesh(-r, r, cells, Grading::Uniform), &ln_m, &q, false, 1);
    richardson(solve(n), solve(2 * n))
}

/// Gap of a product measure on a box: the minimum of the marginal gaps.
pub fn product_gap(pot: &Potential, body: &Body, n: usize) -> Result<ProductGap> {
    let Body::Box { half_width, dim } = body else {
        return Err(GapError::NotApplicable(format!("product reduction needs a box, got {}", body.kind())));
    };
    if n < 32 {
        return Err(invalid(format!("mesh needs n >= 32, got {n}")));
    }
    let per_axis: Vec<SturmEstimate> = match pot {
        Potential::Uniform => vec![interval_gap(None, *half_width, n); *dim],
        Potential::Product(vs) if vs.len() == *dim => {
            vs.iter().map(|v| interval_gap(Some(v), *half_width, n)).collect()
        }
        Potential::RadialPower { alpha } if *alpha == 2.0 => {
            let g = OneDimConvexFn::new("x^2/2", |x| 0.5 * x * x, |x| x, |_| 1.0);
            vec![interval_gap(Some(&g), *half_width, n); *dim]
        }
        _ => return Err(GapError::NotApplicable("product reduction needs a product potential".into())),
    };
    let (axis, best) =
        per_axis.iter().enumerate().min_by(|a, b| a.1.extrapolated.total_cmp(&b.1.extrapolated)).expect("dim >= 2");
    Ok(ProductGap { value: best.extrapolated, axis, per_axis })
}
