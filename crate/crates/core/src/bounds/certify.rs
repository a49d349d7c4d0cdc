//! Numerical certificate for diagonal weights W: the smallest eigenvalue of
//! ∇²V − (𝓛W)W⁻¹ over the body, plus the boundary check on the weighted
//! second fundamental form. Both are verified on grids, not by intervals.

use std::fmt;
use std::sync::Arc;

use super::GridSpec;
use crate::error::{invalid, GapError, Result};
use crate::geometry::{Body, OneDimConvexFn, ScalarFn};
use crate::measures::Potential;
use crate::report::{BoundKind, BoundReport, Method};

/// A positive scalar weight with its first two derivatives.
#[derive(Clone)]
pub struct WeightFn {
    label: String,
    value: ScalarFn,
    first: ScalarFn,
    second: ScalarFn,
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFn").field("label", &self.label).finish()
    }
}

impl WeightFn {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), value: Arc::new(value), first: Arc::new(first), second: Arc::new(second) }
    }

    /// w(r) = Σ cₖ r^k.
    pub fn radial_poly(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("polynomial weight needs finite coefficients"));
        }
        let label = format!("poly{coeffs:?}");
        let (c0, c1, c2) = (coeffs.clone(), coeffs.clone(), coeffs);
        Ok(Self::new(
            label,
            move |r| c0.iter().rev().fold(0.0, |acc, c| acc * r + c),
            move |r| c1.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * r + k as f64 * c),
            move |r| c2.iter().enumerate().skip(2).rev().fold(0.0, |acc, (k, c)| acc * r + (k * (k - 1)) as f64 * c),
        ))
    }

    /// w(r) = exp(ε r^α/α).
    pub fn radial_exp_power(eps: f64, alpha: f64) -> Result<Self> {
        if !eps.is_finite() || !(alpha > 0.0) {
            return Err(invalid("exp-power weight needs finite eps and alpha > 0"));
        }
        let w = move |r: f64| (eps * r.powf(alpha) / alpha).exp();
        Ok(Self::new(
            format!("exp({eps}*r^{alpha}/{alpha})"),
            w,
            move |r| eps * r.powf(alpha - 1.0) * w(r),
            move |r| (eps * (alpha - 1.0) * r.powf(alpha - 2.0) + eps * eps * r.powf(2.0 * alpha - 2.0)) * w(r),
        ))
    }

    /// w(x) = cos(βx).
    pub fn cos(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid(format!("cos weight needs beta >= 0, got {beta}")));
        }
        Ok(Self::new(
            format!("cos({beta}x)"),
            move |x| (beta * x).cos(),
            move |x| -beta * (beta * x).sin(),
            move |x| -beta * beta * (beta * x).cos(),
        ))
    }

    /// w(r) = c + r^{−2}.
    pub fn radial_inverse_square(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(invalid(format!("inverse-square weight needs c >= 0, got {c}")));
        }
        Ok(Self::new(
            format!("{c} + r^-2"),
            move |r| c + 1.0 / (r * r),
            |r| -2.0 / (r * r * r),
            |r| 6.0 / (r * r * r * r),
        ))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn first(&self, x: f64) -> f64 {
        (self.first)(x)
    }

    #[inline]
    pub fn second(&self, x: f64) -> f64 {
        (self.second)(x)
    }
}

/// Diagonal weight for the certificate.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    /// W(x) = w(|x|) I.
    RadialScalar(WeightFn),
    /// W(x) = diag wᵢ(xᵢ); one function per axis (a single entry is reused).
    PerCoordinate(Vec<WeightFn>),
    Identity,
}

impl WeightSpec {
    pub fn label(&self) -> String {
        match self {
            WeightSpec::RadialScalar(w) => format!("radial({})", w.label()),
            WeightSpec::PerCoordinate(ws) => {
                format!("per_coordinate({})", ws.iter().map(|w| w.label()).collect::<Vec<_>>().join(", "))
            }
            WeightSpec::Identity => "identity".into(),
        }
    }
}

/// The two eigenvalues of ∇²V − (𝓛w/w) I at radius r for a radial weight:
/// along x and on x⊥.
pub fn radial_interior_eigs(pot: &Potential, d: usize, w: &WeightFn, r: f64) -> Result<(f64, f64)> {
    let (_, v1, v2) = pot.radial_parts(r)?;
    let wv = w.value(r);
    if !(wv > 0.0) {
        return Err(GapError::WeightNotPositive { at: r, value: wv });
    }
    let lw = (w.second(r) + ((d as f64 - 1.0) / r - v1) * w.first(r)) / wv;
    Ok((v2 - lw, v1 / r - lw))
}

fn radial_grid(body: &Body, n: usize) -> Result<Vec<f64>> {
    let n = n.max(8);
    let half = n / 2;
    let mut rs = match body {
        Body::BallComplement { radius, .. } => {
            // r = R/s with s ∈ [1e−6, 1] covers [R, 10⁶R]
            let mut s: Vec<f64> = (1..=n - half).map(|k| k as f64 / (n - half) as f64).collect();
            s.extend((0..half).map(|k| 10f64.powf(-6.0 * k as f64 / (half - 1) as f64)));
            s.into_iter().filter(|v| *v >= 1e-6).map(|v| radius / v).collect::<Vec<_>>()
        }
        _ => {
            let r_bar = body.radii()?.0;
            let eps = 1e-8 * r_bar;
            let mut r: Vec<f64> = (1..=n - half).map(|k| r_bar * k as f64 / (n - half) as f64).collect();
            r.extend((0..half).map(|k| eps * (r_bar / eps).powf(k as f64 / (half - 1) as f64)));
            r
        }
    };
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    Ok(rs)
}

fn axis_grid(b: f64, n: usize) -> Vec<f64> {
    let n = n.max(8);
    (0..=n).map(|k| -b + 2.0 * b * k as f64 / n as f64).collect()
}

struct Check {
    interior_min: f64,
    worst: f64,
    worst_axis: Option<usize>,
    boundary_margin: f64,
    worst_boundary: Option<Vec<f64>>,
    points: usize,
    boundary_points: usize,
}

/// Boundary test value for a radial weight at boundary point x.
fn radial_boundary_value(body: &Body, w: Option<&WeightFn>, x: &[f64]) -> Result<Option<f64>> {
    let bp = match body.boundary_point(x) {
        Ok(bp) => bp,
        // edges and corners of the box, isolated degenerate points
        Err(GapError::NonSmoothBoundary) | Err(GapError::DegenerateBoundary) => return Ok(None),
        Err(e) => return Err(e),
    };
    let Some(w) = w else { return Ok(Some(bp.rho)) };
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let wv = w.value(r);
    if !(wv > 0.0) {
        return Err(GapError::WeightNotPositive { at: r, value: wv });
    }
    let radial_normal = x.iter().zip(&bp.eta).map(|(a, b)| a * b).sum::<f64>() / r;
    Ok(Some(bp.rho + w.first(r) / wv * radial_normal))
}

fn boundary_sweep(body: &Body, w: Option<&WeightFn>, grid: &GridSpec, check: &mut Check) -> Result<()> {
    for x in body.boundary_samples(grid.boundary_samples, grid.seed) {
        if let Some(v) = radial_boundary_value(body, w, &x)? {
            check.boundary_points += 1;
            if v < check.boundary_margin {
                check.boundary_margin = v;
                check.worst_boundary = Some(x);
            }
        }
    }
    Ok(())
}

fn radial_check(pot: &Potential, body: &Body, w: Option<&WeightFn>, grid: &GridSpec) -> Result<Check> {
    if !pot.is_radial() {
        return Err(GapError::NotApplicable("a radial weight needs a radial potential".into()));
    }
    let d = body.dim();
    let mut check = Check {
        interior_min: f64::INFINITY,
        worst: 0.0,
        worst_axis: None,
        boundary_margin: f64::INFINITY,
        worst_boundary: None,
        points: 0,
        boundary_points: 0,
    };
    let unit = WeightFn::radial_poly(vec![1.0])?;
    let w_eff = w.unwrap_or(&unit);
    for r in radial_grid(body, grid.radial_points)? {
        let (a, b) = radial_interior_eigs(pot, d, w_eff, r)?;
        let m = a.min(b);
        check.points += 1;
        if m < check.interior_min || m.is_nan() {
            check.interior_min = if m.is_nan() { f64::NEG_INFINITY } else { m };
            check.worst = r;
        }
    }
    boundary_sweep(body, w, grid, &mut check)?;
    Ok(check)
}

fn per_axis(ws: &[WeightFn], d: usize) -> Result<Vec<WeightFn>> {
    match ws.len() {
        1 => Ok(vec![ws[0].clone(); d]),
        n if n == d => Ok(ws.to_vec()),
        n => Err(invalid(format!("{n} per-coordinate weights for dimension {d}"))),
    }
}

fn product_factors(pot: &Potential, d: usize) -> Result<Option<Vec<OneDimConvexFn>>> {
    match pot {
        Potential::Uniform => Ok(None),
        Potential::Product(vs) if vs.len() == d => Ok(Some(vs.clone())),
        Potential::Product(vs) => Err(invalid(format!("{} potential factors for dimension {d}", vs.len()))),
        _ => Err(GapError::NotApplicable("per-coordinate weights need a uniform or product potential".into())),
    }
}

fn per_coordinate_check(pot: &Potential, body: &Body, ws: &[WeightFn], grid: &GridSpec) -> Result<Check> {
    let d = body.dim();
    let ws = per_axis(ws, d)?;
    let vs = product_factors(pot, d)?;
    let owned;
    let body = match body {
        Body::LpBall { .. } => {
            owned = body.lp_as_orlicz().ok_or_else(|| invalid("lp ball conversion failed"))?;
            &owned
        }
        Body::Orlicz { .. } | Body::Box { .. } => body,
        _ => {
            return Err(GapError::NotApplicable(format!(
                "per-coordinate weights need a box or an Orlicz body, got {}",
                body.kind()
            )))
        }
    };
    let b = body.bounding_half_width()?;
    let xs = axis_grid(b, grid.radial_points);
    let mut check = Check {
        interior_min: f64::INFINITY,
        worst: 0.0,
        worst_axis: None,
        boundary_margin: f64::INFINITY,
        worst_boundary: None,
        points: 0,
        boundary_points: 0,
    };
    for (i, w) in ws.iter().enumerate() {
        for &x in &xs {
            let wv = w.value(x);
            if !(wv > 0.0) {
                return Err(GapError::WeightNotPositive { at: x, value: wv });
            }
            let (v1, v2) = vs.as_ref().map_or((0.0, 0.0), |vs| (vs[i].first(x), vs[i].second(x)));
            let e = v2 - (w.second(x) - v1 * w.first(x)) / wv;
            check.points += 1;
            if e < check.interior_min || e.is_nan() {
                check.interior_min = if e.is_nan() { f64::NEG_INFINITY } else { e };
                check.worst = x;
                check.worst_axis = Some(i);
            }
        }
    }
    match body {
        // the weighted term acts along η only, so faces contribute ρ = 0
        Body::Box { .. } => check.boundary_margin = 0.0,
        Body::Orlicz { potentials, .. } => {
            for (i, (u, w)) in potentials.iter().zip(&ws).enumerate() {
                for &x in &xs {
                    let v = u.second(x) + w.first(x) / w.value(x) * u.first(x);
                    check.boundary_points += 1;
                    if v < check.boundary_margin {
                        check.boundary_margin = v;
                        let mut p = vec![0.0; d];
                        p[i] = x;
                        check.worst_boundary = Some(p);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(check)
}

fn identity_check(pot: &Potential, body: &Body, grid: &GridSpec) -> Result<Check> {
    match pot {
        Potential::Product(_) => {
            let ones = vec![WeightFn::radial_poly(vec![1.0])?];
            let mut c = per_coordinate_check(pot, body, &ones, grid)?;
            // identity weight: plain second fundamental form on the boundary
            c.boundary_margin = f64::INFINITY;
            c.boundary_points = 0;
            boundary_sweep(body, None, grid, &mut c)?;
            Ok(c)
        }
        _ => radial_check(pot, body, None, grid),
    }
}

/// Boundary tolerance relative to the size of the terms involved.
const BOUNDARY_REL_TOL: f64 = 1e-9;

/// Certified lower bound inf_Ω λ_min(∇²V − 𝓛W W⁻¹), valid when the
/// weighted boundary form is nonnegative at every boundary sample.
pub fn certify_weight(pot: &Potential, body: &Body, weight: &WeightSpec, grid: &GridSpec) -> Result<BoundReport> {
    let check = match weight {
        WeightSpec::Identity => identity_check(pot, body, grid)?,
        WeightSpec::RadialScalar(w) => radial_check(pot, body, Some(w), grid)?,
        WeightSpec::PerCoordinate(ws) => per_coordinate_check(pot, body, ws, grid)?,
    };
    let scale = body.r_under().map(|r| 1.0 / r).unwrap_or(1.0);
    let boundary_ok = check.boundary_margin >= -BOUNDARY_REL_TOL * scale;
    let interior_ok = check.interior_min > 0.0;
    let mut report = if boundary_ok && interior_ok {
        BoundReport::lower(Method::CertifiedWeight, check.interior_min)
    } else {
        let why = match (boundary_ok, interior_ok) {
            (false, _) => "boundary condition fails",
            _ => "interior eigenvalue is not positive",
        };
        BoundReport::inapplicable(Method::CertifiedWeight, BoundKind::Lower, why)
    };
    report = report
        .with("interior_min", check.interior_min)
        .with("boundary_margin", check.boundary_margin)
        .with("grid_points", check.points as f64)
        .with("boundary_points", check.boundary_points as f64);
    report = match check.worst_axis {
        Some(i) => report.with("worst_x", check.worst).with("worst_axis", i as f64),
        None => report.with("worst_r", check.worst),
    };
    if let Some(x) = &check.worst_boundary {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        report = report.with("worst_boundary_norm", r);
    }
    Ok(report.note(format!("weight {} checked on grids, not by interval arithmetic", weight.label())))
}
