//! Closed-form spectral-gap bounds, the exact gap of the ball and the
//! aggregate report over every applicable method.

mod certify;

pub use certify::{certify_weight, radial_interior_eigs, WeightFn, WeightSpec};

use std::f64::consts::PI;

use crate::error::{invalid, GapError, Result};
use crate::geometry::Body;
use crate::measures::{brascamp_lieb_bound, Potential};
use crate::report::{BoundKind, BoundReport, Method};
use crate::special::first_neumann_root;

/// Sampling resolution shared by the sampled bounds and the certificate engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Interior radial (or per-axis) evaluation points.
    pub radial_points: usize,
    /// Low-discrepancy boundary points for ρ and boundary checks.
    pub boundary_samples: usize,
    /// Monte Carlo points for volumes of non-closed-form bodies.
    pub volume_samples: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { radial_points: 4096, boundary_samples: 4096, volume_samples: 1_000_000, seed: 0 }
    }
}

fn check_d_r(d: usize, r: f64) -> Result<()> {
    if d < 2 {
        return Err(invalid(format!("dimension must be >= 2, got {d}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("radius must be positive and finite, got {r}")));
    }
    Ok(())
}

/// inf ρ over ∂Ω, with the closed-form zero for Orlicz-type bodies whose
/// boundary contains a flat direction (some Uᵢ''(0) = 0), which no finite
/// boundary sample would hit exactly.
pub fn rho_inf(body: &Body, n_samples: usize) -> Result<f64> {
    match body {
        Body::LpBall { p, .. } if *p > 2.0 => Ok(0.0),
        Body::Orlicz { potentials, .. } if potentials.iter().any(|u| u.second(0.0) == 0.0) => Ok(0.0),
        _ => body.rho_min(n_samples),
    }
}

fn convex_setting(body: &Body, pot: &Potential) -> std::result::Result<f64, String> {
    if !body.is_convex() || !body.is_bounded() {
        return Err(format!("{} is not a convex body", body.kind()));
    }
    let reach = match pot {
        Potential::Product(_) => body.bounding_half_width().map_err(|e| e.to_string())?,
        _ => body.radii().map_err(|e| e.to_string())?.0,
    };
    if let Potential::Product(vs) = pot {
        if vs.len() != body.dim() {
            return Err(format!("product potential has {} factors, body dimension {}", vs.len(), body.dim()));
        }
    }
    if !pot.is_log_concave_on(reach) {
        return Err("potential is not convex on the body".into());
    }
    Ok(reach)
}

/// π²/diam(Ω)², valid for every log-concave measure on a convex body.
pub fn payne_weinberger(body: &Body, pot: &Potential) -> BoundReport {
    let m = Method::PayneWeinberger;
    if let Err(why) = convex_setting(body, pot) {
        return BoundReport::inapplicable(m, BoundKind::Lower, why);
    }
    match body.diameter() {
        Ok(diam) => BoundReport::lower(m, PI * PI / (diam * diam)).with("diameter", diam),
        Err(e) => BoundReport::inapplicable(m, BoundKind::Lower, e.to_string()),
    }
}

/// λ₁([−R, R]^d) = π²/(4R²) for the uniform measure, in every dimension.
pub fn exact_box_gap(half_width: f64) -> Result<BoundReport> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(invalid(format!("half-width must be positive, got {half_width}")));
    }
    Ok(BoundReport::new(Method::ExactBox, BoundKind::Exact, PI * PI / (4.0 * half_width * half_width))
        .with("R", half_width))
}

/// 2d/C with C from the radial corollary.
pub fn corollary_radial(pot: &Potential, body: &Body, grid: &GridSpec) -> BoundReport {
    let m = Method::CorollaryRadial;
    if !pot.is_radial() {
        return BoundReport::inapplicable(m, BoundKind::Lower, "potential is not radial");
    }
    let r_bar = match convex_setting(body, pot) {
        Ok(r) => r,
        Err(why) => return BoundReport::inapplicable(m, BoundKind::Lower, why),
    };
    let d = body.dim() as f64;
    let interior = match pot {
        Potential::Uniform => 3.0 * r_bar * r_bar,
        Potential::RadialPower { alpha } => {
            let ratio = (1.0 / (alpha - 1.0)).max(1.0);
            r_bar * r_bar * (1.0 + 2.0 * ratio)
        }
        _ => {
            let n = grid.radial_points.max(2);
            let mut sup = 0.0_f64;
            for i in 1..=n {
                let r = r_bar * i as f64 / n as f64;
                let (_, d1, d2) = pot.radial_parts(r).expect("radial");
                let ratio = if d1 == 0.0 && d2 == 0.0 { 1.0 } else { d1 / (r * d2) };
                let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio.max(1.0) };
                sup = sup.max(r * r * (1.0 + 2.0 * ratio));
            }
            sup
        }
    };
    let boundary = match body {
        Body::Ball { radius, .. } => 3.0 * radius * radius,
        _ => {
            let zero = match rho_inf(body, grid.boundary_samples) {
                Ok(rho) => rho <= 0.0,
                Err(e) => return BoundReport::inapplicable(m, BoundKind::Lower, e.to_string()),
            };
            if zero {
                f64::INFINITY
            } else {
                let mut sup = 0.0_f64;
                for x in body.boundary_samples(grid.boundary_samples, grid.seed) {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let rho = match body.rho_at(&x) {
                        Ok(v) => v,
                        Err(GapError::DegenerateBoundary) => 0.0,
                        Err(e) => return BoundReport::inapplicable(m, BoundKind::Lower, e.to_string()),
                    };
                    sup = sup.max(if rho > 0.0 { r * r + 2.0 * r / rho } else { f64::INFINITY });
                }
                sup
            }
        }
    };
    let c = interior.max(boundary);
    if !c.is_finite() {
        return BoundReport::inapplicable(
            m,
            BoundKind::Lower,
            "C is infinite: the boundary has flat directions (rho = 0)",
        )
        .with("C_interior", interior);
    }
    BoundReport::lower(m, 2.0 * d / c).with("C", c).with("C_interior", interior).with("C_boundary", boundary)
}

/// (d−1)/R² for the uniform ball.
pub fn ball_exp_weight_bound(d: usize, radius: f64) -> Result<BoundReport> {
    check_d_r(d, radius)?;
    Ok(BoundReport::lower(Method::BallExpWeight, (d as f64 - 1.0) / (radius * radius)))
}

/// λ₁(B(0,R)) = p²/R² with p the first positive zero of d/du[u^{1−d/2} J_{d/2}(u)].
pub fn exact_ball_gap(d: usize, radius: f64) -> Result<BoundReport> {
    check_d_r(d, radius)?;
    let p = first_neumann_root(0.5 * d as f64)?;
    Ok(BoundReport::new(Method::ExactBall, BoundKind::Exact, p * p / (radius * radius)).with("p", p))
}

/// Best lower bound reachable with a radial weight on the uniform ball:
/// p²/R² with p the first zero of d/du[u^{2−d/2} J_{d/2−1}(u)], which
/// is where the boundary condition w(R) + R w'(R) ≥ 0 saturates.
pub fn optimal_radial_weight_gap(d: usize, radius: f64) -> Result<BoundReport> {
    check_d_r(d, radius)?;
    let p = first_neumann_root(0.5 * d as f64 - 1.0)?;
    Ok(BoundReport::lower(Method::OptimalRadialWeight, p * p / (radius * radius)).with("p", p))
}

fn volume_ratio(body: &Body, grid: &GridSpec, conservative_sign: f64) -> Result<(f64, f64, f64)> {
    let d = body.dim();
    let v = body.volume(grid.volume_samples, grid.seed)?;
    let vol = v.estimate + conservative_sign * 3.0 * v.std_error;
    if !(vol > 0.0) {
        return Err(GapError::NotApplicable("volume estimate is not positive".into()));
    }
    let unit = Body::ball(1.0, d)?.volume(0, 0)?.estimate;
    Ok(((unit / vol).powf(2.0 / d as f64), v.estimate, v.std_error))
}

/// Weinberger: λ₁(Ω) ≤ (vol B₁/vol Ω)^{2/d} λ₁(B₁) for the uniform measure.
/// A Monte Carlo volume enters as estimate − 3 s.e., which only raises the bound.
pub fn weinberger_upper(body: &Body, grid: &GridSpec) -> Result<BoundReport> {
    if !body.is_bounded() {
        return Err(GapError::Unbounded);
    }
    let d = body.dim();
    let (ratio, vol, se) = volume_ratio(body, grid, -1.0)?;
    let ball = exact_ball_gap(d, 1.0)?.value;
    Ok(BoundReport::new(Method::WeinbergerUpper, BoundKind::Upper, ratio * ball)
        .with("volume", vol)
        .with("volume_std_error", se)
        .with("unit_ball_gap", ball))
}

/// Lower comparison with the unit ball for uniformly convex bodies. A Monte
/// Carlo volume enters as estimate + 3 s.e.
pub fn reverse_comparison(body: &Body, grid: &GridSpec) -> BoundReport {
    let m = Method::ReverseComparison;
    if !body.is_convex() || !body.is_bounded() {
        return BoundReport::inapplicable(m, BoundKind::Lower, "body is not a convex body");
    }
    let d = body.dim();
    let df = d as f64;
    let inner = || -> Result<BoundReport> {
        let rho = rho_inf(body, grid.boundary_samples)?;
        if !(rho > 0.0) {
            return Ok(BoundReport::inapplicable(m, BoundKind::Lower, "body is not uniformly convex (rho = 0)")
                .with("rho", rho));
        }
        let (r_bar, r_under) = body.radii()?;
        let denom = (3.0 * r_bar * r_bar).max(r_bar * r_bar + 2.0 * r_bar / rho);
        let shape = 2.0 * df * r_under * r_under / ((df + 2.0) * denom);
        let (ratio, vol, se) = volume_ratio(body, grid, 1.0)?;
        let ball = exact_ball_gap(d, 1.0)?.value;
        Ok(BoundReport::lower(m, shape * ratio * ball)
            .with("rho", rho)
            .with("r_bar", r_bar)
            .with("r_under", r_under)
            .with("shape_factor", shape)
            .with("volume_factor", ratio)
            .with("volume", vol)
            .with("volume_std_error", se)
            .with("unit_ball_gap", ball))
    };
    inner().unwrap_or_else(|e| BoundReport::inapplicable(m, BoundKind::Lower, e.to_string()))
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// q = min over i of inf_{|x| ≤ R} Uᵢ''(x)/|Uᵢ'(x)|, skipping Uᵢ' = 0.
/// Returns (q, coordinate, argmin).
pub fn orlicz_q(body: &Body, n_grid: usize) -> Result<(f64, usize, f64)> {
    let owned;
    let (pots, r) = match body {
        Body::Orlicz { potentials, box_bound } => (potentials, *box_bound),
        Body::LpBall { .. } => {
            owned = body.lp_as_orlicz().ok_or_else(|| invalid("lp ball conversion failed"))?;
            match &owned {
                Body::Orlicz { potentials, box_bound } => (potentials, *box_bound),
                _ => unreachable!(),
            }
        }
        _ => return Err(GapError::NotApplicable(format!("{} is not an Orlicz body", body.kind()))),
    };
    let n = n_grid.max(16);
    let mut best = (f64::INFINITY, 0usize, 0.0);
    for (i, u) in pots.iter().enumerate() {
        let ratio = |x: f64| {
            let d1 = u.first(x).abs();
            if d1 == 0.0 {
                f64::INFINITY
            } else {
                u.second(x) / d1
            }
        };
        let xs: Vec<f64> = (0..=n).map(|k| -r + 2.0 * r * k as f64 / n as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| ratio(x)).collect();
        let k = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let (mut lo, mut hi) = (xs[k.saturating_sub(1)], xs[(k + 1).min(n)]);
        let (mut qx, mut q) = (xs[k], vals[k]);
        for _ in 0..200 {
            if hi - lo <= 1e-15 * r {
                break;
            }
            let a = hi - GOLDEN * (hi - lo);
            let b = lo + GOLDEN * (hi - lo);
            if ratio(a) < ratio(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        for x in [lo, hi, 0.5 * (lo + hi)] {
            let v = ratio(x);
            if v < q {
                q = v;
                qx = x;
            }
        }
        if q < best.0 {
            best = (q, i, qx);
        }
    }
    Ok(best)
}

/// arctan(2Rq/π)²/R² for the uniform measure on {Σ Uᵢ(xᵢ) ≤ 1} ⊂ [−R, R]^d.
pub fn orlicz_bound(body: &Body, grid: &GridSpec) -> BoundReport {
    let m = Method::Orlicz;
    let r = match body {
        Body::Orlicz { box_bound, .. } => *box_bound,
        Body::LpBall { radius, .. } => *radius,
        _ => return BoundReport::inapplicable(m, BoundKind::Lower, format!("{} is not an Orlicz body", body.kind())),
    };
    match orlicz_q(body, grid.radial_points) {
        Ok((q, coord, x)) => {
            let q = q.max(0.0);
            let beta = (2.0 * r * q / PI).atan() / r;
            BoundReport::lower(m, beta * beta)
                .with("q", q)
                .with("q_coordinate", coord as f64)
                .with("q_argmin", x)
                .with("beta", beta)
                .with("R", r)
        }
        Err(e) => BoundReport::inapplicable(m, BoundKind::Lower, e.to_string()),
    }
}

/// Two-regime bound for the Subbotin measure e^{−r^α/α}, α ∈ (1, 2], on a
/// uniformly convex body with curvature ρ and outer radius r̄.
pub fn subbotin_bound(alpha: f64, d: usize, rho: f64, r_bar: f64) -> Result<BoundReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(invalid(format!("Subbotin bound needs alpha in (1, 2], got {alpha}")));
    }
    if !(rho > 0.0) || !(r_bar > 0.0) || d < 2 {
        return Err(invalid("Subbotin bound needs rho > 0, r_bar > 0 and d >= 2"));
    }
    let df = d as f64;
    let c = ((alpha - 1.0) / ((alpha + 1.0) * r_bar * r_bar)).min(rho / (r_bar * r_bar * rho + 2.0 * r_bar));
    let first = 2.0 * c * df;
    let expo = 1.0 - 2.0 / alpha;
    // 0^0 = 1 at α = 2
    let base = if alpha == 2.0 { 1.0 } else { ((2.0 - alpha) / (alpha - 1.0)).powf(expo) };
    let second = alpha / 4.0 * base * df.powf(expo);
    Ok(BoundReport::lower(Method::Subbotin, first.max(second))
        .with("C", c)
        .with("branch_curvature", first)
        .with("branch_dimension", second))
}

/// min{(d−4)/R², 1/3} for the standard Gaussian outside B(0, R), d ≥ 5.
pub fn gaussian_complement_bound(d: usize, radius: f64) -> Result<BoundReport> {
    check_d_r(d, radius)?;
    if d < 5 {
        return Err(invalid(format!("the obstacle bound needs d >= 5, got d = {d}")));
    }
    let a = (d as f64 - 4.0) / (radius * radius);
    Ok(BoundReport::lower(Method::GaussianComplement, a.min(1.0 / 3.0)).with("branch_curvature", a))
}

/// d/(2d + R²): radial-part comparison bound for the Gaussian obstacle.
pub fn bcgm_bound(d: usize, radius: f64) -> Result<BoundReport> {
    check_d_r(d, radius)?;
    let df = d as f64;
    Ok(BoundReport::lower(Method::Bcgm, df / (2.0 * df + radius * radius)))
}

fn from_result(method: Method, kind: BoundKind, r: Result<BoundReport>) -> BoundReport {
    r.unwrap_or_else(|e| BoundReport::inapplicable(method, kind, e.to_string()))
}

/// Every method that could apply to (pot, body): certified lower bounds by
/// decreasing value, then exact values, upper bounds and inapplicable methods.
pub fn best_bound(pot: &Potential, body: &Body, grid: &GridSpec) -> Vec<BoundReport> {
    let d = body.dim();
    let mut out = Vec::new();
    let uniform = pot.is_uniform();
    match body {
        Body::BallComplement { radius, .. } => {
            let why = "the measure must be the standard Gaussian";
            if pot.is_gaussian() {
                out.push(from_result(
                    Method::GaussianComplement,
                    BoundKind::Lower,
                    gaussian_complement_bound(d, *radius),
                ));
                out.push(from_result(Method::Bcgm, BoundKind::Lower, bcgm_bound(d, *radius)));
            } else {
                out.push(BoundReport::inapplicable(Method::GaussianComplement, BoundKind::Lower, why));
                out.push(BoundReport::inapplicable(Method::Bcgm, BoundKind::Lower, why));
            }
            out.push(payne_weinberger(body, pot));
            out.push(brascamp_lieb_bound(pot, body));
        }
        _ => {
            out.push(payne_weinberger(body, pot));
            out.push(brascamp_lieb_bound(pot, body));
            out.push(corollary_radial(pot, body, grid));
            if let Body::Box { half_width, .. } = body {
                if uniform {
                    out.push(from_result(Method::ExactBox, BoundKind::Exact, exact_box_gap(*half_width)));
                }
            }
            let ball_radius = match body {
                Body::Ball { radius, .. } => Some(*radius),
                Body::LpBall { p, radius, .. } if *p == 2.0 => Some(*radius),
                _ => None,
            };
            if let (Some(r), true) = (ball_radius, uniform) {
                out.push(from_result(Method::BallExpWeight, BoundKind::Lower, ball_exp_weight_bound(d, r)));
                out.push(from_result(Method::OptimalRadialWeight, BoundKind::Lower, optimal_radial_weight_gap(d, r)));
                out.push(from_result(Method::ExactBall, BoundKind::Exact, exact_ball_gap(d, r)));
            }
            if uniform {
                out.push(from_result(Method::WeinbergerUpper, BoundKind::Upper, weinberger_upper(body, grid)));
                out.push(reverse_comparison(body, grid));
                if matches!(body, Body::Orlicz { .. } | Body::LpBall { .. }) {
                    out.push(orlicz_bound(body, grid));
                }
            }
            if let Potential::RadialPower { alpha } = pot {
                let r = (|| -> Result<BoundReport> {
                    let rho = rho_inf(body, grid.boundary_samples)?;
                    let (r_bar, _) = body.radii()?;
                    Ok(subbotin_bound(*alpha, d, rho, r_bar)?.with("rho", rho).with("r_bar", r_bar))
                })();
                out.push(from_result(Method::Subbotin, BoundKind::Lower, r));
            }
        }
    }
    sort_reports(&mut out);
    out
}

fn rank(r: &BoundReport) -> u8 {
    match (r.assumptions_ok, r.kind) {
        (true, BoundKind::Lower) => 0,
        (true, BoundKind::Exact) => 1,
        (true, BoundKind::Upper) => 2,
        (false, _) => 3,
    }
}

/// Stable ordering: certified lower bounds by decreasing value, then exact,
/// upper and inapplicable reports.
pub fn sort_reports(reports: &mut [BoundReport]) {
    reports.sort_by(|a, b| {
        rank(a).cmp(&rank(b)).then_with(|| match rank(a) {
            0 => b.value.total_cmp(&a.value),
            2 => a.value.total_cmp(&b.value),
            _ => a.method.cmp(&b.method),
        })
    });
}
