//! Convex bodies (and the ball-complement obstacle domain) described by a
//! defining function F with Ω = {F ≤ 0}, plus the boundary quantities the
//! spectral-gap bounds consume: outer normal η, the smallest principal
//! curvature ρ of (Jac η)|η⊥, extremal radii, diameter and volume.
//!
//! Every smooth body here has a diagonal Hessian ∇²F, so ρ(x) is the
//! smallest eigenvalue of diag(∇²F/|∇F|) compressed to η⊥.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, GapError, Result};
use crate::lowdisc::sphere_directions;
use crate::special::ln_gamma;

/// Boundary membership tolerance on the (dimensionless) defining function.
pub const BOUNDARY_TOL: f64 = 1e-10;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-dimensional function together with its first two derivatives.
#[derive(Clone)]
pub struct OneDimConvexFn {
    label: String,
    value: ScalarFn,
    first: ScalarFn,
    second: ScalarFn,
}

impl fmt::Debug for OneDimConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneDimConvexFn").field("label", &self.label).finish()
    }
}

fn power_parts(x: f64, p: f64) -> (f64, f64, f64) {
    let a = x.abs();
    let v = a.powf(p);
    let d1 = p * x.signum() * a.powf(p - 1.0);
    let d2 = if p == 1.0 {
        if a == 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        p * (p - 1.0) * a.powf(p - 2.0)
    };
    let d1 = if a == 0.0 && p > 1.0 { 0.0 } else { d1 };
    (v, d1, d2)
}

impl OneDimConvexFn {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), value: Arc::new(value), first: Arc::new(first), second: Arc::new(second) }
    }

    /// coef·|x/scale|^p with p ≥ 1.
    pub fn power(p: f64, scale: f64, coef: f64) -> Result<Self> {
        if !(p >= 1.0) || !(scale > 0.0) || !(coef > 0.0) {
            return Err(invalid(format!(
                "power potential needs p >= 1, scale > 0, coef > 0 (got p={p}, scale={scale}, coef={coef})"
            )));
        }
        let label = format!("{coef}*|x/{scale}|^{p}");
        Ok(Self::new(
            label,
            move |x| coef * power_parts(x / scale, p).0,
            move |x| coef * power_parts(x / scale, p).1 / scale,
            move |x| coef * power_parts(x / scale, p).2 / (scale * scale),
        ))
    }

    /// |x/scale|^{p₊} for x ≥ 0 and |x/scale|^{p₋} for x < 0.
    pub fn asym_power(p_plus: f64, p_minus: f64, scale: f64) -> Result<Self> {
        if !(p_plus >= 1.0) || !(p_minus >= 1.0) || !(scale > 0.0) {
            return Err(invalid("asym_power needs p_plus, p_minus >= 1 and scale > 0"));
        }
        let pick = move |x: f64| if x >= 0.0 { p_plus } else { p_minus };
        Ok(Self::new(
            format!("asym(|x/{scale}|^{p_plus}, |x/{scale}|^{p_minus})"),
            move |x| power_parts(x / scale, pick(x)).0,
            move |x| power_parts(x / scale, pick(x)).1 / scale,
            move |x| {
                // one-sided second derivative at 0 is the smaller of the two
                if x == 0.0 {
                    power_parts(0.0, p_plus).2.min(power_parts(0.0, p_minus).2) / (scale * scale)
                } else {
                    power_parts(x / scale, pick(x)).2 / (scale * scale)
                }
            },
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

    /// Sampled convexity check: u'' ≥ −1e−12 on `n` points of [a, b].
    pub fn is_convex_on(&self, a: f64, b: f64, n: usize) -> bool {
        (0..=n).all(|i| {
            let x = a + (b - a) * i as f64 / n as f64;
            let v = self.second(x);
            v.is_nan() || v >= -1e-12
        })
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    /// Euclidean ball B(0, R).
    Ball { radius: f64, dim: usize },
    /// The hypercube [−R, R]^d.
    Box { half_width: f64, dim: usize },
    /// {Σ |xᵢ/R|^p ≤ 1}.
    LpBall { p: f64, radius: f64, dim: usize },
    /// {Σ Uᵢ(xᵢ) ≤ 1} ⊂ [−R, R]^d.
    Orlicz { potentials: Vec<OneDimConvexFn>, box_bound: f64 },
    /// ℝ^d ∖ B(0, R), non-convex and unbounded.
    BallComplement { radius: f64, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub rho: f64,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(invalid(format!("dimension must be >= 2, got {dim}")));
    }
    Ok(())
}

fn check_len(len: f64, what: &str) -> Result<()> {
    if !(len > 0.0) || !len.is_finite() {
        return Err(invalid(format!("{what} must be positive and finite, got {len}")));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Smallest eigenvalue of diag(h) compressed to the hyperplane η⊥ (|η| = 1).
///
/// Coordinates with ηᵢ = 0 are eigen-directions with eigenvalue hᵢ. The rest,
/// grouped by equal h, contribute h (multiplicity − 1) per group, and one
/// root of the secular equation Σ zⱼ/(gⱼ − λ) = 0 between consecutive groups.
pub(crate) fn min_tangent_eigenvalue(h: &[f64], eta: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    let mut groups: Vec<(f64, f64, usize)> = Vec::new(); // (h, Σ η², count)
    let mut active: Vec<(f64, f64)> = h
        .iter()
        .zip(eta)
        .filter_map(|(&hi, &ei)| {
            if ei == 0.0 {
                best = best.min(hi);
                None
            } else {
                Some((hi, ei * ei))
            }
        })
        .collect();
    active.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (hi, zi) in active {
        match groups.last_mut() {
            Some(g) if (hi - g.0).abs() <= 1e-14 * hi.abs().max(g.0.abs()).max(1e-300) => {
                g.1 += zi;
                g.2 += 1;
            }
            _ => groups.push((hi, zi, 1)),
        }
    }
    for g in &groups {
        if g.2 >= 2 {
            best = best.min(g.0);
        }
    }
    if groups.len() >= 2 {
        let (g1, g2) = (groups[0].0, groups[1].0);
        if g1 < best {
            let secular = |lam: f64| groups.iter().map(|g| g.1 / (g.0 - lam)).sum::<f64>();
            let (mut lo, mut hi) = (g1, g2.min(best));
            if hi.is_infinite() {
                hi = g1 + 1.0;
                while secular(hi) < 0.0 && hi.is_finite() {
                    hi = g1 + 2.0 * (hi - g1);
                }
            }
            for _ in 0..300 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if secular(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best = best.min(0.5 * (lo + hi));
        }
    }
    best
}

impl Body {
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        check_len(radius, "ball radius")?;
        check_dim(dim)?;
        Ok(Body::Ball { radius, dim })
    }

    pub fn cube(half_width: f64, dim: usize) -> Result<Self> {
        check_len(half_width, "box half-width")?;
        check_dim(dim)?;
        Ok(Body::Box { half_width, dim })
    }

    pub fn lp_ball(p: f64, radius: f64, dim: usize) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid(format!("l^p ball needs finite p >= 1, got {p}")));
        }
        check_len(radius, "l^p ball radius")?;
        check_dim(dim)?;
        Ok(Body::LpBall { p, radius, dim })
    }

    pub fn ball_complement(radius: f64, dim: usize) -> Result<Self> {
        check_len(radius, "obstacle radius")?;
        check_dim(dim)?;
        Ok(Body::BallComplement { radius, dim })
    }

    /// Generalized Orlicz ball. When `box_bound` is `None` the smallest R with
    /// Ω ⊂ [−R, R]^d is found from the solutions of Uᵢ(±t) = 1.
    pub fn orlicz(potentials: Vec<OneDimConvexFn>, box_bound: Option<f64>) -> Result<Self> {
        check_dim(potentials.len())?;
        let at_origin: f64 = potentials.iter().map(|u| u.value(0.0)).sum();
        if !(at_origin < 1.0) {
            return Err(invalid(format!("Orlicz body must contain the origin: sum U_i(0) = {at_origin} >= 1")));
        }
        let mut needed = 0.0_f64;
        for u in &potentials {
            for sign in [1.0, -1.0] {
                let g = |t: f64| u.value(sign * t) - 1.0;
                let mut hi = 1.0;
                while g(hi) < 0.0 {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(invalid(format!("potential {} never reaches 1", u.label())));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                needed = needed.max(hi);
            }
        }
        let box_bound = match box_bound {
            Some(r) => {
                check_len(r, "Orlicz box bound")?;
                if r < needed * (1.0 - 1e-12) {
                    return Err(invalid(format!("Orlicz body is not contained in [-{r}, {r}]^d (needs {needed})")));
                }
                r
            }
            None => needed,
        };
        for u in &potentials {
            if !u.is_convex_on(-box_bound, box_bound, 2000) {
                return Err(invalid(format!("potential {} is not convex", u.label())));
            }
        }
        Ok(Body::Orlicz { potentials, box_bound })
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball { dim, .. }
            | Body::Box { dim, .. }
            | Body::LpBall { dim, .. }
            | Body::BallComplement { dim, .. } => *dim,
            Body::Orlicz { potentials, .. } => potentials.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ball { .. } => "ball",
            Body::Box { .. } => "box",
            Body::LpBall { .. } => "lp_ball",
            Body::Orlicz { .. } => "orlicz",
            Body::BallComplement { .. } => "ball_complement",
        }
    }

    /// Short human-readable description, e.g. `ball(R=1, d=3)`.
    pub fn label(&self) -> String {
        match self {
            Body::Ball { radius, dim } => format!("ball(R={radius}, d={dim})"),
            Body::Box { half_width, dim } => format!("box(R={half_width}, d={dim})"),
            Body::LpBall { p, radius, dim } => format!("lp_ball(p={p}, R={radius}, d={dim})"),
            Body::Orlicz { potentials, box_bound } => {
                let mut us: Vec<&str> = potentials.iter().map(|u| u.label()).collect();
                us.dedup();
                format!("orlicz(d={}, R={box_bound}, U=[{}])", potentials.len(), us.join(", "))
            }
            Body::BallComplement { radius, dim } => format!("ball_complement(R={radius}, d={dim})"),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Body::BallComplement { .. })
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Body::BallComplement { .. })
    }

    /// Half-width of the smallest centered cube known to contain the body.
    pub fn bounding_half_width(&self) -> Result<f64> {
        match self {
            Body::Ball { radius, .. } | Body::LpBall { radius, .. } => Ok(*radius),
            Body::Box { half_width, .. } => Ok(*half_width),
            Body::Orlicz { box_bound, .. } => Ok(*box_bound),
            Body::BallComplement { .. } => Err(GapError::Unbounded),
        }
    }

    /// The same body dilated by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_len(c, "scale factor")?;
        Ok(match self {
            Body::Ball { radius, dim } => Body::Ball { radius: radius * c, dim: *dim },
            Body::Box { half_width, dim } => Body::Box { half_width: half_width * c, dim: *dim },
            Body::LpBall { p, radius, dim } => Body::LpBall { p: *p, radius: radius * c, dim: *dim },
            Body::BallComplement { radius, dim } => Body::BallComplement { radius: radius * c, dim: *dim },
            Body::Orlicz { potentials, box_bound } => Body::Orlicz {
                potentials: potentials
                    .iter()
                    .map(|u| {
                        let (a, b, s) = (u.clone(), u.clone(), u.clone());
                        OneDimConvexFn::new(
                            format!("{}(x/{c})", u.label()),
                            move |x| a.value(x / c),
                            move |x| b.first(x / c) / c,
                            move |x| s.second(x / c) / (c * c),
                        )
                    })
                    .collect(),
                box_bound: box_bound * c,
            },
        })
    }

    /// The ℓ^p ball written as a generalized Orlicz ball with Uᵢ = |x/R|^p.
    pub fn lp_as_orlicz(&self) -> Option<Self> {
        match self {
            Body::LpBall { p, radius, dim } => {
                let u = OneDimConvexFn::power(*p, *radius, 1.0).ok()?;
                Some(Body::Orlicz { potentials: vec![u; *dim], box_bound: *radius })
            }
            _ => None,
        }
    }

    /// Dimensionless defining function F, Ω = {F ≤ 0}.
    pub fn defining(&self, x: &[f64]) -> f64 {
        match self {
            Body::Ball { radius, .. } => x.iter().map(|v| v * v).sum::<f64>() / (radius * radius) - 1.0,
            Body::BallComplement { radius, .. } => 1.0 - x.iter().map(|v| v * v).sum::<f64>() / (radius * radius),
            Body::Box { half_width, .. } => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / half_width - 1.0,
            Body::LpBall { p, radius, .. } => x.iter().map(|v| (v / radius).abs().powf(*p)).sum::<f64>() - 1.0,
            Body::Orlicz { potentials, .. } => potentials.iter().zip(x).map(|(u, v)| u.value(*v)).sum::<f64>() - 1.0,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.defining(x) <= BOUNDARY_TOL
    }

    /// ∇F and the diagonal of ∇²F at x (smooth bodies only).
    fn derivatives(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Body::Ball { radius, .. } => {
                let s = 1.0 / (radius * radius);
                Ok((x.iter().map(|v| 2.0 * v * s).collect(), vec![2.0 * s; x.len()]))
            }
            Body::BallComplement { radius, .. } => {
                let s = 1.0 / (radius * radius);
                Ok((x.iter().map(|v| -2.0 * v * s).collect(), vec![-2.0 * s; x.len()]))
            }
            Body::LpBall { p, radius, .. } => {
                let parts: Vec<_> = x.iter().map(|v| power_parts(v / radius, *p)).collect();
                Ok((
                    parts.iter().map(|t| t.1 / radius).collect(),
                    parts.iter().map(|t| t.2 / (radius * radius)).collect(),
                ))
            }
            Body::Orlicz { potentials, .. } => Ok((
                potentials.iter().zip(x).map(|(u, v)| u.first(*v)).collect(),
                potentials.iter().zip(x).map(|(u, v)| u.second(*v)).collect(),
            )),
            Body::Box { .. } => Err(GapError::NonSmoothBoundary),
        }
    }

    fn check_on_boundary(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!("point has dimension {}, body {}", x.len(), self.dim())));
        }
        let residual = self.defining(x).abs();
        if !(residual <= BOUNDARY_TOL) {
            return Err(GapError::NotOnBoundary { residual });
        }
        Ok(())
    }

    /// Outer normal and ρ at a boundary point.
    pub fn boundary_point(&self, x: &[f64]) -> Result<BoundaryPoint> {
        self.check_on_boundary(x)?;
        if let Body::Box { .. } = self {
            let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let hits: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() >= m * (1.0 - 1e-12)).collect();
            if hits.len() != 1 {
                return Err(GapError::NonSmoothBoundary);
            }
            let mut eta = vec![0.0; x.len()];
            eta[hits[0]] = x[hits[0]].signum();
            return Ok(BoundaryPoint { x: x.to_vec(), eta, rho: 0.0 });
        }
        let (grad, hess) = self.derivatives(x)?;
        let g = norm(&grad);
        if !(g > 0.0) {
            return Err(GapError::DegenerateBoundary);
        }
        let eta: Vec<f64> = grad.iter().map(|v| v / g).collect();
        let h: Vec<f64> = hess.iter().map(|v| v / g).collect();
        let rho = min_tangent_eigenvalue(&h, &eta);
        Ok(BoundaryPoint { x: x.to_vec(), eta, rho })
    }

    /// Smallest eigenvalue of (Jac η)|η⊥ = (∇²F/|∇F|)|η⊥ at boundary point x.
    pub fn rho_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.boundary_point(x)?.rho)
    }

    /// Point where the ray from the origin along `dir` leaves the body (for
    /// the ball complement: where it enters the domain).
    pub fn ray_to_boundary(&self, dir: &[f64]) -> Vec<f64> {
        let u = normalized(dir);
        let t = match self {
            Body::Ball { radius, .. } | Body::BallComplement { radius, .. } => *radius,
            Body::Box { half_width, .. } => half_width / u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            Body::LpBall { p, radius, .. } => radius / u.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p),
            Body::Orlicz { box_bound, .. } => {
                let f = |t: f64| {
                    let y: Vec<f64> = u.iter().map(|v| v * t).collect();
                    self.defining(&y)
                };
                let mut lo = 0.0;
                let mut hi = box_bound * (u.len() as f64).sqrt() * 1.01;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if f(mid) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                // whichever end sits closer to F = 0
                if f(lo).abs() <= f(hi).abs() {
                    lo
                } else {
                    hi
                }
            }
        };
        u.iter().map(|v| v * t).collect()
    }

    /// Deterministic boundary sample: Halton directions pushed to ∂Ω.
    pub fn boundary_samples(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        sphere_directions(self.dim(), n, seed).iter().map(|u| self.ray_to_boundary(u)).collect()
    }

    /// inf over ∂Ω of ρ: closed form for balls, the box and the ball
    /// complement, sampled infimum over `n_samples` boundary points otherwise.
    pub fn rho_min(&self, n_samples: usize) -> Result<f64> {
        if n_samples == 0 {
            return Err(invalid("rho_min needs at least one sample"));
        }
        match self {
            Body::Ball { radius, .. } => Ok(1.0 / radius),
            Body::BallComplement { radius, .. } => Ok(-1.0 / radius),
            Body::Box { .. } => Ok(0.0),
            Body::LpBall { p, radius, .. } if *p == 2.0 => Ok(1.0 / radius),
            _ => {
                let mut best = f64::INFINITY;
                for x in self.boundary_samples(n_samples, 0) {
                    match self.rho_at(&x) {
                        Ok(r) => best = best.min(r),
                        Err(GapError::DegenerateBoundary) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Ok(best)
            }
        }
    }

    /// (r̄, r̲): largest and smallest distance from the origin to ∂Ω.
    pub fn radii(&self) -> Result<(f64, f64)> {
        let d = self.dim() as f64;
        match self {
            Body::Ball { radius, .. } => Ok((*radius, *radius)),
            Body::Box { half_width, .. } => Ok((half_width * d.sqrt(), *half_width)),
            Body::LpBall { p, radius, .. } => {
                let diag = radius * d.powf(0.5 - 1.0 / p);
                if *p >= 2.0 {
                    Ok((diag, *radius))
                } else {
                    Ok((*radius, diag))
                }
            }
            Body::Orlicz { .. } => {
                let dist = |u: &[f64]| norm(&self.ray_to_boundary(u));
                let r_bar = maximize_on_sphere(self.dim(), 2048, &dist);
                let r_under = -maximize_on_sphere(self.dim(), 2048, &|u: &[f64]| -dist(u));
                Ok((r_bar, r_under))
            }
            Body::BallComplement { .. } => Err(GapError::Unbounded),
        }
    }

    /// Smallest distance from the origin to the boundary (also defined for
    /// the ball complement).
    pub fn r_under(&self) -> Result<f64> {
        match self {
            Body::BallComplement { radius, .. } => Ok(*radius),
            _ => Ok(self.radii()?.1),
        }
    }

    pub fn diameter(&self) -> Result<f64> {
        match self {
            Body::Ball { radius, .. } => Ok(2.0 * radius),
            Body::Box { half_width, dim } => Ok(2.0 * half_width * (*dim as f64).sqrt()),
            // centrally symmetric: diam = 2 r̄
            Body::LpBall { .. } => Ok(2.0 * self.radii()?.0),
            Body::Orlicz { .. } => Ok(self.orlicz_diameter()),
            Body::BallComplement { .. } => Err(GapError::Unbounded),
        }
    }

    fn orlicz_diameter(&self) -> f64 {
        let d = self.dim();
        let pts = self.boundary_samples(512, 0);
        let mut best = (0usize, 0usize, 0.0_f64);
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dist: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist > best.2 {
                    best = (i, j, dist);
                }
            }
        }
        let objective = |v: &[f64]| {
            let a = self.ray_to_boundary(&v[..d]);
            let b = self.ray_to_boundary(&v[d..]);
            a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        let mut start = normalized(&pts[best.0]);
        start.extend(normalized(&pts[best.1]));
        pattern_search(start, d, &objective)
    }

    /// Volume: closed form for the ball and the box, seeded Monte Carlo
    /// rejection in the bounding cube otherwise.
    pub fn volume(&self, n_samples: usize, seed: u64) -> Result<VolumeEstimate> {
        let d = self.dim();
        match self {
            Body::Ball { radius, .. } => {
                let df = d as f64;
                let ln_v = 0.5 * df * std::f64::consts::PI.ln() + df * radius.ln() - ln_gamma(0.5 * df + 1.0);
                Ok(VolumeEstimate { estimate: ln_v.exp(), std_error: 0.0 })
            }
            Body::Box { half_width, .. } => {
                Ok(VolumeEstimate { estimate: (2.0 * half_width).powi(d as i32), std_error: 0.0 })
            }
            Body::BallComplement { .. } => Err(GapError::Unbounded),
            _ => {
                if n_samples == 0 {
                    return Err(invalid("Monte Carlo volume needs samples"));
                }
                let b = self.bounding_half_width()?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut x = vec![0.0; d];
                let mut hits = 0usize;
                for _ in 0..n_samples {
                    for v in x.iter_mut() {
                        *v = rng.gen_range(-b..b);
                    }
                    if self.defining(&x) <= 0.0 {
                        hits += 1;
                    }
                }
                let cube = (2.0 * b).powi(d as i32);
                let f = hits as f64 / n_samples as f64;
                Ok(VolumeEstimate { estimate: cube * f, std_error: cube * (f * (1.0 - f) / n_samples as f64).sqrt() })
            }
        }
    }
}

/// Maximizes `objective(u)` over unit vectors u by taking the best of
/// `n_samples` Halton directions and polishing with a pattern search.
pub(crate) fn maximize_on_sphere(dim: usize, n_samples: usize, objective: &dyn Fn(&[f64]) -> f64) -> f64 {
    let start = sphere_directions(dim, n_samples, 0)
        .into_iter()
        .map(|u| (objective(&u), u))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, u)| u)
        .expect("nonempty sample");
    pattern_search(start, dim, objective)
}

/// Coordinate pattern search over a concatenation of unit vectors of length
/// `block` each (re-normalized after every move).
fn pattern_search(mut v: Vec<f64>, block: usize, objective: &dyn Fn(&[f64]) -> f64) -> f64 {
    let renorm = |w: &mut Vec<f64>| {
        for chunk in w.chunks_mut(block) {
            let n = norm(chunk);
            chunk.iter_mut().for_each(|x| *x /= n);
        }
    };
    let mut best = objective(&v);
    let mut step = 0.1;
    let mut evals = 0;
    while step > 1e-11 && evals < 200_000 {
        let mut improved = false;
        for j in 0..v.len() {
            for sign in [1.0, -1.0] {
                let mut cand = v.clone();
                cand[j] += sign * step;
                renorm(&mut cand);
                let val = objective(&cand);
                evals += 1;
                if val > best {
                    best = val;
                    v = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
