//! Log-concave probability measures μ ∝ e^{−V} given through their
//! potential V and its first two derivatives.

use crate::error::{invalid, GapError, Result};
use crate::geometry::{Body, OneDimConvexFn};
use crate::quadrature::integrate_panels;
use crate::report::{BoundKind, BoundReport, Method};

#[derive(Debug, Clone)]
pub enum Potential {
    /// V ≡ 0.
    Uniform,
    /// Subbotin V(r) = r^α/α with α > 1; α = 2 is the standard Gaussian.
    RadialPower { alpha: f64 },
    /// V(x) = v(|x|) with user evaluators for v, v', v'' on r > 0.
    RadialCustom(OneDimConvexFn),
    /// V(x) = Σ vᵢ(xᵢ).
    Product(Vec<OneDimConvexFn>),
}

/// Eigenvalues of ∇²V for a radial potential: V''(r) along x, V'(r)/r on x⊥.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianEigs {
    pub radial_eig: f64,
    pub tangential_eig: f64,
}

impl HessianEigs {
    pub fn min(&self) -> f64 {
        self.radial_eig.min(self.tangential_eig)
    }
}

/// Grid size for sampled convexity checks.
pub const CONVEXITY_GRID: usize = 1000;

impl Potential {
    pub fn radial_power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(invalid(format!("Subbotin exponent must be > 1, got {alpha}")));
        }
        Ok(Potential::RadialPower { alpha })
    }

    pub fn gaussian() -> Self {
        Potential::RadialPower { alpha: 2.0 }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Potential::Uniform)
    }

    /// Uniform counts as radial (v ≡ 0).
    pub fn is_radial(&self) -> bool {
        matches!(self, Potential::Uniform | Potential::RadialPower { .. } | Potential::RadialCustom(_))
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Potential::RadialPower { alpha } if *alpha == 2.0)
    }

    pub fn label(&self) -> String {
        match self {
            Potential::Uniform => "uniform".into(),
            Potential::RadialPower { alpha } if *alpha == 2.0 => "gaussian".into(),
            Potential::RadialPower { alpha } => format!("subbotin(alpha={alpha})"),
            Potential::RadialCustom(v) => format!("radial({})", v.label()),
            Potential::Product(vs) => {
                format!("product({})", vs.iter().map(|v| v.label()).collect::<Vec<_>>().join(", "))
            }
        }
    }

    /// (v(r), v'(r), v''(r)) for radial potentials.
    pub fn radial_parts(&self, r: f64) -> Result<(f64, f64, f64)> {
        match self {
            Potential::Uniform => Ok((0.0, 0.0, 0.0)),
            Potential::RadialPower { alpha } => {
                let a = *alpha;
                Ok((r.powf(a) / a, r.powf(a - 1.0), (a - 1.0) * r.powf(a - 2.0)))
            }
            Potential::RadialCustom(v) => Ok((v.value(r), v.first(r), v.second(r))),
            Potential::Product(_) => Err(GapError::NotRadial),
        }
    }

    pub fn radial_v(&self, r: f64) -> Result<f64> {
        Ok(self.radial_parts(r)?.0)
    }

    /// V at a point of ℝ^d.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Product(vs) => vs.iter().zip(x).map(|(v, xi)| v.value(*xi)).sum(),
            _ => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.radial_v(r).expect("radial")
            }
        }
    }

    pub fn hessian_eigs(&self, r: f64) -> Result<HessianEigs> {
        if !self.is_radial() {
            return Err(GapError::NotRadial);
        }
        if !(r >= 0.0) {
            return Err(invalid(format!("radius must be >= 0, got {r}")));
        }
        if r == 0.0 {
            return match self {
                Potential::Uniform => Ok(HessianEigs { radial_eig: 0.0, tangential_eig: 0.0 }),
                Potential::RadialPower { alpha } if *alpha >= 2.0 => {
                    let v = if *alpha == 2.0 { 1.0 } else { 0.0 };
                    Ok(HessianEigs { radial_eig: v, tangential_eig: v })
                }
                _ => Err(invalid("tangential Hessian eigenvalue V'(r)/r diverges at r = 0")),
            };
        }
        let (_, d1, d2) = self.radial_parts(r)?;
        Ok(HessianEigs { radial_eig: d2, tangential_eig: d1 / r })
    }

    /// Sampled log-concavity check on (0, r_max]: v'' ≥ 0 and v' ≥ 0 for
    /// radial potentials, vᵢ'' ≥ 0 on [−r_max, r_max] for products.
    pub fn is_log_concave_on(&self, r_max: f64) -> bool {
        match self {
            Potential::Uniform | Potential::RadialPower { .. } => true,
            Potential::RadialCustom(v) => (1..=CONVEXITY_GRID).all(|i| {
                let r = r_max * i as f64 / CONVEXITY_GRID as f64;
                v.second(r) >= -1e-12 && v.first(r) >= -1e-12
            }),
            Potential::Product(vs) => vs.iter().all(|v| v.is_convex_on(-r_max, r_max, CONVEXITY_GRID)),
        }
    }
}

/// inf over Ω of the smallest eigenvalue of ∇²V (Brascamp–Lieb); a
/// positive infimum on a convex body is a lower bound on λ₁.
pub fn brascamp_lieb_bound(pot: &Potential, body: &Body) -> BoundReport {
    let method = Method::BrascampLieb;
    if !body.is_convex() {
        return BoundReport::inapplicable(method, BoundKind::Lower, "body is not convex");
    }
    let (r_bar, r_under) = match body.radii() {
        Ok(r) => r,
        Err(e) => return BoundReport::inapplicable(method, BoundKind::Lower, e.to_string()),
    };
    let inf = match pot {
        Potential::Uniform => 0.0,
        Potential::RadialPower { alpha } => {
            let a = *alpha;
            if a > 2.0 {
                0.0
            } else {
                (a - 1.0).min(1.0) * r_bar.powf(a - 2.0)
            }
        }
        Potential::RadialCustom(_) => {
            let lo = r_under * 1e-3;
            (0..CONVEXITY_GRID)
                .map(|i| lo + (r_bar - lo) * i as f64 / (CONVEXITY_GRID - 1) as f64)
                .map(|r| pot.hessian_eigs(r).map(|h| h.min()).unwrap_or(f64::NEG_INFINITY))
                .fold(f64::INFINITY, f64::min)
        }
        Potential::Product(vs) => {
            let b = match body.bounding_half_width() {
                Ok(b) => b,
                Err(e) => return BoundReport::inapplicable(method, BoundKind::Lower, e.to_string()),
            };
            vs.iter()
                .flat_map(|v| {
                    (0..CONVEXITY_GRID).map(move |i| v.second(-b + 2.0 * b * i as f64 / (CONVEXITY_GRID - 1) as f64))
                })
                .fold(f64::INFINITY, f64::min)
        }
    };
    if !(inf > 0.0) {
        return BoundReport::inapplicable(method, BoundKind::Lower, "potential is not uniformly convex on the body")
            .with("hessian_inf", inf);
    }
    BoundReport::lower(method, inf).with("hessian_inf", inf).with("r_bar", r_bar)
}

/// Radial range used for moments and 1D reductions of radial measures.
pub(crate) fn radial_range(body: &Body, r_max: Option<f64>) -> Result<(f64, f64)> {
    match body {
        Body::Ball { radius, .. } => Ok((0.0, *radius)),
        Body::BallComplement { radius, .. } => {
            let r_max = r_max.ok_or_else(|| invalid("ball complement needs a truncation radius"))?;
            if !(r_max > *radius) {
                return Err(invalid(format!("truncation radius {r_max} must exceed R = {radius}")));
            }
            Ok((*radius, r_max))
        }
        _ => {
            Err(GapError::NotApplicable(format!("radial moments need a ball or ball complement, got {}", body.kind())))
        }
    }
}

/// ln ∫ r^k r^{d−1} e^{−V(r)} dr over the body's radial range.
///
/// The log-integrand is shifted by its maximum before exponentiation so
/// large dimensions neither overflow nor underflow.
pub fn ln_radial_density_moment(pot: &Potential, body: &Body, k: u32, r_max: Option<f64>) -> Result<f64> {
    if !pot.is_radial() {
        return Err(GapError::NotRadial);
    }
    let (a, b) = radial_range(body, r_max)?;
    let power = (k as usize + body.dim() - 1) as f64;
    let log_f = |r: f64| {
        if r <= 0.0 {
            f64::NEG_INFINITY
        } else {
            power * r.ln() - pot.radial_v(r).expect("radial")
        }
    };
    let mut breaks: Vec<f64> = if a == 0.0 {
        let mut v: Vec<f64> = (0..=12).rev().map(|j| b * 10f64.powi(-j)).collect();
        v.insert(0, 0.0);
        v.extend((1..16).map(|i| b * (0.1 + 0.9 * i as f64 / 16.0)));
        v
    } else {
        (0..=32).map(|i| a + (b - a) * i as f64 / 32.0).collect()
    };
    // locate the peak of the log-integrand
    let probe: Vec<f64> = (1..=2000).map(|i| a + (b - a) * i as f64 / 2000.0).collect();
    let (mut peak, mut gmax) = (b, f64::NEG_INFINITY);
    for &r in &probe {
        let g = log_f(r);
        if g > gmax {
            gmax = g;
            peak = r;
        }
    }
    let step = (b - a) / 2000.0;
    let (mut lo, mut hi) = ((peak - step).max(a), (peak + step).min(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if log_f(m1) < log_f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let refined = 0.5 * (lo + hi);
    if log_f(refined) > gmax {
        gmax = log_f(refined);
        peak = refined;
    }
    breaks.push(peak);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integral = integrate_panels(|r| (log_f(r) - gmax).exp(), &breaks, 1e-13, 0.0);
    Ok(gmax + integral.value.ln())
}

/// ∫ r^k r^{d−1} e^{−V(r)} dr over [0, R] (ball) or [R, r_max] (complement).
pub fn radial_density_moment(pot: &Potential, body: &Body, k: u32, r_max: Option<f64>) -> Result<f64> {
    Ok(ln_radial_density_moment(pot, body, k, r_max)?.exp())
}

/// Two-sided bracket for radial measures on balls:
/// ((d−1)·m₀/m₂, d·m₀/m₂) with mₖ the radial moments; d·m₀/m₂ is the
/// Rayleigh quotient of a linear test function.
pub fn moment_bracket(pot: &Potential, body: &Body, r_max: Option<f64>) -> Result<(f64, f64)> {
    let d = body.dim() as f64;
    let ratio = (ln_radial_density_moment(pot, body, 0, r_max)? - ln_radial_density_moment(pot, body, 2, r_max)?).exp();
    Ok(((d - 1.0) * ratio, d * ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_eigs_examples() {
        let g = Potential::gaussian();
        assert_eq!(g.hessian_eigs(5.0).unwrap(), HessianEigs { radial_eig: 1.0, tangential_eig: 1.0 });
        let s = Potential::radial_power(1.5).unwrap();
        let h = s.hessian_eigs(4.0).unwrap();
        assert!((h.radial_eig - 0.25).abs() < 1e-15 && (h.tangential_eig - 0.5).abs() < 1e-15);
        assert_eq!(Potential::Uniform.hessian_eigs(1.0).unwrap().min(), 0.0);
        assert!(s.hessian_eigs(0.0).is_err());
        let p = Potential::Product(vec![OneDimConvexFn::power(2.0, 1.0, 0.5).unwrap(); 2]);
        assert!(matches!(p.hessian_eigs(1.0), Err(GapError::NotRadial)));
        assert!(Potential::radial_power(1.0).is_err());
    }

    #[test]
    fn hessian_eigs_match_finite_differences() {
        for alpha in [1.2, 1.5, 2.0, 3.0] {
            let pot = Potential::radial_power(alpha).unwrap();
            for i in 0..50 {
                let r = 0.1 + 9.9 * i as f64 / 49.0;
                let h = 1e-4 * r;
                let v = |t: f64| pot.radial_v(t).unwrap();
                let d1 = (v(r + h) - v(r - h)) / (2.0 * h);
                let d2 = (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h);
                let e = pot.hessian_eigs(r).unwrap();
                assert!((e.tangential_eig - d1 / r).abs() < 1e-6 * (d1 / r).abs());
                assert!((e.radial_eig - d2).abs() < 1e-6 * d2.abs().max(1e-3));
                // min{1, α−1}·r^{α−2}
                let closed = (alpha - 1.0).min(1.0) * r.powf(alpha - 2.0);
                assert!((e.min() - closed).abs() <= 1e-14 * closed);
            }
        }
    }

    #[test]
    fn brascamp_lieb_examples() {
        let ball4 = Body::ball(4.0, 3).unwrap();
        let g = brascamp_lieb_bound(&Potential::gaussian(), &Body::cube(1.0, 3).unwrap());
        assert!(g.assumptions_ok && g.value == 1.0);
        let s = brascamp_lieb_bound(&Potential::radial_power(1.5).unwrap(), &ball4);
        assert!((s.value - 0.25).abs() < 1e-15);
        let u = brascamp_lieb_bound(&Potential::Uniform, &ball4);
        assert!(!u.assumptions_ok && u.value == 0.0);
        let c = brascamp_lieb_bound(&Potential::gaussian(), &Body::ball_complement(1.0, 3).unwrap());
        assert!(!c.assumptions_ok);
    }

    #[test]
    fn brascamp_lieb_monotone_in_radius() {
        let s = Potential::radial_power(1.5).unwrap();
        let g = Potential::gaussian();
        let mut prev = f64::INFINITY;
        for r in [0.5, 1.0, 2.0, 4.0] {
            let b = Body::ball(r, 3).unwrap();
            let v = brascamp_lieb_bound(&s, &b).value;
            assert!(v < prev);
            prev = v;
            assert_eq!(brascamp_lieb_bound(&g, &b).value, 1.0);
        }
    }

    #[test]
    fn custom_radial_matches_power() {
        let custom = Potential::RadialCustom(OneDimConvexFn::new(
            "r^1.5/1.5",
            |r| r.powf(1.5) / 1.5,
            |r| r.powf(0.5),
            |r| 0.5 * r.powf(-0.5),
        ));
        let ball = Body::ball(2.0, 4).unwrap();
        let a = brascamp_lieb_bound(&custom, &ball).value;
        let b = brascamp_lieb_bound(&Potential::radial_power(1.5).unwrap(), &ball).value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn uniform_ball_moments() {
        let ball = Body::ball(1.0, 3).unwrap();
        let m2 = radial_density_moment(&Potential::Uniform, &ball, 2, None).unwrap();
        assert!((m2 - 0.2).abs() < 1e-14);
        let (_, hi) = moment_bracket(&Potential::Uniform, &ball, None).unwrap();
        assert!((hi - 5.0).abs() < 1e-12);
        for d in [2usize, 10, 100, 400] {
            let b = Body::ball(1.0, d).unwrap();
            let (_, hi) = moment_bracket(&Potential::Uniform, &b, None).unwrap();
            assert!((hi - (d as f64 + 2.0)).abs() < 1e-10 * d as f64, "d = {d}: {hi}");
        }
    }

    #[test]
    fn gaussian_moment_ratio_tends_to_one() {
        let ball = Body::ball(40.0, 2).unwrap();
        let (_, hi) = moment_bracket(&Potential::gaussian(), &ball, None).unwrap();
        assert!((hi - 1.0).abs() < 1e-8);
    }

    #[test]
    fn complement_moments_match_monte_carlo_oracle() {
        use rand::{Rng, SeedableRng};
        let body = Body::ball_complement(1.0, 10).unwrap();
        let pot = Potential::gaussian();
        let (_, ratio) = moment_bracket(&pot, &body, Some(40.0)).unwrap();
        // |X|² for X ~ N(0, I_10) conditioned on |X| ≥ 1, by rejection
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (mut n, mut s2) = (0u64, 0.0f64);
        while n < 2_000_000 {
            let r2: f64 = (0..10)
                .map(|_| {
                    let z: f64 = rand_distr_normal(&mut rng);
                    z * z
                })
                .sum();
            if r2 >= 1.0 {
                n += 1;
                s2 += r2;
            }
        }
        let mc = 10.0 / (s2 / n as f64);
        assert!((ratio - mc).abs() < 1e-3, "{ratio} vs {mc}");
        // Laplace regime: close to d/(d + small) ~ 1 for small obstacle
        assert!(ratio < 1.0 && ratio > 0.9);

        fn rand_distr_normal(rng: &mut impl Rng) -> f64 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    #[test]
    fn complement_needs_truncation() {
        let body = Body::ball_complement(1.0, 5).unwrap();
        assert!(radial_density_moment(&Potential::gaussian(), &body, 0, None).is_err());
        assert!(radial_density_moment(&Potential::gaussian(), &body, 0, Some(0.5)).is_err());
        let prod = Potential::Product(vec![]);
        assert!(matches!(
            radial_density_moment(&prod, &Body::ball(1.0, 2).unwrap(), 0, None),
            Err(GapError::NotRadial)
        ));
    }
}
