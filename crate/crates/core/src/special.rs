//! Gamma and Bessel functions of the first kind, plus the Bessel root
//! conditions that give the Neumann gap of the uniform ball.

use crate::error::{GapError, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin().abs();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

/// Above this value of u²/(ν+1) the alternating power series loses more
/// than about three digits to cancellation.
const SERIES_CANCELLATION_LIMIT: f64 = 14.0;

/// Bessel function of the first kind J_ν(u) for ν ≥ 0 and u ≥ 0.
///
/// Power series while u² ≤ 14(ν+1); otherwise Miller's backward recurrence
/// normalized with Σ_k (ν+2k) Γ(ν+k)/k! J_{ν+2k}(u) = (u/2)^ν.
pub fn bessel_j(nu: f64, u: f64) -> f64 {
    if !(nu >= 0.0) || !(u >= 0.0) {
        return f64::NAN;
    }
    if u == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    bessel_j_scaled(nu, u) * ln_leading(nu, u).exp()
}

/// J_ν(u) divided by its leading series term (u/2)^ν / Γ(ν+1); finite and
/// free of underflow for large ν at small u.
pub fn bessel_j_scaled(nu: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    if u * u <= SERIES_CANCELLATION_LIMIT * (nu + 1.0) {
        bessel_j_series_scaled(nu, u)
    } else {
        bessel_j_miller_scaled(nu, u)
    }
}

fn ln_leading(nu: f64, u: f64) -> f64 {
    nu * (0.5 * u).ln() - ln_gamma(nu + 1.0)
}

fn bessel_j_series_scaled(nu: f64, u: f64) -> f64 {
    let z = -0.25 * u * u;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    for k in 0..1000 {
        let kf = k as f64;
        term *= z / ((kf + 1.0) * (nu + kf + 1.0));
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term.abs() <= 1e-17 * sum.abs() && kf + 1.0 > z.abs().sqrt() {
            break;
        }
    }
    sum + comp
}

fn bessel_j_miller_scaled(nu: f64, u: f64) -> f64 {
    let top = 2 * ((u + 30.0 + 8.0 * u.sqrt()).ceil() as usize / 2 + 1);
    let mut f = vec![0.0_f64; top + 2];
    f[top] = 1e-30;
    for k in (1..=top).rev() {
        f[k - 1] = 2.0 * (nu + k as f64) / u * f[k] - f[k + 1];
        if f[k - 1].abs() > 1e200 {
            for v in f.iter_mut().skip(k - 1) {
                *v *= 1e-200;
            }
        }
    }
    let mut norm = f[0];
    let mut p = 1.0_f64;
    let mut j = 1usize;
    while 2 * j <= top {
        let jf = j as f64;
        norm += (nu + 2.0 * jf) * p * f[2 * j];
        p *= (nu + jf) / (jf + 1.0);
        j += 1;
    }
    f[0] / norm
}

/// Derivative of J_ν via J_ν' = (ν/u) J_ν − J_{ν+1}.
pub fn bessel_j_prime(nu: f64, u: f64) -> f64 {
    nu / u * bessel_j(nu, u) - bessel_j(nu + 1.0, u)
}

/// The function whose first positive zero is p_s:
/// u^{s} d/du[u^{1-s} J_s(u)] = J_s(u) − u J_{s+1}(u).
pub fn neumann_condition(s: f64, u: f64) -> f64 {
    bessel_j(s, u) - u * bessel_j(s + 1.0, u)
}

// Both functions below are divided by (u/2)^s / Γ(s+1), which keeps their
// sign and avoids underflow; J_{s+1}/lead_s = (u/2)/(s+1) · scaled J_{s+1}.
fn neumann_condition_scaled(s: f64, u: f64) -> f64 {
    bessel_j_scaled(s, u) - u * (0.5 * u) / (s + 1.0) * bessel_j_scaled(s + 1.0, u)
}

fn neumann_condition_prime_scaled(s: f64, u: f64) -> f64 {
    (s / u - u) * bessel_j_scaled(s, u) + (s - 1.0) * (0.5 * u) / (s + 1.0) * bessel_j_scaled(s + 1.0, u)
}

const ROOT_GRID_START: f64 = 1e-3;
const ROOT_GRID_STEP: f64 = 0.1;
const ROOT_BISECT_TOL: f64 = 1e-13;

/// First positive zero p_s of d/du[u^{1-s} J_s(u)], s ≥ 0.
///
/// p_{d/2}²/R² is the Neumann gap of the uniform ball in dimension d and
/// p_{d/2-1}²/R² the best estimate reachable with a radial scalar weight.
pub fn first_neumann_root(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(GapError::InvalidParameter(format!("Bessel order {s} must be >= 0")));
    }
    let limit = 2.0 * s + 40.0;
    let mut a = ROOT_GRID_START;
    let mut fa = neumann_condition_scaled(s, a);
    let (mut lo, mut hi) = loop {
        let b = a + ROOT_GRID_STEP;
        if b > limit {
            return Err(GapError::RootBracket(format!(
                "no sign change of J_s - u J_(s+1) below u = {limit} for s = {s}"
            )));
        }
        let fb = neumann_condition_scaled(s, b);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 || fa.signum() != fb.signum() {
            break (a, b);
        }
        a = b;
        fa = fb;
    };
    let f_lo_sign = neumann_condition_scaled(s, lo).signum();
    while hi - lo > ROOT_BISECT_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let fm = neumann_condition_scaled(s, mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == f_lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (blo, bhi) = (lo - 1e-12 * hi, hi + 1e-12 * hi);
    let mut root = 0.5 * (lo + hi);
    for _ in 0..2 {
        // the scaling factor's own derivative multiplies h, which is ~0 here
        let d = neumann_condition_prime_scaled(s, root);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = root - neumann_condition_scaled(s, root) / d;
        if next > blo && next < bhi {
            root = next;
        }
    }
    Ok(root)
}
