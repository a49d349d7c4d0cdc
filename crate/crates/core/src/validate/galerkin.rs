use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, GapError, Result};
use crate::geometry::{Body, OneDimConvexFn};
use crate::linalg::{smallest_generalized_eigenvalue, SymMatrix};
use crate::measures::{ln_radial_density_moment, Potential};
use crate::quadrature::integrate_panels;
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature {
    /// Closed-form or one-dimensional quadrature moments; fails when the
    /// (body, potential) pair has none.
    Exact,
    /// Seeded rejection sampling in the bounding cube, in `batches` groups
    /// whose spread gives the standard error.
    MonteCarlo { samples: usize, seed: u64, batches: usize },
}

#[derive(Debug, Clone)]
pub struct GalerkinProblem {
    pub body: Body,
    pub pot: Potential,
    pub degree: usize,
    pub quadrature: Quadrature,
}

impl GalerkinProblem {
    /// Exact moments when available, otherwise 10⁶ seeded Monte Carlo points.
    pub fn new(body: Body, pot: Potential, degree: usize) -> Self {
        let quadrature = if has_exact_moments(&body, &pot) {
            Quadrature::Exact
        } else {
            Quadrature::MonteCarlo { samples: 1_000_000, seed: 0, batches: 10 }
        };
        Self { body, pot, degree, quadrature }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinEstimate {
    /// Smallest Rayleigh–Ritz eigenvalue: an upper bound on λ₁.
    pub value: f64,
    /// Zero for exact moments.
    pub std_error: f64,
    pub basis_size: usize,
    /// Basis functions kept after pruning the singular part of the covariance.
    pub rank: usize,
}

type Index = Vec<u32>;

/// Multi-indices of total degree in [lo, hi], graded lexicographic order.
fn multi_indices(d: usize, lo: usize, hi: usize) -> Vec<Index> {
    fn rec(d: usize, left: u32, cur: &mut Index, out: &mut Vec<Index>) {
        if cur.len() == d - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(d, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in lo..=hi {
        rec(d, total as u32, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

fn has_exact_moments(body: &Body, pot: &Potential) -> bool {
    match (body, pot) {
        (Body::Ball { .. }, p) => p.is_radial(),
        (Body::LpBall { .. }, Potential::Uniform) => true,
        (Body::Box { .. }, Potential::Uniform | Potential::Product(_)) => true,
        (Body::Box { .. }, p) => p.is_gaussian(),
        _ => false,
    }
}

/// ln of the average of x^a over the unit sphere (a all even).
fn ln_sphere_average(a: &[u32]) -> f64 {
    let d = a.len() as f64;
    let total: f64 = a.iter().map(|&k| 0.5 * (k as f64 + 1.0)).sum();
    a.iter().map(|&k| ln_gamma(0.5 * (k as f64 + 1.0))).sum::<f64>() - ln_gamma(total) + ln_gamma(0.5 * d)
        - 0.5 * d * std::f64::consts::PI.ln()
}

/// Moments E[y^a] of y = x/b, b the bounding half-width.
struct Moments {
    table: HashMap<Index, f64>,
}

impl Moments {
    fn get(&self, a: &[u32]) -> f64 {
        self.table[a]
    }
}

fn one_dim_moments(v: Option<&OneDimConvexFn>, b: f64, max: usize) -> Vec<f64> {
    let breaks: Vec<f64> = (0..=16).map(|i| -1.0 + i as f64 / 8.0).collect();
    let w = |y: f64| v.map_or(1.0, |v| (-v.value(b * y)).exp());
    let z = integrate_panels(w, &breaks, 1e-14, 0.0).value;
    (0..=max)
        .map(|k| {
            if k % 2 == 1 && v.is_none() {
                return 0.0;
            }
            integrate_panels(|y| y.powi(k as i32) * w(y), &breaks, 1e-14, 1e-300).value / z
        })
        .collect()
}

fn exact_moments(body: &Body, pot: &Potential, indices: &[Index]) -> Result<Moments> {
    let d = body.dim();
    let mut table = HashMap::with_capacity(indices.len());
    match body {
        Body::Ball { .. } => {
            let max_deg = indices.iter().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0);
            let ln_m0 = ln_radial_density_moment(pot, body, 0, None)?;
            let radius = body.bounding_half_width()?;
            let ln_radial: Vec<f64> = (0..=max_deg)
                .map(|k| {
                    if pot.is_uniform() {
                        Ok((d as f64 / (k as f64 + d as f64)).ln())
                    } else {
                        Ok(ln_radial_density_moment(pot, body, k, None)? - ln_m0 - k as f64 * radius.ln())
                    }
                })
                .collect::<Result<_>>()?;
            for a in indices {
                let v = if a.iter().any(|k| k % 2 == 1) {
                    0.0
                } else {
                    let k = a.iter().sum::<u32>() as usize;
                    (ln_sphere_average(a) + ln_radial[k]).exp()
                };
                table.insert(a.clone(), v);
            }
        }
        Body::LpBall { p, .. } => {
            let lnv0 = d as f64 * ln_gamma(1.0 / p) - ln_gamma(1.0 + d as f64 / p);
            for a in indices {
                let v = if a.iter().any(|k| k % 2 == 1) {
                    0.0
                } else {
                    let s: f64 = a.iter().map(|&k| (k as f64 + 1.0) / p).sum();
                    let ln = a.iter().map(|&k| ln_gamma((k as f64 + 1.0) / p)).sum::<f64>() - ln_gamma(1.0 + s);
                    (ln - lnv0).exp()
                };
                table.insert(a.clone(), v);
            }
        }
        Body::Box { half_width, .. } => {
            let max_deg = indices.iter().flat_map(|a| a.iter().copied()).max().unwrap_or(0) as usize;
            let gauss = OneDimConvexFn::new("x^2/2", |x| 0.5 * x * x, |x| x, |_| 1.0);
            let per_axis: Vec<Vec<f64>> = match pot {
                Potential::Uniform => {
                    let m: Vec<f64> =
                        (0..=max_deg).map(|k| if k % 2 == 1 { 0.0 } else { 1.0 / (k as f64 + 1.0) }).collect();
                    vec![m; d]
                }
                Potential::Product(vs) if vs.len() == d => {
                    vs.iter().map(|v| one_dim_moments(Some(v), *half_width, max_deg)).collect()
                }
                p if p.is_gaussian() => vec![one_dim_moments(Some(&gauss), *half_width, max_deg); d],
                _ => return Err(GapError::NotApplicable("no exact moments for this potential on a box".into())),
            };
            for a in indices {
                let v = a.iter().enumerate().map(|(i, &k)| per_axis[i][k as usize]).product();
                table.insert(a.clone(), v);
            }
        }
        _ => {
            return Err(GapError::NotApplicable(format!("no exact moments for {}", body.kind())));
        }
    }
    // exact normalization despite rounding in the gamma factors
    let zero = vec![0u32; d];
    if let Some(z) = table.get(&zero).copied() {
        table.values_mut().for_each(|v| *v /= z);
    }
    Ok(Moments { table })
}

/// Monte Carlo moments per batch (weights e^{−V} for non-uniform measures).
fn monte_carlo_moments(
    body: &Body,
    pot: &Potential,
    indices: &[Index],
    samples: usize,
    seed: u64,
    batches: usize,
) -> Result<Vec<Moments>> {
    let d = body.dim();
    let b = body.bounding_half_width()?;
    let batches = batches.max(2);
    let per_batch = (samples / batches).max(1);
    let max_pow = indices.iter().flat_map(|a| a.iter().copied()).max().unwrap_or(0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut powers = vec![vec![0.0; max_pow + 1]; d];
    let mut out = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut sums = vec![0.0; indices.len()];
        let mut wsum = 0.0;
        let mut accepted = 0usize;
        while accepted < per_batch {
            for v in x.iter_mut() {
                *v = rng.gen_range(-b..b);
            }
            if !body.contains(&x) {
                continue;
            }
            accepted += 1;
            let w = if pot.is_uniform() { 1.0 } else { (-pot.value(&x)).exp() };
            wsum += w;
            for (i, xi) in x.iter().enumerate() {
                let y = xi / b;
                let mut acc = 1.0;
                for p in powers[i].iter_mut() {
                    *p = acc;
                    acc *= y;
                }
            }
            for (s, a) in sums.iter_mut().zip(indices) {
                let mut t = w;
                for (i, &k) in a.iter().enumerate() {
                    t *= powers[i][k as usize];
                }
                *s += t;
            }
        }
        let table = indices.iter().cloned().zip(sums.into_iter().map(|s| s / wsum)).collect();
        out.push(Moments { table });
    }
    Ok(out)
}

/// Relative pivot threshold for pruning the covariance matrix.
const PRUNE_TOL: f64 = 1e-13;

fn rayleigh_ritz(basis: &[Index], m: &Moments) -> Result<(f64, usize)> {
    let n = basis.len();
    let d = basis[0].len();
    let a = SymMatrix::from_fn(n, |j, k| {
        let mut s = 0.0;
        for i in 0..d {
            let (p, q) = (basis[j][i], basis[k][i]);
            if p > 0 && q > 0 {
                let mut idx: Index = basis[j].iter().zip(&basis[k]).map(|(x, y)| x + y).collect();
                idx[i] -= 2;
                s += (p * q) as f64 * m.get(&idx);
            }
        }
        s
    });
    let b = SymMatrix::from_fn(n, |j, k| {
        let idx: Index = basis[j].iter().zip(&basis[k]).map(|(x, y)| x + y).collect();
        m.get(&idx) - m.get(&basis[j]) * m.get(&basis[k])
    });
    let rank = crate::linalg::pivoted_cholesky(&b, PRUNE_TOL).0.len();
    let lambda = smallest_generalized_eigenvalue(&a, &b, PRUNE_TOL).ok_or(GapError::EmptyBasis)?;
    Ok((lambda, rank))
}

/// Smallest eigenvalue of (A, B) with A = E[∇φⱼ·∇φₖ], B = Cov(φⱼ, φₖ) over
/// all monomials of total degree 1..=degree: an upper bound on λ₁.
pub fn galerkin_upper(problem: &GalerkinProblem) -> Result<GalerkinEstimate> {
    let GalerkinProblem { body, pot, degree, quadrature } = problem;
    if *degree < 1 {
        return Err(invalid("Galerkin degree must be >= 1"));
    }
    if !body.is_bounded() {
        return Err(GapError::Unbounded);
    }
    if let Potential::Product(vs) = pot {
        if vs.len() != body.dim() {
            return Err(invalid("product potential dimension mismatch"));
        }
    }
    let d = body.dim();
    let b = body.bounding_half_width()?;
    let basis = multi_indices(d, 1, *degree);
    let all = multi_indices(d, 0, 2 * degree);
    let scale = 1.0 / (b * b);
    match quadrature {
        Quadrature::Exact => {
            let m = exact_moments(body, pot, &all)?;
            let (lambda, rank) = rayleigh_ritz(&basis, &m)?;
            Ok(GalerkinEstimate { value: lambda * scale, std_error: 0.0, basis_size: basis.len(), rank })
        }
        Quadrature::MonteCarlo { samples, seed, batches } => {
            let parts = monte_carlo_moments(body, pot, &all, *samples, *seed, *batches)?;
            let k = parts.len() as f64;
            let pooled = Moments {
                table: all.iter().map(|a| (a.clone(), parts.iter().map(|p| p.get(a)).sum::<f64>() / k)).collect(),
            };
            let (lambda, rank) = rayleigh_ritz(&basis, &pooled)?;
            let per: Vec<f64> = parts.iter().map(|p| rayleigh_ritz(&basis, p).map(|r| r.0)).collect::<Result<_>>()?;
            let mean = per.iter().sum::<f64>() / k;
            let var = per.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
            Ok(GalerkinEstimate {
                value: lambda * scale,
                std_error: (var / k).sqrt() * scale,
                basis_size: basis.len(),
                rank,
            })
        }
    }
}
