//! DGSM estimates from gradient samples and the Poincaré upper bound on
//! total Sobol indices, S_i ≤ ν_i/(λ₁ Var f).

use std::path::Path;

use serde::Serialize;

use crate::error::{GapError, Result};
use crate::geometry::Body;
use crate::report::{serialize_f64, serialize_f64_slice, BoundReport};

/// Fraction of rows allowed outside the declared body before ingestion fails.
pub const MAX_OUTSIDE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub dim: usize,
    pub x: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    /// Where the rows came from (file path or "memory").
    pub source: String,
    /// Rows dropped because x was outside the body.
    pub rejected: usize,
}

impl SampleSet {
    pub fn new(x: Vec<Vec<f64>>, f: Vec<f64>, grad: Vec<Vec<f64>>) -> Result<Self> {
        let dim = x.first().map_or(0, Vec::len);
        if x.len() != f.len() || x.len() != grad.len() {
            return Err(GapError::Samples("x, f and gradient row counts differ".into()));
        }
        if dim == 0 || x.iter().chain(&grad).any(|r| r.len() != dim) {
            return Err(GapError::Samples("inconsistent or zero dimension".into()));
        }
        Ok(Self { dim, x, f, grad, source: "memory".into(), rejected: 0 })
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Drops rows outside `body`; fails if more than 0.1% of them are.
    pub fn restrict_to(mut self, body: &Body) -> Result<Self> {
        if body.dim() != self.dim {
            return Err(GapError::Samples(format!("samples have dimension {}, body {}", self.dim, body.dim())));
        }
        let keep: Vec<bool> = self.x.iter().map(|x| body.contains(x)).collect();
        let outside = keep.iter().filter(|k| !**k).count();
        if outside as f64 > MAX_OUTSIDE_FRACTION * self.len() as f64 {
            return Err(GapError::Samples(format!("{outside} of {} rows lie outside the body", self.len())));
        }
        let mut it = keep.iter();
        self.x.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.f.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.grad.retain(|_| *it.next().unwrap());
        self.rejected += outside;
        Ok(self)
    }

    /// Reads a CSV with header x1..xd,f,g1..gd.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
        let headers = rdr.headers()?.clone();
        let cols = headers.len();
        if cols < 3 || cols.is_multiple_of(2) {
            return Err(GapError::Samples(format!("expected 2d+1 columns, got {cols}")));
        }
        let d = (cols - 1) / 2;
        let expected: Vec<String> = (1..=d)
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("f".to_string()))
            .chain((1..=d).map(|i| format!("g{i}")))
            .collect();
        for (got, want) in headers.iter().zip(&expected) {
            if got.trim() != want {
                return Err(GapError::Samples(format!("header column {got:?}, expected {want:?}")));
            }
        }
        let (mut x, mut f, mut grad) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GapError::Samples(format!("row {}: {e}", line + 2)))?;
            if vals.len() != cols || vals.iter().any(|v| !v.is_finite()) {
                return Err(GapError::Samples(format!("row {}: bad field count or non-finite value", line + 2)));
            }
            x.push(vals[..d].to_vec());
            f.push(vals[d]);
            grad.push(vals[d + 1..].to_vec());
        }
        let mut s = Self::new(x, f, grad)?;
        s.source = path.display().to_string();
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DgsmEstimate {
    #[serde(serialize_with = "serialize_f64")]
    pub variance: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub variance_std_error: f64,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub dgsm: Vec<f64>,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub dgsm_std_error: Vec<f64>,
}

/// Running sums for the mean and unbiased variance; jackknife values come
/// from leave-one-out updates of the same sums.
struct Sums {
    n: f64,
    s1: f64,
    s2: f64,
}

impl Sums {
    fn new(v: &[f64]) -> Self {
        Self { n: v.len() as f64, s1: v.iter().sum(), s2: v.iter().map(|x| x * x).sum() }
    }

    fn var(&self) -> f64 {
        (self.s2 - self.s1 * self.s1 / self.n) / (self.n - 1.0)
    }

    fn var_without(&self, x: f64) -> f64 {
        let n = self.n - 1.0;
        let s1 = self.s1 - x;
        ((self.s2 - x * x) - s1 * s1 / n) / (n - 1.0)
    }
}

fn jackknife_se(loo: impl Iterator<Item = f64>, n: usize) -> f64 {
    let vals: Vec<f64> = loo.collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss * (n as f64 - 1.0) / n as f64).sqrt()
}

/// Centering keeps s2 − s1²/n well conditioned.
fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

/// ν̂ᵢ = mean of (∂ᵢf)², unbiased variance of f, jackknife standard errors.
pub fn estimate_dgsm(samples: &SampleSet) -> Result<DgsmEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(GapError::Samples(format!("need at least 2 rows, got {n}")));
    }
    let fc = centered(&samples.f);
    let fs = Sums::new(&fc);
    let variance = fs.var();
    let variance_std_error = jackknife_se(fc.iter().map(|&x| fs.var_without(x)), n);
    let mut dgsm = Vec::with_capacity(samples.dim);
    let mut dgsm_std_error = Vec::with_capacity(samples.dim);
    for i in 0..samples.dim {
        let sq: Vec<f64> = samples.grad.iter().map(|g| g[i] * g[i]).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        // jackknife of a mean is s/√n
        let s2 = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        dgsm.push(mean);
        dgsm_std_error.push((s2 / n as f64).sqrt());
    }
    Ok(DgsmEstimate { variance, variance_std_error, dgsm, dgsm_std_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GsaReport {
    #[serde(serialize_with = "serialize_f64")]
    pub variance_hat: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub variance_std_error: f64,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub dgsm: Vec<f64>,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub dgsm_std_error: Vec<f64>,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub sobol_upper: Vec<f64>,
    #[serde(serialize_with = "serialize_f64_slice")]
    pub sobol_upper_std_error: Vec<f64>,
    /// Entries above 1: valid but uninformative.
    pub uninformative: Vec<bool>,
    pub lambda_used: BoundReport,
    /// Which Poincaré constant was applied.
    pub lambda_scope: String,
    pub rows: usize,
    pub rejected_rows: usize,
    pub source: String,
}

/// Sᵢ^upper = ν̂ᵢ/(λ Var f) with λ a certified lower bound (or exact value).
pub fn sobol_upper_bound(samples: &SampleSet, lambda: &BoundReport) -> Result<GsaReport> {
    if !lambda.is_certified_lower() || !(lambda.value > 0.0) || !lambda.value.is_finite() {
        return Err(GapError::Samples(format!(
            "lambda from {} is not a positive certified lower bound",
            lambda.method.name()
        )));
    }
    let est = estimate_dgsm(samples)?;
    if !(est.variance > 0.0) {
        return Err(GapError::Samples("sample variance of f is zero".into()));
    }
    let n = samples.len();
    let lam = lambda.value;
    let fc = centered(&samples.f);
    let fs = Sums::new(&fc);
    let mut upper = Vec::with_capacity(samples.dim);
    let mut upper_se = Vec::with_capacity(samples.dim);
    for i in 0..samples.dim {
        let sq: Vec<f64> = samples.grad.iter().map(|g| g[i] * g[i]).collect();
        let total: f64 = sq.iter().sum();
        upper.push(est.dgsm[i] / (lam * est.variance));
        let loo = sq.iter().zip(&fc).map(|(&g2, &f)| (total - g2) / (n as f64 - 1.0) / (lam * fs.var_without(f)));
        upper_se.push(jackknife_se(loo, n));
    }
    Ok(GsaReport {
        variance_hat: est.variance,
        variance_std_error: est.variance_std_error,
        uninformative: upper.iter().map(|s| *s > 1.0).collect(),
        dgsm: est.dgsm,
        dgsm_std_error: est.dgsm_std_error,
        sobol_upper: upper,
        sobol_upper_std_error: upper_se,
        lambda_used: lambda.clone(),
        lambda_scope: "single domain-level spectral gap of the joint input measure".into(),
        rows: n,
        rejected_rows: samples.rejected,
        source: samples.source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{BoundKind, Method};
    use rand::{Rng, SeedableRng};

    fn uniform_box(n: usize, d: usize, seed: u64, f: impl Fn(&[f64]) -> (f64, Vec<f64>)) -> SampleSet {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (mut xs, mut fs, mut gs) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (v, g) = f(&x);
            xs.push(x);
            fs.push(v);
            gs.push(g);
        }
        SampleSet::new(xs, fs, gs).unwrap()
    }

    fn pi2_4() -> BoundReport {
        BoundReport::new(Method::ExactBox, BoundKind::Exact, std::f64::consts::PI.powi(2) / 4.0)
    }

    #[test]
    fn linear_functions_have_exact_dgsm() {
        let s = uniform_box(100, 3, 1, |x| (x[0], vec![1.0, 0.0, 0.0]));
        let e = estimate_dgsm(&s).unwrap();
        assert_eq!(e.dgsm, vec![1.0, 0.0, 0.0]);
        let s = uniform_box(100, 3, 1, |x| (x.iter().sum(), vec![1.0; 3]));
        assert_eq!(estimate_dgsm(&s).unwrap().dgsm, vec![1.0; 3]);
    }

    #[test]
    fn square_dgsm_within_three_errors() {
        let s = uniform_box(100_000, 2, 2, |x| (x[0] * x[0], vec![2.0 * x[0], 0.0]));
        let e = estimate_dgsm(&s).unwrap();
        assert!((e.dgsm[0] - 4.0 / 3.0).abs() < 3.0 * e.dgsm_std_error[0]);
    }

    #[test]
    fn sobol_upper_for_linear_function() {
        let s = uniform_box(100_000, 3, 3, |x| (x[0], vec![1.0, 0.0, 0.0]));
        let r = sobol_upper_bound(&s, &pi2_4()).unwrap();
        let target = 12.0 / std::f64::consts::PI.powi(2);
        assert!((r.sobol_upper[0] - target).abs() < 3.0 * r.sobol_upper_std_error[0] + 1e-12, "{:?}", r.sobol_upper);
        assert!(r.sobol_upper[0] >= 1.0 && r.uninformative[0]);
        let pw = BoundReport::lower(Method::PayneWeinberger, std::f64::consts::PI.powi(2) / 12.0);
        let loose = sobol_upper_bound(&s, &pw).unwrap();
        assert!((loose.sobol_upper[0] / r.sobol_upper[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn additive_quadratic_total_indices_are_bounded() {
        // f = x1 + x2² on [−1,1]²: Var = 1/3 + 4/45, S1 = (1/3)/Var, S2 = (4/45)/Var
        let s = uniform_box(100_000, 2, 4, |x| (x[0] + x[1] * x[1], vec![1.0, 2.0 * x[1]]));
        let r = sobol_upper_bound(&s, &pi2_4()).unwrap();
        let var = 1.0 / 3.0 + 4.0 / 45.0;
        let truth = [1.0 / 3.0 / var, 4.0 / 45.0 / var];
        for i in 0..2 {
            assert!(truth[i] <= r.sobol_upper[i] + 3.0 * r.sobol_upper_std_error[i], "{i}");
        }
    }

    #[test]
    fn smaller_lambda_never_lowers_the_bound() {
        let s = uniform_box(1000, 2, 5, |x| (x[0] * x[1], vec![x[1], x[0]]));
        let mut prev = vec![0.0; 2];
        for lam in [3.0, 2.0, 1.0, 0.5, 0.1] {
            let r = sobol_upper_bound(&s, &BoundReport::lower(Method::PayneWeinberger, lam)).unwrap();
            for i in 0..2 {
                assert!(r.sobol_upper[i] >= prev[i]);
            }
            prev = r.sobol_upper;
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let s = uniform_box(50, 2, 6, |_| (1.0, vec![0.0, 0.0]));
        assert!(sobol_upper_bound(&s, &pi2_4()).is_err());
        let one = uniform_box(1, 2, 6, |x| (x[0], vec![1.0, 0.0]));
        assert!(estimate_dgsm(&one).is_err());
        let s = uniform_box(50, 2, 6, |x| (x[0], vec![1.0, 0.0]));
        let bad = BoundReport::inapplicable(Method::Orlicz, BoundKind::Lower, "no");
        assert!(sobol_upper_bound(&s, &bad).is_err());
        let upper = BoundReport::new(Method::WeinbergerUpper, BoundKind::Upper, 3.0);
        assert!(sobol_upper_bound(&s, &upper).is_err());
    }

    #[test]
    fn rows_outside_the_body_are_counted() {
        let mut s = uniform_box(2000, 2, 7, |x| (x[0], vec![1.0, 0.0]));
        let cube = Body::cube(1.0, 2).unwrap();
        s.x[0] = vec![5.0, 0.0];
        let kept = s.clone().restrict_to(&cube).unwrap();
        assert_eq!((kept.len(), kept.rejected), (1999, 1));
        s.x[1] = vec![5.0, 0.0];
        s.x[2] = vec![5.0, 0.0];
        assert!(s.restrict_to(&cube).is_err());
    }
}
