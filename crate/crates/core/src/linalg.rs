//! Small dense and tridiagonal symmetric eigen-solvers.

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`
/// (negative pivots of the LDLᵀ factorization of T − xI).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0_f64;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = if i == 0 { diag[0] - x } else { diag[i] - x - e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix
/// by bisection on the Sturm count.
pub fn tridiag_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    assert!(k < n, "eigenvalue index out of range");
    assert_eq!(off.len() + 1, n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mut a = m.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = a[idx(i, j)] * a[idx(i, j)];
                total += v;
                if i != j {
                    off += v;
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Diagonally pivoted Cholesky factorization B[perm, perm] = L Lᵀ that stops
/// once the largest remaining pivot drops below `rel_tol` times the largest
/// diagonal entry. Returns the kept indices (in pivot order) and L as rows.
pub fn pivoted_cholesky(b: &SymMatrix, rel_tol: f64) -> (Vec<usize>, Vec<Vec<f64>>) {
    let n = b.n;
    let mut work = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = (0..n).map(|i| b.get(i, i)).fold(0.0_f64, f64::max);
    let mut l = vec![vec![0.0; n]; n];
    let mut rank = 0;
    for k in 0..n {
        let (piv, pval) = (k..n).map(|i| (i, work.get(perm[i], perm[i]))).max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        if !(pval > rel_tol * scale) {
            break;
        }
        perm.swap(k, piv);
        l.swap(k, piv);
        let lkk = pval.sqrt();
        l[k][k] = lkk;
        for i in (k + 1)..n {
            let mut v = work.get(perm[i], perm[k]);
            for j in 0..k {
                v -= l[i][j] * l[k][j];
            }
            l[i][k] = v / lkk;
        }
        for i in (k + 1)..n {
            let d = work.get(perm[i], perm[i]) - l[i][k] * l[i][k];
            let pi = perm[i];
            work.data[pi * n + pi] = d;
        }
        rank += 1;
    }
    let kept = perm[..rank].to_vec();
    let rows = l.into_iter().take(rank).map(|mut r| {
        r.truncate(rank);
        r
    });
    (kept, rows.collect())
}

/// Smallest eigenvalue of the generalized problem A v = λ B v, restricting
/// to the numerically non-singular part of B.
pub fn smallest_generalized_eigenvalue(a: &SymMatrix, b: &SymMatrix, rel_tol: f64) -> Option<f64> {
    let (kept, l) = pivoted_cholesky(b, rel_tol);
    let r = kept.len();
    if r == 0 {
        return None;
    }
    // C = L⁻¹ A_kk L⁻ᵀ
    let mut y = vec![vec![0.0; r]; r]; // Y = L⁻¹ A_kk
    for col in 0..r {
        for i in 0..r {
            let mut v = a.get(kept[i], kept[col]);
            for j in 0..i {
                v -= l[i][j] * y[j][col];
            }
            y[i][col] = v / l[i][i];
        }
    }
    let mut c = SymMatrix::zeros(r);
    // C = Y L⁻ᵀ, solve row-wise: C[i,:] Lᵀ = Y[i,:]
    for i in 0..r {
        let mut row = vec![0.0; r];
        for j in 0..r {
            let mut v = y[i][j];
            for k in 0..j {
                v -= row[k] * l[j][k];
            }
            row[j] = v / l[j][j];
        }
        for j in 0..r {
            c.data[i * r + j] = row[j];
        }
    }
    let sym = SymMatrix::from_fn(r, |i, j| 0.5 * (c.data[i * r + j] + c.data[j * r + i]));
    jacobi_eigenvalues(&sym).first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_laplacian_eigenvalues() {
        // Dirichlet 1D Laplacian: 2 − 2cos(kπ/(n+1))
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in [0, 1, 7, 49] {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            let got = tridiag_eigenvalue(&diag, &off, k);
            assert!((got - want).abs() < 1e-13, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn jacobi_matches_tridiagonal_bisection() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.3).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 0.5 - 0.07 * i as f64).collect();
        let m = SymMatrix::from_fn(n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                off[j]
            } else {
                0.0
            }
        });
        let eig = jacobi_eigenvalues(&m);
        for (k, e) in eig.iter().enumerate() {
            assert!((e - tridiag_eigenvalue(&diag, &off, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_problem_reduces_correctly() {
        // A = diag(2, 6), B = diag(1, 2) → eigenvalues 2, 3
        let a = SymMatrix::from_fn(2, |i, j| if i == j { [2.0, 6.0][i] } else { 0.0 });
        let b = SymMatrix::from_fn(2, |i, j| if i == j { [1.0, 2.0][i] } else { 0.0 });
        let l = smallest_generalized_eigenvalue(&a, &b, 1e-14).unwrap();
        assert!((l - 2.0).abs() < 1e-14);
        // singular B: second basis function duplicates the first
        let b2 = SymMatrix::from_fn(2, |_, _| 1.0);
        let a2 = SymMatrix::from_fn(2, |_, _| 3.0);
        let l2 = smallest_generalized_eigenvalue(&a2, &b2, 1e-12).unwrap();
        assert!((l2 - 3.0).abs() < 1e-12);
    }
}
