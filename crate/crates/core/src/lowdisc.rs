//! Halton-based deterministic direction sampling on the unit sphere.
//!
//! Direction k (0-based) for a given seed uses Halton index
//! `1 + seed * SEED_STRIDE + k`; coordinates come in pairs from consecutive
//! prime bases mapped through Box–Muller, then normalized.

const SEED_STRIDE: u64 = 1_000_003;

pub(crate) fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

pub(crate) fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let pairs = dim.div_ceil(2);
    let bases = primes(2 * pairs);
    (0..count as u64)
        .map(|k| {
            let idx = 1 + seed.wrapping_mul(SEED_STRIDE) + k;
            let mut v = Vec::with_capacity(2 * pairs);
            for j in 0..pairs {
                let u1 = radical_inverse(idx, bases[2 * j]).max(f64::MIN_POSITIVE);
                let u2 = radical_inverse(idx, bases[2 * j + 1]);
                let rad = if dim == 2 { 1.0 } else { (-2.0 * u1.ln()).sqrt() };
                let ang = 2.0 * std::f64::consts::PI * u2;
                v.push(rad * ang.cos());
                v.push(rad * ang.sin());
            }
            v.truncate(dim);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
            } else {
                v[0] = 1.0;
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base_two() {
        let v: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let a = sphere_directions(5, 100, 3);
        let b = sphere_directions(5, 100, 3);
        assert_eq!(a, b);
        for v in &a {
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert_ne!(a, sphere_directions(5, 100, 4));
    }
}
