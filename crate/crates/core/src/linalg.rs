//! Dense LU with partial pivoting for the small per-mode stage systems.
//!
//! Matrices are square, row-major and stored in flat slices so that one
//! factorization per Fourier mode can live in a single contiguous buffer.

use num_complex::Complex64;

/// Factorizes `m` (dimension `n`) in place. Returns `false` if a zero pivot
/// is met.
pub fn lu_factor(m: &mut [Complex64], piv: &mut [usize], n: usize) -> bool {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(piv.len(), n);
    for k in 0..n {
        let (p, big) = (k..n)
            .map(|r| (r, m[r * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(big > 0.0) || !big.is_finite() {
            return false;
        }
        piv[k] = p;
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
        }
        let d = m[k * n + k];
        for r in k + 1..n {
            let f = m[r * n + k] / d;
            m[r * n + k] = f;
            for c in k + 1..n {
                let v = m[k * n + c];
                m[r * n + c] -= f * v;
            }
        }
    }
    true
}

/// Solves `LU x = P b` in place using factors from [`lu_factor`].
pub fn lu_solve(m: &[Complex64], piv: &[usize], n: usize, x: &mut [Complex64]) {
    debug_assert_eq!(x.len(), n);
    for k in 0..n {
        x.swap(k, piv[k]);
    }
    for r in 0..n {
        let mut acc = x[r];
        for c in 0..r {
            acc -= m[r * n + c] * x[c];
        }
        x[r] = acc;
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= m[r * n + c] * x[c];
        }
        x[r] = acc / m[r * n + r];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 1..=6 {
            let a: Vec<Complex64> = (0..n * n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut rhs: Vec<Complex64> = (0..n)
                .map(|r| (0..n).map(|c| a[r * n + c] * x[c]).sum())
                .collect();
            let mut f = a.clone();
            let mut piv = vec![0; n];
            assert!(lu_factor(&mut f, &mut piv, n));
            lu_solve(&f, &piv, n, &mut rhs);
            for (u, v) in rhs.iter().zip(&x) {
                assert!((u - v).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn detects_singular() {
        let mut m = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(4.0, 0.0)];
        let mut piv = vec![0; 2];
        assert!(!lu_factor(&mut m, &mut piv, 2));
    }
}
