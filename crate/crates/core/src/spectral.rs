//! Periodic Fourier collocation on a uniform grid.
//!
//! Differentiation is applied as a diagonal multiplier in frequency space:
//! `D_m v = IFFT(Λ^m · FFT(v))`. The forward transform is unnormalized and the
//! inverse carries the `1/N` factor, so forward followed by inverse is the
//! identity. With this convention Parseval reads
//!
//! ```text
//! ‖v‖_h² = h Σ_j |v_j|² = (b − a)/N · (1/N) Σ_l |v̂_l|²
//! ```
//!
//! The operators themselves do not depend on the normalization.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Tolerance on the imaginary residue left after applying a real operator to
/// real data, relative to `max(1, max|input|)`.
pub const REAL_RESIDUE_TOL: f64 = 1e-11;

/// Uniform periodic grid on `[a, b)` with `N` collocation points and the
/// Fourier multipliers of the first and second derivative.
#[derive(Clone)]
pub struct SpectralGrid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
    mu: f64,
    lambda1: Vec<Complex64>,
    lambda2: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

/// Signed wavenumber index of FFT slot `j` for an even `n`, with the Nyquist
/// slot mapped to `+n/2`.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl SpectralGrid {
    /// Builds the grid `x_j = a + j h`, `h = (b − a)/N`.
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got a = {a}, b = {b}")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N must be even and >= 4, got {n}")));
        }
        let len = b - a;
        let h = len / n as f64;
        let mu = 2.0 * PI / len;

        let half = n / 2;
        let lambda1 = (0..n)
            .map(|j| {
                if j == half {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, mu * wavenumber(j, n) as f64)
                }
            })
            .collect();
        let lambda2 = (0..n)
            .map(|j| {
                let k = mu * wavenumber(j, n) as f64;
                -(k * k)
            })
            .collect();

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        Ok(Self {
            a,
            b,
            n,
            h,
            mu,
            lambda1,
            lambda2,
            fwd,
            inv,
        })
    }

    /// Grid with mesh size `h` on `[a, b]`; `(b − a)/h` must be an even integer.
    pub fn with_mesh(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("mesh size must be positive, got {h}")));
        }
        let ratio = (b - a) / h;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "(b - a)/h = {ratio} is not an integer"
            )));
        }
        Self::new(a, b, n as usize)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda1(&self) -> &[Complex64] {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &[f64] {
        &self.lambda2
    }

    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
    }

    /// Inverse DFT in place, including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Forward transform of a real vector.
    pub fn forward_real(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// First derivative `D_1 v`.
    pub fn apply_d1(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(v.len())?;
        let mut buf = v.to_vec();
        self.forward(&mut buf);
        for (z, l) in buf.iter_mut().zip(&self.lambda1) {
            *z *= l;
        }
        self.inverse(&mut buf);
        Ok(buf)
    }

    /// Second derivative `D_2 v`.
    pub fn apply_d2(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(v.len())?;
        let mut buf = v.to_vec();
        self.forward(&mut buf);
        for (z, l) in buf.iter_mut().zip(&self.lambda2) {
            *z *= l;
        }
        self.inverse(&mut buf);
        Ok(buf)
    }

    /// `D_1 v` for real `v`; the imaginary residue is checked and dropped.
    pub fn apply_d1_real(&self, v: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let out = self.apply_d1(&z)?;
        take_real(&out, max_abs(v), "apply_d1_real")
    }

    /// `D_2 v` for real `v`; the imaginary residue is checked and dropped.
    pub fn apply_d2_real(&self, v: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let out = self.apply_d2(&z)?;
        take_real(&out, max_abs(v), "apply_d2_real")
    }

    /// Discrete inner product `⟨u, v⟩_h = h Σ u_j conj(v_j)`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let s: Complex64 = u.iter().zip(v).map(|(x, y)| x * y.conj()).sum();
        Ok(s * self.h)
    }

    /// Real inner product `h Σ u_j v_j`.
    pub fn inner_real(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        Ok(self.h * u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>())
    }

    /// `h Σ v_j`, i.e. `⟨v, 1⟩_h`.
    pub fn integral(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v.len())?;
        Ok(self.h * v.iter().sum::<f64>())
    }

    /// Discrete L² norm `‖v‖_h`.
    pub fn norm(&self, v: &[Complex64]) -> Result<f64> {
        self.check_len(v.len())?;
        Ok((self.h * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt())
    }

    /// `⟨D_2 B, B⟩_h` evaluated as `h/N Σ_l λ²_l |B̂_l|²`, real by construction.
    pub fn d2_form(&self, v: &[Complex64]) -> Result<f64> {
        self.check_len(v.len())?;
        let mut buf = v.to_vec();
        self.forward(&mut buf);
        let s: f64 = buf
            .iter()
            .zip(&self.lambda2)
            .map(|(z, l)| l * z.norm_sqr())
            .sum();
        Ok(s * self.h / self.n as f64)
    }
}

/// `‖v‖_{h,∞} = max_j |v_j|`.
pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Drops the imaginary part after checking it is round-off relative to `scale`.
pub fn take_real(v: &[Complex64], scale: f64, context: &'static str) -> Result<Vec<f64>> {
    let residue = v.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    if residue > REAL_RESIDUE_TOL * scale.max(1.0) {
        return Err(Error::ImaginaryResidue { residue, context });
    }
    Ok(v.iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn grid_arithmetic() {
        let g = SpectralGrid::new(-32.0, 32.0, 64).unwrap();
        assert_eq!(g.h(), 1.0);
        assert!((g.mu() - PI / 32.0).abs() < 1e-16);
        assert_eq!(g.lambda1()[32], Complex64::new(0.0, 0.0));
        assert!((g.lambda2()[32] + PI * PI).abs() < 1e-13);
        assert!((g.h() * g.len() as f64 - 64.0).abs() < 1e-14);
        for (l1, l2) in g.lambda1().iter().zip(g.lambda2()) {
            assert_eq!(l1.re, 0.0);
            assert!(*l2 <= 0.0);
        }
        // ordering 0, 1, .., N/2-1, N/2, -N/2+1, .., -1
        assert!((g.lambda1()[1].im - g.mu()).abs() < 1e-16);
        assert!((g.lambda1()[63].im + g.mu()).abs() < 1e-16);
        assert!((g.lambda2()[33] + (31.0 * g.mu()).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(0.0, 1.0, 7).is_err());
        assert!(SpectralGrid::new(0.0, 1.0, 2).is_err());
        assert!(SpectralGrid::new(1.0, 1.0, 8).is_err());
        assert!(SpectralGrid::new(2.0, 1.0, 8).is_err());
        assert!(SpectralGrid::with_mesh(-32.0, 32.0, 0.3).is_err());
        assert_eq!(SpectralGrid::with_mesh(-32.0, 32.0, 1.0 / 16.0).unwrap().len(), 1024);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = SpectralGrid::new(-32.0, 32.0, 64).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 64];
        assert!(norm_inf(&g.apply_d1(&ones).unwrap()) < 1e-13);
        assert!(norm_inf(&g.apply_d2(&ones).unwrap()) < 1e-13);
    }

    #[test]
    fn single_mode_derivatives() {
        let g = SpectralGrid::new(-32.0, 32.0, 64).unwrap();
        let mu = g.mu();
        let s: Vec<Complex64> = g.points().iter().map(|&x| (mu * x).sin().into()).collect();
        let c: Vec<Complex64> = g.points().iter().map(|&x| (mu * x).cos().into()).collect();
        let d1 = g.apply_d1(&s).unwrap();
        let d2 = g.apply_d2(&c).unwrap();
        for j in 0..64 {
            assert!((d1[j] - c[j] * mu).norm() < 1e-12);
            assert!((d2[j] + c[j] * mu * mu).norm() < 1e-12);
        }
    }

    #[test]
    fn real_input_gives_real_output() {
        let g = SpectralGrid::new(-5.0, 7.0, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..48).map(|_| rng.random_range(-3.0..3.0)).collect();
        let z: Vec<Complex64> = v.iter().map(|&x| x.into()).collect();
        let scale = max_abs(&v);
        for out in [g.apply_d1(&z).unwrap(), g.apply_d2(&z).unwrap()] {
            let im = out.iter().fold(0.0_f64, |m, w| m.max(w.im.abs()));
            assert!(im <= 1e-12 * scale);
        }
        assert!(g.apply_d1_real(&v).is_ok());
    }

    #[test]
    fn d2_matches_d1_squared_without_nyquist() {
        let g = SpectralGrid::new(-32.0, 32.0, 64).unwrap();
        let mut v = random_complex(64, 3);
        g.forward(&mut v);
        v[32] = Complex64::new(0.0, 0.0);
        g.inverse(&mut v);
        let d2 = g.apply_d2(&v).unwrap();
        let d11 = g.apply_d1(&g.apply_d1(&v).unwrap()).unwrap();
        for (x, y) in d2.iter().zip(&d11) {
            assert!((x - y).norm() < 1e-11);
        }
    }

    #[test]
    fn inner_product_basics() {
        let g = SpectralGrid::new(-32.0, 32.0, 128).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 128];
        assert!((g.inner(&ones, &ones).unwrap().re - 64.0).abs() < 1e-12);
        let u = random_complex(128, 1);
        let v = random_complex(128, 2);
        let uv = g.inner(&u, &v).unwrap();
        let vu = g.inner(&v, &u).unwrap();
        assert!((uv - vu.conj()).norm() < 1e-14);
        assert!(g.inner(&u, &v[..3]).is_err());
    }

    #[test]
    fn d2_form_is_real_and_matches_physical_space() {
        let g = SpectralGrid::new(-10.0, 10.0, 64).unwrap();
        let b = random_complex(64, 11);
        let d2b = g.apply_d2(&b).unwrap();
        let ip = g.inner(&d2b, &b).unwrap();
        let nb = g.norm(&b).unwrap();
        assert!(ip.im.abs() <= 1e-12 * nb * nb);
        assert!((ip.re - g.d2_form(&b).unwrap()).abs() <= 1e-12 * nb * nb);
    }

    #[test]
    fn parseval_with_unnormalized_forward() {
        let g = SpectralGrid::new(-3.0, 9.0, 32).unwrap();
        let v = random_complex(32, 5);
        let mut vh = v.clone();
        g.forward(&mut vh);
        let lhs = g.norm(&v).unwrap().powi(2);
        let rhs = (g.b() - g.a()) / 32.0 * vh.iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
        g.inverse(&mut vh);
        for (x, y) in v.iter().zip(&vh) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
