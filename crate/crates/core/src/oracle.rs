//! Brute-force references for validation: dense collocation differentiation
//! matrices, a damped-Newton solve of the full stage system, and adaptive
//! quadrature. All of these are O(N²) or worse and capped to small sizes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::StageSlopes;
use crate::model::{FieldState, Params};
use crate::spectral::{wavenumber, SpectralGrid};
use crate::tableau::Tableau;

pub const MAX_DENSE_N: usize = 128;
pub const MAX_NEWTON_N: usize = 32;

/// Dense differentiation matrix of order `m` with entries `d^m X_k(x_j)/dx^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub order: u32,
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|j| (0..n).map(|k| v[k] * self.matrix[(j, k)]).sum())
            .collect()
    }

    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// `max |M − σMᵀ|` with `σ = −1` for odd order, `+1` for even.
    pub fn symmetry_defect(&self) -> f64 {
        let sign = if self.order % 2 == 1 { -1.0 } else { 1.0 };
        let t = self.matrix.transpose() * sign;
        (&self.matrix - t).amax()
    }
}

/// Differentiates the trigonometric interpolation basis
/// `X_k(x) = (1/N) Σ_{l=−N/2}^{N/2} (1/a_l) e^{ilμ(x − x_k)}`, `a_{±N/2} = 2`,
/// term by term at every collocation point.
pub fn dense_diff_matrix(grid: &SpectralGrid, order: u32) -> Result<DenseOperator> {
    let n = grid.len();
    if !(order == 1 || order == 2) {
        return Err(Error::Oracle(format!("derivative order must be 1 or 2, got {order}")));
    }
    if n > MAX_DENSE_N {
        return Err(Error::Oracle(format!("dense operators are capped at N = {MAX_DENSE_N}, got {n}")));
    }
    let half = (n / 2) as i64;
    let mu = grid.mu();
    let mut m = DMatrix::zeros(n, n);
    let mut worst_im = 0.0_f64;
    for j in 0..n {
        for k in 0..n {
            let dx = grid.x(j) - grid.x(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for l in -half..=half {
                let weight = if l.abs() == half { 0.5 } else { 1.0 };
                let factor = Complex64::new(0.0, l as f64 * mu).powu(order);
                acc += factor * Complex64::from_polar(weight, l as f64 * mu * dx);
            }
            acc /= n as f64;
            worst_im = worst_im.max(acc.im.abs());
            m[(j, k)] = acc.re;
        }
    }
    let scale = (mu * half as f64).powi(order as i32);
    if worst_im > 1e-10 * scale.max(1.0) {
        return Err(Error::Oracle(format!("dense operator has imaginary residue {worst_im:e}")));
    }
    Ok(DenseOperator { order, matrix: m })
}

/// Dense matrix of a spectral operator assembled column by column from its
/// FFT application; used to compare the two constructions.
pub fn fft_operator_matrix(grid: &SpectralGrid, order: u32) -> Result<DMatrix<Complex64>> {
    let n = grid.len();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        let col = match order {
            1 => grid.apply_d1(&e)?,
            2 => grid.apply_d2(&e)?,
            _ => return Err(Error::Oracle(format!("unsupported order {order}"))),
        };
        for j in 0..n {
            out[(j, k)] = col[j];
        }
    }
    Ok(out)
}

/// Zeroes the Nyquist coefficient of `v` by direct DFT (no FFT involved).
pub fn project_out_nyquist(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let alt: f64 = v.iter().enumerate().map(|(j, x)| if j % 2 == 0 { *x } else { -*x }).sum::<f64>() / n as f64;
    v.iter()
        .enumerate()
        .map(|(j, x)| if j % 2 == 0 { x - alt } else { x + alt })
        .collect()
}

struct StageProblem<'a> {
    params: &'a Params,
    tableau: &'a Tableau,
    tau: f64,
    state: &'a FieldState,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
}

impl StageProblem<'_> {
    fn n(&self) -> usize {
        self.state.len()
    }

    fn unpack(&self, z: &DVector<f64>) -> StageSlopes {
        let (n, s) = (self.n(), self.tableau.s);
        let mut k = StageSlopes::zeros(s, n);
        for i in 0..s {
            let base = 5 * n * i;
            for p in 0..n {
                k.k1[i][p] = Complex64::new(z[base + p], z[base + n + p]);
                k.k2[i][p] = z[base + 2 * n + p];
                k.k3[i][p] = z[base + 3 * n + p];
                k.k4[i][p] = z[base + 4 * n + p];
            }
        }
        k
    }

    /// Stage equations written as `k − f(Y^n + τ A k) = 0`.
    fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        let (n, s) = (self.n(), self.tableau.s);
        let p = self.params;
        let k = self.unpack(z);
        let st = self.state;
        let mut g = DVector::zeros(5 * n * s);
        for i in 0..s {
            let mut br = DVector::from_iterator(n, st.b.iter().map(|c| c.re));
            let mut bi = DVector::from_iterator(n, st.b.iter().map(|c| c.im));
            let mut rho = DVector::from_column_slice(&st.rho);
            let mut u = DVector::from_column_slice(&st.u);
            let mut phi = DVector::from_column_slice(&st.phi);
            for j in 0..s {
                let w = self.tau * self.tableau.a(i, j);
                for q in 0..n {
                    br[q] += w * k.k1[j][q].re;
                    bi[q] += w * k.k1[j][q].im;
                    rho[q] += w * k.k2[j][q];
                    u[q] += w * k.k3[j][q];
                    phi[q] += w * k.k4[j][q];
                }
            }
            let d2r = &self.d2 * &br;
            let d2i = &self.d2 * &bi;
            let f2 = DVector::from_iterator(n, (0..n).map(|q| -u[q] + p.nu() * rho[q] - p.kappa() * phi[q]));
            let f3 = DVector::from_iterator(
                n,
                (0..n).map(|q| -p.beta() * rho[q] + p.nu() * u[q] + 0.5 * p.kappa() * p.nu() * phi[q]),
            );
            let k2 = &self.d1 * f2;
            let k3 = &self.d1 * f3;
            let base = 5 * n * i;
            for q in 0..n {
                let bq = Complex64::new(br[q], bi[q]);
                let coupling = p.kappa() * (u[q] - 0.5 * p.nu() * rho[q] + p.q() * phi[q]);
                let inner = Complex64::new(d2r[q], d2i[q]) * p.omega() - bq * coupling;
                let k1 = Complex64::i() * inner;
                g[base + q] = k.k1[i][q].re - k1.re;
                g[base + n + q] = k.k1[i][q].im - k1.im;
                g[base + 2 * n + q] = k.k2[i][q] - k2[q];
                g[base + 3 * n + q] = k.k3[i][q] - k3[q];
                g[base + 4 * n + q] = k.k4[i][q] - 2.0 * (bq.conj() * k.k1[i][q]).re;
            }
        }
        g
    }
}

/// Solves the coupled stage equations with damped Newton on a dense
/// forward-difference Jacobian, to a sup-norm residual of `1e-13`.
pub fn newton_stage_solve(grid: &SpectralGrid, params: &Params, tableau: &Tableau, tau: f64, state: &FieldState) -> Result<StageSlopes> {
    const TOL: f64 = 1e-13;
    const MAX_ITER: usize = 50;
    const FD_STEP: f64 = 1e-7;

    let n = grid.len();
    if n > MAX_NEWTON_N {
        return Err(Error::Oracle(format!("Newton oracle is capped at N = {MAX_NEWTON_N}, got {n}")));
    }
    state.check_len(n)?;
    let problem = StageProblem {
        params,
        tableau,
        tau,
        state,
        d1: dense_diff_matrix(grid, 1)?.matrix,
        d2: dense_diff_matrix(grid, 2)?.matrix,
    };
    let dim = 5 * n * tableau.s;
    let mut z = DVector::zeros(dim);
    let mut g = problem.residual(&z);
    for _ in 0..MAX_ITER {
        let gnorm = g.amax();
        if gnorm <= TOL {
            return Ok(problem.unpack(&z));
        }
        let mut jac = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let h = FD_STEP * z[c].abs().max(1.0);
            let mut zp = z.clone();
            zp[c] += h;
            let col = (problem.residual(&zp) - &g) / h;
            jac.set_column(c, &col);
        }
        let step = jac
            .lu()
            .solve(&(-&g))
            .ok_or_else(|| Error::Oracle("singular Newton Jacobian".into()))?;
        let mut alpha = 1.0;
        loop {
            let trial = &z + &step * alpha;
            let gt = problem.residual(&trial);
            if gt.amax() < gnorm || alpha < 1e-4 {
                z = trial;
                g = gt;
                break;
            }
            alpha *= 0.5;
        }
    }
    if g.amax() <= TOL {
        return Ok(problem.unpack(&z));
    }
    Err(Error::Oracle(format!("Newton did not converge: residual {:e}", g.amax())))
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` on `[a, b]`.
pub fn quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 40;
    let f = &f;
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (val, err) = gauss_kronrod15(f, lo, hi);
        if err <= t || (hi - lo).abs() < 1e-12 * (b - a).abs() {
            total += val;
        } else if depth >= MAX_DEPTH {
            return Err(Error::Oracle(format!("quadrature tolerance {tol:e} not reached on [{lo}, {hi}]")));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t, depth + 1));
            stack.push((mid, hi, 0.5 * t, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("quadrature"));
    }
    Ok(total)
}

fn gauss_kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Sup-norm distance between FFT and dense application of `D_m` on the
/// columns of `samples`.
pub fn max_operator_mismatch(grid: &SpectralGrid, dense: &DenseOperator, samples: &[Vec<Complex64>]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for v in samples {
        let fast = match dense.order {
            1 => grid.apply_d1(v)?,
            _ => grid.apply_d2(v)?,
        };
        for (a, b) in fast.iter().zip(dense.apply(v)) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Helper used by tests: wavenumber of FFT slot `j`.
pub fn slot_wavenumber(j: usize, n: usize) -> i64 {
    wavenumber(j, n)
}
