//! Fully discrete FPRK-s time stepping.
//!
//! Every linear term of the extended system is diagonal in Fourier space, so
//! the stage equations split into one small dense system per mode: an `s×s`
//! block for the `B` slopes and a `2s×2s` block coupling the `ρ` and `u`
//! slopes. Those blocks depend only on `(τ, A, grid)` and are factorized once.
//! The nonlinear terms are lagged and resolved by fixed-point iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, lu_solve};
use crate::model::{FieldState, Params};
use crate::spectral::{max_abs, take_real, SpectralGrid};
use crate::tableau::Tableau;

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Starting slopes of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    /// Slopes set to the current field values.
    #[default]
    State,
    Zero,
    /// Slopes set to the right-hand side evaluated at the current state.
    ExplicitEuler,
}

/// What to do when the stage iteration hits the iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Abort,
    /// Keep the last iterate and continue.
    #[default]
    Warn,
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abort" => Ok(Self::Abort),
            "warn" => Ok(Self::Warn),
            other => Err(Error::Config(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    /// Largest sup-norm change of the `B`, `ρ`, `u` slopes in the last sweep.
    pub final_residual: f64,
    pub converged: bool,
}

/// Stage slopes `k¹..k⁴`, indexed `[stage][grid point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSlopes {
    pub k1: Vec<Vec<Complex64>>,
    pub k2: Vec<Vec<f64>>,
    pub k3: Vec<Vec<f64>>,
    pub k4: Vec<Vec<f64>>,
}

impl StageSlopes {
    pub fn zeros(s: usize, n: usize) -> Self {
        Self {
            k1: vec![vec![ZERO; n]; s],
            k2: vec![vec![0.0; n]; s],
            k3: vec![vec![0.0; n]; s],
            k4: vec![vec![0.0; n]; s],
        }
    }

    /// Largest entrywise difference over all four slope families.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        for (a, b) in self.k1.iter().flatten().zip(other.k1.iter().flatten()) {
            d = d.max((a - b).norm());
        }
        for (x, y) in [(&self.k2, &other.k2), (&self.k3, &other.k3), (&self.k4, &other.k4)] {
            for (a, b) in x.iter().flatten().zip(y.iter().flatten()) {
                d = d.max((a - b).abs());
            }
        }
        d
    }
}

/// Stage values `B_ni, ρ_ni, u_ni, φ_ni` built from slopes.
#[derive(Debug, Clone)]
pub struct StageValues {
    pub b: Vec<Vec<Complex64>>,
    pub rho: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

/// `Y_ni = Y^n + τ Σ_j a_ij k_j` for every field.
pub fn stage_values(tableau: &Tableau, tau: f64, state: &FieldState, k: &StageSlopes) -> StageValues {
    let s = tableau.s;
    let n = state.len();
    let mut out = StageValues {
        b: vec![state.b.clone(); s],
        rho: vec![state.rho.clone(); s],
        u: vec![state.u.clone(); s],
        phi: vec![state.phi.clone(); s],
    };
    for i in 0..s {
        for j in 0..s {
            let w = tau * tableau.a(i, j);
            if w == 0.0 {
                continue;
            }
            for p in 0..n {
                out.b[i][p] += k.k1[j][p] * w;
                out.rho[i][p] += w * k.k2[j][p];
                out.u[i][p] += w * k.k3[j][p];
                out.phi[i][p] += w * k.k4[j][p];
            }
        }
    }
    out
}

fn b_stage_values(tableau: &Tableau, tau: f64, b0: &[Complex64], k1: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let s = tableau.s;
    let mut out = vec![b0.to_vec(); s];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, kj) in k1.iter().enumerate() {
            let w = tau * tableau.a(i, j);
            if w != 0.0 {
                for (o, kv) in row.iter_mut().zip(kj) {
                    *o += kv * w;
                }
            }
        }
    }
    out
}

fn real_scale(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.re.abs()))
}

/// Per-mode factorized stage systems plus iteration settings for one
/// `(grid, params, tableau, τ)` combination. Immutable after construction.
#[derive(Debug, Clone)]
pub struct StageSolver {
    grid: SpectralGrid,
    params: Params,
    tableau: Tableau,
    tau: f64,
    tol: f64,
    max_iter: usize,
    guess: InitialGuess,
    b_lu: Vec<Complex64>,
    b_piv: Vec<usize>,
    ac_lu: Vec<Complex64>,
    ac_piv: Vec<usize>,
}

/// `B`-block of mode `j`: `I_s − iτω λ²_j A`.
pub fn b_block(tableau: &Tableau, tau: f64, omega: f64, lambda2: f64) -> Vec<Complex64> {
    let s = tableau.s;
    let mut m = vec![ZERO; s * s];
    for p in 0..s {
        for r in 0..s {
            let delta = if p == r { 1.0 } else { 0.0 };
            m[p * s + r] = Complex64::new(delta, -tau * omega * lambda2 * tableau.a(p, r));
        }
    }
    m
}

/// Acoustic block of mode `j`:
/// `[[I − ντλ¹A, τλ¹A], [βτλ¹A, I − ντλ¹A]]`.
pub fn acoustic_block(tableau: &Tableau, tau: f64, nu: f64, beta: f64, lambda1: Complex64) -> Vec<Complex64> {
    let s = tableau.s;
    let d = 2 * s;
    let mut m = vec![ZERO; d * d];
    for p in 0..s {
        for r in 0..s {
            let ta = lambda1 * (tau * tableau.a(p, r));
            let delta = if p == r { Complex64::new(1.0, 0.0) } else { ZERO };
            m[p * d + r] = delta - ta * nu;
            m[p * d + s + r] = ta;
            m[(s + p) * d + r] = ta * beta;
            m[(s + p) * d + s + r] = delta - ta * nu;
        }
    }
    m
}

impl StageSolver {
    /// Factorizes both per-mode blocks for every mode. `tau` may be negative
    /// (backward steps) but not zero.
    pub fn new(grid: &SpectralGrid, params: &Params, tableau: &Tableau, tau: f64, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(Error::InvalidSolver(format!("tau must be finite and nonzero, got {tau}")));
        }
        if !(tol > 0.0) || max_iter < 1 {
            return Err(Error::InvalidSolver(format!("need tol > 0 and max_iter >= 1 (tol = {tol}, max_iter = {max_iter})")));
        }
        let n = grid.len();
        let s = tableau.s;
        let d = 2 * s;
        let mut b_lu = Vec::with_capacity(n * s * s);
        let mut b_piv = vec![0; n * s];
        let mut ac_lu = Vec::with_capacity(n * d * d);
        let mut ac_piv = vec![0; n * d];
        for j in 0..n {
            let mut mb = b_block(tableau, tau, params.omega(), grid.lambda2()[j]);
            if !lu_factor(&mut mb, &mut b_piv[j * s..(j + 1) * s], s) {
                return Err(Error::SingularMode { mode: j, tau });
            }
            b_lu.extend(mb);
            let mut ma = acoustic_block(tableau, tau, params.nu(), params.beta(), grid.lambda1()[j]);
            if !lu_factor(&mut ma, &mut ac_piv[j * d..(j + 1) * d], d) {
                return Err(Error::SingularMode { mode: j, tau });
            }
            ac_lu.extend(ma);
        }
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            tableau: tableau.clone(),
            tau,
            tol,
            max_iter,
            guess: InitialGuess::default(),
            b_lu,
            b_piv,
            ac_lu,
            ac_piv,
        })
    }

    pub fn with_guess(mut self, guess: InitialGuess) -> Self {
        self.guess = guess;
        self
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }
    pub fn params(&self) -> &Params {
        &self.params
    }
    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }
    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Solves the `B`-block of mode `j` in place.
    pub fn solve_b_mode(&self, j: usize, x: &mut [Complex64]) {
        let s = self.tableau.s;
        lu_solve(&self.b_lu[j * s * s..(j + 1) * s * s], &self.b_piv[j * s..(j + 1) * s], s, x);
    }

    /// Solves the acoustic block of mode `j` in place (`x = [ρ̂; û]`, length `2s`).
    pub fn solve_acoustic_mode(&self, j: usize, x: &mut [Complex64]) {
        let d = 2 * self.tableau.s;
        lu_solve(&self.ac_lu[j * d * d..(j + 1) * d * d], &self.ac_piv[j * d..(j + 1) * d], d, x);
    }

    /// Right-hand side of the semi-discrete extended system at one state.
    fn rhs(&self, b: &[Complex64], rho: &[f64], u: &[f64], phi: &[f64]) -> Result<(Vec<Complex64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let p = &self.params;
        let g = &self.grid;
        let d2b = g.apply_d2(b)?;
        let k1: Vec<Complex64> = (0..b.len())
            .map(|j| I * (d2b[j] * p.omega() - b[j] * (p.kappa() * (u[j] - 0.5 * p.nu() * rho[j] + p.q() * phi[j]))))
            .collect();
        let f2: Vec<f64> = (0..b.len()).map(|j| -u[j] + p.nu() * rho[j] - p.kappa() * phi[j]).collect();
        let f3: Vec<f64> = (0..b.len())
            .map(|j| -p.beta() * rho[j] + p.nu() * u[j] + 0.5 * p.kappa() * p.nu() * phi[j])
            .collect();
        let k2 = g.apply_d1_real(&f2)?;
        let k3 = g.apply_d1_real(&f3)?;
        let k4 = b.iter().zip(&k1).map(|(bb, kk)| 2.0 * (bb.conj() * kk).re).collect();
        Ok((k1, k2, k3, k4))
    }

    fn initial_slopes(&self, state: &FieldState) -> Result<StageSlopes> {
        let s = self.tableau.s;
        let n = state.len();
        let mut k = match self.guess {
            InitialGuess::Zero => StageSlopes::zeros(s, n),
            InitialGuess::State => StageSlopes {
                k1: vec![state.b.clone(); s],
                k2: vec![state.rho.clone(); s],
                k3: vec![state.u.clone(); s],
                k4: vec![vec![0.0; n]; s],
            },
            InitialGuess::ExplicitEuler => {
                let (k1, k2, k3, k4) = self.rhs(&state.b, &state.rho, &state.u, &state.phi)?;
                StageSlopes {
                    k1: vec![k1; s],
                    k2: vec![k2; s],
                    k3: vec![k3; s],
                    k4: vec![k4; s],
                }
            }
        };
        if self.guess == InitialGuess::State {
            for i in 0..s {
                for p in 0..n {
                    k.k4[i][p] = 2.0 * (state.b[p].conj() * k.k1[i][p]).re;
                }
            }
        }
        Ok(k)
    }

    /// Fixed-point solve of the coupled stage equations.
    ///
    /// Each sweep forms the stage values from the current slopes, evaluates
    /// the lagged nonlinear right-hand sides, solves the per-mode blocks for
    /// new `B`, `ρ`, `u` slopes and resets `k⁴_i = 2 Re(conj(B_ni) k¹_i)`.
    /// Sweeps stop once the sup-norm change of the first three slope families
    /// drops below `tol`, or after `max_iter` sweeps.
    pub fn solve_stages(&self, state: &FieldState) -> Result<(StageSlopes, IterationReport)> {
        let n = self.grid.len();
        state.check_len(n)?;
        if !state.t.is_finite() {
            return Err(Error::NonFinite("state time"));
        }
        let s = self.tableau.s;
        let p = self.params;
        let g = &self.grid;
        let tau = self.tau;

        // iterate-independent parts of the right-hand sides
        let mut bn_hat = state.b.clone();
        g.forward(&mut bn_hat);
        let lin_b: Vec<Complex64> = bn_hat
            .iter()
            .zip(g.lambda2())
            .map(|(z, l)| I * (*z * (p.omega() * l)))
            .collect();
        let chi_rho: Vec<f64> = (0..n).map(|j| -state.u[j] + p.nu() * state.rho[j]).collect();
        let chi_u: Vec<f64> = (0..n).map(|j| -p.beta() * state.rho[j] + p.nu() * state.u[j]).collect();
        let chi_rho_hat = g.forward_real(&chi_rho);
        let chi_u_hat = g.forward_real(&chi_u);

        let mut k = self.initial_slopes(state)?;
        let mut f_hat = vec![vec![ZERO; n]; s];
        let mut phi_hat = vec![vec![ZERO; n]; s];
        let mut xb = vec![ZERO; s];
        let mut xa = vec![ZERO; 2 * s];
        let mut k2_hat = vec![vec![ZERO; n]; s];
        let mut k3_hat = vec![vec![ZERO; n]; s];

        let mut report = IterationReport {
            iterations: 0,
            final_residual: f64::INFINITY,
            converged: false,
        };

        while report.iterations < self.max_iter {
            let sv = stage_values(&self.tableau, tau, state, &k);
            for i in 0..s {
                let fi = &mut f_hat[i];
                for j in 0..n {
                    let coupling = sv.u[i][j] - 0.5 * p.nu() * sv.rho[i][j] + p.q() * sv.phi[i][j];
                    fi[j] = -I * (sv.b[i][j] * (p.kappa() * coupling));
                }
                g.forward(fi);
                for j in 0..n {
                    fi[j] += lin_b[j];
                }
                let ph = &mut phi_hat[i];
                for j in 0..n {
                    ph[j] = Complex64::new(sv.phi[i][j], 0.0);
                }
                g.forward(ph);
            }

            let mut k1_hat = vec![vec![ZERO; n]; s];
            for j in 0..n {
                for i in 0..s {
                    xb[i] = f_hat[i][j];
                }
                self.solve_b_mode(j, &mut xb);
                for i in 0..s {
                    k1_hat[i][j] = xb[i];
                }

                let l1 = g.lambda1()[j];
                for i in 0..s {
                    xa[i] = l1 * (chi_rho_hat[j] - phi_hat[i][j] * p.kappa());
                    xa[s + i] = l1 * (chi_u_hat[j] + phi_hat[i][j] * (0.5 * p.kappa() * p.nu()));
                }
                self.solve_acoustic_mode(j, &mut xa);
                for i in 0..s {
                    k2_hat[i][j] = xa[i];
                    k3_hat[i][j] = xa[s + i];
                }
            }

            let mut change = 0.0_f64;
            let mut next = StageSlopes::zeros(s, n);
            for i in 0..s {
                let mut k1 = std::mem::take(&mut k1_hat[i]);
                g.inverse(&mut k1);
                let mut k2c = k2_hat[i].clone();
                g.inverse(&mut k2c);
                let mut k3c = k3_hat[i].clone();
                g.inverse(&mut k3c);
                let k2 = take_real(&k2c, real_scale(&k2c), "rho slopes")?;
                let k3 = take_real(&k3c, real_scale(&k3c), "u slopes")?;
                for j in 0..n {
                    change = change
                        .max((k1[j] - k.k1[i][j]).norm())
                        .max((k2[j] - k.k2[i][j]).abs())
                        .max((k3[j] - k.k3[i][j]).abs());
                }
                next.k1[i] = k1;
                next.k2[i] = k2;
                next.k3[i] = k3;
            }
            if !change.is_finite() {
                return Err(Error::NonFinite("stage iteration"));
            }
            let bs = b_stage_values(&self.tableau, tau, &state.b, &next.k1);
            for i in 0..s {
                for j in 0..n {
                    next.k4[i][j] = 2.0 * (bs[i][j].conj() * next.k1[i][j]).re;
                }
            }
            k = next;
            report.iterations += 1;
            report.final_residual = change;
            if change < self.tol {
                report.converged = true;
                break;
            }
        }
        Ok((k, report))
    }

    /// Advances the state by one step of `τ`.
    pub fn step(&self, state: &FieldState) -> Result<(FieldState, IterationReport)> {
        let (k, report) = self.solve_stages(state)?;
        let mut next = state.clone();
        next.t = state.t + self.tau;
        for i in 0..self.tableau.s {
            let w = self.tau * self.tableau.b[i];
            for j in 0..state.len() {
                next.b[j] += k.k1[i][j] * w;
                next.rho[j] += w * k.k2[i][j];
                next.u[j] += w * k.k3[i][j];
                next.phi[j] += w * k.k4[i][j];
            }
        }
        if !next.is_finite() {
            return Err(Error::NonFinite("step"));
        }
        Ok((next, report))
    }
}

/// Shorthand for [`StageSolver::new`].
pub fn build_stage_solver(grid: &SpectralGrid, params: &Params, tableau: &Tableau, tau: f64, tol: f64, max_iter: usize) -> Result<StageSolver> {
    StageSolver::new(grid, params, tableau, tau, tol, max_iter)
}

/// Shorthand for [`StageSolver::solve_stages`].
pub fn fixed_point_stage_solve(solver: &StageSolver, state: &FieldState) -> Result<(StageSlopes, IterationReport)> {
    solver.solve_stages(state)
}

/// Crank–Nicolson pseudo-spectral step on the three-field system, written
/// in midpoint unknowns with the nonlinearity `(|B^{n+1}|² + |B^n|²)/2`.
///
/// `φ` is not evolved; it is reset to `|B^{n+1}|²` after the step.
#[derive(Debug, Clone)]
pub struct CnFpSolver {
    grid: SpectralGrid,
    params: Params,
    tau: f64,
    tol: f64,
    max_iter: usize,
    b_diag: Vec<Complex64>,
    ac_inv: Vec<[Complex64; 4]>,
}

impl CnFpSolver {
    pub fn new(grid: &SpectralGrid, params: &Params, tau: f64, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(Error::InvalidSolver(format!("tau must be finite and nonzero, got {tau}")));
        }
        if !(tol > 0.0) || max_iter < 1 {
            return Err(Error::InvalidSolver("need tol > 0 and max_iter >= 1".into()));
        }
        let half = 0.5 * tau;
        let mut b_diag = Vec::with_capacity(grid.len());
        let mut ac_inv = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let d = Complex64::new(1.0, -half * params.omega() * grid.lambda2()[j]);
            if d.norm() == 0.0 {
                return Err(Error::SingularMode { mode: j, tau });
            }
            b_diag.push(d.inv());
            let l = grid.lambda1()[j];
            let m11 = Complex64::new(1.0, 0.0) - l * (params.nu() * half);
            let m12 = l * half;
            let m21 = l * (params.beta() * half);
            let m22 = m11;
            let det = m11 * m22 - m12 * m21;
            if det.norm() == 0.0 {
                return Err(Error::SingularMode { mode: j, tau });
            }
            ac_inv.push([m22 / det, -m12 / det, -m21 / det, m11 / det]);
        }
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            tau,
            tol,
            max_iter,
            b_diag,
            ac_inv,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self, state: &FieldState) -> Result<(FieldState, IterationReport)> {
        let g = &self.grid;
        let n = g.len();
        state.check_len(n)?;
        let p = self.params;
        let half = 0.5 * self.tau;

        let mut bn_hat = state.b.clone();
        g.forward(&mut bn_hat);
        let rho_hat = g.forward_real(&state.rho);
        let u_hat = g.forward_real(&state.u);
        let bn2: Vec<f64> = state.b.iter().map(|z| z.norm_sqr()).collect();

        let mut bm = state.b.clone();
        let mut rm = state.rho.clone();
        let mut um = state.u.clone();
        let mut report = IterationReport {
            iterations: 0,
            final_residual: f64::INFINITY,
            converged: false,
        };
        let mut work = vec![ZERO; n];
        let mut avg = vec![ZERO; n];

        while report.iterations < self.max_iter {
            for j in 0..n {
                let next = bm[j] * 2.0 - state.b[j];
                let pm = 0.5 * (next.norm_sqr() + bn2[j]);
                avg[j] = Complex64::new(pm, 0.0);
                let coupling = um[j] - 0.5 * p.nu() * rm[j] + p.q() * pm;
                work[j] = -I * (bm[j] * (half * p.kappa() * coupling));
            }
            g.forward(&mut work);
            g.forward(&mut avg);
            let mut bm_new = vec![ZERO; n];
            let mut rm_hat = vec![ZERO; n];
            let mut um_hat = vec![ZERO; n];
            for j in 0..n {
                bm_new[j] = (bn_hat[j] + work[j]) * self.b_diag[j];
                let l = g.lambda1()[j];
                let r1 = rho_hat[j] - l * (half * p.kappa()) * avg[j];
                let r2 = u_hat[j] + l * (half * 0.5 * p.kappa() * p.nu()) * avg[j];
                let inv = &self.ac_inv[j];
                rm_hat[j] = inv[0] * r1 + inv[1] * r2;
                um_hat[j] = inv[2] * r1 + inv[3] * r2;
            }
            g.inverse(&mut bm_new);
            g.inverse(&mut rm_hat);
            g.inverse(&mut um_hat);
            let scale = 1.0 + max_abs(&state.rho).max(max_abs(&state.u)).max(max_abs(&bn2));
            let rm_new = take_real(&rm_hat, scale, "cn-fp rho")?;
            let um_new = take_real(&um_hat, scale, "cn-fp u")?;

            let mut change = 0.0_f64;
            for j in 0..n {
                change = change
                    .max((bm_new[j] - bm[j]).norm())
                    .max((rm_new[j] - rm[j]).abs())
                    .max((um_new[j] - um[j]).abs());
            }
            if !change.is_finite() {
                return Err(Error::NonFinite("cn-fp iteration"));
            }
            bm = bm_new;
            rm = rm_new;
            um = um_new;
            report.iterations += 1;
            report.final_residual = change;
            if change < self.tol {
                report.converged = true;
                break;
            }
        }

        let b: Vec<Complex64> = bm.iter().zip(&state.b).map(|(m, b0)| m * 2.0 - b0).collect();
        let rho: Vec<f64> = rm.iter().zip(&state.rho).map(|(m, r0)| 2.0 * m - r0).collect();
        let u: Vec<f64> = um.iter().zip(&state.u).map(|(m, u0)| 2.0 * m - u0).collect();
        let next = FieldState::new(state.t + self.tau, b, rho, u)?;
        if !next.is_finite() {
            return Err(Error::NonFinite("cn-fp step"));
        }
        Ok((next, report))
    }
}

/// One CN-FP step with the default tolerance and iteration cap.
pub fn cn_fp_step(grid: &SpectralGrid, params: &Params, tau: f64, state: &FieldState) -> Result<FieldState> {
    let solver = CnFpSolver::new(grid, params, tau, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (next, report) = solver.step(state)?;
    if !report.converged {
        return Err(Error::NotConverged {
            t: state.t,
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    Ok(next)
}

/// A one-step time integrator.
pub trait Stepper {
    fn tau(&self) -> f64;
    fn advance(&self, state: &FieldState) -> Result<(FieldState, IterationReport)>;
}

impl Stepper for StageSolver {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn advance(&self, state: &FieldState) -> Result<(FieldState, IterationReport)> {
        self.step(state)
    }
}

impl Stepper for CnFpSolver {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn advance(&self, state: &FieldState) -> Result<(FieldState, IterationReport)> {
        self.step(state)
    }
}

/// Receives the state at step 0, every `cadence()` steps, and at the final step.
pub trait Observer {
    fn cadence(&self) -> usize {
        1
    }
    fn observe(&mut self, step: usize, state: &FieldState) -> Result<()>;
}

/// Aggregate iteration statistics of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationStats {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub nonconverged_steps: usize,
    pub max_final_residual: f64,
}

impl IterationStats {
    pub fn record(&mut self, r: &IterationReport) {
        self.steps += 1;
        self.total_iterations += r.iterations;
        self.max_iterations = self.max_iterations.max(r.iterations);
        if !r.converged {
            self.nonconverged_steps += 1;
        }
        self.max_final_residual = self.max_final_residual.max(r.final_residual);
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.steps as f64
        }
    }
}

/// Number of steps of size `tau` in `[0, t_final]`, rejecting a final time
/// that is not an integer multiple of `tau` within `1e-12`.
pub fn step_count(t_final: f64, tau: f64) -> Result<usize> {
    if !(t_final >= 0.0) || !(tau > 0.0) {
        return Err(Error::IncommensurateTime { t_final, tau });
    }
    let steps = (t_final / tau).round();
    if (steps * tau - t_final).abs() > 1e-12 * t_final.max(1.0) {
        return Err(Error::IncommensurateTime { t_final, tau });
    }
    Ok(steps as usize)
}

/// Steps from `state0` to `t_final`, calling observers on their cadence.
pub fn integrate(
    stepper: &impl Stepper,
    state0: &FieldState,
    t_final: f64,
    policy: Policy,
    observers: &mut [&mut dyn Observer],
) -> Result<(FieldState, IterationStats)> {
    let steps = step_count(t_final, stepper.tau())?;
    let mut state = state0.clone();
    let mut stats = IterationStats::default();
    for obs in observers.iter_mut() {
        obs.observe(0, &state)?;
    }
    for n in 1..=steps {
        let (next, report) = stepper.advance(&state)?;
        stats.record(&report);
        if !report.converged && policy == Policy::Abort {
            return Err(Error::NotConverged {
                t: state.t,
                iterations: report.iterations,
                residual: report.final_residual,
            });
        }
        state = next;
        for obs in observers.iter_mut() {
            let cadence = obs.cadence().max(1);
            if n % cadence == 0 || n == steps {
                obs.observe(n, &state)?;
            }
        }
    }
    Ok((state, stats))
}
