//! Discrete conserved quantities and error norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ExactSolution, FieldState, Params};
use crate::spectral::SpectralGrid;

/// Conserved quantities of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantRecord {
    pub t: f64,
    pub mass: f64,
    pub energy_q: f64,
    pub hamiltonian: f64,
    pub i1: f64,
    pub i2: f64,
    pub qav_residual: f64,
}

/// `M_h = ⟨|B|², 1⟩_h`.
pub fn mass(grid: &SpectralGrid, state: &FieldState) -> Result<f64> {
    state.check_len(grid.len())?;
    Ok(grid.h() * state.b.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Energy with the auxiliary field standing in for `|B|²` in the nonlinear
/// term:
///
/// ```text
/// E_h = ω⟨D₂B, B⟩ − κ⟨u − ν/2 ρ + q/2 φ, φ⟩ − β/2⟨ρ, ρ⟩ − 1/2⟨u, u⟩ + ν⟨u, ρ⟩
/// ```
pub fn energy_quadratic(grid: &SpectralGrid, params: &Params, state: &FieldState) -> Result<f64> {
    state.check_len(grid.len())?;
    energy_with(grid, params, state, &state.phi)
}

/// Hamiltonian: [`energy_quadratic`] with `φ` replaced by `|B|²`.
pub fn hamiltonian(grid: &SpectralGrid, params: &Params, state: &FieldState) -> Result<f64> {
    state.check_len(grid.len())?;
    let b2: Vec<f64> = state.b.iter().map(|z| z.norm_sqr()).collect();
    energy_with(grid, params, state, &b2)
}

fn energy_with(grid: &SpectralGrid, params: &Params, state: &FieldState, phi: &[f64]) -> Result<f64> {
    let (kappa, nu, beta, q) = (params.kappa(), params.nu(), params.beta(), params.q());
    let disp = params.omega() * grid.d2_form(&state.b)?;
    let mut coupling = 0.0;
    let mut acoustic = 0.0;
    for j in 0..grid.len() {
        let (r, u, p) = (state.rho[j], state.u[j], phi[j]);
        coupling += (u - 0.5 * nu * r + 0.5 * q * p) * p;
        acoustic += -0.5 * beta * r * r - 0.5 * u * u + nu * u * r;
    }
    Ok(disp + grid.h() * (acoustic - kappa * coupling))
}

/// `(I₁, I₂) = (⟨ρ, 1⟩_h, ⟨u, 1⟩_h)`.
pub fn linear_invariants(grid: &SpectralGrid, state: &FieldState) -> Result<(f64, f64)> {
    Ok((grid.integral(&state.rho)?, grid.integral(&state.u)?))
}

impl InvariantRecord {
    pub fn evaluate(grid: &SpectralGrid, params: &Params, state: &FieldState) -> Result<Self> {
        let (i1, i2) = linear_invariants(grid, state)?;
        Ok(Self {
            t: state.t,
            mass: mass(grid, state)?,
            energy_q: energy_quadratic(grid, params, state)?,
            hamiltonian: hamiltonian(grid, params, state)?,
            i1,
            i2,
            qav_residual: state.qav_residual(),
        })
    }

    /// The five conserved quantities in column order.
    pub fn quantities(&self) -> [f64; 5] {
        [self.mass, self.energy_q, self.hamiltonian, self.i1, self.i2]
    }

    pub const QUANTITY_NAMES: [&'static str; 5] = ["mass", "energyQ", "hamiltonian", "i1", "i2"];
}

/// `|Q − Q⁰| / max(|Q⁰|, 1e-300)`.
pub fn relative_drift(q: f64, q0: f64) -> f64 {
    (q - q0).abs() / q0.abs().max(1e-300)
}

/// `(e_B, e_ρ, e_u)`: sup-norm errors against an exact solution at `state.t`.
pub fn error_norms(grid: &SpectralGrid, state: &FieldState, exact: &impl ExactSolution) -> Result<(f64, f64, f64)> {
    state.check_len(grid.len())?;
    let mut e = (0.0_f64, 0.0_f64, 0.0_f64);
    for (j, x) in grid.points().into_iter().enumerate() {
        let (b, r, u) = exact.eval(x, state.t);
        e.0 = e.0.max((state.b[j] - b).norm());
        e.1 = e.1.max((state.rho[j] - r).abs());
        e.2 = e.2.max((state.u[j] - u).abs());
    }
    if !(e.0.is_finite() && e.1.is_finite() && e.2.is_finite()) {
        return Err(Error::NonFinite("error_norms"));
    }
    Ok(e)
}

/// Sup-norm differences between two states on the same grid.
pub fn state_difference(a: &FieldState, b: &FieldState) -> Result<(f64, f64, f64)> {
    b.check_len(a.len())?;
    let mut e = (0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..a.len() {
        e.0 = e.0.max((a.b[j] - b.b[j]).norm());
        e.1 = e.1.max((a.rho[j] - b.rho[j]).abs());
        e.2 = e.2.max((a.u[j] - b.u[j]).abs());
    }
    Ok(e)
}
