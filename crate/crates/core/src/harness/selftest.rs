//! Desk-scale self checks (N ≤ 64, at most 200 steps).

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::integrator::{integrate, CnFpSolver, Policy, StageSolver, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::invariants::state_difference;
use crate::model::{initial_single, Params, SolitonSpec};
use crate::oracle::{dense_diff_matrix, max_operator_mismatch, newton_stage_solve};
use crate::spectral::SpectralGrid;
use crate::tableau::Tableau;

use super::observers::{drift_summary, InvariantLog};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut out = format!("{:<22} {:<6} {:>8}  {}\n", "suite", "result", "seconds", "detail");
        for s in &self.suites {
            out.push_str(&format!(
                "{:<22} {:<6} {:>8.2}  {}\n",
                s.name,
                if s.passed { "PASS" } else { "FAIL" },
                s.seconds,
                s.detail
            ));
        }
        out
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SuiteResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    SuiteResult {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Newton vs fixed-point slopes at N = 16 and dense vs FFT operators for
/// N ≤ 32.
pub fn oracle_equivalence() -> Result<(bool, String)> {
    let grid = SpectralGrid::new(-32.0, 32.0, 16)?;
    let params = Params::accuracy_test();
    let state = initial_single(&params, SolitonSpec::accuracy_test(), &grid)?;
    let mut slope_gap = 0.0_f64;
    for s in 1..=2 {
        let t = Tableau::gauss(s)?;
        let newton = newton_stage_solve(&grid, &params, &t, 0.02, &state)?;
        let (fp, _) = StageSolver::new(&grid, &params, &t, 0.02, DEFAULT_TOL, DEFAULT_MAX_ITER)?.solve_stages(&state)?;
        slope_gap = slope_gap.max(newton.max_diff(&fp));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut op_gap = 0.0_f64;
    for n in [8, 16, 32] {
        let g = SpectralGrid::new(-5.0, 7.0, n)?;
        let samples: Vec<Vec<Complex64>> = (0..100)
            .map(|_| (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        for order in [1, 2] {
            op_gap = op_gap.max(max_operator_mismatch(&g, &dense_diff_matrix(&g, order)?, &samples)?);
        }
    }
    Ok((
        slope_gap <= 1e-12 && op_gap <= 1e-12,
        format!("slopes {slope_gap:.2e}, operators {op_gap:.2e}"),
    ))
}

/// Symplectic defects of `tableaux` (≤ 1e-14) and of both Euler methods (= 1).
pub fn symplectic_defects(tableaux: &[Tableau]) -> Result<(bool, String)> {
    let worst = tableaux.iter().map(Tableau::symplectic_defect).fold(0.0, f64::max);
    let euler_ok = Tableau::explicit_euler().symplectic_defect() == 1.0 && Tableau::implicit_euler().symplectic_defect() == 1.0;
    Ok((worst <= 1e-14 && euler_ok, format!("max defect {worst:.2e}, euler defects exact: {euler_ok}")))
}

/// 200 steps per tableau at N = 64: relative drift of mass and both energies
/// ≤ 1e-11, linear invariants ≤ 1e-12 absolute.
pub fn invariant_drift(tableaux: &[Tableau]) -> Result<(bool, String)> {
    let grid = SpectralGrid::new(-16.0, 16.0, 64)?;
    let params = Params::accuracy_test();
    let state = initial_single(&params, SolitonSpec::accuracy_test(), &grid)?;
    let (mut quad, mut lin) = (0.0_f64, 0.0_f64);
    for t in tableaux {
        let solver = StageSolver::new(&grid, &params, t, 0.02, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let mut log = InvariantLog::new(&grid, &params, 1);
        integrate(&solver, &state, 4.0, Policy::Warn, &mut [&mut log])?;
        let d = drift_summary(&log.records);
        quad = quad.max(d.relative.mass).max(d.relative.energy_q).max(d.relative.hamiltonian);
        lin = lin.max(d.absolute.i1).max(d.absolute.i2);
    }
    Ok((quad <= 1e-11 && lin <= 1e-12, format!("quadratic {quad:.2e}, linear {lin:.2e}")))
}

/// 100 steps of one-stage Gauss vs the Crank–Nicolson fixed-point step.
pub fn cnfp_equivalence() -> Result<(bool, String)> {
    let grid = SpectralGrid::new(-16.0, 16.0, 64)?;
    let params = Params::accuracy_test();
    let state = initial_single(&params, SolitonSpec::accuracy_test(), &grid)?;
    let tau = 0.05;
    let rk = StageSolver::new(&grid, &params, &Tableau::gauss(1)?, tau, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let cn = CnFpSolver::new(&grid, &params, tau, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (a, _) = integrate(&rk, &state, 5.0, Policy::Warn, &mut [])?;
    let (b, _) = integrate(&cn, &state, 5.0, Policy::Warn, &mut [])?;
    let (eb, er, eu) = state_difference(&a, &b)?;
    let gap = eb.max(er).max(eu);
    let phi_gap = a.phi.iter().zip(&b.phi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((gap.max(phi_gap) <= 1e-11, format!("max field gap {:.2e}", gap.max(phi_gap))))
}

/// Runs all suites with the given symplectic tableaux.
pub fn selftest_with(tableaux: &[Tableau]) -> SelftestReport {
    SelftestReport {
        suites: vec![
            timed("oracle-equivalence", oracle_equivalence),
            timed("symplectic-defect", || symplectic_defects(tableaux)),
            timed("invariant-drift", || invariant_drift(tableaux)),
            timed("cnfp-equivalence", cnfp_equivalence),
        ],
    }
}

/// Runs all suites with the Gauss tableaux `s = 1, 2, 3`.
pub fn selftest() -> SelftestReport {
    let tableaux: Vec<Tableau> = (1..=3).map(|s| Tableau::gauss(s).expect("supported")).collect();
    selftest_with(&tableaux)
}
