//! Fixed-point stage slopes against a dense Newton solve of the full stage
//! system, and FFT derivatives against dense differentiation matrices.
//!
//!     cargo run --release --example oracle_equivalence

use zr_fprk::integrator::{StageSolver, DEFAULT_MAX_ITER, DEFAULT_TOL};
use zr_fprk::model::{initial_single, Params, SolitonSpec};
use zr_fprk::oracle::{dense_diff_matrix, newton_stage_solve};
use zr_fprk::spectral::SpectralGrid;
use zr_fprk::tableau::Tableau;

fn main() -> zr_fprk::Result<()> {
    let grid = SpectralGrid::new(-32.0, 32.0, 16)?;
    let params = Params::accuracy_test();
    let state = initial_single(&params, SolitonSpec::accuracy_test(), &grid)?;
    for s in 1..=3 {
        let t = Tableau::gauss(s)?;
        let newton = newton_stage_solve(&grid, &params, &t, 0.02, &state)?;
        let (fp, rep) = StageSolver::new(&grid, &params, &t, 0.02, DEFAULT_TOL, DEFAULT_MAX_ITER)?.solve_stages(&state)?;
        println!("s = {s}: {} sweeps, max slope difference {:.2e}", rep.iterations, newton.max_diff(&fp));
    }
    for order in [1, 2] {
        let d = dense_diff_matrix(&grid, order)?;
        println!("D{order}: symmetry defect {:.2e}", d.symmetry_defect());
    }
    Ok(())
}
