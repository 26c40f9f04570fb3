//! Residuals of both amplitude sign conventions of the solitary wave, and of
//! a detuned wave, in the original equations.
//!
//!     cargo run --release --example exact_solution_check

use zr_fprk::harness::select_convention;
use zr_fprk::model::{pde_residual, AmplitudeConvention, Params, Soliton, SolitonSpec};
use zr_fprk::spectral::SpectralGrid;

fn main() -> zr_fprk::Result<()> {
    let params = Params::accuracy_test();
    let spec = SolitonSpec::accuracy_test();
    let decision = select_convention(&params, spec, -32.0, 32.0, &[0.0, 4.0])?;
    for c in &decision.checks {
        match (&c.residual, &c.error) {
            (_, Some(e)) => println!("{:<9} rejected: {e}", c.convention.name()),
            (Some(r), None) => println!("{:<9} r_B {:.2e}  r_rho {:.2e}  r_u {:.2e}", c.convention.name(), r[0], r[1], r[2]),
            (None, None) => {}
        }
    }
    println!("selected oracle: {}", decision.label());

    let grid = SpectralGrid::new(-32.0, 32.0, 512)?;
    let mut detuned = Soliton::new(&params, spec, AmplitudeConvention::Negated)?;
    detuned.lambda += 0.1;
    let (rb, _, _) = pde_residual(&params, &detuned, &grid, 0.0)?;
    println!("phase rate + 0.1: r_B {rb:.2e}");
    Ok(())
}
