//! Spectral convergence in h with a small fixed step (tau = 1e-3, T = 4).
//!
//!     cargo run --release --example spatial_convergence

use zr_fprk::harness::{converge_space, RunConfig};
use zr_fprk::tableau::Scheme;

fn main() -> zr_fprk::Result<()> {
    for scheme in [Scheme::Fprk2, Scheme::Fprk3] {
        let cfg = RunConfig {
            scheme,
            tau: 1e-3,
            h_ladder: vec![1.0, 0.5, 0.25, 0.125],
            ..RunConfig::accuracy_test()
        };
        let study = converge_space(&cfg)?;
        println!("{scheme} (oracle: {})", study.oracle);
        for row in &study.rows {
            println!(
                "h = {:<6} N = {:<5} e_B = {:.3e}  e_rho = {:.3e}  e_u = {:.3e}",
                row.h, row.n, row.errors.e_b, row.errors.e_rho, row.errors.e_u
            );
        }
    }
    Ok(())
}
