//! Temporal error tables for FPRK-2 (tau from 1/10) and FPRK-3 (tau from 2/5)
//! on the soliton test, h = 1/16, T = 4.
//!
//!     cargo run --release --example temporal_convergence

use zr_fprk::harness::{converge_time, RunConfig};
use zr_fprk::tableau::Scheme;

fn main() -> zr_fprk::Result<()> {
    for (scheme, tau0) in [(Scheme::Fprk2, 0.1), (Scheme::Fprk3, 0.4)] {
        let cfg = RunConfig { scheme, tau: tau0, ..RunConfig::accuracy_test() };
        let study = converge_time(&cfg)?;
        println!("{scheme} (oracle: {})", study.oracle);
        println!("{:>9} {:>11} {:>6} {:>11} {:>6} {:>11} {:>6}", "tau", "e_B", "rate", "e_rho", "rate", "e_u", "rate");
        let r = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.2}"));
        for row in &study.rows {
            println!(
                "{:>9.6} {:>11.3e} {:>6} {:>11.3e} {:>6} {:>11.3e} {:>6}",
                row.tau, row.e_b, r(row.rate_b), row.e_rho, r(row.rate_rho), row.e_u, r(row.rate_u)
            );
        }
        println!();
    }
    Ok(())
}
