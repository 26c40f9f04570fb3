//! Errors and wall time of CN-FP against FPRK-2 and FPRK-3 on one tau
//! ladder (1/5 halved four times, h = 1/16, T = 4).
//!
//!     cargo run --release --example cnfp_comparison

use std::time::Instant;

use zr_fprk::harness::{converge_time, RunConfig};
use zr_fprk::tableau::Scheme;

fn main() -> zr_fprk::Result<()> {
    let ladder: Vec<f64> = (0..5).map(|k| 0.2 / f64::powi(2.0, k)).collect();
    for scheme in [Scheme::Cnfp, Scheme::Fprk2, Scheme::Fprk3] {
        let start = Instant::now();
        let cfg = RunConfig { scheme, tau_ladder: ladder.clone(), ..RunConfig::accuracy_test() };
        let study = converge_time(&cfg)?;
        let e: Vec<String> = study.rows.iter().map(|r| format!("{:.2e}", r.e_b)).collect();
        println!("{:<6} e_B: {}  ({:.2} s)", scheme.name(), e.join("  "), start.elapsed().as_secs_f64());
    }
    Ok(())
}
