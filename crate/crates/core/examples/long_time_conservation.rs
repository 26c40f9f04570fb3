//! Invariant histories over a long FPRK-2 run (h = 1/16, tau = 1/50). Writes
//! `invariants.csv`, `snapshots.csv`, `run.json` and gnuplot scripts.
//!
//!     cargo run --release --example long_time_conservation [T] [out-dir]

use zr_fprk::harness::{cmd_run, RunConfig};

fn main() -> zr_fprk::Result<()> {
    let mut args = std::env::args().skip(1);
    let t_final = args.next().map_or(Ok(200.0), |s| zr_fprk::harness::config::parse_number(&s))?;
    let out = args.next().unwrap_or_else(|| "out/conservation".into());
    let cfg = RunConfig {
        t_final,
        cadence: 50,
        emit_plots: true,
        out: out.into(),
        ..RunConfig::accuracy_test()
    };
    let rep = cmd_run(&cfg)?;
    let d = rep.drift;
    println!("{} steps in {:.1} s", rep.steps, rep.wall_time_s);
    println!(
        "max relative drift: M {:.2e}, E {:.2e}, H {:.2e}",
        d.relative.mass, d.relative.energy_q, d.relative.hamiltonian
    );
    println!("max absolute drift: I1 {:.2e}, I2 {:.2e}", d.absolute.i1, d.absolute.i2);
    println!("max |phi - |B|^2|: {:.2e}", d.max_qav_residual);
    println!(
        "{} of {} steps stopped at the iteration cap (largest final change {:.1e})",
        rep.iterations.stats.nonconverged_steps, rep.steps, rep.iterations.stats.max_final_residual
    );
    println!("artifacts in {}", cfg.out.display());
    Ok(())
}
