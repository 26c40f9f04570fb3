//! Two-soliton collision, cases I, II or III (h = 1/8, tau = 1/200).
//!
//!     cargo run --release --example soliton_collision [I|II|III] [out-dir]

use zr_fprk::harness::{cmd_collide, RunConfig};
use zr_fprk::model::CollisionCase;

fn main() -> zr_fprk::Result<()> {
    let mut args = std::env::args().skip(1);
    let case: CollisionCase = args.next().as_deref().unwrap_or("I").parse()?;
    let out = args.next().unwrap_or_else(|| format!("out/collision_{}", case.name()));
    let cfg = RunConfig {
        emit_plots: true,
        out: out.into(),
        ..RunConfig::collision(case)
    };
    println!("case {}: [{}, {}], N = {}, T = {}", case.name(), cfg.a, cfg.b, cfg.n, cfg.t_final);
    let rep = cmd_collide(&cfg)?;
    println!(
        "relative L2 distance from free superposition: {:.3e}",
        rep.inelasticity.unwrap_or(f64::NAN)
    );
    println!(
        "max relative drift: M {:.2e}, H {:.2e}; {} snapshot frames; {:.1} s",
        rep.drift.relative.mass, rep.drift.relative.hamiltonian, rep.snapshot_frames, rep.wall_time_s
    );
    Ok(())
}
