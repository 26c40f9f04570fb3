//! One FPRK-2 run of the single-soliton accuracy test, compared with the
//! exact travelling wave.
//!
//!     cargo run --release --example soliton_accuracy [tau]

use zr_fprk::harness::{simulate, RunConfig};
use zr_fprk::invariants::error_norms;
use zr_fprk::model::{AmplitudeConvention, Soliton, SolitonSpec};

fn main() -> zr_fprk::Result<()> {
    let tau = std::env::args().nth(1).map_or(Ok(0.1), |s| zr_fprk::harness::config::parse_number(&s))?;
    let cfg = RunConfig { tau, ..RunConfig::accuracy_test() };
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let exact = Soliton::new(&params, SolitonSpec::accuracy_test(), AmplitudeConvention::Negated)?;
    println!("q = {}, zeta = {}, amplitude = {:.15}", params.q(), exact.zeta, exact.amplitude);

    let state0 = cfg.initial_state(&grid)?;
    let (last, stats) = simulate(&cfg, &grid, &state0, tau, cfg.t_final, &mut [])?;
    let (eb, er, eu) = error_norms(&grid, &last, &exact)?;
    println!("h = {}, tau = {tau}, T = {}", grid.h(), cfg.t_final);
    println!("e_B = {eb:.3e}  e_rho = {er:.3e}  e_u = {eu:.3e}");
    println!("{} steps, {:.2} fixed-point sweeps per step", stats.steps, stats.mean_iterations());
    Ok(())
}
