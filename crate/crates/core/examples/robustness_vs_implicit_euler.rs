//! FPRK-s against implicit Euler on the soliton test with tau = 1/20, h = 1/8
//! up to T = 30: the symplectic schemes keep the wave, implicit Euler damps it.
//!
//!     cargo run --release --example robustness_vs_implicit_euler

use zr_fprk::harness::{drift_summary, simulate, InvariantLog, RunConfig};
use zr_fprk::model::{AmplitudeConvention, Soliton, SolitonSpec};
use zr_fprk::spectral::max_abs;
use zr_fprk::tableau::Scheme;

fn main() -> zr_fprk::Result<()> {
    for scheme in [Scheme::EulerImplicit, Scheme::Fprk1, Scheme::Fprk2, Scheme::Fprk3] {
        let cfg = RunConfig {
            scheme,
            n: 512,
            tau: 1.0 / 20.0,
            t_final: 30.0,
            ..RunConfig::accuracy_test()
        };
        let grid = cfg.grid()?;
        let params = cfg.params()?;
        let exact = Soliton::new(&params, SolitonSpec::accuracy_test(), AmplitudeConvention::Negated)?;
        let mut log = InvariantLog::new(&grid, &params, 20);
        let state0 = cfg.initial_state(&grid)?;
        let (last, _) = simulate(&cfg, &grid, &state0, cfg.tau, cfg.t_final, &mut [&mut log])?;
        let peak = max_abs(&last.b.iter().map(|z| z.norm()).collect::<Vec<_>>());
        let d = drift_summary(&log.records);
        println!(
            "{:<15} peak |B| at T {:.4} (exact {:.4})  mass drift {:.2e}",
            scheme.name(),
            peak,
            exact.amplitude,
            d.relative.mass
        );
    }
    Ok(())
}
