//! Experiment drivers: single runs, collisions and convergence studies.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{integrate, CnFpSolver, IterationStats, Observer, StageSolver};
use crate::invariants::{error_norms, state_difference};
use crate::model::{AmplitudeConvention, ExactSolution, FieldState, Soliton};
use crate::spectral::SpectralGrid;
use crate::tableau::Scheme;

use super::config::{InitialData, OracleChoice, RunConfig};
use super::observers::{drift_summary, write_invariants_csv, DriftSummary, InvariantLog, SnapshotLog};
use super::oracle_select::{select_convention, OracleDecision, FALLBACK_LABEL};
use super::output::{plot_convergence, plot_invariants, plot_snapshots, write_json, Cell, CsvWriter};

/// Integrates `state0` to `t_final` with the configured scheme and step `tau`.
pub fn simulate(
    cfg: &RunConfig,
    grid: &SpectralGrid,
    state0: &FieldState,
    tau: f64,
    t_final: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<(FieldState, IterationStats)> {
    let params = cfg.params()?;
    match cfg.scheme {
        Scheme::Cnfp => {
            let solver = CnFpSolver::new(grid, &params, tau, cfg.tol, cfg.max_iter)?;
            integrate(&solver, state0, t_final, cfg.policy, observers)
        }
        scheme => {
            let solver = StageSolver::new(grid, &params, &scheme.tableau(), tau, cfg.tol, cfg.max_iter)?
                .with_guess(cfg.guess);
            integrate(&solver, state0, t_final, cfg.policy, observers)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationSummary {
    #[serde(flatten)]
    pub stats: IterationStats,
    pub mean_iterations: f64,
}

impl From<IterationStats> for IterationSummary {
    fn from(stats: IterationStats) -> Self {
        let mean_iterations = stats.mean_iterations();
        Self { stats, mean_iterations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldErrors {
    #[serde(rename = "e_B")]
    pub e_b: f64,
    pub e_rho: f64,
    pub e_u: f64,
}

impl From<(f64, f64, f64)> for FieldErrors {
    fn from(e: (f64, f64, f64)) -> Self {
        Self {
            e_b: e.0,
            e_rho: e.1,
            e_u: e.2,
        }
    }
}

/// Contents of `run.json` for `run` and `collide`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub status: &'static str,
    pub config: RunConfig,
    pub h: f64,
    pub q: f64,
    pub steps: usize,
    pub oracle: Option<OracleDecision>,
    pub final_errors: Option<FieldErrors>,
    /// Relative L² distance between the final `B` and the superposition of
    /// freely travelling input waves (collisions only).
    pub inelasticity: Option<f64>,
    pub drift: DriftSummary,
    pub iterations: IterationSummary,
    pub snapshot_frames: usize,
    pub wall_time_s: f64,
}

fn snapshot_cadence(cfg: &RunConfig, steps: usize) -> usize {
    if cfg.snapshot_cadence > 0 {
        cfg.snapshot_cadence
    } else {
        (steps / 20).max(1)
    }
}

/// Relative discrete L² distance of `B` from the superposition of the
/// configured collision waves travelling without interaction.
pub fn inelasticity(cfg: &RunConfig, grid: &SpectralGrid, state: &FieldState) -> Result<Option<f64>> {
    let InitialData::Collision { case } = cfg.initial else {
        return Ok(None);
    };
    let params = cfg.params()?;
    let waves = case
        .setup()
        .waves
        .iter()
        .map(|w| Soliton::new(&params, *w, AmplitudeConvention::default()))
        .collect::<Result<Vec<_>>>()?;
    let free: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&x| waves.iter().map(|w| w.eval(x, state.t).0).sum())
        .collect();
    let diff: Vec<Complex64> = state.b.iter().zip(&free).map(|(a, b)| a - b).collect();
    Ok(Some(grid.norm(&diff)? / grid.norm(&free)?))
}

/// Runs one configuration and writes `invariants.csv`, `snapshots.csv`,
/// `run.json` and, if asked, gnuplot scripts into `cfg.out`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    run_with_artifacts(cfg, "run")
}

/// [`cmd_run`] for collision initial data; also reports the inelasticity.
pub fn cmd_collide(cfg: &RunConfig) -> Result<RunReport> {
    if !matches!(cfg.initial, InitialData::Collision { .. }) {
        return Err(Error::Config("collide needs a collision case".into()));
    }
    run_with_artifacts(cfg, "collide")
}

fn run_with_artifacts(cfg: &RunConfig, command: &'static str) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let steps = crate::integrator::step_count(cfg.t_final, cfg.tau)?;
    let state0 = cfg.initial_state(&grid)?;
    fs::create_dir_all(&cfg.out)?;

    let mut inv = InvariantLog::new(&grid, &params, cfg.cadence);
    let snap_file = BufWriter::new(File::create(cfg.out.join("snapshots.csv"))?);
    let mut snaps = SnapshotLog::new(&grid, snapshot_cadence(cfg, steps), snap_file)?;
    let (last, stats) = simulate(cfg, &grid, &state0, cfg.tau, cfg.t_final, &mut [&mut inv, &mut snaps])?;
    let frames = snaps.frames;
    snaps.finish()?;
    write_invariants_csv(&cfg.out.join("invariants.csv"), &inv.records)?;

    let (oracle, final_errors) = match cfg.initial {
        InitialData::Soliton(spec) => {
            let decision = select_convention(&params, spec, cfg.a, cfg.b, &[0.0, cfg.t_final])?;
            let errors = match decision.selected {
                Some(conv) => Some(error_norms(&grid, &last, &Soliton::new(&params, spec, conv)?)?.into()),
                None => None,
            };
            (Some(decision), errors)
        }
        InitialData::Collision { .. } => (None, None),
    };

    let report = RunReport {
        command,
        status: "ok",
        config: cfg.clone(),
        h: grid.h(),
        q: params.q(),
        steps,
        oracle,
        final_errors,
        inelasticity: inelasticity(cfg, &grid, &last)?,
        drift: drift_summary(&inv.records),
        iterations: stats.into(),
        snapshot_frames: frames,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&cfg.out.join("run.json"), &report)?;
    if cfg.emit_plots {
        plot_invariants(&cfg.out)?;
        plot_snapshots(&cfg.out)?;
    }
    Ok(report)
}

/// Machine-readable record written when a command fails.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub command: String,
    pub status: &'static str,
    pub kind: &'static str,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(command: &str, err: &Error) -> Self {
        Self {
            command: command.to_string(),
            status: "error",
            kind: err.kind(),
            message: err.to_string(),
        }
    }

    /// Writes `error.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("error.json"), self)
    }
}

/// Truth for a convergence study.
enum Truth {
    Analytic(Soliton),
    Reference,
}

fn choose_truth(cfg: &RunConfig) -> Result<(Truth, Option<OracleDecision>)> {
    let InitialData::Soliton(spec) = cfg.initial else {
        return Ok((Truth::Reference, None));
    };
    let params = cfg.params()?;
    let decision = select_convention(&params, spec, cfg.a, cfg.b, &[0.0, cfg.t_final])?;
    let truth = match (cfg.oracle, decision.selected) {
        (OracleChoice::Auto, Some(conv)) => Truth::Analytic(Soliton::new(&params, spec, conv)?),
        _ => Truth::Reference,
    };
    Ok((truth, Some(decision)))
}

fn label(truth: &Truth, decision: &Option<OracleDecision>) -> String {
    match (truth, decision) {
        (Truth::Analytic(_), Some(d)) => d.label(),
        _ => FALLBACK_LABEL.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceRow {
    pub h: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(flatten)]
    pub errors: FieldErrors,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceStudy {
    pub command: &'static str,
    pub status: &'static str,
    pub config: RunConfig,
    pub scheme: Scheme,
    pub oracle: String,
    pub decision: Option<OracleDecision>,
    pub rows: Vec<SpaceRow>,
    pub wall_time_s: f64,
}

/// Errors at `T` for each mesh size of the ladder with `tau` fixed.
///
/// The fallback truth is a run on half the finest mesh, compared at the
/// coarse grid points.
pub fn converge_space(cfg: &RunConfig) -> Result<SpaceStudy> {
    cfg.validate()?;
    let start = Instant::now();
    let (truth, decision) = choose_truth(cfg)?;
    let ladder = cfg.space_ladder();
    let grids = ladder
        .iter()
        .map(|&h| SpectralGrid::with_mesh(cfg.a, cfg.b, h))
        .collect::<Result<Vec<_>>>()?;
    let finals = grids
        .iter()
        .map(|g| Ok(simulate(cfg, g, &cfg.initial_state(g)?, cfg.tau, cfg.t_final, &mut [])?.0))
        .collect::<Result<Vec<_>>>()?;

    let reference = match truth {
        Truth::Analytic(_) => None,
        Truth::Reference => {
            let finest = grids.iter().map(SpectralGrid::len).max().unwrap_or(4);
            let g = SpectralGrid::new(cfg.a, cfg.b, 2 * finest)?;
            Some(simulate(cfg, &g, &cfg.initial_state(&g)?, cfg.tau, cfg.t_final, &mut [])?.0)
        }
    };

    let mut rows = Vec::new();
    for ((&h, g), last) in ladder.iter().zip(&grids).zip(&finals) {
        let errors = match (&truth, &reference) {
            (Truth::Analytic(sol), _) => error_norms(g, last, sol)?,
            (Truth::Reference, Some(r)) => state_difference(last, &restrict(r, g.len())?)?,
            (Truth::Reference, None) => unreachable!("reference run exists"),
        };
        rows.push(SpaceRow {
            h,
            n: g.len(),
            errors: errors.into(),
        });
    }
    Ok(SpaceStudy {
        command: "converge-space",
        status: "ok",
        config: cfg.clone(),
        scheme: cfg.scheme,
        oracle: label(&truth, &decision),
        decision,
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Every `len/n`-th point of a fine state.
fn restrict(fine: &FieldState, n: usize) -> Result<FieldState> {
    if n == 0 || !fine.len().is_multiple_of(n) {
        return Err(Error::Oracle(format!("reference grid of {} points does not contain {n} points", fine.len())));
    }
    let stride = fine.len() / n;
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    Ok(FieldState {
        t: fine.t,
        b: fine.b.iter().step_by(stride).copied().collect(),
        rho: pick(&fine.rho),
        u: pick(&fine.u),
        phi: pick(&fine.phi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeRow {
    pub tau: f64,
    #[serde(rename = "e_B")]
    pub e_b: f64,
    #[serde(rename = "rate_B")]
    pub rate_b: Option<f64>,
    pub e_rho: f64,
    pub rate_rho: Option<f64>,
    pub e_u: f64,
    pub rate_u: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeStudy {
    pub command: &'static str,
    pub status: &'static str,
    pub config: RunConfig,
    pub scheme: Scheme,
    pub oracle: String,
    pub decision: Option<OracleDecision>,
    pub rows: Vec<TimeRow>,
    pub iterations: Vec<IterationSummary>,
    pub wall_time_s: f64,
}

/// `log₂(coarse/fine)`, the observed order between a step and its half.
pub fn observed_rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Errors at `T` for each step of the ladder with the grid fixed. The
/// fallback truth uses `τ_min/8`.
pub fn converge_time(cfg: &RunConfig) -> Result<TimeStudy> {
    cfg.validate()?;
    let start = Instant::now();
    let (truth, decision) = choose_truth(cfg)?;
    let grid = cfg.grid()?;
    let state0 = cfg.initial_state(&grid)?;
    let ladder = cfg.time_ladder();

    let reference = match truth {
        Truth::Analytic(_) => None,
        Truth::Reference => {
            let tau_min = ladder.iter().copied().fold(f64::INFINITY, f64::min);
            Some(simulate(cfg, &grid, &state0, tau_min / 8.0, cfg.t_final, &mut [])?.0)
        }
    };

    let mut rows: Vec<TimeRow> = Vec::new();
    let mut iterations = Vec::new();
    for &tau in &ladder {
        let (last, stats) = simulate(cfg, &grid, &state0, tau, cfg.t_final, &mut [])?;
        let (e_b, e_rho, e_u) = match (&truth, &reference) {
            (Truth::Analytic(sol), _) => error_norms(&grid, &last, sol)?,
            (Truth::Reference, Some(r)) => state_difference(&last, r)?,
            (Truth::Reference, None) => unreachable!("reference run exists"),
        };
        let prev = rows.last();
        rows.push(TimeRow {
            tau,
            e_b,
            rate_b: prev.map(|p| observed_rate(p.e_b, e_b)),
            e_rho,
            rate_rho: prev.map(|p| observed_rate(p.e_rho, e_rho)),
            e_u,
            rate_u: prev.map(|p| observed_rate(p.e_u, e_u)),
        });
        iterations.push(stats.into());
    }
    Ok(TimeStudy {
        command: "converge-time",
        status: "ok",
        config: cfg.clone(),
        scheme: cfg.scheme,
        oracle: label(&truth, &decision),
        decision,
        rows,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// [`converge_space`] plus `converge_space_<scheme>.csv` and `run.json`.
pub fn cmd_converge_space(cfg: &RunConfig) -> Result<SpaceStudy> {
    let study = converge_space(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let name = format!("converge_space_{}.csv", study.scheme);
    let mut csv = CsvWriter::create(&cfg.out.join(&name), &["scheme", "h", "N", "e_B", "e_rho", "e_u", "oracle"])?;
    for r in &study.rows {
        csv.row(&[
            Cell::Text(study.scheme.name()),
            Cell::Num(r.h),
            Cell::Int(r.n),
            Cell::Num(r.errors.e_b),
            Cell::Num(r.errors.e_rho),
            Cell::Num(r.errors.e_u),
            Cell::Text(&study.oracle),
        ])?;
    }
    csv.finish()?;
    write_json(&cfg.out.join("run.json"), &study)?;
    if cfg.emit_plots {
        plot_convergence(&cfg.out, &name, 2, &[4, 5, 6], "h")?;
    }
    Ok(study)
}

/// [`converge_time`] plus `converge_time_<scheme>.csv` and `run.json`.
pub fn cmd_converge_time(cfg: &RunConfig) -> Result<TimeStudy> {
    let study = converge_time(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let name = format!("converge_time_{}.csv", study.scheme);
    let mut csv = CsvWriter::create(
        &cfg.out.join(&name),
        &["tau", "e_B", "rate_B", "e_rho", "rate_rho", "e_u", "rate_u", "oracle"],
    )?;
    let rate = |r: Option<f64>| Cell::Num(r.unwrap_or(f64::NAN));
    for r in &study.rows {
        csv.row(&[
            Cell::Num(r.tau),
            Cell::Num(r.e_b),
            rate(r.rate_b),
            Cell::Num(r.e_rho),
            rate(r.rate_rho),
            Cell::Num(r.e_u),
            rate(r.rate_u),
            Cell::Text(&study.oracle),
        ])?;
    }
    csv.finish()?;
    write_json(&cfg.out.join("run.json"), &study)?;
    if cfg.emit_plots {
        plot_convergence(&cfg.out, &name, 1, &[2, 4, 6], "tau")?;
    }
    Ok(study)
}
