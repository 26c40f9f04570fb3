use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zr_fprk::harness::{self, Command, ErrorRecord, Overrides, RunConfig};
use zr_fprk::model::CollisionCase;
use zr_fprk::tableau::Scheme;
use zr_fprk::{Error, Policy};

#[derive(Parser)]
#[command(name = "zr-fprk", version, about = "FPRK-s solvers for the Zakharov-Rubenchik equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one configuration and log invariants and snapshots.
    Run(Flags),
    /// Spatial convergence table over an h ladder.
    ConvergeSpace(Flags),
    /// Temporal convergence table over a tau ladder.
    ConvergeTime(Flags),
    /// Two-soliton collision.
    Collide(Flags),
    /// Desk-scale self checks.
    Selftest,
}

fn number(s: &str) -> Result<f64, String> {
    harness::config::parse_number(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, value_parser = number)]
    tau: Option<f64>,
    #[arg(long = "T", value_parser = number)]
    t_final: Option<f64>,
    #[arg(long, value_parser = number)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    policy: Option<Policy>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cadence: Option<usize>,
    #[arg(long = "case")]
    case: Option<CollisionCase>,
    #[arg(long)]
    emit_plots: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            scheme: self.scheme,
            n: self.n,
            tau: self.tau,
            t_final: self.t_final,
            tol: self.tol,
            max_iter: self.max_iter,
            policy: self.policy,
            out: self.out.clone(),
            cadence: self.cadence,
            case: self.case,
            emit_plots: self.emit_plots,
        }
    }
}

fn execute(cmd: Command, flags: &Flags) -> Result<String, Error> {
    let cfg = RunConfig::resolve(cmd, flags.config.as_deref(), &flags.overrides())?;
    let out = cfg.out.display().to_string();
    Ok(match cmd {
        Command::Run | Command::Collide => {
            let rep = if cmd == Command::Run {
                harness::cmd_run(&cfg)?
            } else {
                harness::cmd_collide(&cfg)?
            };
            let mut s = format!(
                "{} steps, mean {:.2} iterations, {} not converged; max relative drift M {:.3e}, E {:.3e}, H {:.3e}",
                rep.steps,
                rep.iterations.mean_iterations,
                rep.iterations.stats.nonconverged_steps,
                rep.drift.relative.mass,
                rep.drift.relative.energy_q,
                rep.drift.relative.hamiltonian
            );
            if let Some(e) = rep.final_errors {
                s += &format!("\nerrors at T: e_B {:.3e}, e_rho {:.3e}, e_u {:.3e}", e.e_b, e.e_rho, e.e_u);
            }
            if let Some(d) = rep.inelasticity {
                s += &format!("\ninelasticity {d:.3e}");
            }
            s + &format!("\nartifacts in {out}")
        }
        Command::ConvergeSpace => {
            let st = harness::cmd_converge_space(&cfg)?;
            let mut s = format!("{} oracle {}\n{:>10} {:>6} {:>12} {:>12} {:>12}", st.scheme, st.oracle, "h", "N", "e_B", "e_rho", "e_u");
            for r in &st.rows {
                s += &format!("\n{:>10.5} {:>6} {:>12.3e} {:>12.3e} {:>12.3e}", r.h, r.n, r.errors.e_b, r.errors.e_rho, r.errors.e_u);
            }
            s + &format!("\nartifacts in {out}")
        }
        Command::ConvergeTime => {
            let st = harness::cmd_converge_time(&cfg)?;
            let rate = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.2}"));
            let mut s = format!("{} oracle {}\n{:>10} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}", st.scheme, st.oracle, "tau", "e_B", "rate", "e_rho", "rate", "e_u", "rate");
            for r in &st.rows {
                s += &format!(
                    "\n{:>10.6} {:>12.3e} {:>6} {:>12.3e} {:>6} {:>12.3e} {:>6}",
                    r.tau,
                    r.e_b,
                    rate(r.rate_b),
                    r.e_rho,
                    rate(r.rate_rho),
                    r.e_u,
                    rate(r.rate_u)
                );
            }
            s + &format!("\nartifacts in {out}")
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, cmd, flags) = match &cli.cmd {
        Cmd::Selftest => {
            let rep = harness::selftest();
            print!("{}", rep.table());
            return if rep.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
        Cmd::Run(f) => ("run", Command::Run, f),
        Cmd::ConvergeSpace(f) => ("converge-space", Command::ConvergeSpace, f),
        Cmd::ConvergeTime(f) => ("converge-time", Command::ConvergeTime, f),
        Cmd::Collide(f) => ("collide", Command::Collide, f),
    };
    match execute(cmd, flags) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let record = ErrorRecord::new(name, &err);
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| err.to_string()));
            if let Some(dir) = &flags.out {
                let _ = record.write(dir);
            }
            ExitCode::FAILURE
        }
    }
}
