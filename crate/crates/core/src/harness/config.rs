//! Run configuration.
//!
//! A configuration is resolved in three layers: built-in defaults for the
//! command, then a flat TOML file, then command-line overrides. Numbers may be
//! written as fractions (`tau = "1/50"`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{InitialGuess, Policy, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::model::{
    initial_collision, initial_single, AmplitudeConvention, CollisionCase, FieldState, Params, Soliton, SolitonSpec,
};
use crate::spectral::SpectralGrid;
use crate::tableau::Scheme;

/// Initial data of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    Soliton(SolitonSpec),
    Collision { case: CollisionCase },
}

/// Which truth a convergence study measures against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleChoice {
    /// Analytic solitary wave if it validates, otherwise a fine reference run.
    #[default]
    Auto,
    /// Always use a fine reference run.
    Reference,
}

/// Fully resolved configuration. Serialized verbatim into `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega: f64,
    pub kappa: f64,
    pub nu: f64,
    pub beta: f64,
    pub initial: InitialData,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub scheme: Scheme,
    pub tol: f64,
    pub max_iter: usize,
    pub policy: Policy,
    pub guess: InitialGuess,
    /// Steps between invariant records.
    pub cadence: usize,
    /// Steps between snapshots; 0 picks about 20 frames.
    pub snapshot_cadence: usize,
    pub out: PathBuf,
    pub emit_plots: bool,
    pub oracle: OracleChoice,
    /// Mesh sizes of a spatial study; empty means `h₀ = 1` halved three times.
    pub h_ladder: Vec<f64>,
    /// Step sizes of a temporal study; empty means `tau` halved five times.
    pub tau_ladder: Vec<f64>,
}

/// A number given either directly or as a `"p/q"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Value(f64),
    Text(String),
}

impl Num {
    fn get(&self, key: &str) -> Result<f64> {
        match self {
            Num::Value(v) => Ok(*v),
            Num::Text(s) => parse_number(s).map_err(|e| Error::Config(format!("{key}: {e}"))),
        }
    }
}

/// Parses `"0.02"`, `"1e-3"` or `"1/50"`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            Ok(p / q)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    omega: Option<Num>,
    kappa: Option<Num>,
    nu: Option<Num>,
    beta: Option<Num>,
    c: Option<Num>,
    eta: Option<Num>,
    x0: Option<Num>,
    d0: Option<Num>,
    case: Option<String>,
    a: Option<Num>,
    b: Option<Num>,
    #[serde(rename = "N")]
    n: Option<usize>,
    h: Option<Num>,
    tau: Option<Num>,
    #[serde(rename = "T")]
    t_final: Option<Num>,
    scheme: Option<String>,
    tol: Option<Num>,
    max_iter: Option<usize>,
    policy: Option<String>,
    guess: Option<InitialGuess>,
    cadence: Option<usize>,
    snapshot_cadence: Option<usize>,
    out: Option<PathBuf>,
    emit_plots: Option<bool>,
    oracle: Option<OracleChoice>,
    h_ladder: Option<Vec<Num>>,
    tau_ladder: Option<Vec<Num>>,
}

/// Command-line overrides; `None` leaves the lower layer untouched.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scheme: Option<Scheme>,
    pub n: Option<usize>,
    pub tau: Option<f64>,
    pub t_final: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub policy: Option<Policy>,
    pub out: Option<PathBuf>,
    pub cadence: Option<usize>,
    pub case: Option<CollisionCase>,
    pub emit_plots: bool,
}

/// Defaults that differ between subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    ConvergeSpace,
    ConvergeTime,
    Collide,
}

fn mesh_points(a: f64, b: f64, h: f64) -> Result<usize> {
    SpectralGrid::with_mesh(a, b, h).map(|g| g.len())
}

impl RunConfig {
    /// Single-soliton accuracy test: `Ω = [−32, 32]`, `h = 1/16`, `τ = 1/50`,
    /// `T = 4`, FPRK-2.
    pub fn accuracy_test() -> Self {
        let p = Params::accuracy_test();
        Self {
            omega: p.omega(),
            kappa: p.kappa(),
            nu: p.nu(),
            beta: p.beta(),
            initial: InitialData::Soliton(SolitonSpec::accuracy_test()),
            a: -32.0,
            b: 32.0,
            n: 1024,
            tau: 1.0 / 50.0,
            t_final: 4.0,
            scheme: Scheme::Fprk2,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            policy: Policy::Warn,
            guess: InitialGuess::State,
            cadence: 10,
            snapshot_cadence: 0,
            out: PathBuf::from("out"),
            emit_plots: false,
            oracle: OracleChoice::Auto,
            h_ladder: Vec::new(),
            tau_ladder: Vec::new(),
        }
    }

    /// A collision case with `h = 1/8`, `τ = 1/200`.
    pub fn collision(case: CollisionCase) -> Self {
        let setup = case.setup();
        let (a, b) = setup.domain;
        Self {
            omega: setup.params.omega(),
            kappa: setup.params.kappa(),
            nu: setup.params.nu(),
            beta: setup.params.beta(),
            initial: InitialData::Collision { case },
            a,
            b,
            n: mesh_points(a, b, 1.0 / 8.0).expect("case domains are multiples of 1/4"),
            tau: 1.0 / 200.0,
            t_final: setup.t_final,
            ..Self::accuracy_test()
        }
    }

    /// Defaults for a subcommand, before any file or flag is applied.
    pub fn defaults(cmd: Command, case: Option<CollisionCase>) -> Self {
        match (cmd, case) {
            (Command::Collide, c) => Self::collision(c.unwrap_or(CollisionCase::I)),
            (_, Some(c)) => Self::collision(c),
            (Command::ConvergeSpace, None) => Self {
                tau: 1e-3,
                h_ladder: vec![1.0, 0.5, 0.25, 0.125],
                ..Self::accuracy_test()
            },
            _ => Self::accuracy_test(),
        }
    }

    /// Defaults, then `file`, then `ov`. For `converge-time` an unset `tau`
    /// becomes the first rung of the scheme's default ladder.
    pub fn resolve(cmd: Command, file: Option<&Path>, ov: &Overrides) -> Result<Self> {
        let fc: FileConfig = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let file_case = fc.case.as_deref().map(str::parse::<CollisionCase>).transpose()?;
        let mut cfg = Self::defaults(cmd, ov.case.or(file_case));
        let tau_given = fc.tau.is_some() || ov.tau.is_some();
        cfg.apply_file(&fc)?;
        cfg.apply_overrides(ov);
        if cmd == Command::ConvergeTime && !tau_given {
            cfg.tau = default_time_ladder_start(cfg.scheme);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, fc: &FileConfig) -> Result<()> {
        let set = |dst: &mut f64, v: &Option<Num>, key: &str| -> Result<()> {
            if let Some(v) = v {
                *dst = v.get(key)?;
            }
            Ok(())
        };
        set(&mut self.omega, &fc.omega, "omega")?;
        set(&mut self.kappa, &fc.kappa, "kappa")?;
        set(&mut self.nu, &fc.nu, "nu")?;
        set(&mut self.beta, &fc.beta, "beta")?;
        if fc.c.is_some() || fc.eta.is_some() || fc.x0.is_some() || fc.d0.is_some() {
            let mut spec = match self.initial {
                InitialData::Soliton(s) => s,
                InitialData::Collision { .. } => {
                    return Err(Error::Config("soliton keys (c, eta, x0, d0) conflict with case".into()))
                }
            };
            set(&mut spec.c, &fc.c, "c")?;
            set(&mut spec.eta, &fc.eta, "eta")?;
            set(&mut spec.x0, &fc.x0, "x0")?;
            set(&mut spec.d0, &fc.d0, "d0")?;
            self.initial = InitialData::Soliton(spec);
        }
        set(&mut self.a, &fc.a, "a")?;
        set(&mut self.b, &fc.b, "b")?;
        match (fc.n, &fc.h) {
            (Some(_), Some(_)) => return Err(Error::Config("give either N or h, not both".into())),
            (Some(n), None) => self.n = n,
            (None, Some(h)) => self.n = mesh_points(self.a, self.b, h.get("h")?)?,
            (None, None) => {}
        }
        set(&mut self.tau, &fc.tau, "tau")?;
        set(&mut self.t_final, &fc.t_final, "T")?;
        set(&mut self.tol, &fc.tol, "tol")?;
        if let Some(s) = &fc.scheme {
            self.scheme = s.parse()?;
        }
        if let Some(p) = &fc.policy {
            self.policy = p.parse()?;
        }
        if let Some(v) = fc.max_iter {
            self.max_iter = v;
        }
        if let Some(v) = fc.guess {
            self.guess = v;
        }
        if let Some(v) = fc.cadence {
            self.cadence = v;
        }
        if let Some(v) = fc.snapshot_cadence {
            self.snapshot_cadence = v;
        }
        if let Some(v) = &fc.out {
            self.out = v.clone();
        }
        if let Some(v) = fc.emit_plots {
            self.emit_plots = v;
        }
        if let Some(v) = fc.oracle {
            self.oracle = v;
        }
        if let Some(l) = &fc.h_ladder {
            self.h_ladder = l.iter().map(|v| v.get("h_ladder")).collect::<Result<_>>()?;
        }
        if let Some(l) = &fc.tau_ladder {
            self.tau_ladder = l.iter().map(|v| v.get("tau_ladder")).collect::<Result<_>>()?;
        }
        Ok(())
    }

    fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(v) = ov.scheme {
            self.scheme = v;
        }
        if let Some(v) = ov.n {
            self.n = v;
        }
        if let Some(v) = ov.tau {
            self.tau = v;
        }
        if let Some(v) = ov.t_final {
            self.t_final = v;
        }
        if let Some(v) = ov.tol {
            self.tol = v;
        }
        if let Some(v) = ov.max_iter {
            self.max_iter = v;
        }
        if let Some(v) = ov.policy {
            self.policy = v;
        }
        if let Some(v) = &ov.out {
            self.out = v.clone();
        }
        if let Some(v) = ov.cadence {
            self.cadence = v;
        }
        if ov.emit_plots {
            self.emit_plots = true;
        }
    }

    /// Checks the field invariants and that the derived objects can be built.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.kappa, self.nu, self.beta, self.a, self.b, self.tau, self.t_final, self.tol];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("all numeric settings must be finite".into()));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.t_final < 0.0 {
            return Err(Error::Config(format!("T must be non-negative, got {}", self.t_final)));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be at least 1".into()));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tol must be positive and max_iter at least 1".into()));
        }
        if self.h_ladder.iter().chain(&self.tau_ladder).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("ladder entries must be positive".into()));
        }
        self.params()?;
        self.grid()?;
        Ok(())
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.omega, self.kappa, self.nu, self.beta)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.a, self.b, self.n)
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// Initial state on `grid`.
    pub fn initial_state(&self, grid: &SpectralGrid) -> Result<FieldState> {
        let params = self.params()?;
        match self.initial {
            InitialData::Soliton(spec) => initial_single(&params, spec, grid),
            InitialData::Collision { case } => initial_collision(&params, case, grid),
        }
    }

    /// The solitary wave of a single-soliton run under `convention`.
    pub fn soliton(&self, convention: AmplitudeConvention) -> Option<Result<Soliton>> {
        match self.initial {
            InitialData::Soliton(spec) => Some(self.params().and_then(|p| Soliton::new(&p, spec, convention))),
            InitialData::Collision { .. } => None,
        }
    }

    /// The spatial ladder, defaulting to `1, 1/2, 1/4, 1/8`.
    pub fn space_ladder(&self) -> Vec<f64> {
        if self.h_ladder.is_empty() {
            vec![1.0, 0.5, 0.25, 0.125]
        } else {
            self.h_ladder.clone()
        }
    }

    /// The temporal ladder, defaulting to `tau` halved five times.
    pub fn time_ladder(&self) -> Vec<f64> {
        if self.tau_ladder.is_empty() {
            (0..6).map(|k| self.tau / f64::powi(2.0, k)).collect()
        } else {
            self.tau_ladder.clone()
        }
    }
}

/// First rung of the default temporal ladder: `1/10` for two stages, `2/5`
/// for three, `1/5` otherwise.
pub fn default_time_ladder_start(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Fprk2 => 0.1,
        Scheme::Fprk3 => 0.4,
        _ => 0.2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/50").unwrap(), 0.02);
        assert_eq!(parse_number(" 1e-3 ").unwrap(), 1e-3);
        assert!(parse_number("x").is_err());
    }

    #[test]
    fn defaults_validate() {
        for cmd in [Command::Run, Command::ConvergeSpace, Command::ConvergeTime, Command::Collide] {
            RunConfig::resolve(cmd, None, &Overrides::default()).unwrap();
        }
        let t = RunConfig::resolve(Command::ConvergeTime, None, &Overrides::default()).unwrap();
        assert_eq!(t.time_ladder(), vec![0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]);
    }

    #[test]
    fn cli_wins_over_file() {
        let f = file("tau = \"1/100\"\nT = 2\nscheme = \"fprk3\"\nh = 0.125\n");
        let ov = Overrides {
            tau: Some(0.05),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::Run, Some(f.path()), &ov).unwrap();
        assert_eq!(cfg.tau, 0.05);
        assert_eq!(cfg.t_final, 2.0);
        assert_eq!(cfg.scheme, Scheme::Fprk3);
        assert_eq!(cfg.n, 512);
    }

    #[test]
    fn case_sets_setup() {
        let f = file("case = \"III\"\n");
        let cfg = RunConfig::resolve(Command::Run, Some(f.path()), &Overrides::default()).unwrap();
        assert_eq!((cfg.a, cfg.b, cfg.t_final, cfg.n), (-70.0, 70.0, 60.0, 1120));
        assert_eq!((cfg.kappa, cfg.nu, cfg.beta), (1.0, 0.5, 3.0));
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            "tau = 0\n",
            "cadence = 0\n",
            "T = -1\n",
            "nonsense = 1\n",
            "N = 11\n",
            "beta = 1\nnu = 1\n",
            "N = 64\nh = 1\n",
            "scheme = \"rk9\"\n",
        ];
        for text in bad {
            let f = file(text);
            assert!(RunConfig::resolve(Command::Run, Some(f.path()), &Overrides::default()).is_err(), "{text}");
        }
    }

    #[test]
    fn serializes_in_declaration_order() {
        let cfg = RunConfig::accuracy_test();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.starts_with("{\"omega\":1.0,\"kappa\":1.0,\"nu\":1.0,\"beta\":7.0,\"initial\":{\"kind\":\"soliton\""));
    }
}
