//! Configuration, experiment drivers and artifact output.
//!
//! Every command resolves a [`RunConfig`], runs, and writes CSV tables plus a
//! `run.json` summary that embeds the resolved configuration.

pub mod config;
pub mod experiments;
pub mod observers;
pub mod oracle_select;
pub mod output;
pub mod selftest;

pub use config::{Command, InitialData, OracleChoice, Overrides, RunConfig};
pub use experiments::{
    cmd_collide, cmd_converge_space, cmd_converge_time, cmd_run, converge_space, converge_time, inelasticity,
    observed_rate, simulate, ErrorRecord, FieldErrors, RunReport, SpaceStudy, TimeStudy,
};
pub use observers::{drift_summary, DriftSummary, InvariantLog, SnapshotLog};
pub use oracle_select::{select_convention, OracleDecision, VALIDATION_TOL};
pub use selftest::{selftest, selftest_with, SelftestReport};
