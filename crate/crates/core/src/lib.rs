//! Energy-preserving Fourier pseudo-spectral symplectic Runge–Kutta solvers
//! for the one-dimensional Zakharov–Rubenchik equation.
//!
//! The system is integrated in its quadratic-auxiliary-variable form, where
//! `φ = |B|²` is carried as a fourth field. Any Runge–Kutta method whose
//! coefficients satisfy `b_i a_ij + b_j a_ji = b_i b_j` (the Gauss methods in
//! [`tableau`]) then conserves the discrete mass, the quadratic energy and,
//! with it, the Hamiltonian; every Runge–Kutta method conserves the two
//! linear invariants.
//!
//! Modules, bottom-up:
//!
//! - [`spectral`]: periodic grid, FFT differentiation, discrete inner products
//! - [`model`]: parameters, field state, exact solitary waves, initial data
//! - [`tableau`]: Butcher tableaux and the symplecticity check
//! - [`integrator`]: per-mode factorized stage solver, fixed-point iteration,
//!   time stepping, and the Crank–Nicolson reference step
//! - [`invariants`]: conserved quantities and error norms
//! - [`oracle`]: dense/brute-force references used for validation
//! - [`harness`]: experiment drivers, configuration and file output

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod integrator;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod spectral;
pub mod tableau;

pub use error::{Error, Result};
pub use integrator::{
    build_stage_solver, cn_fp_step, fixed_point_stage_solve, integrate, CnFpSolver, InitialGuess, IterationReport,
    IterationStats, Observer, Policy, StageSlopes, StageSolver, Stepper,
};
pub use invariants::{energy_quadratic, error_norms, hamiltonian, linear_invariants, mass, InvariantRecord};
pub use model::{
    derive_q, initial_collision, initial_single, pde_residual, solitary_wave, AmplitudeConvention, CollisionCase,
    ExactSolution, FieldState, Params, Soliton, SolitonSpec,
};
pub use spectral::SpectralGrid;
pub use tableau::{gauss_tableau, symplectic_defect, Scheme, Tableau};
