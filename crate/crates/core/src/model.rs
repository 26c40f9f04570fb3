//! Physical parameters, field state and exact solitary waves of the
//! Zakharov–Rubenchik system
//!
//! ```text
//! i B_t + ω B_xx − κ (u − ν/2 ρ + q|B|²) B = 0
//! ρ_t + ∂x(u − ν ρ) = −κ ∂x|B|²
//! u_t + ∂x(β ρ − ν u) = κν/2 ∂x|B|²
//! ```
//!
//! The time integrators work on the extended system with the auxiliary field
//! `φ = |B|²` carried alongside `(B, ρ, u)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{take_real, SpectralGrid};

/// Physical constants `ω, κ, ν, β` and the derived coupling
/// `q = κ + ν(κν − 1)/(4(β − ν²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    omega: f64,
    kappa: f64,
    nu: f64,
    beta: f64,
    q: f64,
}

impl Params {
    pub fn new(omega: f64, kappa: f64, nu: f64, beta: f64) -> Result<Self> {
        let denom = beta - nu * nu;
        if denom == 0.0 {
            return Err(Error::SingularParams { beta, nu });
        }
        let q = kappa + nu * (kappa * nu - 1.0) / (4.0 * denom);
        if ![omega, kappa, nu, beta, q].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Params::new"));
        }
        Ok(Self {
            omega,
            kappa,
            nu,
            beta,
            q,
        })
    }

    /// `ω = κ = ν = 1`, `β = 7`: the single-soliton accuracy configuration.
    pub fn accuracy_test() -> Self {
        Self::new(1.0, 1.0, 1.0, 7.0).expect("valid constants")
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Shorthand for [`Params::new`].
pub fn derive_q(omega: f64, kappa: f64, nu: f64, beta: f64) -> Result<Params> {
    Params::new(omega, kappa, nu, beta)
}

/// Fields at one time level. `b` is complex; `rho`, `u` and the auxiliary
/// `phi` are real.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub b: Vec<Complex64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FieldState {
    /// State with consistent auxiliary field `φ = |B|²`.
    pub fn new(t: f64, b: Vec<Complex64>, rho: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let n = b.len();
        for len in [rho.len(), u.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        let phi = b.iter().map(|z| z.norm_sqr()).collect();
        Ok(Self { t, b, rho, u, phi })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            b: vec![Complex64::new(0.0, 0.0); n],
            rho: vec![0.0; n],
            u: vec![0.0; n],
            phi: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        for len in [self.b.len(), self.rho.len(), self.u.len(), self.phi.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        Ok(())
    }

    /// `‖φ − |B|²‖_{h,∞}`.
    pub fn qav_residual(&self) -> f64 {
        self.phi
            .iter()
            .zip(&self.b)
            .fold(0.0, |m, (p, z)| m.max((p - z.norm_sqr()).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.b.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.rho.iter().all(|v| v.is_finite())
            && self.u.iter().all(|v| v.is_finite())
            && self.phi.iter().all(|v| v.is_finite())
    }

    /// Circular shift of every field by `k` grid points.
    pub fn rotated(&self, k: usize) -> Self {
        let mut s = self.clone();
        s.b.rotate_left(k);
        s.rho.rotate_left(k);
        s.u.rotate_left(k);
        s.phi.rotate_left(k);
        s
    }
}

/// Velocity `c`, width `η > 0`, spatial shift `x0` and phase shift `d0` of a
/// solitary wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub c: f64,
    pub eta: f64,
    pub x0: f64,
    pub d0: f64,
}

impl SolitonSpec {
    /// `c = η = 1`, `x0 = 2`, `d0 = 0`.
    pub fn accuracy_test() -> Self {
        Self {
            c: 1.0,
            eta: 1.0,
            x0: 2.0,
            d0: 0.0,
        }
    }
}

/// Sign convention for the squared soliton amplitude `±2ωη/(κζ)`.
///
/// Substituting the travelling wave into the `B` equation gives
/// `ω(R'' − ηR) = κζ R³`, whose sech solution has amplitude²
/// `−2ωη/(κζ)`. That is [`AmplitudeConvention::Negated`]; the other variant
/// keeps the positive sign for comparison in the residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AmplitudeConvention {
    Positive,
    #[default]
    Negated,
}

impl AmplitudeConvention {
    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negated => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negated => "negated",
        }
    }
}

/// Anything that can be sampled as an exact `(B, ρ, u)` triple.
pub trait ExactSolution {
    fn eval(&self, x: f64, t: f64) -> (Complex64, f64, f64);
}

impl<F> ExactSolution for F
where
    F: Fn(f64, f64) -> (Complex64, f64, f64),
{
    fn eval(&self, x: f64, t: f64) -> (Complex64, f64, f64) {
        self(x, t)
    }
}

/// A solitary wave with all derived constants resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Soliton {
    pub spec: SolitonSpec,
    pub omega: f64,
    /// Phase rate `λ = (4ω²η + c²)/(4ω)`.
    pub lambda: f64,
    pub zeta: f64,
    /// Peak modulus of `B`.
    pub amplitude: f64,
    pub rho_coef: f64,
    pub u_coef: f64,
}

impl Soliton {
    pub fn new(params: &Params, spec: SolitonSpec, convention: AmplitudeConvention) -> Result<Self> {
        let SolitonSpec { c, eta, .. } = spec;
        let Params {
            omega,
            kappa,
            nu,
            beta,
            q,
        } = *params;
        if !(eta > 0.0) {
            return Err(Error::InvalidSoliton(format!("eta must be positive, got {eta}")));
        }
        let gap = beta - (c + nu) * (c + nu);
        if gap == 0.0 {
            return Err(Error::InvalidSoliton(format!(
                "beta = (c + nu)^2 = {beta} makes the profile singular"
            )));
        }
        let lambda = (4.0 * omega * omega * eta + c * c) / (4.0 * omega);
        let zeta = q + (4.0 * c * nu * kappa + 3.0 * kappa * nu * nu - 4.0 * kappa * beta) / (4.0 * gap);
        let amp_sq = convention.sign() * 2.0 * omega * eta / (kappa * zeta);
        if !(amp_sq > 0.0 && amp_sq.is_finite()) {
            return Err(Error::InvalidSoliton(format!(
                "squared amplitude {amp_sq} is not positive (kappa*zeta = {}, {} convention)",
                kappa * zeta,
                convention.name()
            )));
        }
        let rho_coef = -(2.0 * c * kappa + kappa * nu) / (2.0 * gap);
        let u_coef = (c * nu * kappa + kappa * nu * nu - 2.0 * kappa * beta) / (2.0 * gap);
        Ok(Self {
            spec,
            omega,
            lambda,
            zeta,
            amplitude: amp_sq.sqrt(),
            rho_coef,
            u_coef,
        })
    }

    /// Envelope `R(ξ) = A sech(√η ξ)`.
    pub fn envelope(&self, xi: f64) -> f64 {
        self.amplitude / (self.spec.eta.sqrt() * xi).cosh()
    }
}

impl ExactSolution for Soliton {
    fn eval(&self, x: f64, t: f64) -> (Complex64, f64, f64) {
        let SolitonSpec { c, x0, d0, .. } = self.spec;
        let r = self.envelope(x - c * t + x0);
        let theta = self.lambda * t + c * (x - c * t) / (2.0 * self.omega) + d0;
        let b = Complex64::from_polar(r, theta);
        let r2 = r * r;
        (b, self.rho_coef * r2, self.u_coef * r2)
    }
}

/// Exact solitary wave `(B, ρ, u)` at `(x, t)` under the validated amplitude
/// convention.
pub fn solitary_wave(params: &Params, spec: SolitonSpec, x: f64, t: f64) -> Result<(Complex64, f64, f64)> {
    Ok(Soliton::new(params, spec, AmplitudeConvention::default())?.eval(x, t))
}

/// Infinity norms of the three residuals of the original (non-extended)
/// system for a candidate exact solution sampled on `grid` at time `t`.
///
/// Time derivatives use a sixth-order central difference with step `1e-3`;
/// space derivatives are spectral.
pub fn pde_residual(params: &Params, exact: &impl ExactSolution, grid: &SpectralGrid, t: f64) -> Result<(f64, f64, f64)> {
    const DT: f64 = 1e-3;
    const W: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

    let xs = grid.points();
    let n = xs.len();
    let sample = |tt: f64| -> (Vec<Complex64>, Vec<f64>, Vec<f64>) {
        let mut b = Vec::with_capacity(n);
        let mut rho = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        for &x in &xs {
            let (bb, r, uu) = exact.eval(x, tt);
            b.push(bb);
            rho.push(r);
            u.push(uu);
        }
        (b, rho, u)
    };

    let (b, rho, u) = sample(t);
    let mut bt = vec![Complex64::new(0.0, 0.0); n];
    let mut rt = vec![0.0; n];
    let mut ut = vec![0.0; n];
    for (k, w) in W.iter().enumerate() {
        let off = (k + 1) as f64 * DT;
        let (bp, rp, up) = sample(t + off);
        let (bm, rm, um) = sample(t - off);
        for j in 0..n {
            bt[j] += (bp[j] - bm[j]) * (w / DT);
            rt[j] += (rp[j] - rm[j]) * (w / DT);
            ut[j] += (up[j] - um[j]) * (w / DT);
        }
    }

    let (omega, kappa, nu, beta, q) = (params.omega, params.kappa, params.nu, params.beta, params.q);
    let b2: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();
    let bxx = grid.apply_d2(&b)?;
    let scale = b2.iter().chain(&rho).chain(&u).fold(0.0_f64, |m, v| m.max(v.abs()));

    let flux_rho: Vec<Complex64> = (0..n)
        .map(|j| (u[j] - nu * rho[j] + kappa * b2[j]).into())
        .collect();
    let flux_u: Vec<Complex64> = (0..n)
        .map(|j| (beta * rho[j] - nu * u[j] - 0.5 * kappa * nu * b2[j]).into())
        .collect();
    let drho = take_real(&grid.apply_d1(&flux_rho)?, scale, "pde_residual")?;
    let du = take_real(&grid.apply_d1(&flux_u)?, scale, "pde_residual")?;

    let mut res = (0.0_f64, 0.0_f64, 0.0_f64);
    let i = Complex64::i();
    for j in 0..n {
        let rb = i * bt[j] + bxx[j] * omega - b[j] * (kappa * (u[j] - 0.5 * nu * rho[j] + q * b2[j]));
        res.0 = res.0.max(rb.norm());
        res.1 = res.1.max((rt[j] + drho[j]).abs());
        res.2 = res.2.max((ut[j] + du[j]).abs());
    }
    Ok(res)
}

/// Samples an exact solution on the grid at time `t`, with `φ = |B|²`.
pub fn sample_exact(grid: &SpectralGrid, exact: &impl ExactSolution, t: f64) -> FieldState {
    let n = grid.len();
    let mut b = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for x in grid.points() {
        let (bb, r, uu) = exact.eval(x, t);
        b.push(bb);
        rho.push(r);
        u.push(uu);
    }
    FieldState::new(t, b, rho, u).expect("equal lengths")
}

/// Single solitary wave at `t = 0`.
pub fn initial_single(params: &Params, spec: SolitonSpec, grid: &SpectralGrid) -> Result<FieldState> {
    let sol = Soliton::new(params, spec, AmplitudeConvention::default())?;
    Ok(sample_exact(grid, &sol, 0.0))
}

/// The three two-soliton interaction setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionCase {
    /// High velocity.
    I,
    /// Intermediate velocity.
    II,
    /// Small velocity.
    III,
}

impl std::str::FromStr for CollisionCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Self::I),
            "II" | "2" => Ok(Self::II),
            "III" | "3" => Ok(Self::III),
            other => Err(Error::Config(format!("unknown collision case {other:?}"))),
        }
    }
}

/// Parameters, waves, domain and final time of a collision case.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionSetup {
    pub params: Params,
    pub waves: [SolitonSpec; 2],
    pub domain: (f64, f64),
    pub t_final: f64,
}

impl CollisionCase {
    pub fn setup(self) -> CollisionSetup {
        let wave = |c: f64, x0: f64| SolitonSpec { c, eta: 1.0, x0, d0: 0.0 };
        let (params, waves, half_width, t_final) = match self {
            Self::I => (Params::new(1.0, 2.0, 0.2, 75.0), [wave(8.0, 8.0), wave(-8.0, -8.0)], 20.0, 2.0),
            Self::II => (Params::new(1.0, 3.0, 0.2, 12.0), [wave(1.5, 9.0), wave(-1.5, -9.0)], 24.0, 12.0),
            Self::III => (Params::new(1.0, 1.0, 0.5, 3.0), [wave(0.0, -8.0), wave(-0.5, -26.0)], 70.0, 60.0),
        };
        CollisionSetup {
            params: params.expect("valid case constants"),
            waves,
            domain: (-half_width, half_width),
            t_final,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
        }
    }
}

/// Superposition of solitary waves at `t = 0`.
pub fn initial_superposition(params: &Params, waves: &[SolitonSpec], grid: &SpectralGrid) -> Result<FieldState> {
    let solitons = waves
        .iter()
        .map(|w| Soliton::new(params, *w, AmplitudeConvention::default()))
        .collect::<Result<Vec<_>>>()?;
    let sum = |x: f64, t: f64| {
        solitons.iter().fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |acc, s| {
            let (b, r, u) = s.eval(x, t);
            (acc.0 + b, acc.1 + r, acc.2 + u)
        })
    };
    Ok(sample_exact(grid, &sum, 0.0))
}

/// Two-soliton initial data of a collision case on `grid`.
pub fn initial_collision(params: &Params, case: CollisionCase, grid: &SpectralGrid) -> Result<FieldState> {
    initial_superposition(params, &case.setup().waves, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_values() {
        assert_eq!(derive_q(1.0, 1.0, 1.0, 7.0).unwrap().q(), 1.0);
        let p = derive_q(1.0, 2.0, 0.2, 75.0).unwrap();
        assert!((p.q() - (2.0 - 0.12 / 299.84)).abs() < 1e-15);
        assert!((p.q() - 1.999_599_8).abs() < 1e-7);
        let p = derive_q(1.0, 3.0, 0.2, 12.0).unwrap();
        assert!((p.q() - (3.0 - 0.08 / 47.84)).abs() < 1e-15);
        assert!((p.q() - 2.998_327_7).abs() < 1e-7);
        assert!(matches!(derive_q(1.0, 1.0, 2.0, 4.0), Err(Error::SingularParams { .. })));
    }

    #[test]
    fn q_is_reproducible() {
        let p = derive_q(1.3, 0.7, 0.4, 2.0).unwrap();
        let again = derive_q(p.omega(), p.kappa(), p.nu(), p.beta()).unwrap();
        assert_eq!(p.q().to_bits(), again.q().to_bits());
    }

    #[test]
    fn printed_sign_gives_no_real_amplitude() {
        let p = Params::accuracy_test();
        let spec = SolitonSpec::accuracy_test();
        let err = Soliton::new(&p, spec, AmplitudeConvention::Positive).unwrap_err();
        assert!(matches!(err, Error::InvalidSoliton(_)));
        let s = Soliton::new(&p, spec, AmplitudeConvention::Negated).unwrap();
        assert!((s.zeta + 0.75).abs() < 1e-15);
        assert!((s.amplitude - (8.0_f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn peak_and_phase() {
        let p = Params::accuracy_test();
        let spec = SolitonSpec::accuracy_test();
        let s = Soliton::new(&p, spec, AmplitudeConvention::default()).unwrap();
        let (b, _, _) = solitary_wave(&p, spec, -spec.x0, 0.0).unwrap();
        let expect = (2.0 * p.omega() * spec.eta / (p.kappa() * s.zeta).abs()).sqrt();
        assert!((b.norm() - expect).abs() < 1e-15);
        for x in [-3.0, 0.5, 4.0] {
            let (b, _, _) = solitary_wave(&p, spec, x, 0.0).unwrap();
            let expected = spec.c * x / (2.0 * p.omega());
            let d = (b.arg() - expected).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(d < 1e-12 || (2.0 * std::f64::consts::PI - d) < 1e-12);
        }
    }

    #[test]
    fn acoustic_ratio_is_constant() {
        let p = Params::new(1.0, 1.5, 0.3, 5.0).unwrap();
        let spec = SolitonSpec { c: 0.7, eta: 1.2, x0: -1.0, d0: 0.4 };
        let (c, nu, kappa, beta) = (spec.c, p.nu(), p.kappa(), p.beta());
        let ratio = -(c * nu * kappa + kappa * nu * nu - 2.0 * kappa * beta) / (2.0 * c * kappa + kappa * nu);
        for (x, t) in [(0.0, 0.0), (1.5, 0.3), (-2.0, 4.0)] {
            let (_, rho, u) = solitary_wave(&p, spec, x, t).unwrap();
            assert!((u / rho - ratio).abs() < 1e-12 * ratio.abs());
        }
    }

    #[test]
    fn modulus_travels() {
        let p = Params::accuracy_test();
        let spec = SolitonSpec::accuracy_test();
        let s = Soliton::new(&p, spec, AmplitudeConvention::default()).unwrap();
        for (x, t) in [(0.0, 0.0), (3.0, 1.0), (-7.5, 2.5), (10.0, 9.0)] {
            let (b, _, _) = s.eval(x, t);
            assert!((b.norm() - s.envelope(x - spec.c * t + spec.x0)).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_soliton_denominator() {
        let p = Params::new(1.0, 1.0, 1.0, 4.0).unwrap();
        let spec = SolitonSpec { c: 1.0, eta: 1.0, x0: 0.0, d0: 0.0 };
        assert!(Soliton::new(&p, spec, AmplitudeConvention::Negated).is_err());
        let spec = SolitonSpec { eta: 0.0, ..SolitonSpec::accuracy_test() };
        assert!(Soliton::new(&Params::accuracy_test(), spec, AmplitudeConvention::Negated).is_err());
    }

    #[test]
    fn residual_of_zero_candidate() {
        let grid = SpectralGrid::new(-10.0, 10.0, 64).unwrap();
        let zero = |_x: f64, _t: f64| (Complex64::new(0.0, 0.0), 0.0, 0.0);
        let r = pde_residual(&Params::accuracy_test(), &zero, &grid, 0.0).unwrap();
        assert_eq!(r, (0.0, 0.0, 0.0));
    }

    #[test]
    fn negated_convention_solves_the_system() {
        let p = Params::accuracy_test();
        let grid = SpectralGrid::new(-32.0, 32.0, 512).unwrap();
        let s = Soliton::new(&p, SolitonSpec::accuracy_test(), AmplitudeConvention::Negated).unwrap();
        for t in [0.0, 1.3] {
            let (rb, rr, ru) = pde_residual(&p, &s, &grid, t).unwrap();
            assert!(rb <= 1e-6 && rr <= 1e-6 && ru <= 1e-6, "{rb:e} {rr:e} {ru:e}");
        }
        let mut detuned = s;
        detuned.lambda += 0.1;
        let (rb, _, _) = pde_residual(&p, &detuned, &grid, 0.0).unwrap();
        assert!(rb > 1e-2);
    }

    #[test]
    fn single_initial_state() {
        let p = Params::accuracy_test();
        let spec = SolitonSpec::accuracy_test();
        // h = 1/8 puts x = -x0 on the grid
        let grid = SpectralGrid::new(-32.0, 32.0, 512).unwrap();
        let st = initial_single(&p, spec, &grid).unwrap();
        assert_eq!(st.t, 0.0);
        assert_eq!(st.qav_residual(), 0.0);
        let centre = grid.points().iter().position(|&x| x == -spec.x0).unwrap();
        for k in 1..100 {
            assert!((st.rho[centre + k] - st.rho[centre - k]).abs() < 1e-15);
            assert!((st.u[centre + k] - st.u[centre - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn collision_cases() {
        let setup = CollisionCase::I.setup();
        assert_eq!(setup.domain, (-20.0, 20.0));
        assert_eq!(setup.t_final, 2.0);
        let grid = SpectralGrid::with_mesh(-20.0, 20.0, 0.125).unwrap();
        let st = initial_collision(&setup.params, CollisionCase::I, &grid).unwrap();
        assert_eq!(st.qav_residual(), 0.0);
        for (j, x) in grid.points().into_iter().enumerate() {
            if (x - 8.0).abs() >= 12.0 && (x + 8.0).abs() >= 12.0 {
                assert!(st.b[j].norm() <= 1e-5);
            }
        }
        for w in setup.waves {
            let (c, nu, kappa, beta) = (w.c, setup.params.nu(), setup.params.kappa(), setup.params.beta());
            if 2.0 * c * kappa + kappa * nu > 0.0 && 2.0 * beta > 2.0 * (c + nu).powi(2) {
                let s = Soliton::new(&setup.params, w, AmplitudeConvention::default()).unwrap();
                assert!(s.rho_coef < 0.0);
            }
        }
        assert_eq!(CollisionCase::II.setup().domain, (-24.0, 24.0));
        assert_eq!(CollisionCase::II.setup().t_final, 12.0);
        let iii = CollisionCase::III.setup();
        assert_eq!((iii.domain, iii.t_final), ((-70.0, 70.0), 60.0));
        assert_eq!("ii".parse::<CollisionCase>().unwrap(), CollisionCase::II);
    }
}
