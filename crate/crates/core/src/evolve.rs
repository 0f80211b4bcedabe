//! Fixed-step time-ordered propagation of `i dU/dt = H(t) U`.
//!
//! Two schemes are available. `ExpMidpoint` multiplies exact exponentials of
//! `H` sampled at step midpoints: second order and unitary step by step.
//! `Rk4` is the classical Runge-Kutta scheme; it is fourth order but only
//! approximately unitary, and it is the scheme the density-matrix path uses.
//!
//! Every run validates its step size first: `rate * dt <= max_phase_per_step`
//! where `rate` is the larger of the sampled `||H||_inf` and the configured
//! oscillation rate (for generators carrying an explicit `exp(-i V t)`).

use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{expm, CMatrix, LinalgError, HERMITIAN_TOL};

pub const MIN_STEPS: usize = 100;
pub const DEFAULT_MAX_PHASE_PER_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExpMidpoint,
    Rk4,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExpMidpoint => "exp-midpoint",
            Method::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("at least {MIN_STEPS} steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("max_phase_per_step must lie in (0, 0.5], got {0}")]
    InvalidMaxPhase(f64),
    #[error("oscillation rate must be nonnegative and finite, got {0}")]
    InvalidOscillationRate(f64),
    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("step too coarse: {steps} steps given, at least {required} needed")]
    UnderResolved { steps: usize, required: usize },
    #[error("Hamiltonian not Hermitian at t = {t} (defect {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },
    #[error("Hamiltonian dimension changed from {expected} to {found}")]
    DimensionChanged { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub steps: usize,
    /// Largest phase `rate * dt` a single step may accumulate.
    pub max_phase_per_step: f64,
    /// Extra angular frequency (rad/us) each step must resolve, e.g. the
    /// blockade shift `V` for a rotating-frame generator.
    pub oscillation_rate: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::ExpMidpoint,
            steps: 2000,
            max_phase_per_step: DEFAULT_MAX_PHASE_PER_STEP,
            oscillation_rate: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, steps: usize) -> Result<Self, EvolveError> {
        let cfg = IntegratorConfig {
            method,
            steps,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_steps(self, steps: usize) -> Self {
        IntegratorConfig { steps, ..self }
    }

    pub fn with_oscillation_rate(self, rate: f64) -> Self {
        IntegratorConfig {
            oscillation_rate: rate,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.steps < MIN_STEPS {
            return Err(EvolveError::TooFewSteps(self.steps));
        }
        if !(self.max_phase_per_step > 0.0 && self.max_phase_per_step <= 0.5) {
            return Err(EvolveError::InvalidMaxPhase(self.max_phase_per_step));
        }
        if !(self.oscillation_rate >= 0.0 && self.oscillation_rate.is_finite()) {
            return Err(EvolveError::InvalidOscillationRate(self.oscillation_rate));
        }
        Ok(())
    }

    /// Smallest step count resolving `rate` over `span`.
    pub fn required_steps(&self, rate: f64, span: f64) -> usize {
        let n = libm::ceil(rate * span / self.max_phase_per_step);
        (n as usize).max(MIN_STEPS)
    }
}

/// Propagator from `t0` to `t1`.
pub fn propagate<F>(h: F, t0: f64, t1: f64, config: &IntegratorConfig) -> Result<CMatrix, EvolveError>
where
    F: Fn(f64) -> CMatrix,
{
    propagate_observed(h, t0, t1, config, |_, _| {})
}

/// Like [`propagate`], calling `observer(t, U(t))` at `t0` and after every
/// step. `U(t0)` is the identity.
pub fn propagate_observed<F, O>(
    h: F,
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    mut observer: O,
) -> Result<CMatrix, EvolveError>
where
    F: Fn(f64) -> CMatrix,
    O: FnMut(f64, &CMatrix),
{
    config.validate()?;
    if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
        return Err(EvolveError::InvalidInterval { t0, t1 });
    }
    let n = config.steps;
    let span = t1 - t0;
    let dt = span / n as f64;
    let end = n as f64;
    let time = |k: f64| if k >= end { t1 } else { t0 + k * dt };

    let dim = validate_steps(&h, n, span, config, time)?;

    let mut u = CMatrix::identity(dim);
    observer(t0, &u);
    let minus_i = Complex64::new(0.0, -1.0);
    for k in 0..n {
        let kf = k as f64;
        u = match config.method {
            Method::ExpMidpoint => {
                let t = time(kf + 0.5);
                let step = expm(&h(t), minus_i * dt).map_err(|e| match e {
                    LinalgError::NotHermitian { deviation } => EvolveError::NonHermitian { t, deviation },
                    other => unreachable!("expm failed unexpectedly: {other}"),
                })?;
                &step * &u
            }
            Method::Rk4 => {
                let rhs = |t: f64, m: &CMatrix| (&h(t) * m).scale(minus_i);
                let k1 = rhs(time(kf), &u);
                let k2 = rhs(time(kf + 0.5), &(&u + &k1.scale((0.5 * dt).into())));
                let k3 = rhs(time(kf + 0.5), &(&u + &k2.scale((0.5 * dt).into())));
                let k4 = rhs(time(kf + 1.0), &(&u + &k3.scale(dt.into())));
                let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0.into());
                &u + &incr.scale((dt / 6.0).into())
            }
        };
        observer(time(kf + 1.0), &u);
    }
    Ok(u)
}

/// Samples the generator at every point the scheme will evaluate, checking
/// Hermiticity, a fixed dimension and the phase-per-step bound. Returns the
/// dimension.
pub(crate) fn validate_steps<F, T>(
    h: &F,
    n: usize,
    span: f64,
    config: &IntegratorConfig,
    time: T,
) -> Result<usize, EvolveError>
where
    F: Fn(f64) -> CMatrix,
    T: Fn(f64) -> f64,
{
    let mut dim = 0;
    let mut rate = config.oscillation_rate;
    // midpoints for both schemes, plus the step ends for RK4
    let probes = match config.method {
        Method::ExpMidpoint => n,
        Method::Rk4 => 2 * n + 1,
    };
    for j in 0..probes {
        let kf = match config.method {
            Method::ExpMidpoint => j as f64 + 0.5,
            Method::Rk4 => j as f64 * 0.5,
        };
        let t = time(kf);
        let m = h(t);
        if dim == 0 {
            dim = m.dim();
        } else if m.dim() != dim {
            return Err(EvolveError::DimensionChanged {
                expected: dim,
                found: m.dim(),
            });
        }
        let norm = m.inf_norm();
        let deviation = m.hermiticity_defect();
        if deviation.is_nan() || deviation > HERMITIAN_TOL * norm.max(1.0) {
            return Err(EvolveError::NonHermitian { t, deviation });
        }
        rate = rate.max(norm);
    }
    let dt = span / n as f64;
    if rate * dt > config.max_phase_per_step * (1.0 + 1e-12) {
        return Err(EvolveError::UnderResolved {
            steps: n,
            required: config.required_steps(rate, span),
        });
    }
    Ok(dim)
}

/// `(2 pi / rate) / 20`, the coarsest step that resolves an oscillation at
/// `rate` with twenty samples per period.
pub fn twenty_samples_per_period(rate: f64) -> f64 {
    2.0 * PI / rate / 20.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// H(t) = W (cos(wt) sx + sin(wt) sy) + D sz. In the frame rotating
    /// with exp(-i w t sz / 2) it is constant, which gives the exact
    /// propagator exp(-i w t sz/2) exp(-i t (W sx + (D - w/2) sz)).
    fn rotating_field(w_amp: f64, w: f64, d: f64) -> impl Fn(f64) -> CMatrix {
        move |t| {
            let x = CMatrix::sigma_x().scale(c(w_amp * libm::cos(w * t), 0.0));
            let y = CMatrix::sigma_y().scale(c(w_amp * libm::sin(w * t), 0.0));
            let z = CMatrix::sigma_z().scale(c(d, 0.0));
            &(&x + &y) + &z
        }
    }

    fn rotating_field_exact(w_amp: f64, w: f64, d: f64, t: f64) -> CMatrix {
        let frame = CMatrix::diag(&[c(0.0, -w * t / 2.0).exp(), c(0.0, w * t / 2.0).exp()]);
        let gen = &CMatrix::sigma_x().scale(c(w_amp, 0.0)) + &CMatrix::sigma_z().scale(c(d - w / 2.0, 0.0));
        let body = expm(&gen, c(0.0, -t)).unwrap();
        &frame * &body
    }

    #[test]
    fn constant_generator_is_exact() {
        let omega = 3.7;
        let h = |_t: f64| CMatrix::sigma_x().scale(c(omega, 0.0));
        let cfg = IntegratorConfig::new(Method::ExpMidpoint, 200).unwrap();
        let u = propagate(h, 0.0, 0.8, &cfg).unwrap();
        let want = expm(&CMatrix::sigma_x(), c(0.0, -omega * 0.8)).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn convergence_orders() {
        let (a, w, d) = (2.0, 5.0, 0.7);
        let t1 = 1.3;
        let exact = rotating_field_exact(a, w, d, t1);
        let err = |method, steps| {
            let cfg = IntegratorConfig::new(method, steps).unwrap();
            propagate(rotating_field(a, w, d), 0.0, t1, &cfg).unwrap().distance(&exact)
        };
        // exp-midpoint is second order: halving dt cuts the error ~4x
        let ratio = err(Method::ExpMidpoint, 400) / err(Method::ExpMidpoint, 800);
        assert!(ratio > 3.5 && ratio < 4.5, "exp-midpoint ratio {ratio}");
        let ratio = err(Method::Rk4, 400) / err(Method::Rk4, 800);
        assert!(ratio > 14.0, "rk4 ratio {ratio}");
    }

    #[test]
    fn composition_and_unitarity() {
        let h = rotating_field(1.5, 4.0, -0.3);
        let cfg = IntegratorConfig::new(Method::ExpMidpoint, 1000).unwrap();
        let u01 = propagate(&h, 0.0, 0.6, &cfg).unwrap();
        let u12 = propagate(&h, 0.6, 1.2, &cfg).unwrap();
        let u02 = propagate(&h, 0.0, 1.2, &cfg.with_steps(2000)).unwrap();
        assert!((&u12 * &u01).distance(&u02) < 1e-9);
        assert!(u02.unitarity_defect() < 1e-12);
    }

    #[test]
    fn deterministic_bits() {
        let h = rotating_field(1.5, 4.0, -0.3);
        let cfg = IntegratorConfig::new(Method::Rk4, 500).unwrap();
        let a = propagate(&h, 0.0, 1.0, &cfg).unwrap();
        let b = propagate(&h, 0.0, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_bound_for_blockade_shift() {
        // V = 200 pi rad/us over 0.2 us needs ceil(200 pi * 0.2 / 0.05) steps
        let v = 200.0 * PI;
        let h = |_t: f64| CMatrix::sigma_x();
        let base = IntegratorConfig::default().with_oscillation_rate(v);
        assert_eq!(base.required_steps(v, 0.2), 2514);
        let err = propagate(h, 0.0, 0.2, &base.with_steps(2513)).unwrap_err();
        assert_eq!(err, EvolveError::UnderResolved { steps: 2513, required: 2514 });
        assert!(propagate(h, 0.0, 0.2, &base.with_steps(2514)).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(IntegratorConfig::new(Method::Rk4, 99), Err(EvolveError::TooFewSteps(99)));
        let cfg = IntegratorConfig::default();
        let h = |_t: f64| CMatrix::sigma_x();
        assert!(matches!(propagate(h, 1.0, 1.0, &cfg), Err(EvolveError::InvalidInterval { .. })));
        let bad = |_t: f64| CMatrix::from_real([[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(propagate(bad, 0.0, 1.0, &cfg), Err(EvolveError::NonHermitian { .. })));
    }
}
