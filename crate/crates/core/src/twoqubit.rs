//! Blockade-mediated two-qubit geometric gate.
//!
//! Both atoms are driven resonantly with real couplings
//! `Omega_1 = -Omega_R cos(phi/2)` and `Omega_2 = Omega_R sin(phi/2)`. In the
//! single-excitation sector this couples `|gg>` only to the bright state
//! `|B> = sin(phi/2)|gr> - cos(phi/2)|rg>` and leaves
//! `|D> = cos(phi/2)|gr> + sin(phi/2)|rg>` dark. With total area `pi` the
//! blockaded evolution is `diag(-1) + [[cos phi, sin phi], [sin phi, -cos phi]] + diag(1)`
//! over `{|gg>} + {|gr>, |rg>} + {|rr>}`.
//!
//! Three generators are provided:
//!
//! * `Lab`: the driven two-atom Hamiltonian with `V |rr><rr|`;
//! * `Rotating`: the same after `exp(-i V t |rr><rr|)`, where the `|B'> <-> |rr>`
//!   coupling carries `exp(-i V t)`. Gates are reported in this frame;
//! * `Effective`: the blockade limit, only `|gg> <-> |B>`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::{gate_distance, loglog_slope, AnalysisError, SweepResult};
use crate::evolve::{propagate_observed, twenty_samples_per_period, EvolveError, IntegratorConfig};
use crate::linalg::{CMatrix, LinalgError};
use crate::pulses::{Envelope, EnvelopeKind, PulseError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// State over `{|gg>, |gr>, |rg>, |rr>}`.
pub type TwoQubit = [Complex64; 4];

pub const GG: usize = 0;
pub const GR: usize = 1;
pub const RG: usize = 2;
pub const RR: usize = 3;

/// Minimum number of steps for a two-atom propagation.
pub const MIN_TWO_QUBIT_STEPS: usize = 1000;

/// Relative tolerance on the `pi` total area of a gate envelope.
const AREA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoQubitError {
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("interaction strength must be positive and finite, got {0}")]
    InvalidInteraction(f64),
    #[error("gate envelope must have total area pi, got {0}")]
    AreaNotPi(f64),
    #[error("phi must be finite, got {0}")]
    InvalidPhi(f64),
    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("at least {MIN_TWO_QUBIT_STEPS} steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("step {dt:e} us does not resolve V = {interaction} rad/us (need <= {limit:e})")]
    UnresolvedInteraction { dt: f64, interaction: f64, limit: f64 },
    #[error("unknown frame '{0}'")]
    UnknownFrame(alloc::string::String),
    #[error("ratio list is empty")]
    EmptyRatios,
    #[error("ratios must be positive and finite, got {0}")]
    InvalidRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Rotating,
    Effective,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Rotating => "rotating",
            Frame::Effective => "effective",
        }
    }
}

impl core::str::FromStr for Frame {
    type Err = TwoQubitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lab" | "lab-with-V" | "lab-with-v" => Ok(Frame::Lab),
            "rotating" => Ok(Frame::Rotating),
            "effective" => Ok(Frame::Effective),
            other => Err(TwoQubitError::UnknownFrame(other.to_string())),
        }
    }
}

/// Mixing angle, interaction strength and shared envelope of the gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitGateSpec {
    pub phi: f64,
    /// `V` in rad/us.
    pub interaction: f64,
    pub envelope: Envelope,
}

impl TwoQubitGateSpec {
    /// Validates `V > 0` and a total envelope area of `pi`.
    pub fn new(phi: f64, interaction: f64, envelope: Envelope) -> Result<Self, TwoQubitError> {
        if !phi.is_finite() {
            return Err(TwoQubitError::InvalidPhi(phi));
        }
        if !(interaction > 0.0 && interaction.is_finite()) {
            return Err(TwoQubitError::InvalidInteraction(interaction));
        }
        let area = envelope.area();
        if libm::fabs(area - PI) > AREA_TOL * PI {
            return Err(TwoQubitError::AreaNotPi(area));
        }
        Ok(TwoQubitGateSpec {
            phi,
            interaction,
            envelope,
        })
    }

    /// Gate spec whose envelope of the given kind and peak has area `pi`.
    pub fn with_pi_area(phi: f64, interaction: f64, kind: EnvelopeKind, peak: f64) -> Result<Self, TwoQubitError> {
        Self::new(phi, interaction, Envelope::with_area(kind, peak, PI)?)
    }

    pub fn duration(&self) -> f64 {
        self.envelope.duration()
    }

    pub fn with_interaction(self, interaction: f64) -> Result<Self, TwoQubitError> {
        Self::new(self.phi, interaction, self.envelope)
    }

    fn check_time(&self, t: f64) -> Result<(), TwoQubitError> {
        let duration = self.duration();
        if (0.0..=duration).contains(&t) {
            Ok(())
        } else {
            Err(TwoQubitError::TimeOutOfRange { t, duration })
        }
    }

    /// `(Omega_1(t), Omega_2(t))`.
    pub fn couplings(&self, t: f64) -> (f64, f64) {
        let omega = self.envelope.value(t);
        (
            -omega * libm::cos(self.phi / 2.0),
            omega * libm::sin(self.phi / 2.0),
        )
    }
}

/// Rotated single-excitation states for mixing angle `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightDarkBasis {
    pub bright: TwoQubit,
    pub bright_prime: TwoQubit,
    pub dark: TwoQubit,
}

pub fn bright_dark_basis(phi: f64) -> BrightDarkBasis {
    let (s, c) = (libm::sin(phi / 2.0), libm::cos(phi / 2.0));
    let v = |gr: f64, rg: f64| [ZERO, gr.into(), rg.into(), ZERO];
    BrightDarkBasis {
        bright: v(s, -c),
        bright_prime: v(c, -s),
        dark: v(c, s),
    }
}

pub fn basis_state(index: usize) -> TwoQubit {
    let mut v = [ZERO; 4];
    v[index] = ONE;
    v
}

fn projector(index: usize) -> CMatrix {
    let v = basis_state(index);
    CMatrix::outer(&v, &v)
}

/// `H_1 x I + I x H_2 + V |rr><rr|` with `H_a = Omega_a (|g><r| + |r><g|)`.
pub fn full_hamiltonian(spec: &TwoQubitGateSpec, t: f64) -> Result<CMatrix, TwoQubitError> {
    spec.check_time(t)?;
    Ok(lab_generator(spec, t))
}

fn lab_generator(spec: &TwoQubitGateSpec, t: f64) -> CMatrix {
    let (o1, o2) = spec.couplings(t);
    let x = CMatrix::sigma_x();
    let id = CMatrix::identity(2);
    let drive = &x.scale(o1.into()).kron(&id) + &id.kron(&x.scale(o2.into()));
    &drive + &projector(RR).scale(spec.interaction.into())
}

/// `Omega_R(t) (|B><gg| - |B'><rr| e^{-iVt}) + h.c.`
pub fn rotating_frame_hamiltonian(spec: &TwoQubitGateSpec, t: f64) -> Result<CMatrix, TwoQubitError> {
    spec.check_time(t)?;
    Ok(rotating_generator(spec, t, 1.0, 0.0))
}

fn rotating_generator(spec: &TwoQubitGateSpec, t: f64, rabi_scale: f64, offset: f64) -> CMatrix {
    let omega = rabi_scale * spec.envelope.value(t);
    let basis = bright_dark_basis(spec.phi);
    let gg = basis_state(GG);
    let rr = basis_state(RR);
    let phase = Complex64::from_polar(1.0, offset);
    let upper = &CMatrix::outer(&basis.bright, &gg).scale(phase * omega)
        - &CMatrix::outer(&basis.bright_prime, &rr)
            .scale(phase * Complex64::from_polar(omega, -spec.interaction * t));
    &upper + &upper.adjoint()
}

/// `Omega_R(t) (|B><gg| + |gg><B|)`.
pub fn effective_hamiltonian(spec: &TwoQubitGateSpec, t: f64) -> Result<CMatrix, TwoQubitError> {
    spec.check_time(t)?;
    Ok(perturbed_effective_hamiltonian(spec, t, 1.0, 0.0, 0.0))
}

/// Blockade-limit generator with a scaled amplitude `rabi_scale * Omega_R`,
/// a common laser phase offset on both atoms (`|B><gg|` picks up
/// `e^{i offset}`) and a detuning `detuning |r><r|` on each atom.
pub fn perturbed_effective_hamiltonian(
    spec: &TwoQubitGateSpec,
    t: f64,
    rabi_scale: f64,
    offset: f64,
    detuning: f64,
) -> CMatrix {
    let omega = rabi_scale * spec.envelope.value(t);
    let basis = bright_dark_basis(spec.phi);
    let upper = CMatrix::outer(&basis.bright, &basis_state(GG)).scale(Complex64::from_polar(omega, offset));
    let shift = CMatrix::diag(&[ZERO, detuning.into(), detuning.into(), (2.0 * detuning).into()]);
    &(&upper + &upper.adjoint()) + &shift
}

/// `exp(-i V t |rr><rr|)`; lab states are this matrix times rotating-frame states.
pub fn frame_transform(interaction: f64, t: f64) -> CMatrix {
    CMatrix::diag(&[ONE, ONE, ONE, Complex64::from_polar(1.0, -interaction * t)])
}

/// Blockade-limit propagator after accumulated area `alpha`.
pub fn analytic_evolution_at_area(phi: f64, alpha: f64) -> CMatrix {
    let (s, c) = (libm::sin(phi / 2.0), libm::cos(phi / 2.0));
    let (sa, ca) = (libm::sin(alpha), libm::cos(alpha));
    let i = Complex64::new(0.0, 1.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    CMatrix::from_rows([
        [re(ca), -i * sa * s, i * sa * c, ZERO],
        [-i * sa * s, re(c * c + ca * s * s), re(s * c * (1.0 - ca)), ZERO],
        [i * sa * c, re(s * c * (1.0 - ca)), re(s * s + ca * c * c), ZERO],
        [ZERO, ZERO, ZERO, ONE],
    ])
}

/// Blockade-limit propagator `U(t)` at `alpha_t = int_0^t Omega_R`.
pub fn analytic_evolution(spec: &TwoQubitGateSpec, t: f64) -> Result<CMatrix, TwoQubitError> {
    spec.check_time(t)?;
    Ok(analytic_evolution_at_area(spec.phi, spec.envelope.partial_area(t)?))
}

/// The gate reached at area `pi`.
pub fn blockade_gate(phi: f64) -> CMatrix {
    let (s, c) = (libm::sin(phi), libm::cos(phi));
    CMatrix::from_real([
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, s, -c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Numerical propagator over the whole pulse in `frame`.
pub fn evolve_numeric_full(
    spec: &TwoQubitGateSpec,
    frame: Frame,
    config: &IntegratorConfig,
) -> Result<CMatrix, TwoQubitError> {
    evolve_observed(spec, frame, config, |_, _| {})
}

/// Propagation in `frame` with `observer(t, U(t))` after every step.
pub fn evolve_observed<O>(
    spec: &TwoQubitGateSpec,
    frame: Frame,
    config: &IntegratorConfig,
    observer: O,
) -> Result<CMatrix, TwoQubitError>
where
    O: FnMut(f64, &CMatrix),
{
    if config.steps < MIN_TWO_QUBIT_STEPS {
        return Err(TwoQubitError::TooFewSteps(config.steps));
    }
    let tau = spec.duration();
    let mut config = *config;
    if frame != Frame::Effective {
        let dt = tau / config.steps as f64;
        let limit = twenty_samples_per_period(spec.interaction);
        if dt > limit {
            return Err(TwoQubitError::UnresolvedInteraction {
                dt,
                interaction: spec.interaction,
                limit,
            });
        }
    }
    if frame == Frame::Rotating {
        config.oscillation_rate = config.oscillation_rate.max(spec.interaction);
    }
    let u = match frame {
        Frame::Lab => propagate_observed(|t| lab_generator(spec, t), 0.0, tau, &config, observer)?,
        Frame::Rotating => propagate_observed(|t| rotating_generator(spec, t, 1.0, 0.0), 0.0, tau, &config, observer)?,
        Frame::Effective => propagate_observed(
            |t| perturbed_effective_hamiltonian(spec, t, 1.0, 0.0, 0.0),
            0.0,
            tau,
            &config,
            observer,
        )?,
    };
    Ok(u)
}

/// Steps needed for a rotating- or lab-frame run of `spec`: the larger of
/// the phase-per-step bound and twenty samples per `2 pi / V`.
pub fn required_steps(spec: &TwoQubitGateSpec, config: &IntegratorConfig) -> usize {
    let tau = spec.duration();
    let rate = spec.interaction + 2.0 * spec.envelope.peak();
    let by_phase = config.required_steps(rate, tau);
    let by_period = libm::ceil(tau / twenty_samples_per_period(spec.interaction)) as usize;
    by_phase.max(by_period).max(MIN_TWO_QUBIT_STEPS)
}

/// One point of a blockade scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadePoint {
    /// `V / peak`.
    pub ratio: f64,
    pub infidelity_trace: f64,
    pub infidelity_avg: f64,
    /// `max_t max_x |<rr|U(t)|x>|^2` over `x` in `{gg, gr, rg}`.
    pub leakage: f64,
    pub steps: usize,
}

/// Rotating-frame simulation at `V = ratio * peak`, compared against the
/// blockade gate. The step count is raised to [`required_steps`] when
/// `config.steps` is too coarse for that `V`.
pub fn blockade_point(
    spec: &TwoQubitGateSpec,
    ratio: f64,
    config: &IntegratorConfig,
) -> Result<BlockadePoint, TwoQubitError> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(TwoQubitError::InvalidRatio(ratio));
    }
    let spec = spec.with_interaction(ratio * spec.envelope.peak())?;
    let steps = config.steps.max(required_steps(&spec, config));
    let config = config.with_steps(steps);
    let mut leakage = 0.0f64;
    let u = evolve_observed(&spec, Frame::Rotating, &config, |_, u| {
        for x in [GG, GR, RG] {
            leakage = leakage.max(u[(RR, x)].norm_sqr());
        }
    })?;
    let d = gate_distance(&u, &blockade_gate(spec.phi))?;
    Ok(BlockadePoint {
        ratio,
        infidelity_trace: d.trace_infidelity,
        infidelity_avg: d.avg_infidelity,
        leakage,
        steps,
    })
}

/// Blockade scan over `V / peak` ratios in the rotating frame.
pub fn blockade_scan(
    spec: &TwoQubitGateSpec,
    ratios: &[f64],
    config: &IntegratorConfig,
) -> Result<SweepResult, TwoQubitError> {
    if ratios.is_empty() {
        return Err(TwoQubitError::EmptyRatios);
    }
    let points = ratios
        .iter()
        .map(|&r| blockade_point(spec, r, config))
        .collect::<Result<Vec<_>, _>>()?;
    blockade_sweep_result(spec, config, &points)
}

/// Assembles scan points (in input order) into a [`SweepResult`] with the
/// log-log slope of trace infidelity against ratio.
pub fn blockade_sweep_result(
    spec: &TwoQubitGateSpec,
    config: &IntegratorConfig,
    points: &[BlockadePoint],
) -> Result<SweepResult, TwoQubitError> {
    let mut result = SweepResult::new("blockade", "ratio", points.iter().map(|p| p.ratio).collect());
    result.push_metric("infidelity_trace", points.iter().map(|p| p.infidelity_trace).collect())?;
    result.push_metric("infidelity_avg", points.iter().map(|p| p.infidelity_avg).collect())?;
    result.push_metric("leakage", points.iter().map(|p| p.leakage).collect())?;
    let xs: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.infidelity_trace).collect();
    result.push_fit("slope_fit", loglog_slope(&xs, &ys));
    result.push_meta("frame", "rotating");
    result.push_meta("phi", format!("{:?}", spec.phi));
    result.push_meta("envelope", spec.envelope.kind().name());
    if let EnvelopeKind::Gaussian { width_ratio } = spec.envelope.kind() {
        result.push_meta("width_ratio", format!("{width_ratio:?}"));
    }
    result.push_meta("peak", format!("{:?}", spec.envelope.peak()));
    result.push_meta("duration", format!("{:?}", spec.envelope.duration()));
    result.push_integrator_meta(config);
    result.push_meta(
        "steps_used",
        points.iter().map(|p| format!("{}", p.steps)).collect::<Vec<_>>().join(","),
    );
    Ok(result)
}

/// Geometric structure of the blockade-limit evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolonomyReport {
    /// Largest entry of `U(tau)` outside the `S1 + S2 + S3` blocks.
    pub off_block_max: f64,
    /// `|U_S1 + 1|`.
    pub s1_error: f64,
    /// Largest entry of `U_S2 - [[cos phi, sin phi], [sin phi, -cos phi]]`.
    pub s2_error: f64,
    /// `|U_S3 - 1|`.
    pub s3_error: f64,
    pub s2_determinant: Complex64,
    /// `||U^dag(tau) P2 U(tau) - P2||_F`.
    pub p2_cyclicity: f64,
    /// `max_t max_{x,y in {gr, rg}} |<x|U^dag H_eff U|y>|`.
    pub s2_transport: f64,
    /// `max_t |<gg|U^dag H_eff U|gg>|`.
    pub gg_transport: f64,
    pub samples: usize,
}

impl HolonomyReport {
    pub fn passed(&self, tol: f64) -> bool {
        [
            self.off_block_max,
            self.s1_error,
            self.s2_error,
            self.s3_error,
            self.p2_cyclicity,
            self.s2_transport,
            self.gg_transport,
        ]
        .iter()
        .all(|&x| x <= tol)
    }

    /// `U_S2(tau)` as built from `phi`.
    pub fn s2_block(phi: f64) -> [[f64; 2]; 2] {
        [[libm::cos(phi), libm::sin(phi)], [libm::sin(phi), -libm::cos(phi)]]
    }
}

/// Evaluates the holonomy conditions along the analytic evolution, sampling
/// `samples + 1` equally spaced times on `[0, tau]`.
pub fn holonomy_checks(spec: &TwoQubitGateSpec, samples: usize) -> Result<HolonomyReport, TwoQubitError> {
    let samples = samples.max(1);
    let tau = spec.duration();
    let u = analytic_evolution(spec, tau)?;

    let mut off_block_max = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            if block_of(r) != block_of(c) {
                off_block_max = off_block_max.max(u[(r, c)].norm());
            }
        }
    }
    let s1_error = (u[(GG, GG)] + ONE).norm();
    let s3_error = (u[(RR, RR)] - ONE).norm();
    let want = HolonomyReport::s2_block(spec.phi);
    let mut s2_error = 0.0f64;
    for (a, &r) in [GR, RG].iter().enumerate() {
        for (b, &c) in [GR, RG].iter().enumerate() {
            s2_error = s2_error.max((u[(r, c)] - want[a][b]).norm());
        }
    }
    let s2_determinant = u[(GR, GR)] * u[(RG, RG)] - u[(GR, RG)] * u[(RG, GR)];
    let p2 = &projector(GR) + &projector(RG);
    let p2_cyclicity = (&(&u.adjoint() * &p2) * &u).distance(&p2);

    let mut s2_transport = 0.0f64;
    let mut gg_transport = 0.0f64;
    for k in 0..=samples {
        let t = if k == samples { tau } else { tau * k as f64 / samples as f64 };
        let ut = analytic_evolution(spec, t)?;
        let pulled = &(&ut.adjoint() * &effective_hamiltonian(spec, t)?) * &ut;
        for &r in &[GR, RG] {
            for &c in &[GR, RG] {
                s2_transport = s2_transport.max(pulled[(r, c)].norm());
            }
        }
        gg_transport = gg_transport.max(pulled[(GG, GG)].norm());
    }
    Ok(HolonomyReport {
        off_block_max,
        s1_error,
        s2_error,
        s3_error,
        s2_determinant,
        p2_cyclicity,
        s2_transport,
        gg_transport,
        samples: samples + 1,
    })
}

fn block_of(index: usize) -> usize {
    match index {
        GG => 0,
        GR | RG => 1,
        _ => 2,
    }
}

/// Local invariants `(G1, G2)` of a two-qubit gate. Products of one-qubit
/// gates have `G1 = 1`, `G2 = 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglingWitness {
    pub entangling: bool,
    pub g1: Complex64,
    pub g2: Complex64,
    /// `|G1 - 1| + |G2 - 3|`.
    pub distance_from_local: f64,
}

/// Tolerance on the local-invariant distance separating local from
/// entangling gates.
pub const LOCAL_INVARIANT_TOL: f64 = 1e-9;

/// Makhlin local-invariant test: with `m = U_B^T U_B` for `U` in the magic
/// basis, `G1 = tr(m)^2 / (16 det U)` and `G2 = (tr(m)^2 - tr(m^2)) / (4 det U)`.
pub fn entangling_witness(gate: &CMatrix) -> Result<EntanglingWitness, TwoQubitError> {
    if gate.dim() != 4 {
        return Err(LinalgError::DimensionMismatch {
            left: gate.dim(),
            right: 4,
        }
        .into());
    }
    gate.ensure_unitary(1e-10)?;
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let z = |re: f64, im: f64| Complex64::new(re * h, im * h);
    let magic = CMatrix::from_rows([
        [z(1.0, 0.0), ZERO, ZERO, z(0.0, 1.0)],
        [ZERO, z(0.0, 1.0), z(1.0, 0.0), ZERO],
        [ZERO, z(0.0, 1.0), z(-1.0, 0.0), ZERO],
        [z(1.0, 0.0), ZERO, ZERO, z(0.0, -1.0)],
    ]);
    let ub = &(&magic.adjoint() * gate) * &magic;
    let mut ubt = CMatrix::zeros(4);
    for r in 0..4 {
        for c in 0..4 {
            ubt[(r, c)] = ub[(c, r)];
        }
    }
    let m = &ubt * &ub;
    let det = gate.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (16.0 * det);
    let g2 = (tr * tr - tr2) / (4.0 * det);
    let distance_from_local = (g1 - ONE).norm() + (g2 - Complex64::new(3.0, 0.0)).norm();
    Ok(EntanglingWitness {
        entangling: distance_from_local > LOCAL_INVARIANT_TOL,
        g1,
        g2,
        distance_from_local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, inner};

    fn spec(phi: f64) -> TwoQubitGateSpec {
        TwoQubitGateSpec::with_pi_area(phi, 200.0 * PI, EnvelopeKind::Square, 5.0 * PI).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spec_validation() {
        let env = Envelope::new(EnvelopeKind::Square, 5.0 * PI, 0.1).unwrap();
        assert!(matches!(TwoQubitGateSpec::new(0.3, 10.0, env), Err(TwoQubitError::AreaNotPi(_))));
        let env = Envelope::new(EnvelopeKind::Square, 5.0 * PI, 0.2).unwrap();
        assert!(matches!(TwoQubitGateSpec::new(0.3, 0.0, env), Err(TwoQubitError::InvalidInteraction(_))));
        assert!(TwoQubitGateSpec::new(0.3, 1.0, env).is_ok());
        assert!((spec(0.3).duration() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn basis_properties() {
        let b = bright_dark_basis(0.77);
        assert!(inner(&b.bright, &b.dark).norm() < 1e-15);
        for v in [b.bright, b.bright_prime, b.dark] {
            assert!((crate::linalg::norm(&v) - 1.0).abs() < 1e-15);
            assert_eq!(v[GG], ZERO);
            assert_eq!(v[RR], ZERO);
        }
    }

    #[test]
    fn full_hamiltonian_examples() {
        let s = spec(0.9);
        // Square pulses never vanish, so use a sin^2 envelope at t = 0.
        let s2 = TwoQubitGateSpec::with_pi_area(0.9, 40.0, EnvelopeKind::Sin2, 5.0 * PI).unwrap();
        let h = full_hamiltonian(&s2, 0.0).unwrap();
        assert!(h.max_abs_diff(&CMatrix::diag(&[ZERO, ZERO, ZERO, c(40.0, 0.0)])) < 1e-15);

        let sp = spec(PI);
        let h = full_hamiltonian(&sp, 0.1).unwrap();
        let (o1, o2) = sp.couplings(0.1);
        assert!(o1.abs() < 1e-14);
        let want = &CMatrix::identity(2).kron(&CMatrix::sigma_x().scale(o2.into())) + &projector(RR).scale(sp.interaction.into());
        assert!(h.max_abs_diff(&want) < 1e-13);

        // recast in the bright basis
        let t = 0.137;
        let b = bright_dark_basis(s.phi);
        let omega = s.envelope.value(t);
        let upper = &CMatrix::outer(&b.bright, &basis_state(GG)) - &CMatrix::outer(&b.bright_prime, &basis_state(RR));
        let recast = &(&upper + &upper.adjoint()).scale(omega.into()) + &projector(RR).scale(s.interaction.into());
        assert!(full_hamiltonian(&s, t).unwrap().max_abs_diff(&recast) < 1e-12);
        assert!(full_hamiltonian(&s, 0.3).is_err());
    }

    #[test]
    fn rotating_frame_is_frame_change_of_lab() {
        let s = spec(1.3);
        for t in [0.0, 0.011, 0.05, 0.1999] {
            let frame = frame_transform(s.interaction, t);
            // i (dU^dag/dt) U = -V |rr><rr|
            let correction = projector(RR).scale((-s.interaction).into());
            let want = &(&(&frame.adjoint() * &full_hamiltonian(&s, t).unwrap()) * &frame) + &correction;
            assert!(rotating_frame_hamiltonian(&s, t).unwrap().max_abs_diff(&want) < 1e-12);
        }
        // V t = pi flips the |B'><rr| term
        let t = PI / s.interaction;
        let h = rotating_frame_hamiltonian(&s, t).unwrap();
        let h0 = rotating_frame_hamiltonian(&s, 0.0).unwrap();
        let b = bright_dark_basis(s.phi);
        let rr = basis_state(RR);
        let a = h.sandwich(&b.bright_prime, &rr);
        let a0 = h0.sandwich(&b.bright_prime, &rr);
        assert!((a + a0).norm() < 1e-12);
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let s = spec(0.4);
        let t = 0.05;
        let h = effective_hamiltonian(&s, t).unwrap();
        let b = bright_dark_basis(s.phi);
        assert!(crate::linalg::norm(&h.apply(&basis_state(RR))) < 1e-15);
        assert!(crate::linalg::norm(&h.apply(&b.dark)) < 1e-15);
        let hg = h.apply(&basis_state(GG));
        let omega = s.envelope.value(t);
        for (x, y) in hg.iter().zip(&b.bright) {
            assert!((x - y * omega).norm() < 1e-14);
        }
    }

    #[test]
    fn analytic_evolution_examples() {
        assert!(analytic_evolution_at_area(0.8, 0.0).max_abs_diff(&CMatrix::identity(4)) < 1e-16);
        let phi = 0.8;
        assert!(analytic_evolution_at_area(phi, PI).max_abs_diff(&blockade_gate(phi)) < 1e-15);
        let d = CMatrix::diag(&[c(-1.0, 0.0), ONE, c(-1.0, 0.0), ONE]);
        assert!(analytic_evolution_at_area(0.0, PI).max_abs_diff(&d) < 1e-15);
    }

    #[test]
    fn analytic_evolution_is_exponential_of_effective_generator() {
        let s = spec(2.1);
        let alpha = 1.234;
        let gen = effective_hamiltonian(&s, 0.0).unwrap().scale((1.0 / s.envelope.peak()).into());
        let via_expm = expm(&gen, c(0.0, -alpha)).unwrap();
        assert!(analytic_evolution_at_area(s.phi, alpha).max_abs_diff(&via_expm) < 1e-13);
    }

    #[test]
    fn effective_numerics_match_closed_form() {
        for kind in [EnvelopeKind::Square, EnvelopeKind::Sin2, EnvelopeKind::gaussian()] {
            let s = TwoQubitGateSpec::with_pi_area(0.6, 200.0 * PI, kind, 5.0 * PI).unwrap();
            let cfg = IntegratorConfig::default().with_steps(10_000);
            let u = evolve_numeric_full(&s, Frame::Effective, &cfg).unwrap();
            assert!(u.distance(&blockade_gate(0.6)) < 1e-8, "{kind:?}: {}", u.distance(&blockade_gate(0.6)));
        }
    }

    #[test]
    fn lab_and_rotating_frames_differ_by_transform() {
        let s = spec(PI / 2.0);
        let cfg = IntegratorConfig::default().with_steps(20_000);
        let rot = evolve_numeric_full(&s, Frame::Rotating, &cfg).unwrap();
        let lab = evolve_numeric_full(&s, Frame::Lab, &cfg).unwrap();
        let mapped = &frame_transform(s.interaction, s.duration()) * &rot;
        assert!(lab.distance(&mapped) < 1e-6, "{}", lab.distance(&mapped));
    }

    #[test]
    fn operating_point_fidelity() {
        let s = spec(PI / 2.0);
        let cfg = IntegratorConfig::default().with_steps(20_000);
        let u = evolve_numeric_full(&s, Frame::Rotating, &cfg).unwrap();
        let d = gate_distance(&u, &blockade_gate(s.phi)).unwrap();
        assert!(1.0 - d.trace_infidelity >= 0.99, "{d:?}");
    }

    #[test]
    fn weak_interaction_breaks_the_gate() {
        let s = TwoQubitGateSpec::with_pi_area(PI / 2.0, 0.5, EnvelopeKind::Square, 5.0 * PI).unwrap();
        let cfg = IntegratorConfig::default().with_steps(5000);
        let u = evolve_numeric_full(&s, Frame::Rotating, &cfg).unwrap();
        assert!(gate_distance(&u, &blockade_gate(s.phi)).unwrap().trace_infidelity > 0.1);
    }

    #[test]
    fn under_resolved_interaction_rejected() {
        let s = TwoQubitGateSpec::with_pi_area(0.3, 1e5, EnvelopeKind::Square, 5.0 * PI).unwrap();
        let cfg = IntegratorConfig::default().with_steps(1000);
        assert!(matches!(
            evolve_numeric_full(&s, Frame::Rotating, &cfg),
            Err(TwoQubitError::UnresolvedInteraction { .. })
        ));
        assert!(evolve_numeric_full(&s, Frame::Effective, &cfg).is_ok());
        assert!(matches!(
            evolve_numeric_full(&s, Frame::Effective, &cfg.with_steps(500)),
            Err(TwoQubitError::TooFewSteps(500))
        ));
        assert!(matches!("sideways".parse::<Frame>(), Err(TwoQubitError::UnknownFrame(_))));
    }

    #[test]
    fn holonomy_examples() {
        let r = holonomy_checks(&spec(PI / 2.0), 200).unwrap();
        assert!(r.passed(1e-10), "{r:?}");
        let block = HolonomyReport::s2_block(PI / 2.0);
        assert!((block[0][0]).abs() < 1e-16 && (block[0][1] - 1.0).abs() < 1e-16);
        for phi in [0.0, 0.3, 2.9, -1.7] {
            let r = holonomy_checks(&spec(phi), 100).unwrap();
            assert!((r.s2_determinant + ONE).norm() < 1e-14);
            assert!(r.passed(1e-10));
        }
    }

    #[test]
    fn dark_state_and_rr_are_stationary() {
        let s = spec(1.1);
        let b = bright_dark_basis(s.phi);
        for t in [0.0, 0.03, 0.12, 0.2] {
            let u = analytic_evolution(&s, t).unwrap();
            let d = u.apply(&b.dark);
            let rr = u.apply(&basis_state(RR));
            for k in 0..4 {
                assert!((d[k] - b.dark[k]).norm() < 1e-14);
                assert!((rr[k] - basis_state(RR)[k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn witness_examples() {
        let w = entangling_witness(&blockade_gate(PI / 2.0)).unwrap();
        assert!(w.entangling, "{w:?}");
        let w = entangling_witness(&blockade_gate(0.0)).unwrap();
        assert!(!w.entangling, "{w:?}");
        let minus_iz = CMatrix::identity(2).kron(&CMatrix::sigma_z()).scale(c(-1.0, 0.0));
        assert!(blockade_gate(0.0).max_abs_diff(&minus_iz) < 1e-16);
        assert!(!entangling_witness(&CMatrix::identity(4)).unwrap().entangling);
        let not_unitary = CMatrix::identity(4).scale(c(2.0, 0.0));
        assert!(matches!(entangling_witness(&not_unitary), Err(TwoQubitError::Linalg(_))));
    }

    #[test]
    fn witness_is_local_for_products() {
        let a = expm(&CMatrix::sigma_x(), c(0.0, 0.7)).unwrap();
        let b = expm(&(&CMatrix::sigma_y() + &CMatrix::sigma_z()), c(0.0, -1.1)).unwrap();
        assert!(!entangling_witness(&a.kron(&b)).unwrap().entangling);
    }

    #[test]
    fn scan_errors_and_single_point() {
        let s = spec(PI / 2.0);
        let cfg = IntegratorConfig::default().with_steps(2000);
        assert!(matches!(blockade_scan(&s, &[], &cfg), Err(TwoQubitError::EmptyRatios)));
        assert!(matches!(blockade_scan(&s, &[-1.0], &cfg), Err(TwoQubitError::InvalidRatio(_))));
        let r = blockade_scan(&s, &[40.0], &cfg).unwrap();
        assert_eq!(r.axis_values.len(), 1);
        assert_eq!(r.fit("slope_fit"), Some(None));
    }
}
