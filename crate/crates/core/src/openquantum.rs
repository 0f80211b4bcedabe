//! Rydberg-state decay via a Lindblad master equation.
//!
//! Each atom decays with rate `gamma_r` through the jump operator
//! `L = sqrt(gamma_r) |g><r|` (`DecayTarget::Ground`, trace preserving). With
//! `DecayTarget::Leakage` the decayed population goes to a level outside the
//! model and is dropped, so the generator keeps only the anti-commutator
//! term `-(gamma_r / 2) {|r><r|, rho}` and the trace falls.
//!
//! Density matrices are integrated with fixed-step RK4.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::{AnalysisError, SweepResult};
use crate::evolve::{EvolveError, IntegratorConfig, Method, MIN_STEPS};
use crate::linalg::{hermitian_eigenvalues, CMatrix, LinalgError};
use crate::onequbit::{rabi_hamiltonian, target_gate, OneQubitGateSpec, Qubit};
use crate::pulses::{build_one_qubit_schedule, EnvelopeKind, PulseError, PulseSchedule};
use crate::twoqubit::{blockade_gate, perturbed_effective_hamiltonian, TwoQubitGateSpec, MIN_TWO_QUBIT_STEPS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of evenly spaced checkpoints at which positivity is measured.
const EIGEN_CHECKPOINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpenQuantumError {
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("decay rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("density matrix is {found}x{found}, expected {expected}x{expected}")]
    WrongDimension { expected: usize, found: usize },
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("at least {required} steps are required, got {steps}")]
    TooFewSteps { steps: usize, required: usize },
    #[error("rate list is empty")]
    EmptyRates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecayTarget {
    #[default]
    Ground,
    Leakage,
}

impl DecayTarget {
    pub fn name(&self) -> &'static str {
        match self {
            DecayTarget::Ground => "ground",
            DecayTarget::Leakage => "leakage",
        }
    }
}

impl core::str::FromStr for DecayTarget {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ground" => Ok(DecayTarget::Ground),
            "leakage" => Ok(DecayTarget::Leakage),
            other => Err(format!("unknown decay target '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    /// Rad/us, the inverse coherence time.
    pub gamma_r: f64,
    pub target: DecayTarget,
}

impl DecayModel {
    pub fn new(gamma_r: f64, target: DecayTarget) -> Result<Self, OpenQuantumError> {
        if !(gamma_r >= 0.0 && gamma_r.is_finite()) {
            return Err(OpenQuantumError::InvalidRate(gamma_r));
        }
        Ok(DecayModel { gamma_r, target })
    }

    /// Ground-target decay with `gamma_r = 1 / coherence_time`.
    pub fn from_coherence_time(coherence_time: f64) -> Result<Self, OpenQuantumError> {
        Self::new(1.0 / coherence_time, DecayTarget::Ground)
    }
}

/// Diagnostics gathered along a density-matrix run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRecord {
    /// `max_t |Tr rho(t) - Tr rho(0)|`.
    pub max_trace_error: f64,
    /// Smallest eigenvalue of `rho` over the checkpoints.
    pub min_eigenvalue: f64,
    pub initial_purity: f64,
    pub final_purity: f64,
    pub final_trace: f64,
    pub steps: usize,
}

impl ChannelRecord {
    fn start(rho: &CMatrix) -> Self {
        ChannelRecord {
            max_trace_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            initial_purity: purity(rho),
            final_purity: purity(rho),
            final_trace: rho.trace().re,
            steps: 0,
        }
    }

    fn merge(self, later: ChannelRecord) -> Self {
        ChannelRecord {
            max_trace_error: self.max_trace_error.max(later.max_trace_error),
            min_eigenvalue: self.min_eigenvalue.min(later.min_eigenvalue),
            initial_purity: self.initial_purity,
            final_purity: later.final_purity,
            final_trace: later.final_trace,
            steps: self.steps + later.steps,
        }
    }
}

pub fn purity(rho: &CMatrix) -> f64 {
    (rho * rho).trace().re
}

/// Jump operators `|g><r|` acting on each atom of an `atoms`-atom register.
fn lowering_operators(atoms: usize) -> Vec<CMatrix> {
    let lower = CMatrix::from_real([[0.0, 1.0], [0.0, 0.0]]);
    let id = CMatrix::identity(2);
    (0..atoms)
        .map(|k| {
            let mut op = CMatrix::identity(1);
            for j in 0..atoms {
                op = op.kron(if j == k { &lower } else { &id });
            }
            op
        })
        .collect()
}

/// `d rho / dt` for generator `h`.
pub struct Lindbladian {
    model: DecayModel,
    jumps: Vec<CMatrix>,
    jumps_dag: Vec<CMatrix>,
    /// `sum_k L_k^dag L_k`, without the rate.
    loss: CMatrix,
}

impl Lindbladian {
    pub fn new(model: DecayModel, atoms: usize) -> Self {
        let jumps = lowering_operators(atoms);
        let jumps_dag: Vec<CMatrix> = jumps.iter().map(CMatrix::adjoint).collect();
        let dim = 1usize << atoms;
        let mut loss = CMatrix::zeros(dim);
        for (l, ld) in jumps.iter().zip(&jumps_dag) {
            loss = &loss + &(ld * l);
        }
        Lindbladian {
            model,
            jumps,
            jumps_dag,
            loss,
        }
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    pub fn apply(&self, h: &CMatrix, rho: &CMatrix) -> CMatrix {
        let minus_i = Complex64::new(0.0, -1.0);
        let mut out = h.commutator(rho).scale(minus_i);
        let g = self.model.gamma_r;
        if g > 0.0 {
            let anti = &(&self.loss * rho) + &(rho * &self.loss);
            out = &out - &anti.scale((0.5 * g).into());
            if self.model.target == DecayTarget::Ground {
                for (l, ld) in self.jumps.iter().zip(&self.jumps_dag) {
                    out = &out + &(&(l * rho) * ld).scale(g.into());
                }
            }
        }
        out
    }
}

/// RK4 integration of the master equation from `t0` to `t1`.
pub fn lindblad_evolve<F>(
    h: F,
    t0: f64,
    t1: f64,
    rho0: &CMatrix,
    model: &DecayModel,
    config: &IntegratorConfig,
) -> Result<(CMatrix, ChannelRecord), OpenQuantumError>
where
    F: Fn(f64) -> CMatrix,
{
    let dim = rho0.dim();
    let atoms = dim.trailing_zeros() as usize;
    if !dim.is_power_of_two() || atoms == 0 {
        return Err(OpenQuantumError::WrongDimension { expected: 2, found: dim });
    }
    DecayModel::new(model.gamma_r, model.target)?;
    config.validate()?;
    if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
        return Err(EvolveError::InvalidInterval { t0, t1 }.into());
    }
    let n = config.steps;
    let span = t1 - t0;
    let dt = span / n as f64;
    let end = n as f64;
    let time = |k: f64| if k >= end { t1 } else { t0 + k * dt };

    // both Hamiltonian and decay scales must be resolved
    let mut rate = config.oscillation_rate.max(model.gamma_r);
    for j in 0..=2 * n {
        let m = h(time(j as f64 * 0.5));
        if m.dim() != dim {
            return Err(OpenQuantumError::WrongDimension { expected: dim, found: m.dim() });
        }
        rate = rate.max(m.inf_norm());
    }
    if rate * dt > config.max_phase_per_step * (1.0 + 1e-12) {
        return Err(EvolveError::UnderResolved {
            steps: n,
            required: config.required_steps(rate, span),
        }
        .into());
    }

    let lindblad = Lindbladian::new(*model, atoms);
    let trace0 = rho0.trace().re;
    let mut record = ChannelRecord::start(rho0);
    let stride = (n / EIGEN_CHECKPOINTS).max(1);
    let mut rho = rho0.clone();
    record.min_eigenvalue = min_eigenvalue(&rho)?;
    for k in 0..n {
        let kf = k as f64;
        let (ta, tm, tb) = (time(kf), time(kf + 0.5), time(kf + 1.0));
        let hm = h(tm);
        let k1 = lindblad.apply(&h(ta), &rho);
        let k2 = lindblad.apply(&hm, &(&rho + &k1.scale((0.5 * dt).into())));
        let k3 = lindblad.apply(&hm, &(&rho + &k2.scale((0.5 * dt).into())));
        let k4 = lindblad.apply(&h(tb), &(&rho + &k3.scale(dt.into())));
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0.into());
        rho = &rho + &incr.scale((dt / 6.0).into());
        record.max_trace_error = record.max_trace_error.max(libm::fabs(rho.trace().re - trace0));
        if (k + 1) % stride == 0 || k + 1 == n {
            record.min_eigenvalue = record.min_eigenvalue.min(min_eigenvalue(&rho)?);
        }
    }
    record.final_purity = purity(&rho);
    record.final_trace = rho.trace().re;
    record.steps = n;
    Ok((rho, record))
}

fn min_eigenvalue(rho: &CMatrix) -> Result<f64, OpenQuantumError> {
    let herm = (rho + &rho.adjoint()).scale(0.5.into());
    Ok(hermitian_eigenvalues(&herm)?.first().copied().unwrap_or(0.0))
}

fn rk4(config: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig {
        method: Method::Rk4,
        ..*config
    }
}

/// One-qubit run across a schedule, steps split over segments by duration.
pub fn lindblad_one_qubit(
    schedule: &PulseSchedule,
    rho0: &CMatrix,
    model: &DecayModel,
    config: &IntegratorConfig,
) -> Result<(CMatrix, ChannelRecord), OpenQuantumError> {
    if schedule.is_empty() {
        return Err(OpenQuantumError::EmptySchedule);
    }
    if rho0.dim() != 2 {
        return Err(OpenQuantumError::WrongDimension { expected: 2, found: rho0.dim() });
    }
    let total = schedule.duration();
    let mut rho = rho0.clone();
    let mut record: Option<ChannelRecord> = None;
    let mut start = 0.0;
    for seg in schedule.segments() {
        let len = seg.envelope.duration();
        let share = libm::round(config.steps as f64 * len / total) as usize;
        let cfg = rk4(config).with_steps(share.max(MIN_STEPS));
        let h = |t: f64| rabi_hamiltonian(seg.rabi(t - start), 0.0);
        let (next, rec) = lindblad_evolve(h, start, start + len, &rho, model, &cfg)?;
        record = Some(match record {
            None => rec,
            Some(r) => r.merge(rec),
        });
        rho = next;
        start += len;
    }
    Ok((rho, record.expect("schedule is non-empty")))
}

/// Two-qubit run under the blockade-limit generator.
pub fn lindblad_two_qubit(
    spec: &TwoQubitGateSpec,
    rho0: &CMatrix,
    model: &DecayModel,
    config: &IntegratorConfig,
) -> Result<(CMatrix, ChannelRecord), OpenQuantumError> {
    if rho0.dim() != 4 {
        return Err(OpenQuantumError::WrongDimension { expected: 4, found: rho0.dim() });
    }
    if config.steps < MIN_TWO_QUBIT_STEPS {
        return Err(OpenQuantumError::TooFewSteps {
            steps: config.steps,
            required: MIN_TWO_QUBIT_STEPS,
        });
    }
    let h = |t: f64| perturbed_effective_hamiltonian(spec, t, 1.0, 0.0, 0.0);
    lindblad_evolve(h, 0.0, spec.duration(), rho0, model, &rk4(config))
}

/// The six Bloch-axis states `|g>, |r>, |+>, |->, |+i>, |-i>`.
pub fn axis_states() -> [Qubit; 6] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| Complex64::new(x * h, 0.0);
    let i = |x: f64| Complex64::new(0.0, x * h);
    [
        [ONE, ZERO],
        [ZERO, ONE],
        [r(1.0), r(1.0)],
        [r(1.0), r(-1.0)],
        [r(1.0), i(1.0)],
        [r(1.0), i(-1.0)],
    ]
}

/// Sixteen products `a x b` with `a, b` in `{|g>, |r>, |+>, |+i>}`.
pub fn product_states() -> Vec<[Complex64; 4]> {
    let axes = axis_states();
    let picks = [axes[0], axes[1], axes[2], axes[4]];
    let mut out = Vec::with_capacity(16);
    for a in &picks {
        for b in &picks {
            out.push([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]);
        }
    }
    out
}

/// Ensemble-averaged state fidelity against the ideal gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFidelity {
    pub fidelity: f64,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    /// Gate duration.
    pub tau: f64,
    pub ensemble_size: usize,
}

impl DecayFidelity {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

/// Gate whose decay-limited fidelity is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayGate {
    OneQubit {
        spec: OneQubitGateSpec,
        kind: EnvelopeKind,
        peak: f64,
    },
    /// Blockade-limit dynamics.
    TwoQubit(TwoQubitGateSpec),
}

impl DecayGate {
    pub fn ideal(&self) -> CMatrix {
        match self {
            DecayGate::OneQubit { spec, .. } => target_gate(spec),
            DecayGate::TwoQubit(spec) => blockade_gate(spec.phi),
        }
    }

    pub fn ensemble(&self) -> Vec<Vec<Complex64>> {
        match self {
            DecayGate::OneQubit { .. } => axis_states().iter().map(|s| s.to_vec()).collect(),
            DecayGate::TwoQubit(_) => product_states().iter().map(|s| s.to_vec()).collect(),
        }
    }

    /// Evolves `rho0` through the gate.
    pub fn run(
        &self,
        rho0: &CMatrix,
        model: &DecayModel,
        config: &IntegratorConfig,
    ) -> Result<(CMatrix, ChannelRecord), OpenQuantumError> {
        match self {
            DecayGate::OneQubit { spec, kind, peak } => {
                let schedule = build_one_qubit_schedule(spec, *kind, *peak)?;
                lindblad_one_qubit(&schedule, rho0, model, config)
            }
            DecayGate::TwoQubit(spec) => lindblad_two_qubit(spec, rho0, model, config),
        }
    }

    pub fn duration(&self) -> Result<f64, OpenQuantumError> {
        Ok(match self {
            DecayGate::OneQubit { spec, kind, peak } => build_one_qubit_schedule(spec, *kind, *peak)?.duration(),
            DecayGate::TwoQubit(spec) => spec.duration(),
        })
    }
}

/// Fidelity `<psi_out|rho|psi_out>` of one ensemble member.
pub fn member_fidelity(
    gate: &DecayGate,
    psi: &[Complex64],
    model: &DecayModel,
    config: &IntegratorConfig,
) -> Result<(f64, ChannelRecord), OpenQuantumError> {
    let ideal_out = gate.ideal().apply(psi);
    let (rho, record) = gate.run(&CMatrix::outer(psi, psi), model, config)?;
    Ok((rho.sandwich(&ideal_out, &ideal_out).re, record))
}

/// Averages [`member_fidelity`] results in ensemble order.
pub fn combine_members(members: &[(f64, ChannelRecord)], tau: f64) -> DecayFidelity {
    let n = members.len();
    DecayFidelity {
        fidelity: members.iter().map(|m| m.0).sum::<f64>() / n as f64,
        max_trace_error: members.iter().map(|m| m.1.max_trace_error).fold(0.0, f64::max),
        min_eigenvalue: members.iter().map(|m| m.1.min_eigenvalue).fold(f64::INFINITY, f64::min),
        tau,
        ensemble_size: n,
    }
}

/// Average state fidelity over the six axis states (one qubit) or the
/// sixteen product states of [`product_states`] (two qubits).
pub fn gate_fidelity_under_decay(
    gate: &DecayGate,
    model: &DecayModel,
    config: &IntegratorConfig,
) -> Result<DecayFidelity, OpenQuantumError> {
    let members = gate
        .ensemble()
        .iter()
        .map(|psi| member_fidelity(gate, psi, model, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(combine_members(&members, gate.duration()?))
}

/// Infidelity against decay rate, in `rates` order.
pub fn decay_scan(
    gate: &DecayGate,
    rates: &[f64],
    target: DecayTarget,
    config: &IntegratorConfig,
) -> Result<SweepResult, OpenQuantumError> {
    if rates.is_empty() {
        return Err(OpenQuantumError::EmptyRates);
    }
    let points = rates
        .iter()
        .map(|&g| gate_fidelity_under_decay(gate, &DecayModel::new(g, target)?, config))
        .collect::<Result<Vec<_>, _>>()?;
    decay_sweep_result(gate, rates, target, config, &points)
}

pub fn decay_sweep_result(
    gate: &DecayGate,
    rates: &[f64],
    target: DecayTarget,
    config: &IntegratorConfig,
    points: &[DecayFidelity],
) -> Result<SweepResult, OpenQuantumError> {
    let mut result = SweepResult::new("decay", "gamma_r", rates.to_vec());
    result.push_metric("tau", points.iter().map(|p| p.tau).collect())?;
    result.push_metric("one_minus_F", points.iter().map(|p| p.infidelity()).collect())?;
    result.push_metric("trace_error", points.iter().map(|p| p.max_trace_error).collect())?;
    result.push_meta("target", target.name());
    match gate {
        DecayGate::OneQubit { spec, kind, peak } => {
            result.push_meta("gate", "one-qubit");
            result.push_meta("theta", format!("{:?}", spec.theta));
            result.push_meta("varphi", format!("{:?}", spec.varphi));
            result.push_meta("gamma", format!("{:?}", spec.gamma));
            result.push_meta("envelope", kind.name());
            result.push_meta("peak", format!("{peak:?}"));
        }
        DecayGate::TwoQubit(spec) => {
            result.push_meta("gate", "two-qubit");
            result.push_meta("frame", "effective");
            result.push_meta("phi", format!("{:?}", spec.phi));
            result.push_meta("envelope", spec.envelope.kind().name());
            result.push_meta("peak", format!("{:?}", spec.envelope.peak()));
        }
    }
    result.push_meta("ensemble", format!("{}", gate.ensemble().len()));
    let cfg = rk4(config);
    result.push_integrator_meta(&cfg);
    Ok(result)
}

/// `|psi><psi|` for each member of the one-qubit ensemble.
pub fn axis_density_matrices() -> Vec<CMatrix> {
    axis_states().iter().map(|s| CMatrix::outer(s, s)).collect()
}

/// `diag(1, 0)` or `diag(0, 1)`.
pub fn basis_density(excited: bool) -> CMatrix {
    let mut d = vec![ZERO; 2];
    d[usize::from(excited)] = ONE;
    CMatrix::diag(&d)
}
