//! Gate distances, control-error scans and sweep aggregation.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::evolve::{propagate, EvolveError, IntegratorConfig};
use crate::linalg::{CMatrix, LinalgError};
use crate::onequbit::{evolve_numeric_with, target_gate, OneQubitError, OneQubitGateSpec, GROUND};
use crate::pulses::{build_one_qubit_schedule, Envelope, EnvelopeKind, PulseError, PulseSchedule, PulseSegment};
use crate::twoqubit::{blockade_gate, perturbed_effective_hamiltonian, TwoQubitError, TwoQubitGateSpec, MIN_TWO_QUBIT_STEPS};

/// Unitarity tolerance for inputs to [`gate_distance`].
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    OneQubit(#[from] OneQubitError),
    #[error(transparent)]
    TwoQubit(Box<TwoQubitError>),
    #[error("error grid is empty")]
    EmptyGrid,
    #[error("metric '{name}' has {found} values for {expected} axis points")]
    LengthMismatch { name: String, expected: usize, found: usize },
}

impl From<TwoQubitError> for AnalysisError {
    fn from(e: TwoQubitError) -> Self {
        AnalysisError::TwoQubit(Box::new(e))
    }
}

/// Phase-insensitive distances between two unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDistance {
    /// `min_phi ||u - e^{i phi} v||_F`.
    pub frobenius: f64,
    /// `1 - |Tr(u^dag v)|^2 / d^2`.
    pub trace_infidelity: f64,
    /// `1 - (|Tr(u^dag v)|^2 + d) / (d (d + 1))`.
    pub avg_infidelity: f64,
}

pub fn gate_distance(u: &CMatrix, v: &CMatrix) -> Result<GateDistance, AnalysisError> {
    if u.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        }
        .into());
    }
    u.ensure_unitary(UNITARY_TOL)?;
    v.ensure_unitary(UNITARY_TOL)?;
    let d = u.dim() as f64;
    let overlap = (&u.adjoint() * v).trace();
    let abs2 = overlap.norm_sqr();
    // align v to u before subtracting so near-equal gates keep full precision
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let frobenius = u.distance(&v.scale(phase));
    Ok(GateDistance {
        frobenius,
        trace_infidelity: (1.0 - abs2 / (d * d)).max(0.0),
        avg_infidelity: (1.0 - (abs2 + d) / (d * (d + 1.0))).max(0.0),
    })
}

/// Least-squares slope of `ln y` against `ln x`. `None` unless at least
/// three points with positive finite coordinates and two distinct `x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return None;
        }
        lx.push(libm::log(x));
        ly.push(libm::log(y));
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// No NaNs and no jump between neighbouring points larger than ten times
/// the adjacent increments (with an absolute floor of `floor`).
pub fn is_continuous(values: &[f64], floor: f64) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let steps: Vec<f64> = values.windows(2).map(|w| libm::fabs(w[1] - w[0])).collect();
    (0..steps.len()).all(|i| {
        let before = if i > 0 { steps[i - 1] } else { 0.0 };
        let after = steps.get(i + 1).copied().unwrap_or(0.0);
        steps[i] <= 10.0 * before.max(after).max(floor)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub name: String,
    /// `None` when the fit is undefined.
    pub value: Option<f64>,
}

/// One scan: an axis, metric columns over it, fits and an input echo.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub fits: Vec<Fit>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(name: impl Into<String>, axis_name: impl Into<String>, axis_values: Vec<f64>) -> Self {
        SweepResult {
            name: name.into(),
            axis_name: axis_name.into(),
            axis_values,
            metrics: Vec::new(),
            fits: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    pub fn push_metric(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<(), AnalysisError> {
        let name = name.into();
        if values.len() != self.axis_values.len() {
            return Err(AnalysisError::LengthMismatch {
                name,
                expected: self.axis_values.len(),
                found: values.len(),
            });
        }
        self.metrics.push(Metric { name, values });
        Ok(())
    }

    pub fn push_fit(&mut self, name: impl Into<String>, value: Option<f64>) {
        self.fits.push(Fit {
            name: name.into(),
            value,
        });
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    /// Echoes integrator settings and the library version.
    pub fn push_integrator_meta(&mut self, config: &IntegratorConfig) {
        self.push_meta("method", config.method.name());
        self.push_meta("steps", format!("{}", config.steps));
        self.push_meta("max_phase_per_step", format!("{:?}", config.max_phase_per_step));
        self.push_meta("version", format!("geomgate-core {}", crate::VERSION));
    }

    pub fn metric(&self, name: &str) -> Option<&[f64]> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.values.as_slice())
    }

    /// `Some(value)` if a fit of that name exists, where `value` may itself
    /// be `None` for an undefined fit.
    pub fn fit(&self, name: &str) -> Option<Option<f64>> {
        self.fits.iter().find(|f| f.name == name).map(|f| f.value)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Systematic control errors applied to the simulated Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlErrorModel {
    /// `Omega_R -> (1 + epsilon) Omega_R`.
    pub rabi_scale_epsilon: f64,
    /// Added to every laser phase.
    pub phase_offset: f64,
    /// `Delta |r><r|` on every atom, rad/us.
    pub detuning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorAxis {
    RabiScale,
    PhaseOffset,
    Detuning,
}

impl ErrorAxis {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorAxis::RabiScale => "epsilon",
            ErrorAxis::PhaseOffset => "phase_offset",
            ErrorAxis::Detuning => "detuning",
        }
    }

    pub fn model(&self, value: f64) -> ControlErrorModel {
        let mut m = ControlErrorModel::default();
        match self {
            ErrorAxis::RabiScale => m.rabi_scale_epsilon = value,
            ErrorAxis::PhaseOffset => m.phase_offset = value,
            ErrorAxis::Detuning => m.detuning = value,
        }
        m
    }

    /// Default grid: `epsilon` in `[-0.1, 0.1]` step 0.01, detuning in
    /// `[-0.2, 0.2] * peak` step `0.02 * peak`, phase offset in
    /// `[-0.2, 0.2]` rad step 0.02.
    pub fn default_grid(&self, peak: f64) -> Vec<f64> {
        let (half, scale) = match self {
            ErrorAxis::RabiScale => (10, 0.01),
            ErrorAxis::PhaseOffset => (10, 0.02),
            ErrorAxis::Detuning => (10, 0.02 * peak),
        };
        (-half..=half).map(|k| k as f64 * scale).collect()
    }
}

impl core::str::FromStr for ErrorAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "epsilon" | "rabi-scale" | "rabi_scale" => Ok(ErrorAxis::RabiScale),
            "phase_offset" | "phase-offset" => Ok(ErrorAxis::PhaseOffset),
            "detuning" => Ok(ErrorAxis::Detuning),
            other => Err(format!("unknown error axis '{other}'")),
        }
    }
}

/// Gate whose robustness is scanned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustnessTarget {
    OneQubit {
        spec: OneQubitGateSpec,
        kind: EnvelopeKind,
        peak: f64,
    },
    /// Simulated with the blockade-limit generator.
    TwoQubit(TwoQubitGateSpec),
}

impl RobustnessTarget {
    pub fn ideal(&self) -> CMatrix {
        match self {
            RobustnessTarget::OneQubit { spec, .. } => target_gate(spec),
            RobustnessTarget::TwoQubit(spec) => blockade_gate(spec.phi),
        }
    }

    fn peak(&self) -> f64 {
        match self {
            RobustnessTarget::OneQubit { peak, .. } => *peak,
            RobustnessTarget::TwoQubit(spec) => spec.envelope.peak(),
        }
    }
}

/// Distances for one error setting. `dynamical` compares a single resonant
/// pulse realizing the same rotation; it exists only for one-qubit gates
/// with an equatorial axis and nonzero `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessPoint {
    pub geometric: GateDistance,
    pub dynamical: Option<GateDistance>,
}

/// Single pulse with `exp(-i int H dt) = exp(i gamma n.sigma)` for an
/// equatorial axis, or `None`.
pub fn dynamical_schedule(spec: &OneQubitGateSpec, kind: EnvelopeKind, peak: f64) -> Result<Option<PulseSchedule>, AnalysisError> {
    if libm::fabs(spec.theta - PI / 2.0) > 1e-12 || spec.gamma == 0.0 {
        return Ok(None);
    }
    let (area, phase) = if spec.gamma > 0.0 {
        (spec.gamma, spec.varphi + PI)
    } else {
        (-spec.gamma, spec.varphi)
    };
    let segment = PulseSegment::new(Envelope::with_area(kind, peak, area)?, phase)?;
    Ok(Some(PulseSchedule::new(alloc::vec![segment])))
}

fn one_qubit_propagator(
    schedule: &PulseSchedule,
    model: &ControlErrorModel,
    config: &IntegratorConfig,
) -> Result<CMatrix, AnalysisError> {
    let perturbed = schedule.perturbed(1.0 + model.rabi_scale_epsilon, model.phase_offset)?;
    Ok(evolve_numeric_with(&perturbed, &GROUND, config, model.detuning)?.propagator)
}

pub fn robustness_point(
    target: &RobustnessTarget,
    model: &ControlErrorModel,
    config: &IntegratorConfig,
) -> Result<RobustnessPoint, AnalysisError> {
    let ideal = target.ideal();
    match target {
        RobustnessTarget::OneQubit { spec, kind, peak } => {
            let schedule = build_one_qubit_schedule(spec, *kind, *peak)?;
            let geometric = gate_distance(&one_qubit_propagator(&schedule, model, config)?, &ideal)?;
            let dynamical = match dynamical_schedule(spec, *kind, *peak)? {
                Some(s) => Some(gate_distance(&one_qubit_propagator(&s, model, config)?, &ideal)?),
                None => None,
            };
            Ok(RobustnessPoint { geometric, dynamical })
        }
        RobustnessTarget::TwoQubit(spec) => {
            if config.steps < MIN_TWO_QUBIT_STEPS {
                return Err(TwoQubitError::TooFewSteps(config.steps).into());
            }
            let h = |t: f64| {
                perturbed_effective_hamiltonian(
                    spec,
                    t,
                    1.0 + model.rabi_scale_epsilon,
                    model.phase_offset,
                    model.detuning,
                )
            };
            let u = propagate(h, 0.0, spec.duration(), config)?;
            Ok(RobustnessPoint {
                geometric: gate_distance(&u, &ideal)?,
                dynamical: None,
            })
        }
    }
}

/// Scans one error channel over `values`, the others held at zero.
pub fn robustness_scan(
    target: &RobustnessTarget,
    axis: ErrorAxis,
    values: &[f64],
    config: &IntegratorConfig,
) -> Result<SweepResult, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let points = values
        .iter()
        .map(|&v| robustness_point(target, &axis.model(v), config))
        .collect::<Result<Vec<_>, _>>()?;
    robustness_sweep_result(target, axis, values, config, &points)
}

/// Assembles scan points (in `values` order) into a [`SweepResult`].
pub fn robustness_sweep_result(
    target: &RobustnessTarget,
    axis: ErrorAxis,
    values: &[f64],
    config: &IntegratorConfig,
    points: &[RobustnessPoint],
) -> Result<SweepResult, AnalysisError> {
    let mut result = SweepResult::new(format!("robustness-{}", axis.name()), axis.name(), values.to_vec());
    let col = |f: fn(&GateDistance) -> f64| points.iter().map(|p| f(&p.geometric)).collect::<Vec<_>>();
    result.push_metric("trace_infidelity", col(|d| d.trace_infidelity))?;
    result.push_metric("avg_infidelity", col(|d| d.avg_infidelity))?;
    result.push_metric("frobenius", col(|d| d.frobenius))?;
    if points.iter().all(|p| p.dynamical.is_some()) && !points.is_empty() {
        let dcol = |f: fn(&GateDistance) -> f64| {
            points
                .iter()
                .filter_map(|p| p.dynamical.as_ref().map(f))
                .collect::<Vec<_>>()
        };
        result.push_metric("dyn_trace_infidelity", dcol(|d| d.trace_infidelity))?;
        result.push_metric("dyn_avg_infidelity", dcol(|d| d.avg_infidelity))?;
        result.push_metric("dyn_frobenius", dcol(|d| d.frobenius))?;
    }
    match target {
        RobustnessTarget::OneQubit { spec, kind, peak } => {
            result.push_meta("gate", "one-qubit");
            result.push_meta("theta", format!("{:?}", spec.theta));
            result.push_meta("varphi", format!("{:?}", spec.varphi));
            result.push_meta("gamma", format!("{:?}", spec.gamma));
            push_envelope_meta(&mut result, *kind, *peak);
        }
        RobustnessTarget::TwoQubit(spec) => {
            result.push_meta("gate", "two-qubit");
            result.push_meta("frame", "effective");
            result.push_meta("phi", format!("{:?}", spec.phi));
            result.push_meta("interaction", format!("{:?}", spec.interaction));
            push_envelope_meta(&mut result, spec.envelope.kind(), spec.envelope.peak());
        }
    }
    if axis == ErrorAxis::Detuning {
        result.push_meta("note", "detuning is an off-resonant extension of the resonant model");
        result.push_meta("detuning_over_peak", format!("{:?}", 1.0 / target.peak()));
    }
    result.push_integrator_meta(config);
    Ok(result)
}

fn push_envelope_meta(result: &mut SweepResult, kind: EnvelopeKind, peak: f64) {
    result.push_meta("envelope", kind.name());
    if let EnvelopeKind::Gaussian { width_ratio } = kind {
        result.push_meta("width_ratio", format!("{width_ratio:?}"));
    }
    result.push_meta("peak", format!("{peak:?}"));
}

/// Acceptance window for one quantity of one scan. The quantity is a fit
/// name or a metric name; metrics are judged by their largest value.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub scan: String,
    pub quantity: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricExtrema {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub name: String,
    pub axis_name: String,
    pub points: usize,
    pub extrema: Vec<MetricExtrema>,
    pub fits: Vec<Fit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCheck {
    pub threshold: Threshold,
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub scans: Vec<ScanSummary>,
    pub checks: Vec<ThresholdCheck>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Per-scan extrema and fits, ordered by scan name, plus threshold checks.
pub fn summarize(results: &[SweepResult], thresholds: &[Threshold]) -> Report {
    let mut sorted: Vec<&SweepResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let scans = sorted
        .iter()
        .map(|r| ScanSummary {
            name: r.name.clone(),
            axis_name: r.axis_name.clone(),
            points: r.len(),
            extrema: r
                .metrics
                .iter()
                .filter_map(|m| extrema(&m.name, &r.axis_values, &m.values))
                .collect(),
            fits: r.fits.clone(),
        })
        .collect();
    let checks = thresholds
        .iter()
        .map(|t| {
            let value = sorted.iter().find(|r| r.name == t.scan).and_then(|r| match r.fit(&t.quantity) {
                Some(fit) => fit,
                None => r.metric(&t.quantity).and_then(|v| v.iter().copied().reduce(f64::max)),
            });
            let passed = value.is_some_and(|v| {
                v.is_finite() && t.lower.is_none_or(|lo| v >= lo) && t.upper.is_none_or(|hi| v <= hi)
            });
            ThresholdCheck {
                threshold: t.clone(),
                value,
                passed,
            }
        })
        .collect();
    Report { scans, checks }
}

fn extrema(name: &str, axis: &[f64], values: &[f64]) -> Option<MetricExtrema> {
    let mut it = values.iter().zip(axis).filter(|(v, _)| v.is_finite());
    let (&v0, &a0) = it.next()?;
    let mut e = MetricExtrema {
        name: name.to_string(),
        min: v0,
        max: v0,
        argmin: a0,
        argmax: a0,
    };
    for (&v, &a) in it {
        if v < e.min {
            e.min = v;
            e.argmin = a;
        }
        if v > e.max {
            e.max = v;
            e.argmax = a;
        }
    }
    Some(e)
}
