//! Pulse envelopes and piecewise-phase schedules.
//!
//! A segment drives `|g> <-> |r>` with the complex Rabi frequency
//! `Omega(t) = Omega_R(t) exp(-i chi)`, where `chi` is the phase stored in
//! [`PulseSegment::phase`]. Gates depend on the envelope only through its
//! area, which every envelope kind reports in closed form.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::onequbit::OneQubitGateSpec;

/// Default truncation ratio for gaussian envelopes: the pulse spans
/// `width_ratio` standard deviations.
pub const DEFAULT_GAUSSIAN_WIDTH_RATIO: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("peak Rabi amplitude must be positive and finite, got {0}")]
    NonPositivePeak(f64),
    #[error("duration must be positive and finite, got {0}")]
    NonPositiveDuration(f64),
    #[error("pulse area must be nonnegative and finite, got {0}")]
    InvalidArea(f64),
    #[error("gaussian width ratio must be positive and finite, got {0}")]
    InvalidWidthRatio(f64),
    #[error("theta must lie in [0, pi], got {0}")]
    ThetaOutOfRange(f64),
    #[error("phase must be finite, got {0}")]
    NonFinitePhase(f64),
    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeKind {
    /// Constant amplitude.
    Square,
    /// `peak * sin^2(pi t / T)`.
    Sin2,
    /// Gaussian centred in the window, `sigma = T / width_ratio`, truncated
    /// at the window edges without renormalizing the peak.
    Gaussian { width_ratio: f64 },
}

impl EnvelopeKind {
    pub fn gaussian() -> Self {
        EnvelopeKind::Gaussian {
            width_ratio: DEFAULT_GAUSSIAN_WIDTH_RATIO,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvelopeKind::Square => "square",
            EnvelopeKind::Sin2 => "sin2",
            EnvelopeKind::Gaussian { .. } => "gaussian",
        }
    }

    /// Area of a unit-peak, unit-duration envelope. Area scales as
    /// `peak * duration * fill_factor`.
    pub fn fill_factor(&self) -> f64 {
        match *self {
            EnvelopeKind::Square => 1.0,
            EnvelopeKind::Sin2 => 0.5,
            EnvelopeKind::Gaussian { width_ratio } => {
                libm::sqrt(2.0 * PI) / width_ratio * libm::erf(width_ratio / (2.0 * core::f64::consts::SQRT_2))
            }
        }
    }

    fn validate(&self) -> Result<(), PulseError> {
        match *self {
            EnvelopeKind::Gaussian { width_ratio } if !(width_ratio > 0.0 && width_ratio.is_finite()) => {
                Err(PulseError::InvalidWidthRatio(width_ratio))
            }
            _ => Ok(()),
        }
    }
}

/// The amplitude `Omega_R(t)` on `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    kind: EnvelopeKind,
    peak: f64,
    duration: f64,
}

impl Envelope {
    pub fn new(kind: EnvelopeKind, peak: f64, duration: f64) -> Result<Self, PulseError> {
        kind.validate()?;
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(PulseError::NonPositivePeak(peak));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(PulseError::NonPositiveDuration(duration));
        }
        Ok(Envelope { kind, peak, duration })
    }

    /// The envelope of the given kind and peak whose area equals `area`.
    pub fn with_area(kind: EnvelopeKind, peak: f64, area: f64) -> Result<Self, PulseError> {
        kind.validate()?;
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(PulseError::NonPositivePeak(peak));
        }
        if !(area > 0.0 && area.is_finite()) {
            return Err(PulseError::InvalidArea(area));
        }
        Self::new(kind, peak, area / (peak * kind.fill_factor()))
    }

    pub fn kind(&self) -> EnvelopeKind {
        self.kind
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `Omega_R(t)`; `t` is clamped to the window.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration);
        match self.kind {
            EnvelopeKind::Square => self.peak,
            EnvelopeKind::Sin2 => {
                let s = libm::sin(PI * t / self.duration);
                self.peak * s * s
            }
            EnvelopeKind::Gaussian { width_ratio } => {
                let sigma = self.duration / width_ratio;
                let x = (t - 0.5 * self.duration) / sigma;
                self.peak * libm::exp(-0.5 * x * x)
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.peak * self.duration * self.kind.fill_factor()
    }

    /// `int_0^t Omega_R(s) ds`.
    pub fn partial_area(&self, t: f64) -> Result<f64, PulseError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(PulseError::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        if t == self.duration {
            return Ok(self.area());
        }
        let tau = self.duration;
        Ok(match self.kind {
            EnvelopeKind::Square => self.peak * t,
            EnvelopeKind::Sin2 => self.peak * (0.5 * t - tau * libm::sin(2.0 * PI * t / tau) / (4.0 * PI)),
            EnvelopeKind::Gaussian { width_ratio } => {
                let sigma = tau / width_ratio;
                let root2s = core::f64::consts::SQRT_2 * sigma;
                self.peak
                    * sigma
                    * libm::sqrt(PI / 2.0)
                    * (libm::erf((t - 0.5 * tau) / root2s) + libm::erf(0.5 * tau / root2s))
            }
        })
    }
}

/// One constant-phase stretch of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    pub envelope: Envelope,
    /// `chi` in `Omega = Omega_R exp(-i chi)`; kept unreduced.
    pub phase: f64,
}

impl PulseSegment {
    pub fn new(envelope: Envelope, phase: f64) -> Result<Self, PulseError> {
        if !phase.is_finite() {
            return Err(PulseError::NonFinitePhase(phase));
        }
        Ok(PulseSegment { envelope, phase })
    }

    /// Complex Rabi frequency at local time `t`.
    pub fn rabi(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.envelope.value(t), -self.phase)
    }
}

/// Ordered list of segments played back to back from `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    segments: Vec<PulseSegment>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<PulseSegment>) -> Self {
        PulseSchedule { segments }
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.envelope.duration()).sum()
    }

    /// Start time of every segment followed by the total duration.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.segments {
            t += s.envelope.duration();
            out.push(t);
        }
        out
    }

    pub fn segment_areas(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.envelope.area()).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.segments.iter().map(|s| s.envelope.area()).sum()
    }

    /// Segment index and local time for `t`. Right-continuous at interior
    /// boundaries; `t = duration` maps to the end of the last segment.
    pub fn locate(&self, t: f64) -> Result<(usize, f64), PulseError> {
        let total = self.duration();
        if self.segments.is_empty() || !(0.0..=total).contains(&t) {
            return Err(PulseError::TimeOutOfRange { t, duration: total });
        }
        let mut start = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            let end = start + s.envelope.duration();
            if t < end {
                return Ok((k, t - start));
            }
            start = end;
        }
        let last = self.segments.len() - 1;
        Ok((last, self.segments[last].envelope.duration()))
    }

    /// `Omega(t)` in rad/us.
    pub fn sample_rabi(&self, t: f64) -> Result<Complex64, PulseError> {
        let (k, local) = self.locate(t)?;
        Ok(self.segments[k].rabi(local))
    }

    /// `int_0^t Omega_R(s) ds` across segments.
    pub fn partial_area(&self, t: f64) -> Result<f64, PulseError> {
        let (k, local) = self.locate(t)?;
        let before: f64 = self.segments[..k].iter().map(|s| s.envelope.area()).sum();
        Ok(before + self.segments[k].envelope.partial_area(local)?)
    }

    /// A copy with every segment phase shifted by `offset` and every peak
    /// scaled by `rabi_scale` (durations unchanged).
    pub fn perturbed(&self, rabi_scale: f64, offset: f64) -> Result<Self, PulseError> {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let e = &s.envelope;
                let envelope = Envelope::new(e.kind(), e.peak() * rabi_scale, e.duration())?;
                PulseSegment::new(envelope, s.phase + offset)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PulseSchedule { segments })
    }
}

/// Builds the three-segment geometric schedule for `spec`.
///
/// Segment phases are `phi - pi/2`, `gamma + phi + pi/2`, `phi - pi/2` and
/// segment areas `theta/2`, `pi/2`, `(pi - theta)/2`. A segment whose area
/// is exactly zero (`theta = 0` or `theta = pi`) is omitted.
pub fn build_one_qubit_schedule(
    spec: &OneQubitGateSpec,
    kind: EnvelopeKind,
    peak: f64,
) -> Result<PulseSchedule, PulseError> {
    kind.validate()?;
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(PulseError::NonPositivePeak(peak));
    }
    let theta = spec.theta;
    if !(0.0..=PI).contains(&theta) {
        return Err(PulseError::ThetaOutOfRange(theta));
    }
    let outer = spec.varphi - PI / 2.0;
    let inner = spec.gamma + spec.varphi + PI / 2.0;
    let plan = [
        (theta / 2.0, outer),
        (PI / 2.0, inner),
        ((PI - theta) / 2.0, outer),
    ];
    let mut segments = Vec::with_capacity(3);
    for (area, phase) in plan {
        if area == 0.0 {
            continue;
        }
        segments.push(PulseSegment::new(Envelope::with_area(kind, peak, area)?, phase)?);
    }
    Ok(PulseSchedule::new(segments))
}
