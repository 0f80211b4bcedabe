//! One-qubit geometric gates built from a single orange-slice loop.
//!
//! The target is `U_n(gamma) = exp(i gamma n . sigma)` with
//! `n = (sin theta cos phi, sin theta sin phi, cos theta)`. Three resonant
//! segments of areas `theta/2`, `pi/2`, `(pi - theta)/2` realize it exactly;
//! the eigenstate `|d>` of `n . sigma` then travels `n -> |g> -> |r> -> n`
//! along two meridians with zero dynamical phase, so its phase `gamma` is
//! purely geometric.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::evolve::{propagate_observed, EvolveError, IntegratorConfig, Method, MIN_STEPS};
use crate::linalg::{inner, CMatrix};
use crate::pulses::{PulseError, PulseSchedule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Two-component state over `{|g>, |r>}`.
pub type Qubit = [Complex64; 2];

pub const GROUND: Qubit = [ONE, ZERO];
pub const RYDBERG: Qubit = [ZERO, ONE];

/// Largest `|r(end) - r(start)|` for which a Bloch path counts as closed.
pub const CLOSURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OneQubitError {
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("schedule has no segments")]
    EmptySchedule,
    #[error("at least {MIN_STEPS} steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("probe state must be normalized (norm {0})")]
    UnnormalizedProbe(f64),
    #[error("Bloch path is not closed (gap {gap:e})")]
    OpenPath { gap: f64 },
    #[error("Bloch path is empty")]
    EmptyPath,
}

/// Rotation `exp(i gamma n . sigma)` about the axis at polar angle `theta`
/// and azimuth `varphi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitGateSpec {
    pub theta: f64,
    pub varphi: f64,
    pub gamma: f64,
}

impl OneQubitGateSpec {
    pub fn new(theta: f64, varphi: f64, gamma: f64) -> Self {
        OneQubitGateSpec { theta, varphi, gamma }
    }

    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = (libm::sin(self.theta), libm::cos(self.theta));
        [st * libm::cos(self.varphi), st * libm::sin(self.varphi), ct]
    }

    /// `n . sigma`.
    pub fn axis_operator(&self) -> CMatrix {
        let [x, y, z] = self.axis();
        CMatrix::from_rows([
            [Complex64::new(z, 0.0), Complex64::new(x, -y)],
            [Complex64::new(x, y), Complex64::new(-z, 0.0)],
        ])
    }
}

/// `cos(gamma) I + i sin(gamma) n . sigma`.
pub fn target_gate(spec: &OneQubitGateSpec) -> CMatrix {
    let c = libm::cos(spec.gamma);
    let s = libm::sin(spec.gamma);
    let n = spec.axis_operator();
    &CMatrix::identity(2).scale(c.into()) + &n.scale(Complex64::new(0.0, s))
}

/// `cos(a) I + sin(a) (e^{-i phi}|g><r| - e^{i phi}|r><g|)`: the propagator
/// of a resonant segment with phase `phi - pi/2` and area `a`.
fn meridian_rotation(area: f64, varphi: f64) -> CMatrix {
    let c = Complex64::new(libm::cos(area), 0.0);
    let s = libm::sin(area);
    let e = Complex64::from_polar(1.0, -varphi);
    CMatrix::from_rows([[c, e * s], [-e.conj() * s, c]])
}

/// The closed-form propagators of the three segments, in time order.
pub fn segment_propagators(spec: &OneQubitGateSpec) -> [CMatrix; 3] {
    let half = spec.theta / 2.0;
    let first = meridian_rotation(half, spec.varphi);
    let e = Complex64::from_polar(1.0, spec.varphi + spec.gamma);
    let second = CMatrix::from_rows([[ZERO, -e.conj()], [e, ZERO]]);
    // sin(theta/2) + cos(theta/2)(...) is a rotation by pi/2 - theta/2
    let third = meridian_rotation(PI / 2.0 - half, spec.varphi);
    [first, second, third]
}

/// `third * second * first`.
pub fn composed_gate(spec: &OneQubitGateSpec) -> CMatrix {
    let [first, second, third] = segment_propagators(spec);
    &third * &(&second * &first)
}

/// Eigenstates of `n . sigma` with eigenvalues `+1` (`d`) and `-1` (`b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub d: Qubit,
    pub b: Qubit,
}

pub fn eigenbasis(spec: &OneQubitGateSpec) -> EigenPair {
    let (c, s) = (libm::cos(spec.theta / 2.0), libm::sin(spec.theta / 2.0));
    EigenPair {
        d: [c.into(), Complex64::from_polar(s, spec.varphi)],
        b: [Complex64::from_polar(s, -spec.varphi), (-c).into()],
    }
}

/// `H = Omega |g><r| + conj(Omega) |r><g| + detuning |r><r|`.
pub fn rabi_hamiltonian(omega: Complex64, detuning: f64) -> CMatrix {
    CMatrix::from_rows([[ZERO, omega], [omega.conj(), detuning.into()]])
}

/// Schedule Hamiltonian at time `t` (right-continuous at boundaries).
pub fn hamiltonian(schedule: &PulseSchedule, t: f64) -> Result<CMatrix, PulseError> {
    Ok(rabi_hamiltonian(schedule.sample_rabi(t)?, 0.0))
}

/// Bloch vector `<sigma>` of a normalized state.
pub fn bloch_vector(psi: &Qubit) -> [f64; 3] {
    let coh = psi[0].conj() * psi[1];
    [2.0 * coh.re, 2.0 * coh.im, psi[0].norm_sqr() - psi[1].norm_sqr()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub r: [f64; 3],
    /// `arg <psi(0)|psi(t)>`.
    pub total_phase: f64,
    /// `<psi(t)|H(t)|psi(t)>` in rad/us.
    pub dynamical_integrand: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlochPath {
    pub samples: Vec<PathSample>,
}

impl BlochPath {
    pub fn closure_gap(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => dist3(&a.r, &b.r),
            _ => 0.0,
        }
    }

    pub fn max_abs_integrand(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| libm::fabs(s.dynamical_integrand))
            .fold(0.0, f64::max)
    }
}

/// Result of [`evolve_numeric`].
#[derive(Debug, Clone, PartialEq)]
pub struct NumericEvolution {
    pub propagator: CMatrix,
    pub path: BlochPath,
    /// Probe state at `t = 0` and at the end of every segment.
    pub boundary_states: Vec<(f64, Qubit)>,
}

/// Integrates `schedule` with `steps` exp-midpoint steps in total and follows
/// `probe` along the way. Steps are split over segments in proportion to
/// their duration (at least [`MIN_STEPS`] each) so that no step straddles a
/// phase jump.
pub fn evolve_numeric(
    schedule: &PulseSchedule,
    probe: &Qubit,
    steps: usize,
) -> Result<NumericEvolution, OneQubitError> {
    let config = IntegratorConfig {
        method: Method::ExpMidpoint,
        steps,
        ..Default::default()
    };
    evolve_numeric_with(schedule, probe, &config, 0.0)
}

/// [`evolve_numeric`] with an explicit integrator and a static detuning
/// `detuning |r><r|` added to every segment.
pub fn evolve_numeric_with(
    schedule: &PulseSchedule,
    probe: &Qubit,
    config: &IntegratorConfig,
    detuning: f64,
) -> Result<NumericEvolution, OneQubitError> {
    if schedule.is_empty() {
        return Err(OneQubitError::EmptySchedule);
    }
    if config.steps < MIN_STEPS {
        return Err(OneQubitError::TooFewSteps(config.steps));
    }
    let probe_norm = crate::linalg::norm(probe);
    if libm::fabs(probe_norm - 1.0) > 1e-12 {
        return Err(OneQubitError::UnnormalizedProbe(probe_norm));
    }
    let total = schedule.duration();
    let mut u = CMatrix::identity(2);
    let mut samples = Vec::with_capacity(config.steps + schedule.segments().len());
    let mut boundary_states = Vec::with_capacity(schedule.segments().len() + 1);
    boundary_states.push((0.0, *probe));

    let mut start = 0.0;
    for (k, seg) in schedule.segments().iter().enumerate() {
        let len = seg.envelope.duration();
        let share = libm::round(config.steps as f64 * len / total) as usize;
        let seg_config = config.with_steps(share.max(MIN_STEPS));
        let h = |t: f64| rabi_hamiltonian(seg.rabi(t - start), detuning);
        let before = u.clone();
        let seg_u = propagate_observed(h, start, start + len, &seg_config, |t, step_u| {
            if k > 0 && t == start {
                // already recorded as the end of the previous segment
                return;
            }
            let full = step_u * &before;
            let psi = apply2(&full, probe);
            samples.push(PathSample {
                t,
                r: bloch_vector(&psi),
                total_phase: inner(probe, &psi).arg(),
                dynamical_integrand: h(t).sandwich(&psi, &psi).re,
            });
        })?;
        u = &seg_u * &before;
        start += len;
        boundary_states.push((start, apply2(&u, probe)));
    }
    Ok(NumericEvolution {
        propagator: u,
        path: BlochPath { samples },
        boundary_states,
    })
}

/// `-int <psi|H|psi> dt` by the trapezoid rule.
pub fn dynamical_phase(path: &BlochPath) -> f64 {
    -path
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].dynamical_integrand + w[1].dynamical_integrand) * (w[1].t - w[0].t))
        .sum::<f64>()
}

/// Signed solid angle enclosed by a closed Bloch path, summed as the spherical
/// excess of geodesic triangles fanned out from a common apex.
///
/// The apex is the candidate direction (coordinate axes and cube diagonals)
/// farthest from the path and from its antipodal image, so no fan triangle
/// degenerates. Fanning from a point on the path breaks down as soon as the
/// path crosses that point's antipode, which every great circle does.
///
/// Orientation: positive for loops running counterclockwise about the
/// inward normal (clockwise seen from outside the sphere). With `|g>` at the
/// north pole this is the sense in which a cyclic state picks up the phase
/// `+solid_angle / 2`. The result is meaningful modulo `4 pi`.
pub fn solid_angle(path: &BlochPath) -> Result<f64, OneQubitError> {
    if path.samples.is_empty() {
        return Err(OneQubitError::EmptyPath);
    }
    let gap = path.closure_gap();
    if gap > CLOSURE_TOL {
        return Err(OneQubitError::OpenPath { gap });
    }
    let points: Vec<[f64; 3]> = path.samples.iter().map(|s| s.r).collect();
    Ok(-fan_area(&fan_apex(&points), &points))
}

fn fan_apex(points: &[[f64; 3]]) -> [f64; 3] {
    let d = 1.0 / libm::sqrt(3.0);
    let mut candidates: Vec<[f64; 3]> = Vec::with_capacity(14);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[axis] = sign;
            candidates.push(v);
        }
    }
    for sx in [d, -d] {
        for sy in [d, -d] {
            for sz in [d, -d] {
                candidates.push([sx, sy, sz]);
            }
        }
    }
    let clearance = |p: &[f64; 3]| {
        points
            .iter()
            .map(|r| 1.0 - libm::fabs(dot3(p, r)))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = candidates[0];
    let mut best_clearance = clearance(&best);
    for c in &candidates[1..] {
        let cl = clearance(c);
        if cl > best_clearance {
            best = *c;
            best_clearance = cl;
        }
    }
    best
}

/// Sum of signed triangle excesses `(apex, p_i, p_{i+1})` over a closed
/// polygon, counterclockwise about the outward normal positive.
pub(crate) fn fan_area(apex: &[f64; 3], points: &[[f64; 3]]) -> f64 {
    points
        .windows(2)
        .map(|w| triangle_excess(apex, &w[0], &w[1]))
        .sum()
}

/// Signed spherical excess of the geodesic triangle `(a, b, c)` on the unit
/// sphere: `tan(E/2) = a.(b x c) / (1 + a.b + b.c + c.a)`.
fn triangle_excess(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let num = dot3(a, &cross3(b, c));
    let den = 1.0 + dot3(a, b) + dot3(b, c) + dot3(c, a);
    2.0 * libm::atan2(num, den)
}

/// `|a - b|` reduced onto `[0, pi]` modulo `2 pi`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = libm::fabs(libm::remainder(a - b, TAU));
    d.min(TAU - d)
}

/// Checkpoints of the cyclic evolution of `|d>`: it should reach `|g>`, then
/// `e^{i(gamma + phi)} |r>`, then return to `e^{i gamma} |d>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicChain {
    /// `|<g|d(tau_1)>|`.
    pub ground_overlap: f64,
    /// `arg <g|d(tau_1)>`.
    pub ground_phase: f64,
    /// `|<r|d(tau_2)>|`.
    pub rydberg_overlap: f64,
    /// `arg <r|d(tau_2)>`.
    pub rydberg_phase: f64,
    /// `<d|d(tau)>`.
    pub final_overlap: Complex64,
}

impl CyclicChain {
    /// Phase of the `|r>` checkpoint relative to the `|g>` checkpoint,
    /// expected to be `gamma + varphi` modulo `2 pi`.
    pub fn relative_phase(&self) -> f64 {
        self.rydberg_phase - self.ground_phase
    }
}

/// Reads the chain off an evolution of `|d>` under the schedule built for
/// `spec`. A dropped first segment (`theta = 0`) puts `tau_1` at `t = 0`.
pub fn cyclic_chain(spec: &OneQubitGateSpec, evolution: &NumericEvolution) -> CyclicChain {
    let states = &evolution.boundary_states;
    let offset = if spec.theta == 0.0 { 0 } else { 1 };
    let at_tau1 = states[offset.min(states.len() - 1)].1;
    let at_tau2 = states[(offset + 1).min(states.len() - 1)].1;
    let initial = states[0].1;
    let last = states[states.len() - 1].1;
    CyclicChain {
        ground_overlap: at_tau1[0].norm(),
        ground_phase: at_tau1[0].arg(),
        rydberg_overlap: at_tau2[1].norm(),
        rydberg_phase: at_tau2[1].arg(),
        final_overlap: inner(&initial, &last),
    }
}

pub(crate) fn apply2(u: &CMatrix, v: &Qubit) -> Qubit {
    [
        u[(0, 0)] * v[0] + u[(0, 1)] * v[1],
        u[(1, 0)] * v[0] + u[(1, 1)] * v[1],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    libm::sqrt(dot3(&d, &d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use crate::pulses::{build_one_qubit_schedule, Envelope, EnvelopeKind, PulseSegment};
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ix() -> CMatrix {
        CMatrix::sigma_x().scale(c(0.0, 1.0))
    }

    #[test]
    fn target_gate_examples() {
        let g = 0.83;
        let u = target_gate(&OneQubitGateSpec::new(0.0, 0.0, g));
        assert!(u.max_abs_diff(&CMatrix::diag(&[c(0.0, g).exp(), c(0.0, -g).exp()])) < 1e-15);
        let u = target_gate(&OneQubitGateSpec::new(1.2, 2.2, PI));
        assert!(u.max_abs_diff(&CMatrix::identity(2).scale(c(-1.0, 0.0))) < 1e-15);
        let u = target_gate(&OneQubitGateSpec::new(PI / 2.0, 0.0, PI / 2.0));
        assert!(u.max_abs_diff(&ix()) < 1e-15);
    }

    #[test]
    fn target_gate_is_exponential_of_axis() {
        let spec = OneQubitGateSpec::new(0.7, -1.9, 2.4);
        let via_expm = expm(&spec.axis_operator(), c(0.0, spec.gamma)).unwrap();
        assert!(target_gate(&spec).max_abs_diff(&via_expm) < 1e-14);
    }

    #[test]
    fn segment_propagator_examples() {
        let [first, _, _] = segment_propagators(&OneQubitGateSpec::new(PI / 2.0, 0.0, 0.4));
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!(first.max_abs_diff(&CMatrix::from_real([[r, r], [-r, r]])) < 1e-15);
        let [_, second, _] = segment_propagators(&OneQubitGateSpec::new(1.0, 0.0, 0.0));
        assert!(second.max_abs_diff(&CMatrix::from_real([[0.0, -1.0], [1.0, 0.0]])) < 1e-15);
        let [first, _, _] = segment_propagators(&OneQubitGateSpec::new(0.0, 0.3, 0.4));
        assert!(first.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn segment_propagators_are_resonant_exponentials() {
        // exp(-i area (e^{-i chi}|g><r| + h.c.)) with the schedule phases
        let spec = OneQubitGateSpec::new(1.1, 0.4, -2.3);
        let props = segment_propagators(&spec);
        let areas = [spec.theta / 2.0, PI / 2.0, (PI - spec.theta) / 2.0];
        let outer = spec.varphi - PI / 2.0;
        let phases = [outer, spec.gamma + spec.varphi + PI / 2.0, outer];
        for ((p, a), chi) in props.iter().zip(areas).zip(phases) {
            let h = rabi_hamiltonian(Complex64::from_polar(1.0, -chi), 0.0);
            let want = expm(&h, c(0.0, -a)).unwrap();
            assert!(p.max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn composed_gate_examples() {
        let u = composed_gate(&OneQubitGateSpec::new(PI / 2.0, 0.0, PI / 2.0));
        assert!(u.max_abs_diff(&ix()) < 1e-15);
        let u = composed_gate(&OneQubitGateSpec::new(0.0, 0.0, PI / 4.0));
        let want = CMatrix::diag(&[c(0.0, PI / 4.0).exp(), c(0.0, -PI / 4.0).exp()]);
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn eigenbasis_examples() {
        let e = eigenbasis(&OneQubitGateSpec::new(0.0, 0.7, 0.1));
        assert_eq!(e.d, [ONE, ZERO]);
        assert!((e.b[0]).norm() < 1e-16 && (e.b[1] + ONE).norm() < 1e-16);
        let e = eigenbasis(&OneQubitGateSpec::new(PI / 2.0, 0.0, 0.1));
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((e.d[0] - r).norm() < 1e-15 && (e.d[1] - r).norm() < 1e-15);
        assert!((e.b[0] - r).norm() < 1e-15 && (e.b[1] + r).norm() < 1e-15);
    }

    #[test]
    fn bloch_vector_of_d_is_axis() {
        let spec = OneQubitGateSpec::new(0.9, 2.1, 0.3);
        let r = bloch_vector(&eigenbasis(&spec).d);
        let n = spec.axis();
        assert!(dist3(&r, &n) < 1e-15);
    }

    #[test]
    fn numeric_square_schedule_matches_gate() {
        let spec = OneQubitGateSpec::new(PI / 2.0, 0.0, PI / 2.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Square, 5.0 * PI).unwrap();
        let e = evolve_numeric(&s, &eigenbasis(&spec).d, 10_000).unwrap();
        assert!(e.propagator.distance(&ix()) < 1e-8);
        assert!(e.path.closure_gap() < 1e-10);
    }

    #[test]
    fn numeric_degenerate_schedule_is_valid() {
        let spec = OneQubitGateSpec::new(0.0, 0.5, 1.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Sin2, 3.0).unwrap();
        let e = evolve_numeric(&s, &GROUND, 1000).unwrap();
        assert!(e.propagator.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(e.propagator.unitarity_defect() < 1e-12);
        assert!(e.propagator.distance(&target_gate(&spec)) < 1e-5);
    }

    #[test]
    fn evolve_numeric_errors() {
        let empty = PulseSchedule::default();
        assert_eq!(evolve_numeric(&empty, &GROUND, 1000), Err(OneQubitError::EmptySchedule));
        let spec = OneQubitGateSpec::new(1.0, 0.0, 1.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Square, 3.0).unwrap();
        assert_eq!(evolve_numeric(&s, &GROUND, 10), Err(OneQubitError::TooFewSteps(10)));
    }

    #[test]
    fn dynamical_phase_vanishes_only_on_geometric_schedules() {
        let spec = OneQubitGateSpec::new(1.3, 0.8, 2.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Sin2, 4.0).unwrap();
        let e = evolve_numeric(&s, &eigenbasis(&spec).d, 4000).unwrap();
        assert!(libm::fabs(dynamical_phase(&e.path)) <= 1e-8 * s.total_area());

        // all three phases zero: |d> is no longer transported in parallel
        let seg = |area: f64| PulseSegment::new(Envelope::with_area(EnvelopeKind::Square, 4.0, area).unwrap(), 0.0).unwrap();
        let flat = PulseSchedule::new(vec![seg(0.65), seg(PI / 2.0), seg(PI / 2.0 - 0.65)]);
        let e = evolve_numeric(&flat, &eigenbasis(&spec).d, 4000).unwrap();
        assert!(libm::fabs(dynamical_phase(&e.path)) > 1e-2);

        // a detuned copy of the geometric schedule
        let cfg = IntegratorConfig::default().with_steps(4000);
        let e = evolve_numeric_with(&s, &eigenbasis(&spec).d, &cfg, 1.5).unwrap();
        assert!(libm::fabs(dynamical_phase(&e.path)) > 1e-2);

        assert_eq!(dynamical_phase(&BlochPath::default()), 0.0);
    }

    fn great_circle(n: usize, reverse: bool) -> BlochPath {
        let samples = (0..=n)
            .map(|k| {
                let mut a = TAU * k as f64 / n as f64;
                if reverse {
                    a = -a;
                }
                PathSample {
                    t: k as f64,
                    r: [libm::cos(a), libm::sin(a), 0.0],
                    total_phase: 0.0,
                    dynamical_integrand: 0.0,
                }
            })
            .collect();
        BlochPath { samples }
    }

    #[test]
    fn hemisphere_encloses_two_pi() {
        for reverse in [false, true] {
            let omega = solid_angle(&great_circle(2000, reverse)).unwrap();
            let reduced = libm::remainder(omega, 2.0 * TAU);
            assert!(libm::fabs(libm::fabs(reduced) - TAU) < 1e-9, "{omega}");
        }
    }

    #[test]
    fn solid_angle_of_geometric_loop() {
        let spec = OneQubitGateSpec::new(PI / 2.0, 0.0, PI / 2.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Square, 5.0 * PI).unwrap();
        let e = evolve_numeric(&s, &eigenbasis(&spec).d, 10_000).unwrap();
        let omega = solid_angle(&e.path).unwrap();
        assert!(phase_distance(omega / 2.0, spec.gamma) < 1e-3, "{omega}");
        let total = e.path.samples.last().unwrap().total_phase;
        assert!(phase_distance(total - dynamical_phase(&e.path), omega / 2.0) < 1e-3);
    }

    #[test]
    fn retraced_meridian_has_zero_area() {
        let spec = OneQubitGateSpec::new(1.0, 0.3, 0.0);
        let s = build_one_qubit_schedule(&spec, EnvelopeKind::Square, 5.0).unwrap();
        let e = evolve_numeric(&s, &eigenbasis(&spec).d, 5000).unwrap();
        let omega = solid_angle(&e.path).unwrap();
        assert!(libm::fabs(libm::remainder(omega, 2.0 * TAU)) < 1e-6, "{omega}");
    }

    #[test]
    fn open_path_rejected() {
        let mut p = great_circle(100, false);
        p.samples.truncate(50);
        assert!(matches!(solid_angle(&p), Err(OneQubitError::OpenPath { .. })));
        assert_eq!(solid_angle(&BlochPath::default()), Err(OneQubitError::EmptyPath));
    }

    #[test]
    fn phase_distance_wraps() {
        assert!(phase_distance(PI - 1e-3, -PI + 1e-3) < 2.1e-3);
        assert!(libm::fabs(phase_distance(0.0, PI) - PI) < 1e-15);
        assert!(phase_distance(5.0 * TAU + 0.1, 0.1) < 1e-12);
    }

    #[test]
    fn cyclic_chain_checkpoints() {
        for (theta, varphi, gamma) in [(PI / 2.0, 0.0, PI / 2.0), (1.1, 0.7, -2.0), (2.6, -1.9, 0.4), (0.0, 0.3, 1.0)] {
            let spec = OneQubitGateSpec::new(theta, varphi, gamma);
            let s = build_one_qubit_schedule(&spec, EnvelopeKind::Sin2, 5.0 * PI).unwrap();
            let e = evolve_numeric(&s, &eigenbasis(&spec).d, 10_000).unwrap();
            let chain = cyclic_chain(&spec, &e);
            assert!(chain.ground_overlap >= 1.0 - 1e-6, "{chain:?}");
            assert!(chain.rydberg_overlap >= 1.0 - 1e-6, "{chain:?}");
            assert!(phase_distance(chain.relative_phase(), gamma + varphi) < 1e-4, "{chain:?}");
            let want = Complex64::from_polar(1.0, gamma);
            assert!((chain.final_overlap - want).norm() < 1e-6, "{chain:?}");
        }
    }
}
