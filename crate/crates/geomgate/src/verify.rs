//! Invariant suite behind the `verify` command.

use std::f64::consts::PI;

use geomgate_core::analysis::gate_distance;
use geomgate_core::evolve::IntegratorConfig;
use geomgate_core::onequbit::{
    composed_gate, cyclic_chain, dynamical_phase, eigenbasis, evolve_numeric, phase_distance, solid_angle,
    target_gate, OneQubitGateSpec, GROUND,
};
use geomgate_core::openquantum::{lindblad_one_qubit, DecayModel, DecayTarget};
use geomgate_core::pulses::{build_one_qubit_schedule, EnvelopeKind};
use geomgate_core::twoqubit::{
    analytic_evolution_at_area, entangling_witness, evolve_numeric_full, holonomy_checks, Frame, TwoQubitGateSpec,
};
use geomgate_core::{linalg::CMatrix, Complex64};

/// Outcome of one invariant: `value <= tolerance` passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    fn holds(name: &'static str, ok: bool) -> Self {
        Check {
            name,
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }
}

const PEAK: f64 = 5.0 * PI;

/// Fixed sample of gate parameters `(theta, varphi, gamma)`.
pub const SAMPLE_SPECS: [(f64, f64, f64); 5] = [
    (PI / 2.0, 0.0, PI / 2.0),
    (1.1, 0.7, -2.0),
    (2.6, -1.9, 0.4),
    (0.35, 2.8, 1.3),
    (PI / 3.0, -0.5, 2.9),
];

fn grid(n: usize, lo: f64, hi: f64, closed: bool) -> Vec<f64> {
    let div = if closed { n - 1 } else { n };
    (0..n).map(|k| lo + (hi - lo) * k as f64 / div as f64).collect()
}

fn fail_check(name: &'static str) -> Check {
    Check {
        name,
        value: f64::INFINITY,
        tolerance: 0.0,
        passed: false,
    }
}

/// Runs every check, in a fixed order.
pub fn run_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for &theta in &grid(12, 0.0, PI, true) {
        for &varphi in &grid(12, -PI, PI, false) {
            for &gamma in &grid(12, -PI, PI, false) {
                let s = OneQubitGateSpec::new(theta, varphi, gamma);
                worst = worst.max(composed_gate(&s).distance(&target_gate(&s)));
            }
        }
    }
    checks.push(Check::at_most("one-qubit composed product equals exp(i gamma n.sigma)", worst, 1e-12));

    checks.push(one_qubit_numerics(EnvelopeKind::Square, "one-qubit square-envelope numerics match the gate", 1e-8));
    checks.push(one_qubit_numerics(EnvelopeKind::Sin2, "one-qubit sin^2 numerics match the gate", 1e-6));
    checks.push(one_qubit_numerics(EnvelopeKind::gaussian(), "one-qubit gaussian numerics match the gate", 1e-6));
    checks.extend(one_qubit_paths());

    let mut worst = 0.0f64;
    for &phi in &grid(9, -PI, PI, true) {
        worst = worst.max(analytic_evolution_at_area(phi, PI).max_abs_diff(&printed_gate(phi)));
    }
    checks.push(Check::at_most("two-qubit evolution at area pi equals the gate matrix", worst, 1e-14));

    let cfg = IntegratorConfig::default().with_steps(10_000);
    let mut worst = 0.0f64;
    for phi in [0.0, PI / 2.0, 2.2] {
        match TwoQubitGateSpec::with_pi_area(phi, 200.0 * PI, EnvelopeKind::Sin2, PEAK)
            .and_then(|s| evolve_numeric_full(&s, Frame::Effective, &cfg))
        {
            Ok(u) => worst = worst.max(gate_distance(&u, &printed_gate(phi)).map_or(f64::INFINITY, |d| d.frobenius)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    checks.push(Check::at_most("two-qubit effective-frame numerics match the closed form", worst, 1e-8));

    let mut worst = 0.0f64;
    for &phi in &grid(7, -PI, PI, true) {
        let r = TwoQubitGateSpec::with_pi_area(phi, 200.0 * PI, EnvelopeKind::Square, PEAK).and_then(|s| holonomy_checks(&s, 200));
        worst = worst.max(match r {
            Ok(r) => [r.off_block_max, r.s1_error, r.s2_error, r.s3_error, r.p2_cyclicity, r.s2_transport, r.gg_transport]
                .into_iter()
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        });
    }
    checks.push(Check::at_most("two-qubit holonomy conditions (blocks, cyclicity, transport)", worst, 1e-10));

    let entangling = entangling_witness(&printed_gate(PI / 2.0)).map(|w| w.entangling).unwrap_or(false);
    let local = entangling_witness(&printed_gate(0.0)).map(|w| !w.entangling).unwrap_or(false);
    checks.push(Check::holds("gate at phi = pi/2 is entangling and at phi = 0 is local", entangling && local));

    checks.push(closed_system_decay());

    let (theta, varphi, gamma, delta) = (1.1, 0.7, -2.0, 0.3);
    let rotated = target_gate(&OneQubitGateSpec::new(theta, varphi + delta, gamma));
    let offset = build_one_qubit_schedule(&OneQubitGateSpec::new(theta, varphi, gamma), EnvelopeKind::Square, PEAK)
        .and_then(|s| s.perturbed(1.0, delta))
        .ok()
        .and_then(|p| evolve_numeric(&p, &GROUND, 2000).ok())
        .map_or(f64::INFINITY, |e| e.propagator.max_abs_diff(&rotated));
    checks.push(Check::at_most("uniform phase offset rotates the gate axis", offset, 1e-10));

    checks
}

fn printed_gate(phi: f64) -> CMatrix {
    let (s, c) = (phi.sin(), phi.cos());
    CMatrix::from_real([
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, s, -c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

fn one_qubit_numerics(kind: EnvelopeKind, name: &'static str, tol: f64) -> Check {
    let mut worst = 0.0f64;
    for &(theta, varphi, gamma) in &SAMPLE_SPECS {
        let spec = OneQubitGateSpec::new(theta, varphi, gamma);
        let d = build_one_qubit_schedule(&spec, kind, PEAK)
            .ok()
            .and_then(|s| evolve_numeric(&s, &GROUND, 10_000).ok())
            .and_then(|e| gate_distance(&e.propagator, &target_gate(&spec)).ok())
            .map_or(f64::INFINITY, |d| d.frobenius);
        worst = worst.max(d);
    }
    Check::at_most(name, worst, tol)
}

fn one_qubit_paths() -> Vec<Check> {
    let mut transport = 0.0f64;
    let mut solid = 0.0f64;
    let mut cross = 0.0f64;
    let mut chain_err = 0.0f64;
    let mut chain_phase = 0.0f64;
    for &(theta, varphi, gamma) in &SAMPLE_SPECS {
        let spec = OneQubitGateSpec::new(theta, varphi, gamma);
        let Some(e) = build_one_qubit_schedule(&spec, EnvelopeKind::Sin2, PEAK)
            .ok()
            .and_then(|s| evolve_numeric(&s, &eigenbasis(&spec).d, 10_000).ok())
        else {
            return vec![fail_check("one-qubit path evolution")];
        };
        transport = transport.max(e.path.max_abs_integrand() / PEAK);
        let Ok(omega) = solid_angle(&e.path) else {
            return vec![fail_check("solid angle of a closed path")];
        };
        solid = solid.max(phase_distance(gamma, omega / 2.0));
        let total = e.path.samples.last().map_or(0.0, |s| s.total_phase);
        cross = cross.max(phase_distance(total - dynamical_phase(&e.path), omega / 2.0));
        let c = cyclic_chain(&spec, &e);
        chain_err = chain_err
            .max(1.0 - c.ground_overlap)
            .max(1.0 - c.rydberg_overlap)
            .max((c.final_overlap - Complex64::from_polar(1.0, gamma)).norm());
        chain_phase = chain_phase.max(phase_distance(c.relative_phase(), gamma + varphi));
    }
    vec![
        Check::at_most("parallel transport: |<d|H|d>| / peak along the path", transport, 1e-10),
        Check::at_most("geometric phase equals half the enclosed solid angle", solid, 1e-3),
        Check::at_most("total minus dynamical phase equals half the solid angle", cross, 1e-3),
        Check::at_most("cyclic chain d -> g -> r -> e^{i gamma} d", chain_err, 1e-6),
        Check::at_most("cyclic chain: phase of the r checkpoint is gamma + varphi", chain_phase, 1e-4),
    ]
}

fn closed_system_decay() -> Check {
    let spec = OneQubitGateSpec::new(PI / 2.0, 0.0, PI / 2.0);
    let value = DecayModel::new(0.0, DecayTarget::Ground)
        .ok()
        .zip(build_one_qubit_schedule(&spec, EnvelopeKind::Square, PEAK).ok())
        .and_then(|(model, s)| {
            let rho0 = CMatrix::outer(&GROUND, &GROUND);
            let (rho, _) = lindblad_one_qubit(&s, &rho0, &model, &IntegratorConfig::default()).ok()?;
            let u = target_gate(&spec);
            Some(rho.max_abs_diff(&(&(&u * &rho0) * &u.adjoint())))
        });
    Check::at_most("zero decay rate reproduces unitary evolution", value.unwrap_or(f64::INFINITY), 1e-8)
}
