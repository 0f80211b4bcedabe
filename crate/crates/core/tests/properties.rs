use std::f64::consts::PI;

use geomgate_core::analysis::gate_distance;
use geomgate_core::evolve::{propagate, IntegratorConfig, Method};
use geomgate_core::linalg::{expm, hermitian_eigenvalues, norm, CMatrix};
use geomgate_core::onequbit::{composed_gate, eigenbasis, target_gate, OneQubitGateSpec};
use geomgate_core::pulses::{Envelope, EnvelopeKind};
use geomgate_core::twoqubit::{
    analytic_evolution_at_area, blockade_gate, blockade_scan, bright_dark_basis, effective_hamiltonian,
    TwoQubitGateSpec, RR,
};
use geomgate_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian(d: usize, seed: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d);
    let mut k = 0;
    for r in 0..d {
        m[(r, r)] = c(seed[k % seed.len()], 0.0);
        k += 1;
        for col in r + 1..d {
            let z = c(seed[k % seed.len()], seed[(k + 1) % seed.len()]);
            k += 2;
            m[(r, col)] = z;
            m[(col, r)] = z.conj();
        }
    }
    m
}

fn kinds() -> impl Strategy<Value = EnvelopeKind> {
    prop_oneof![
        Just(EnvelopeKind::Square),
        Just(EnvelopeKind::Sin2),
        (2.0f64..6.0).prop_map(|w| EnvelopeKind::Gaussian { width_ratio: w }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kron_is_associative_and_bilinear(a in prop::collection::vec(-1.0f64..1.0, 16), s in -2.0f64..2.0) {
        let x = hermitian(2, &a[..4]);
        let y = hermitian(2, &a[4..8]);
        let z = hermitian(2, &a[8..12]);
        let w = hermitian(2, &a[12..]);
        prop_assert!(x.kron(&y).kron(&z).max_abs_diff(&x.kron(&y.kron(&z))) < 1e-14);
        let lhs = (&x + &w.scale(c(s, 0.0))).kron(&y);
        let rhs = &x.kron(&y) + &w.kron(&y).scale(c(s, 0.0));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        prop_assert!((&x * &z).kron(&(&y * &w)).max_abs_diff(&(&x.kron(&y) * &z.kron(&w))) < 1e-13);
    }

    #[test]
    fn expm_group_and_unitarity(a in prop::collection::vec(-3.0f64..3.0, 16), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        for d in [2usize, 4] {
            let h = hermitian(d, &a);
            let us = expm(&h, c(0.0, -s)).unwrap();
            let ut = expm(&h, c(0.0, -t)).unwrap();
            let ust = expm(&h, c(0.0, -(s + t))).unwrap();
            prop_assert!((&us * &ut).max_abs_diff(&ust) < 1e-11);
            prop_assert!(us.unitarity_defect() < 1e-12);
            // det exp(-isH) = exp(-is tr H)
            let want = Complex64::from_polar(1.0, -s * h.trace().re);
            prop_assert!((us.determinant() - want).norm() < 1e-11);
        }
    }

    #[test]
    fn eigenvalues_match_trace_and_norm(a in prop::collection::vec(-3.0f64..3.0, 16)) {
        let h = hermitian(4, &a);
        let ev = hermitian_eigenvalues(&h).unwrap();
        prop_assert_eq!(ev.len(), 4);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((ev.iter().sum::<f64>() - h.trace().re).abs() < 1e-11);
        let sq: f64 = ev.iter().map(|e| e * e).sum();
        prop_assert!((sq - h.frobenius_norm().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn partial_area_is_monotone(kind in kinds(), peak in 0.5f64..20.0, duration in 0.05f64..2.0) {
        let e = Envelope::new(kind, peak, duration).unwrap();
        let mut last = 0.0;
        for k in 0..=50 {
            let t = if k == 50 { duration } else { duration * k as f64 / 50.0 };
            let a = e.partial_area(t).unwrap();
            prop_assert!(a >= last - 1e-15);
            last = a;
        }
        prop_assert!((last - e.area()).abs() < 1e-12 * e.area().max(1.0));
    }

    #[test]
    fn composed_gate_is_target(theta in 0.0f64..=PI, varphi in -PI..PI, gamma in -PI..PI) {
        let spec = OneQubitGateSpec::new(theta, varphi, gamma);
        prop_assert!(composed_gate(&spec).distance(&target_gate(&spec)) < 1e-12);
        let e = eigenbasis(&spec);
        let u = target_gate(&spec);
        let ud = u.apply(&e.d);
        let want = Complex64::from_polar(1.0, gamma);
        prop_assert!((ud[0] - want * e.d[0]).norm() < 1e-12 && (ud[1] - want * e.d[1]).norm() < 1e-12);
    }

    #[test]
    fn two_qubit_evolution_structure(phi in -PI..PI, alpha in 0.0f64..PI) {
        let u = analytic_evolution_at_area(phi, alpha);
        prop_assert!(u.unitarity_defect() < 1e-14);
        let b = bright_dark_basis(phi);
        let d = u.apply(&b.dark);
        prop_assert!(d.iter().zip(&b.dark).all(|(x, y)| (x - y).norm() < 1e-14));
        for k in 0..4 {
            let want = if k == RR { 1.0 } else { 0.0 };
            prop_assert!((u[(RR, k)] - want).norm() < 1e-15 && (u[(k, RR)] - want).norm() < 1e-15);
        }
        prop_assert!(analytic_evolution_at_area(phi, PI).max_abs_diff(&blockade_gate(phi)) < 1e-14);
    }

    #[test]
    fn effective_dynamics_depend_only_on_area(phi in -PI..PI, kind in kinds(), peak in 2.0f64..20.0) {
        let spec = TwoQubitGateSpec::with_pi_area(phi, 100.0, kind, peak).unwrap();
        let h = |t: f64| effective_hamiltonian(&spec, t).unwrap();
        let cfg = IntegratorConfig::default().with_steps(3000);
        let u = propagate(h, 0.0, spec.duration(), &cfg).unwrap();
        prop_assert!(u.distance(&blockade_gate(phi)) < 1e-6);
        let dark = bright_dark_basis(phi).dark;
        prop_assert!(norm(&effective_hamiltonian(&spec, spec.duration() / 3.0).unwrap().apply(&dark)) < 1e-12);
    }

    #[test]
    fn propagators_compose(k in 400usize..3600, method in prop_oneof![Just(Method::ExpMidpoint), Just(Method::Rk4)]) {
        // sub-runs share the grid of the whole run
        let h = |t: f64| &CMatrix::sigma_x().scale(c(3.0 * t.cos(), 0.0)) + &CMatrix::sigma_z().scale(c(1.0 + t, 0.0));
        let n = 4000;
        let split = k as f64 / n as f64;
        let cfg = IntegratorConfig::new(method, n).unwrap();
        let whole = propagate(h, 0.0, 1.0, &cfg).unwrap();
        let first = propagate(h, 0.0, split, &cfg.with_steps(k)).unwrap();
        let second = propagate(h, split, 1.0, &cfg.with_steps(n - k)).unwrap();
        prop_assert!((&second * &first).distance(&whole) < 1e-9);
        prop_assert!(whole.unitarity_defect() < 1e-9);
    }
}

#[test]
fn gate_distance_sees_global_phase_only_through_frobenius_alignment() {
    let u = blockade_gate(0.4);
    let v = u.scale(Complex64::from_polar(1.0, 2.5));
    let d = gate_distance(&u, &v).unwrap();
    assert!(d.frobenius < 1e-14 && d.trace_infidelity < 1e-15);
}

#[test]
fn blockade_infidelity_decreases_on_the_commensurate_grid() {
    let spec = TwoQubitGateSpec::with_pi_area(PI / 2.0, 200.0 * PI, EnvelopeKind::Square, 5.0 * PI).unwrap();
    let ratios: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
    let r = blockade_scan(&spec, &ratios, &IntegratorConfig::default()).unwrap();
    let inf = r.metric("infidelity_trace").unwrap();
    assert!(inf.windows(2).all(|w| w[1] < w[0]), "{inf:?}");
    let leak = r.metric("leakage").unwrap();
    assert!(leak.windows(2).all(|w| w[1] < w[0]), "{leak:?}");
}
