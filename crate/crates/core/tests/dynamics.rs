use kepler_euler::chart::half_plane_metric;
use kepler_euler::dynamics::*;
use kepler_euler::hamiltonian::{
    bundle_to_phase, hamiltonian_vector_field, kepler_hamiltonian, phase_to_bundle, regularized_k, reparametrize_check, PhasePoint,
};
use kepler_euler::lift::{involuted_metric, reeb_field, reeb_field_for};
use kepler_euler::sampling::bundle_points;
use kepler_euler::{Chart, Error, ScalarField, VectorField};
use std::f64::consts::TAU;

fn kepler_field() -> VectorField {
    hamiltonian_vector_field(&kepler_hamiltonian())
}

#[test]
fn circular_orbit_keeps_unit_radius() {
    let t = integrate(&kepler_field(), &[1.0, 0.0, 0.0, 1.0], 20.0, &IntegratorConfig::default()).unwrap();
    let worst = t.samples.iter().map(|s| (s.state[0].hypot(s.state[1]) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
    assert!(energy_drift_report(&t, &kepler_hamiltonian()).unwrap() < 1e-8);
    assert!((t.t_end() - 20.0).abs() < 1e-12);
}

#[test]
fn radial_infall_collides_in_finite_time() {
    match integrate(&kepler_field(), &[1.0, 0.0, 0.0, 0.0], 5.0, &IntegratorConfig::default()) {
        Err(Error::Collision { time, partial }) => {
            // free fall from rest at r = 1 reaches r = 0 at t = π/(2√2)
            let exact = std::f64::consts::PI / (2.0 * 2f64.sqrt());
            assert!(time > 0.0 && time < exact, "{time}");
            assert!(exact - time < 1e-4);
            assert!(partial.last().state[0] < 1.01e-3);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn rk4_is_fourth_order() {
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&h| {
            let cfg = IntegratorConfig::default().with_method(Method::ExplicitRK4).with_max_step(h);
            let t = integrate(&kepler_field(), &[1.0, 0.0, 0.0, 1.0], TAU, &cfg).unwrap();
            let z = &t.last().state;
            (z[0] - 1.0).hypot(z[1]).hypot(z[2]).hypot(z[3] - 1.0)
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!((3.7..=4.3).contains(&order), "{order} from {errs:?}");
}

#[test]
fn implicit_midpoint_conserves_energy_over_long_runs() {
    let cfg = IntegratorConfig::default().with_method(Method::ImplicitMidpoint).with_max_step(0.01);
    let t = integrate(&kepler_field(), &[1.0, 0.0, 0.0, 1.2], 60.0, &cfg).unwrap();
    assert!(energy_drift_report(&t, &kepler_hamiltonian()).unwrap() < 1e-4);
}

fn period_of(c: f64, p: &[f64]) -> f64 {
    let cfg = IntegratorConfig::default().with_max_step(0.02);
    let t_max = 1.3 * TAU / (-2.0 * c).sqrt();
    let traj = integrate(&reeb_field(c), p, t_max, &cfg).unwrap();
    match detect_periodicity(&traj, 1e-6).unwrap().classification {
        OrbitClass::Periodic { period } => period,
        other => panic!("c={c} {p:?}: {other:?}"),
    }
}

#[test]
fn hopf_orbits_share_a_period_that_scales_with_energy() {
    let pts = bundle_points(-0.5, 10, 101);
    let periods: Vec<f64> = pts.iter().map(|p| period_of(-0.5, p)).collect();
    let lo = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = periods.iter().copied().fold(0.0, f64::max);
    assert!(hi - lo < 1e-6, "{periods:?}");
    let other = period_of(-2.0, &bundle_points(-2.0, 1, 102)[0]);
    let ratio = other / periods[0];
    // period ∝ 1/√(−2c): ratio 1/2 between c = −2 and c = −1/2
    assert!((ratio - 0.5).abs() < 1e-4, "{ratio}");
}

#[test]
fn flat_regime_is_a_shear_flow() {
    let x = reeb_field_for(&involuted_metric());
    let traj = integrate(&x, &[0.4, -1.0, 0.7], 10.0, &IntegratorConfig::default()).unwrap();
    for s in &traj.samples {
        assert!(s.deriv[2].abs() < 1e-10);
        assert!((s.deriv[0] - 0.7f64.cos()).abs() < 1e-10 && (s.deriv[1] - 0.7f64.sin()).abs() < 1e-10);
    }
    let rep = detect_periodicity(&traj, 1e-6).unwrap();
    assert!(matches!(rep.classification, OrbitClass::Escape { .. }), "{rep:?}");
}

#[test]
fn half_plane_streamlines_run_to_the_boundary_or_infinity() {
    let x = reeb_field_for(&half_plane_metric(0.5));
    for a0 in [0.3, 1.4, 2.5, 4.0, 5.5] {
        let traj = integrate(&x, &[0.0, 1.0, a0], 12.0, &IntegratorConfig::default()).unwrap();
        let rep = detect_periodicity(&traj, 1e-6).unwrap();
        match rep.classification {
            OrbitClass::Escape { direction } => assert!(direction == "y -> 0" || direction == "y -> +inf"),
            other => panic!("{a0}: {other:?}"),
        }
    }
}

#[test]
fn regularized_flow_stays_on_the_k_level() {
    for &c in &[-0.5, 0.0, 0.5] {
        let p0 = bundle_points(c, 1, 55)[0].clone();
        let traj = integrate(&reeb_field(c), &p0, 5.0, &IntegratorConfig::default()).unwrap();
        let drift = energy_drift_report(&traj, &regularized_k(c)).unwrap();
        assert!(drift < 1e-8, "c={c}: {drift:e}");
        let k = regularized_k(c);
        for s in traj.samples.iter().step_by(17) {
            let z = bundle_to_phase(c, &s.state).to_state();
            assert!((k.eval(&z).unwrap() - 0.5).abs() < 1e-10);
        }
    }
}

#[test]
fn chart_switches_preserve_the_physical_state() {
    let z0 = PhasePoint::new([1.0, 0.0], [0.0, 0.0]);
    let run = integrate_regularized(-1.0, &z0, 2.0, 1e3, &IntegratorConfig::default()).unwrap();
    assert!(run.switches() >= 1);
    assert!(run.transition_residual < 1e-10);
    assert!(run.min_radius() < 1e-3);
    assert!((run.clock_end - 2.0).abs() < 1e-8);
}

#[test]
fn comparisons_pass_on_regular_orbits() {
    let cfg = IntegratorConfig::default();
    let rep = compare_regularized(-0.5, &PhasePoint::new([1.0, 0.0], [0.0, 1.0]), TAU, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
    let rep = compare_regularized(0.5, &PhasePoint::new([1.0, 0.0], [0.0, 3f64.sqrt()]), 5.0, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn near_collision_comparison_is_windowed() {
    let cfg = IntegratorConfig::default().with_collision_radius(0.01);
    let c = 0.005 - 1.0;
    let rep = compare_regularized(c, &PhasePoint::new([1.0, 0.0], [0.0, 0.1]), 3.0, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.details["windowed"], 1.0);
}

#[test]
fn comparison_rejects_energy_mismatch() {
    let r = compare_regularized(-0.3, &PhasePoint::new([1.0, 0.0], [0.0, 1.0]), 1.0, &IntegratorConfig::default());
    assert!(matches!(r, Err(Error::EnergyMismatch { .. })));
}

#[test]
fn reparametrization_keeps_the_trace() {
    let cfg = IntegratorConfig::default();
    let traj = integrate(&kepler_field(), &[1.0, 0.0, 0.0, 1.0], TAU, &cfg).unwrap();
    let h = kepler_hamiltonian();
    let one = ScalarField::constant(Chart::PhaseChart4D, 1.0);
    let rep = reparametrize_check(&h, &one, -0.5, 1.0, &traj, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.details["hausdorff.statistic"] < 1e-7);
    let radius = ScalarField::from_fn(Chart::PhaseChart4D, |z| (&z[0] * &z[0] + &z[1] * &z[1]).sqrt());
    let rep = reparametrize_check(&h, &radius, -0.5, 1.0, &traj, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn reparametrization_rejects_off_level_curves() {
    let cfg = IntegratorConfig::default();
    let traj = integrate(&kepler_field(), &[1.0, 0.0, 0.0, 1.0], 1.0, &cfg).unwrap();
    let one = ScalarField::constant(Chart::PhaseChart4D, 1.0);
    let r = reparametrize_check(&kepler_hamiltonian(), &one, -0.4, 1.0, &traj, &cfg);
    assert!(matches!(r, Err(Error::EnergyDriftExceeded(_))));
}

#[test]
fn constant_trajectory_has_no_drift() {
    let z = VectorField::zero(Chart::PhaseChart4D);
    let t = integrate(&z, &[1.0, 0.0, 0.3, 0.2], 1.0, &IntegratorConfig::default()).unwrap();
    assert_eq!(energy_drift_report(&t, &kepler_hamiltonian()).unwrap(), 0.0);
}

#[test]
fn phase_bundle_round_trip_on_level() {
    let c = -0.5;
    let pt = PhasePoint::new([1.0, 0.0], [0.0, 1.0]);
    let b = phase_to_bundle(c, &pt).unwrap();
    let back = bundle_to_phase(c, &b);
    assert!((back.q[0] - pt.q[0]).abs() < 1e-14 && (back.q[1] - pt.q[1]).abs() < 1e-14);
}
