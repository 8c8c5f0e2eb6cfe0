use kepler_euler::chart::conformal_metric;
use kepler_euler::hamiltonian::*;
use kepler_euler::lift::reeb_field;
use kepler_euler::sampling::{annulus_points, bundle_points};
use kepler_euler::{Chart, Error, MetricField, ScalarField};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

fn plane() -> impl Strategy<Value = [f64; 2]> {
    [-3.0..3.0f64, -3.0..3.0f64]
}

fn omega(v: &[f64; 4], w: &[f64; 4]) -> f64 {
    // dp∧dq on (q1, q2, p1, p2)
    v[2] * w[0] - v[0] * w[2] + v[3] * w[1] - v[1] * w[3]
}

fn switch_vec(v: &[f64; 4]) -> [f64; 4] {
    let s = symplectic_switch(&PhasePoint::new([v[0], v[1]], [v[2], v[3]]));
    [s.q[0], s.q[1], s.p[0], s.p[1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn switch_has_order_four(q in plane(), p in plane()) {
        let pt = PhasePoint::new(q, p);
        let mut s = pt;
        for _ in 0..4 {
            s = symplectic_switch(&s);
        }
        prop_assert_eq!(s, pt);
        prop_assert_eq!(symplectic_switch(&symplectic_switch(&pt)), PhasePoint::new([-q[0], -q[1]], [-p[0], -p[1]]));
    }

    #[test]
    fn regularized_k_is_half_the_dual_norm(x in plane(), y in plane(), c in -2.0..1.0f64) {
        prop_assume!(Chart::StereoPlane(c).contains(&x));
        // the switch sends the bundle covector (x, y) to (q, p) = (y, −x)
        let s = symplectic_switch(&PhasePoint::new(x, y));
        let k = regularized_k(c).eval_point(&s).unwrap();
        let gm = conformal_metric(c).eval(&x);
        let lam = 2.0 / (x[0] * x[0] + x[1] * x[1] - 2.0 * c);
        prop_assert!((gm[0] - lam * lam).abs() < 1e-9 * gm[0]);
        let dual = 0.5 * (y[0] * y[0] + y[1] * y[1]) / gm[0];
        prop_assert!((k - dual).abs() < 1e-12 * dual.max(1.0), "{} vs {}", k, dual);
    }

    #[test]
    fn field_is_linear_in_the_hamiltonian(
        q in [0.3..2.0f64, 0.3..2.0f64],
        p in plane(),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        c in -1.0..1.0f64,
    ) {
        let (h1, h2) = (kepler_hamiltonian(), regularized_k(c));
        let (f1, f2) = (h1.clone(), h2.clone());
        let mix = Hamiltonian::new(HamiltonianLabel::Kepler, move |z| f1.eval_dual(z) * a + f2.eval_dual(z) * b);
        let z = [q[0], q[1], p[0], p[1]];
        let lhs = hamiltonian_vector_field(&mix).eval(&z);
        let (v1, v2) = (hamiltonian_vector_field(&h1).eval(&z), hamiltonian_vector_field(&h2).eval(&z));
        for i in 0..4 {
            let want = a * v1[i] + b * v2[i];
            prop_assert!((lhs[i] - want).abs() < 1e-10 * want.abs().max(1.0));
        }
        let shifted = Hamiltonian::new(HamiltonianLabel::Kepler, move |w| h1.eval_dual(w) + 3.5);
        prop_assert_eq!(hamiltonian_vector_field(&shifted).eval(&z), v1);
    }

    #[test]
    fn liouville_form_is_one_on_the_reeb_level(
        i in 0usize..40,
        c in prop_oneof![Just(-2.0), Just(-0.5), Just(0.0), Just(0.3), Just(1.0)],
    ) {
        let b = bundle_points(c, 40, 17)[i].clone();
        let z = bundle_to_phase(c, &b).to_state();
        let k = regularized_k(c);
        prop_assert!((k.eval(&z).unwrap() - 0.5).abs() < 1e-10);
        // α = y·dx = −q·dp in switched coordinates
        let x = hamiltonian_vector_field(&k).eval(&z);
        let a = -(z[0] * x[2] + z[1] * x[3]);
        prop_assert!((a - 1.0).abs() < 1e-10, "{}", a);
    }
}

#[test]
fn switch_preserves_the_symplectic_form() {
    let e = |i: usize| {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        v
    };
    for i in 0..4 {
        for j in 0..4 {
            let (v, w) = (e(i), e(j));
            assert!((omega(&switch_vec(&v), &switch_vec(&w)) - omega(&v, &w)).abs() < 1e-12);
        }
    }
    let s = symplectic_switch(&PhasePoint::new([1.0, 0.0], [0.0, 1.0]));
    assert_eq!(s, PhasePoint::new([0.0, 1.0], [-1.0, 0.0]));
}

#[test]
fn kepler_values_and_circular_field() {
    let h = kepler_hamiltonian();
    assert_eq!(h.eval(&[1.0, 0.0, 0.0, 1.0]).unwrap(), -0.5);
    assert_eq!(h.eval(&[2.0, 0.0, 0.0, 0.0]).unwrap(), -0.5);
    assert!(h.eval(&[1.0, 0.0, 0.0, SQRT_2]).unwrap().abs() < 1e-15);
    assert!(matches!(h.eval(&[1e-9, 0.0, 1.0, 0.0]), Err(Error::CollisionSingularity(_))));
    let v = hamiltonian_vector_field(&h).eval(&[1.0, 0.0, 0.0, 1.0]);
    // q̇ = p, ṗ = −q/|q|³
    assert_eq!(v, vec![0.0, 1.0, -1.0, 0.0]);
    let zero = Hamiltonian::new(HamiltonianLabel::Kepler, |_| kepler_euler::ad::Dual::constant(2.0));
    assert_eq!(hamiltonian_vector_field(&zero).eval(&[0.3, 0.1, 2.0, -1.0]), vec![0.0; 4]);
}

#[test]
fn regularized_k_examples() {
    assert!((regularized_k(-0.5).eval(&[1.0, 0.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(regularized_k(0.0).eval(&[0.0, 0.0, 3.0, -7.0]).unwrap(), 0.0);
}

#[test]
fn bundle_field_matches_the_reeb_field() {
    let v = regularized_bundle_field(0.0).eval(&[SQRT_2, 0.0, FRAC_PI_2]);
    assert!((v[0]).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14 && (v[2] - SQRT_2).abs() < 1e-14, "{v:?}");
    for &c in &[-2.0, -0.5, 0.0, 0.3, 1.0] {
        for p in bundle_points(c, 200, 23) {
            let (a, b) = (regularized_bundle_field(c).eval(&p), reeb_field(c).eval(&p));
            let e = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(e < 1e-9 * b.iter().fold(1.0f64, |m, v| m.max(v.abs())), "c={c} {p:?}: {e:e}");
        }
    }
}

#[test]
fn squared_shift_energy_is_one_eighth() {
    let sq = squared_shift(&kepler_hamiltonian(), 1.0);
    assert!((sq.eval(&[1.0, 0.0, 0.0, 1.0]).unwrap() - 0.125).abs() < 1e-15);
}

fn kepler_potential() -> ScalarField {
    ScalarField::from_fn(Chart::Euclidean(2), |q| -(&q[0] * &q[0] + &q[1] * &q[1]).sqrt().recip())
}

#[test]
fn mechanical_contact_on_the_kepler_annulus() {
    let g = MetricField::euclidean(Chart::Euclidean(2));
    let mut base = annulus_points(0.5, 5.0, 1000, 31);
    base.push(vec![5.0, 0.0]);
    let rep = mechanical_contact_check(&kepler_potential(), &g, 0.3, &base).unwrap();
    assert!(rep.pass, "{rep:?}");
    // worst case sits on the outer circle: 0.3 + 1/5
    assert!((rep.min_value - 0.5).abs() < 1e-12, "{}", rep.min_value);
    assert!(rep.details["alpha_identity_residual"] < 1e-9);
    assert!(matches!(mechanical_contact_check(&kepler_potential(), &g, -2.5, &base), Err(Error::EnergyBelowPotential { .. })));
}

#[test]
fn free_particle_kinetic_energy_is_constant() {
    let g = MetricField::euclidean(Chart::Euclidean(2));
    let zero = ScalarField::constant(Chart::Euclidean(2), 0.0);
    let base = annulus_points(0.1, 3.0, 100, 4);
    let rep = mechanical_contact_check(&zero, &g, 0.5, &base).unwrap();
    assert!(rep.pass);
    assert_eq!((rep.min_value, rep.max_residual), (0.5, 0.5));
}

#[test]
fn phase_to_bundle_rejects_points_outside_the_chart() {
    let r = phase_to_bundle(0.5, &PhasePoint::new([1.0, 0.0], [0.0, 0.0]));
    assert!(matches!(r, Err(Error::OutOfDomain { .. })));
}
