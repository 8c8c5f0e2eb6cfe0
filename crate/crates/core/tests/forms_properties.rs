use kepler_euler::ad::Dual;
use kepler_euler::forms::*;
use kepler_euler::{Chart, MetricField};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

/// A polynomial in three variables as `(coefficient, exponents)` terms.
type Poly = Vec<(f64, [u32; 3])>;

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-1.0..1.0f64, [0..3u32, 0..3u32, 0..3u32]), 1..5)
}

fn eval_poly(p: &Poly, x: &[Dual]) -> Dual {
    p.iter().map(|(c, e)| (0..3).fold(Dual::constant(*c), |acc, i| acc * x[i].powi(e[i] as i32))).sum()
}

fn eval_poly_f64(p: &Poly, x: &[f64]) -> f64 {
    p.iter().map(|(c, e)| c * (0..3).map(|i| x[i].powi(e[i] as i32)).product::<f64>()).sum()
}

/// Exact partial derivative of a polynomial.
fn d_poly(p: &Poly, i: usize) -> Poly {
    p.iter()
        .filter(|(_, e)| e[i] > 0)
        .map(|(c, e)| {
            let mut e2 = *e;
            e2[i] -= 1;
            (c * e[i] as f64, e2)
        })
        .collect()
}

fn e3() -> Chart {
    Chart::Euclidean(3)
}

fn form(degree: usize, coeffs: Vec<Poly>) -> KForm {
    KForm::from_fn(e3(), degree, move |x| coeffs.iter().map(|p| eval_poly(p, x)).collect())
}

fn field(comps: Vec<Poly>) -> VectorField {
    VectorField::from_fn(e3(), move |x| comps.iter().map(|p| eval_poly(p, x)).collect())
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 3)
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes(f in poly(), a in prop::collection::vec(poly(), 3), p in point()) {
        let f = KForm::from_fn(e3(), 0, move |x| vec![eval_poly(&f, x)]);
        let ddf = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
        prop_assert!(ddf.eval(&p).iter().all(|v| v.abs() < 1e-9));
        let dda = exterior_derivative(&exterior_derivative(&form(1, a)).unwrap()).unwrap();
        prop_assert!(dda.eval(&p)[0].abs() < 1e-9);
    }

    #[test]
    fn interior_product_squares_to_zero(
        b in prop::collection::vec(poly(), 3),
        x in prop::collection::vec(poly(), 3),
        p in point(),
    ) {
        let x = field(x);
        let b = form(2, b);
        let iib = interior_product(&x, &interior_product(&x, &b).unwrap()).unwrap();
        prop_assert!(iib.eval(&p)[0].abs() < 1e-9);
        let vol = KForm::coordinate_volume(e3());
        let iiv = interior_product(&x, &interior_product(&x, &vol).unwrap()).unwrap();
        prop_assert!(iiv.eval(&p).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn graded_leibniz_rule(
        a in prop::collection::vec(poly(), 3),
        b in prop::collection::vec(poly(), 3),
        p in point(),
    ) {
        let (a, b) = (form(1, a), form(1, b));
        let lhs = exterior_derivative(&wedge(&a, &b).unwrap()).unwrap();
        let da_b = wedge(&exterior_derivative(&a).unwrap(), &b).unwrap();
        let a_db = wedge(&a, &exterior_derivative(&b).unwrap()).unwrap();
        let rhs = da_b.sub(&a_db).unwrap();
        prop_assert!(diff(&lhs.eval(&p), &rhs.eval(&p)) < 1e-9);
    }

    #[test]
    fn interior_product_is_an_antiderivation(
        a in prop::collection::vec(poly(), 3),
        b in prop::collection::vec(poly(), 3),
        x in prop::collection::vec(poly(), 3),
        p in point(),
    ) {
        let (a, b, x) = (form(1, a), form(1, b), field(x));
        let lhs = interior_product(&x, &wedge(&a, &b).unwrap()).unwrap();
        let t1 = wedge(&interior_product(&x, &a).unwrap(), &b).unwrap();
        let t2 = wedge(&a, &interior_product(&x, &b).unwrap()).unwrap();
        prop_assert!(diff(&lhs.eval(&p), &t1.sub(&t2).unwrap().eval(&p)) < 1e-9);
    }

    #[test]
    fn wedge_is_graded_commutative_and_associative(
        a in prop::collection::vec(poly(), 3),
        b in prop::collection::vec(poly(), 3),
        c in prop::collection::vec(poly(), 3),
        p in point(),
    ) {
        let (a, b, c) = (form(1, a), form(1, b), form(1, c));
        let ab = wedge(&a, &b).unwrap().eval(&p);
        let ba = wedge(&b, &a).unwrap().eval(&p);
        prop_assert!(ab.iter().zip(&ba).all(|(x, y)| (x + y).abs() < 1e-12));
        let beta = wedge(&b, &c).unwrap();
        let a_beta = wedge(&a, &beta).unwrap().eval(&p);
        let beta_a = wedge(&beta, &a).unwrap().eval(&p);
        prop_assert!(diff(&a_beta, &beta_a) < 1e-12);
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap().eval(&p);
        prop_assert!(diff(&left, &a_beta) < 1e-12);
        prop_assert!(wedge(&a, &a).unwrap().eval(&p).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn musical_isomorphisms_invert(
        m in prop::collection::vec(poly(), 9),
        x in prop::collection::vec(poly(), 3),
        p in point(),
    ) {
        // g = I + MᵀM is positive definite for any M
        let g = MetricField::from_fn(e3(), move |q| {
            let mv: Vec<Dual> = m.iter().map(|pp| eval_poly(pp, q)).collect();
            (0..9)
                .map(|k| {
                    let (i, j) = (k / 3, k % 3);
                    let s: Dual = (0..3).map(|r| &mv[r * 3 + i] * &mv[r * 3 + j]).sum();
                    if i == j { s + 1.0 } else { s }
                })
                .collect()
        });
        let x = field(x);
        let back = sharp(&flat(&x, &g).unwrap(), &g).unwrap();
        let xv = x.eval(&p);
        let scale = xv.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff(&back.eval(&p), &xv) < 1e-12 * scale);
    }

    #[test]
    fn curl_is_the_unique_solution(
        x in prop::collection::vec(poly(), 3),
        p in point(),
        k in 0usize..3,
        eps in prop_oneof![-1.0..-0.01f64, 0.01..1.0f64],
    ) {
        let g = MetricField::euclidean(e3());
        let mu = VolumeForm::coordinate(e3());
        let x = field(x);
        let dx = exterior_derivative(&flat(&x, &g).unwrap()).unwrap().eval(&p);
        let mut cv = curl(&x, &g, &mu).unwrap().eval(&p);
        let defect = |v: &[f64]| {
            // ι_v (dx1∧dx2∧dx3) has coefficients (v3, −v2, v1) on (12, 13, 23)
            diff(&[v[2], -v[1], v[0]], &dx)
        };
        prop_assert!(defect(&cv) < 1e-9);
        cv[k] += eps;
        prop_assert!(defect(&cv) > 1e-6);
    }

    #[test]
    fn flat_curl_matches_classical_curl(x in prop::collection::vec(poly(), 3), p in point()) {
        let g = MetricField::euclidean(e3());
        let mu = VolumeForm::coordinate(e3());
        let classical = [
            eval_poly_f64(&d_poly(&x[2], 1), &p) - eval_poly_f64(&d_poly(&x[1], 2), &p),
            eval_poly_f64(&d_poly(&x[0], 2), &p) - eval_poly_f64(&d_poly(&x[2], 0), &p),
            eval_poly_f64(&d_poly(&x[1], 0), &p) - eval_poly_f64(&d_poly(&x[0], 1), &p),
        ];
        let c = curl(&field(x), &g, &mu).unwrap().eval(&p);
        prop_assert!(diff(&c, &classical) < 1e-12);
    }

    #[test]
    fn flat_divergence_matches_classical(x in prop::collection::vec(poly(), 3), p in point()) {
        let classical: f64 = (0..3).map(|i| eval_poly_f64(&d_poly(&x[i], i), &p)).sum();
        let d = divergence(&field(x), &VolumeForm::coordinate(e3())).unwrap().eval(&p);
        prop_assert!((d - classical).abs() < 1e-12);
    }
}

#[test]
fn classical_curl_on_twenty_fields() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let g = MetricField::euclidean(e3());
    let mu = VolumeForm::coordinate(e3());
    for _ in 0..20 {
        let x = prop::collection::vec(poly(), 3).new_tree(&mut runner).unwrap().current();
        let p = point().new_tree(&mut runner).unwrap().current();
        let classical = [
            eval_poly_f64(&d_poly(&x[2], 1), &p) - eval_poly_f64(&d_poly(&x[1], 2), &p),
            eval_poly_f64(&d_poly(&x[0], 2), &p) - eval_poly_f64(&d_poly(&x[2], 0), &p),
            eval_poly_f64(&d_poly(&x[1], 0), &p) - eval_poly_f64(&d_poly(&x[0], 1), &p),
        ];
        assert!(diff(&curl(&field(x), &g, &mu).unwrap().eval(&p), &classical) < 1e-12);
    }
}

#[test]
fn rotation_field_has_constant_curl() {
    let x = VectorField::from_fn(e3(), |p| vec![-p[1].clone(), p[0].clone(), Dual::zero()]);
    let c = curl(&x, &MetricField::euclidean(e3()), &VolumeForm::coordinate(e3())).unwrap();
    assert_eq!(c.eval(&[0.3, -2.0, 1.0]), vec![0.0, 0.0, 2.0]);
}

#[test]
fn manufactured_nonconstant_factor() {
    // Y = (sin x3, cos x3, 0) against the volume e^{x1} dx has curl e^{-x1} Y
    let y = VectorField::from_fn(e3(), |p| vec![p[2].sin(), p[2].cos(), Dual::zero()]);
    let g = MetricField::euclidean(e3());
    let f = ScalarField::from_fn(e3(), |p| p[0].exp());
    let mu = VolumeForm::coordinate(e3()).scaled_by(&f);
    let c = curl(&y, &g, &mu).unwrap();
    for p in [[0.3, -0.2, 1.0], [-1.0, 0.5, 2.5]] {
        let want: Vec<f64> = y.eval(&p).iter().map(|v| v * (-p[0]).exp()).collect();
        assert!(diff(&c.eval(&p), &want) < 1e-14);
    }
    let fx = ScalarField::from_fn(e3(), |p| (-&p[0]).exp());
    let probes = vec![vec![0.3, -0.2, 1.0], vec![-1.0, 0.5, 2.5], vec![0.9, 0.9, -0.4]];
    let rep = rescaled_volume_check(&y, &g, &mu, &fx, &probes, 1e-8).unwrap();
    assert!(rep.pass, "{rep:?}");
}
