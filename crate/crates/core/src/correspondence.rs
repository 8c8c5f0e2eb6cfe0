//! Both directions of the Reeb–Beltrami correspondence in dimension 3,
//! almost complex structures on `ker α`, and Haar averaging over compact
//! group actions.

use crate::ad::{constants, jacobian, Dual};
use crate::chart::{Chart, MetricField};
use crate::error::{Error, Result};
use crate::forms::{
    contact_check, contact_volume, curl, divergence, exterior_derivative, flat, interior_product, pairing, sweep, KForm, ScalarField,
    VectorField, VolumeForm,
};
use crate::lift::{lift_metric, liouville_form, reeb_field};
use crate::linalg;
use crate::report::VerificationReport;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

/// Default number of trapezoid nodes on the circle.
pub const CIRCLE_NODES: usize = 64;
/// Largest change allowed when the quadrature is doubled.
pub const DOUBLING_TOLERANCE: f64 = 1e-9;
/// Threshold on `|α∧dα|` used by [`beltrami_to_contact`].
pub const CONTACT_THRESHOLD: f64 = 1e-3;
/// `|det|` of `dα` on `ker α` below which `J` is not constructed.
pub const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupKind {
    Circle,
    FiniteCyclic(usize),
    Custom(String),
}

pub type ActFn = Arc<dyn Fn(f64, &[Dual]) -> Vec<Dual> + Send + Sync>;
pub type ComposeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A compact group acting on a chart, with normalized Haar quadrature.
#[derive(Clone)]
pub struct GroupAction {
    pub kind: GroupKind,
    pub chart: Chart,
    act: ActFn,
    compose: ComposeFn,
    pub quadrature: Vec<(f64, f64)>,
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupAction({:?} on {}, {} nodes)", self.kind, self.chart, self.quadrature.len())
    }
}

fn circle_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|j| (TAU * j as f64 / n as f64, 1.0 / n as f64)).collect()
}

impl GroupAction {
    /// Circle action `σ ∈ [0, 2π)` with the `n`-node trapezoid rule.
    pub fn circle<F>(chart: Chart, nodes: usize, act: F) -> Self
    where
        F: Fn(f64, &[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    {
        GroupAction {
            kind: GroupKind::Circle,
            chart,
            act: Arc::new(act),
            compose: Arc::new(|a, b| (a + b).rem_euclid(TAU)),
            quadrature: circle_nodes(nodes),
        }
    }

    /// Cyclic group of order `m`; the parameter is the element index.
    pub fn finite_cyclic<F>(chart: Chart, m: usize, act: F) -> Self
    where
        F: Fn(f64, &[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    {
        GroupAction {
            kind: GroupKind::FiniteCyclic(m),
            chart,
            act: Arc::new(act),
            compose: Arc::new(move |a, b| (a + b).rem_euclid(m as f64)),
            quadrature: (0..m).map(|k| (k as f64, 1.0 / m as f64)).collect(),
        }
    }

    pub fn custom(name: &str, chart: Chart, act: ActFn, compose: ComposeFn, quadrature: Vec<(f64, f64)>) -> Self {
        GroupAction { kind: GroupKind::Custom(name.to_string()), chart, act, compose, quadrature }
    }

    /// Same action with `n` circle nodes (other kinds are returned as is).
    pub fn with_nodes(&self, n: usize) -> Self {
        let mut out = self.clone();
        if self.kind == GroupKind::Circle {
            out.quadrature = circle_nodes(n);
        }
        out
    }

    pub fn act_dual(&self, sigma: f64, p: &[Dual]) -> Vec<Dual> {
        (self.act)(sigma, p)
    }

    pub fn act(&self, sigma: f64, p: &[f64]) -> Vec<f64> {
        linalg::to_f64(&self.act_dual(sigma, &constants(p)))
    }

    pub fn compose(&self, a: f64, b: f64) -> f64 {
        (self.compose)(a, b)
    }

    /// Jacobian `Dρ_σ(p)`, rows indexed by output component.
    pub fn tangent_act(&self, sigma: f64, p: &[f64]) -> Vec<Vec<f64>> {
        crate::ad::jacobian_f64(|q: &[Dual]| self.act_dual(sigma, q), p)
    }

    pub fn weight_sum(&self) -> f64 {
        self.quadrature.iter().map(|(_, w)| w).sum()
    }

    /// Largest `|ρ_a(ρ_b(p)) − ρ_{ab}(p)|` over the given pairs and points.
    pub fn composition_residual(&self, pairs: &[(f64, f64)], probes: &[Vec<f64>]) -> f64 {
        let angles = self.chart.angle_components();
        let mut worst = 0.0f64;
        for &(a, b) in pairs {
            for p in probes {
                let lhs = self.act(a, &self.act(b, p));
                let rhs = self.act(self.compose(a, b), p);
                for (i, (u, v)) in lhs.iter().zip(&rhs).enumerate() {
                    let d = if angles.contains(&i) {
                        let r = (u - v).rem_euclid(TAU);
                        r.min(TAU - r)
                    } else {
                        (u - v).abs()
                    };
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// `ρ_σ* g`.
    pub fn pullback_metric(&self, sigma: f64, g: &MetricField) -> MetricField {
        let (act, gf) = (self.act.clone(), g.function());
        let n = g.dim();
        MetricField::from_fn(g.chart.clone(), move |p| {
            let img = act(sigma, p);
            let d = jacobian(|q: &[Dual]| act(sigma, q), p);
            let flat_d: Vec<Dual> = d.into_iter().flatten().collect();
            linalg::congruence(&gf(&img), &flat_d, n)
        })
    }

    /// `ρ_σ* a` for a 1-form.
    pub fn pullback_one_form(&self, sigma: f64, a: &KForm) -> KForm {
        let (act, af) = (self.act.clone(), a.function());
        let n = a.dim();
        KForm::from_fn(a.chart.clone(), 1, move |p| {
            let img = act(sigma, p);
            let d = jacobian(|q: &[Dual]| act(sigma, q), p);
            let c = af(&img);
            (0..n).map(|j| (0..n).map(|i| &c[i] * &d[i][j]).sum()).collect()
        })
    }

    fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.quadrature.iter().map(|(s, _)| *s)
    }

    /// Largest Frobenius norm of `ρ_σ* g − g` over the quadrature nodes and
    /// probes.
    pub fn metric_invariance(&self, g: &MetricField, probes: &[Vec<f64>]) -> f64 {
        self.nodes()
            .map(|s| {
                let pb = self.pullback_metric(s, g);
                sweep(probes, |p| linalg::frobenius_diff(&pb.eval(p), &g.eval(p))).into_iter().fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference of `ρ_σ* a − a`.
    pub fn form_invariance(&self, a: &KForm, probes: &[Vec<f64>]) -> f64 {
        self.nodes()
            .map(|s| {
                let pb = self.pullback_one_form(s, a);
                sweep(probes, |p| linalg::max_abs_diff(&pb.eval(p), &a.eval(p))).into_iter().fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest Euclidean norm of `Dρ_σ X(p) − X(ρ_σ p)`.
    pub fn field_invariance(&self, x: &VectorField, probes: &[Vec<f64>]) -> f64 {
        self.nodes()
            .map(|s| {
                sweep(probes, |p| {
                    let d = self.tangent_act(s, p);
                    let xv = x.eval(p);
                    let push: Vec<f64> = d.iter().map(|row| row.iter().zip(&xv).map(|(a, b)| a * b).sum()).collect();
                    let there = x.eval(&self.act(s, p));
                    linalg::norm(&push.iter().zip(&there).map(|(a, b)| a - b).collect::<Vec<_>>())
                })
                .into_iter()
                .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn averaged(g: &MetricField, action: &GroupAction) -> MetricField {
    let n = g.dim();
    let parts: Vec<(MetricField, f64)> = action.quadrature.iter().map(|&(s, w)| (action.pullback_metric(s, g), w)).collect();
    MetricField::from_fn(g.chart.clone(), move |p| {
        let mut acc = vec![Dual::zero(); n * n];
        for (pb, w) in &parts {
            for (a, v) in acc.iter_mut().zip(pb.eval_dual(p)) {
                *a += v * *w;
            }
        }
        acc
    })
}

/// `Σ_σ w_σ ρ_σ* g`. For circle actions the result is compared against the
/// doubled quadrature at the probes.
pub fn haar_average_metric(g: &MetricField, action: &GroupAction, probes: &[Vec<f64>]) -> Result<MetricField> {
    if g.chart != action.chart {
        return Err(Error::ChartMismatch(g.chart.to_string(), action.chart.to_string()));
    }
    let avg = averaged(g, action);
    if action.kind == GroupKind::Circle {
        let fine = averaged(g, &action.with_nodes(2 * action.quadrature.len()));
        let diff = sweep(probes, |p| linalg::frobenius_diff(&avg.eval(p), &fine.eval(p))).into_iter().fold(0.0, f64::max);
        if diff > DOUBLING_TOLERANCE {
            return Err(Error::QuadratureTooCoarse(diff));
        }
    }
    Ok(avg)
}

/// Circle action of rotations about the center: `(x, α) ↦ (R_σ x, α + σ)`.
pub fn kepler_symmetry_action(c: f64) -> GroupAction {
    GroupAction::circle(Chart::bundle(Chart::StereoPlane(c)), CIRCLE_NODES, |s, p| {
        let (cs, sn) = (s.cos(), s.sin());
        vec![&p[0] * cs - &p[1] * sn, &p[0] * sn + &p[1] * cs, &p[2] + s]
    })
}

/// Invariance of `X_c`, the Liouville form and the lift metric under the
/// Kepler circle action, over `nodes` quadrature angles.
pub fn kepler_invariance_report(c: f64, probes: &[Vec<f64>], nodes: usize, tolerance: f64) -> VerificationReport {
    let action = kepler_symmetry_action(c).with_nodes(nodes);
    let g = crate::chart::conformal_metric(c);
    let x = action.field_invariance(&reeb_field(c), probes);
    let a = action.form_invariance(&liouville_form(&g), probes);
    let m = action.metric_invariance(&lift_metric(&g).metric, probes);
    VerificationReport::combine(
        "kepler_invariance",
        Some(c),
        &[
            VerificationReport::from_residuals("reeb_field", Some(c), &[x], tolerance),
            VerificationReport::from_residuals("liouville_form", Some(c), &[a], tolerance),
            VerificationReport::from_residuals("lift_metric", Some(c), &[m], tolerance),
        ],
    )
}

/// Kernel frame of `α` orthonormal for the auxiliary metric, with `J` in
/// that frame (column convention: `J b_s = Σ_r j[r][s] b_r`).
#[derive(Clone, Debug)]
pub struct JFrame<T> {
    pub basis: [Vec<T>; 2],
    pub j: [[T; 2]; 2],
    /// `dα(b₁, b₂)`.
    pub omega: T,
}

#[derive(Clone, Debug)]
pub struct AlmostComplexStructure {
    pub alpha: KForm,
    pub aux: MetricField,
    dalpha: KForm,
}

fn dalpha_matrix(d: &[Dual]) -> Vec<Dual> {
    // coefficients on (12, 13, 23) as an antisymmetric matrix
    let z = Dual::zero();
    vec![z.clone(), d[0].clone(), d[1].clone(), -d[0].clone(), z.clone(), d[2].clone(), -d[1].clone(), -d[2].clone(), z]
}

/// `M^{-1/2}` of a symmetric positive-definite 2×2 matrix.
fn inv_sqrt_2x2(m: &[Dual; 4]) -> [Dual; 4] {
    let det = &m[0] * &m[3] - &m[1] * &m[2];
    let s = det.sqrt();
    let t = (&m[0] + &m[3] + &s * 2.0).sqrt();
    // √M = (M + s I)/t, inverted in closed form
    let r = [(&m[0] + &s) / &t, &m[1] / &t, &m[2] / &t, (&m[3] + &s) / &t];
    let rd = &r[0] * &r[3] - &r[1] * &r[2];
    [&r[3] / &rd, -(&r[1] / &rd), -(&r[2] / &rd), &r[0] / &rd]
}

impl AlmostComplexStructure {
    pub fn frame_dual(&self, p: &[Dual]) -> JFrame<Dual> {
        let a = self.alpha.eval_dual(p);
        let g = self.aux.eval_dual(p);
        let d = dalpha_matrix(&self.dalpha.eval_dual(p));
        let k = (0..3).max_by(|&i, &j| a[i].value().abs().total_cmp(&a[j].value().abs())).unwrap();
        let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
        let raw: Vec<Vec<Dual>> = others
            .iter()
            .map(|&i| {
                let mut v = vec![Dual::zero(); 3];
                v[i] = Dual::one();
                v[k] = -(&a[i] / &a[k]);
                v
            })
            .collect();
        let ip = |u: &[Dual], v: &[Dual]| linalg::bilinear(&g, u, v);
        let n1 = ip(&raw[0], &raw[0]).sqrt();
        let b1: Vec<Dual> = raw[0].iter().map(|v| v / &n1).collect();
        let proj = ip(&raw[1], &b1);
        let w: Vec<Dual> = raw[1].iter().zip(&b1).map(|(v, b)| v - &(&proj * b)).collect();
        let n2 = ip(&w, &w).sqrt();
        let b2: Vec<Dual> = w.iter().map(|v| v / &n2).collect();
        let om = [
            [linalg::bilinear(&d, &b1, &b1), linalg::bilinear(&d, &b1, &b2)],
            [linalg::bilinear(&d, &b2, &b1), linalg::bilinear(&d, &b2, &b2)],
        ];
        // aux(A u, v) = dα(u, v) in the orthonormal frame gives A = Ωᵀ
        let am = [om[0][0].clone(), om[1][0].clone(), om[0][1].clone(), om[1][1].clone()];
        let ata = [
            &am[0] * &am[0] + &am[2] * &am[2],
            &am[0] * &am[1] + &am[2] * &am[3],
            &am[1] * &am[0] + &am[3] * &am[2],
            &am[1] * &am[1] + &am[3] * &am[3],
        ];
        let is = inv_sqrt_2x2(&ata);
        let j = [
            [&am[0] * &is[0] + &am[1] * &is[2], &am[0] * &is[1] + &am[1] * &is[3]],
            [&am[2] * &is[0] + &am[3] * &is[2], &am[2] * &is[1] + &am[3] * &is[3]],
        ];
        let omega = om[0][1].clone();
        JFrame { basis: [b1, b2], j, omega }
    }

    pub fn frame(&self, p: &[f64]) -> Result<JFrame<f64>> {
        let f = self.frame_dual(&constants(p));
        let det = f.omega.value().powi(2);
        if det < DEGENERACY_EPS {
            return Err(Error::DegenerateTwoForm(det));
        }
        Ok(JFrame {
            basis: [linalg::to_f64(&f.basis[0]), linalg::to_f64(&f.basis[1])],
            j: [[f.j[0][0].value(), f.j[0][1].value()], [f.j[1][0].value(), f.j[1][1].value()]],
            omega: f.omega.value(),
        })
    }

    /// `J v` for `v ∈ ker α` at `p`.
    pub fn apply(&self, p: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let f = self.frame(p)?;
        let g = self.aux.eval(p);
        let coord = |b: &[f64]| -> f64 { (0..3).flat_map(|i| (0..3).map(move |k| (i, k))).map(|(i, k)| g[i * 3 + k] * b[i] * v[k]).sum() };
        let c = [coord(&f.basis[0]), coord(&f.basis[1])];
        let jc = [f.j[0][0] * c[0] + f.j[0][1] * c[1], f.j[1][0] * c[0] + f.j[1][1] * c[1]];
        Ok((0..3).map(|i| jc[0] * f.basis[0][i] + jc[1] * f.basis[1][i]).collect())
    }

    /// `dα(u, v)` at `p`.
    pub fn dalpha(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let d = dalpha_matrix(&self.dalpha.eval_dual(&constants(p)));
        linalg::bilinear_f64(&d, u, v).value()
    }
}

/// Almost complex structure on `ker α` tamed by `dα`, by polar decomposition
/// against the auxiliary metric.
pub fn construct_j(alpha: &KForm, auxiliary: &MetricField) -> Result<AlmostComplexStructure> {
    if alpha.chart != auxiliary.chart {
        return Err(Error::ChartMismatch(alpha.chart.to_string(), auxiliary.chart.to_string()));
    }
    if alpha.dim() != 3 || alpha.degree != 1 {
        return Err(Error::UnsupportedDimension(alpha.dim()));
    }
    Ok(AlmostComplexStructure { alpha: alpha.clone(), aux: auxiliary.clone(), dalpha: exterior_derivative(alpha)? })
}

/// Outcome of the Beltrami-to-contact direction.
#[derive(Clone, Debug)]
pub struct BeltramiReport {
    /// Pointwise least-squares eigenfactor `g(curl X, X)/g(X, X)`.
    pub f: ScalarField,
    pub f_min: f64,
    pub f_max: f64,
    pub curl_residual: f64,
    pub divergence_residual: f64,
    pub contact_residual: f64,
    /// `max |ι_X dα|` with `α = ι_X g`.
    pub iota_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BeltramiReport {
    pub fn f_is_constant(&self, tol: f64) -> bool {
        self.f_max - self.f_min < tol
    }
}

/// Contact form `α = ι_X g` of a nonsingular Beltrami field.
pub fn beltrami_to_contact(
    x: &VectorField,
    g: &MetricField,
    mu: &VolumeForm,
    probes: &[Vec<f64>],
    tolerance: f64,
) -> Result<(KForm, BeltramiReport)> {
    let cx = curl(x, g, mu)?;
    let (xf, cf, gf) = (x.function(), cx.function(), g.function());
    let f = ScalarField::from_fn(x.chart.clone(), move |p| {
        let gm = gf(p);
        let (xv, cv) = (xf(p), cf(p));
        linalg::bilinear(&gm, &cv, &xv) / linalg::bilinear(&gm, &xv, &xv)
    });
    let rows = sweep(probes, |p| {
        let xv = x.eval(p);
        let nx = g.inner(p, &xv, &xv).sqrt();
        let fv = f.eval(p);
        let cv = cx.eval(p);
        let res = linalg::max_abs_diff(&cv, &xv.iter().map(|v| v * fv).collect::<Vec<_>>());
        (nx, fv, res)
    });
    let min_norm = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    if min_norm < 1e-8 {
        return Err(Error::VanishingField(min_norm));
    }
    let curl_residual = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let min_factor = rows.iter().map(|r| r.1.abs()).fold(f64::INFINITY, f64::min);
    if curl_residual > tolerance || min_factor < 1e-8 {
        return Err(Error::NotBeltrami { residual: curl_residual, min_factor });
    }
    let alpha = flat(x, g)?;
    let contact = contact_check(&alpha, probes, CONTACT_THRESHOLD);
    let ixda = interior_product(x, &exterior_derivative(&alpha)?)?;
    let div = divergence(x, mu)?;
    let iota_residual = sweep(probes, |p| ixda.eval(p).iter().fold(0.0f64, |m, v| m.max(v.abs()))).into_iter().fold(0.0, f64::max);
    let divergence_residual = sweep(probes, |p| div.eval(p).abs()).into_iter().fold(0.0, f64::max);
    let report = BeltramiReport {
        f,
        f_min: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        f_max: rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        curl_residual,
        divergence_residual,
        contact_residual: contact.min_value,
        iota_residual,
        tolerance,
        pass: contact.pass && iota_residual < tolerance && divergence_residual < tolerance,
    };
    Ok((alpha, report))
}

fn adapted_metric_fn(x: &VectorField, alpha: &KForm, acs: &AlmostComplexStructure) -> MetricField {
    let (xf, af, acs) = (x.function(), alpha.function(), acs.clone());
    let dalpha = acs.dalpha.clone();
    MetricField::from_fn(alpha.chart.clone(), move |p| {
        let a = af(p);
        let xv = xf(p);
        let h = linalg::dot(&a, &xv);
        let r: Vec<Dual> = xv.iter().map(|v| v / &h).collect();
        let d = dalpha_matrix(&dalpha.eval_dual(p));
        let fr = acs.frame_dual(p);
        let g = acs.aux.eval_dual(p);
        // J∘coordinates as a 3×3 map: v ↦ Σ_r (J c)_r b_r with c_s = aux(b_s, v)
        let cs: Vec<Vec<Dual>> = fr.basis.iter().map(|b| (0..3).map(|k| (0..3).map(|i| &g[i * 3 + k] * &b[i]).sum()).collect()).collect();
        let mut jmap = vec![Dual::zero(); 9];
        for i in 0..3 {
            for k in 0..3 {
                let mut v = Dual::zero();
                for rr in 0..2 {
                    for s in 0..2 {
                        v += &fr.basis[rr][i] * &fr.j[rr][s] * &cs[s][k];
                    }
                }
                jmap[i * 3 + k] = v;
            }
        }
        // P = I − R aᵀ projects onto ker α along R
        let mut pm = linalg::identity(3);
        for i in 0..3 {
            for k in 0..3 {
                pm[i * 3 + k] -= &r[i] * &a[k];
            }
        }
        let inner = linalg::mat_mul(&d, &jmap, 3);
        let sym = linalg::congruence(&inner, &pm, 3);
        let hinv = h.recip();
        let mut out = vec![Dual::zero(); 9];
        for i in 0..3 {
            for k in 0..3 {
                out[i * 3 + k] = &a[i] * &a[k] * &hinv + (&sym[i * 3 + k] + &sym[k * 3 + i]) * 0.5;
            }
        }
        out
    })
}

/// Adapted metric `(1/h) α⊗α + dα(π·, Jπ·)` and volume `(1/h) α∧dα` for a
/// Reeb-like field `X = hR`, with the auxiliary metric of `J` taken to be the
/// coordinate metric. With an action, `α` and `X` must be invariant and the
/// metric is averaged.
pub fn reeb_to_metric(
    x: &VectorField,
    alpha: &KForm,
    action: Option<&GroupAction>,
    probes: &[Vec<f64>],
) -> Result<(MetricField, VolumeForm)> {
    reeb_to_metric_with(x, alpha, &MetricField::euclidean(alpha.chart.clone()), action, probes)
}

pub fn reeb_to_metric_with(
    x: &VectorField,
    alpha: &KForm,
    aux: &MetricField,
    action: Option<&GroupAction>,
    probes: &[Vec<f64>],
) -> Result<(MetricField, VolumeForm)> {
    if x.chart != alpha.chart {
        return Err(Error::ChartMismatch(x.chart.to_string(), alpha.chart.to_string()));
    }
    let h = pairing(alpha, x)?;
    let ixda = interior_product(x, &exterior_derivative(alpha)?)?;
    let acs = construct_j(alpha, aux)?;
    for p in probes {
        let hv = h.eval(p);
        if !(hv > 0.0) {
            return Err(Error::NotReebLike(format!("alpha(X) = {hv:e} at {p:?}")));
        }
        let r = ixda.eval(p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if r > 1e-8 * hv.max(1.0) {
            return Err(Error::NotReebLike(format!("|i_X d alpha| = {r:e} at {p:?}")));
        }
        acs.frame(p)?;
    }
    let mut g = adapted_metric_fn(x, alpha, &acs);
    if let Some(act) = action {
        let inv = act.form_invariance(alpha, probes).max(act.field_invariance(x, probes));
        if inv > 1e-9 {
            return Err(Error::NotInvariant(inv));
        }
        g = haar_average_metric(&g, act, probes)?;
    }
    let mu = VolumeForm::new(contact_volume(alpha)?.scaled_by(&h.recip()))?;
    Ok((g, mu))
}

/// Beltrami checks of `X` against `(g, μ)`: `curl X = X`, `div X = 0` and
/// `ι_X g = α`.
pub fn reconstructed_metric_report(
    x: &VectorField,
    alpha: &KForm,
    g: &MetricField,
    mu: &VolumeForm,
    probes: &[Vec<f64>],
    tolerance: f64,
) -> Result<VerificationReport> {
    let cx = curl(x, g, mu)?;
    let dv = divergence(x, mu)?;
    let ix = flat(x, g)?;
    let rows = sweep(probes, |p| {
        let xv = x.eval(p);
        (
            linalg::max_abs_diff(&cx.eval(p), &xv),
            dv.eval(p).abs(),
            linalg::max_abs_diff(&ix.eval(p), &alpha.eval(p)),
            linalg::min_eigenvalue(&g.eval(p), 3),
        )
    });
    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(VerificationReport::combine(
        "reeb_to_metric",
        None,
        &[
            VerificationReport::from_residuals("curl_equals_x", None, &col(|r| r.0), tolerance),
            VerificationReport::from_residuals("divergence", None, &col(|r| r.1), tolerance),
            VerificationReport::from_residuals("iota_x_g_equals_alpha", None, &col(|r| r.2), tolerance),
            VerificationReport::from_lower_bound("positive_definite", None, &col(|r| r.3), 0.0),
        ],
    ))
}
