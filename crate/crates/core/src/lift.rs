//! Unit cotangent bundle over a 2-D base, the Sasaki–Mok lift metric, the
//! Liouville form and its Reeb field, and Sasaki's geodesic classification.
//!
//! Bundle coordinates are `(x₁, x₂, α)`; the unit covector at `(x, α)` is
//! `y = L(x)(cos α, sin α)` where `L` is the lower Cholesky factor of `g(x)`,
//! so `|y|_{g*} = 1` identically and `α = 0` is the covector dual to `∂x₁`,
//! normalized. For the conformal regime metrics `y = λ(x)(cos α, sin α)`.
//!
//! The Reeb field is the Hamiltonian field of `K = ½|y|²_{g*}` (`ẋ = ∂K/∂y`,
//! `ẏ = −∂K/∂x`), with the fiber component obtained by projecting `ẏ` onto
//! `∂_α y`.

use crate::ad::{constants, jacobian, Dual};
use crate::chart::{christoffel_dual, conformal_metric, riemann_lowered_dual, Chart, ChartPoint, MetricField};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::forms::{contact_volume, curl, divergence, sweep, KForm, VectorField, VolumeForm};
use crate::linalg;
use crate::report::VerificationReport;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq)]
pub struct BundlePoint {
    pub base: ChartPoint,
    pub alpha: f64,
}

impl BundlePoint {
    pub fn new(base: ChartPoint, alpha: f64) -> Self {
        BundlePoint { base, alpha: alpha.rem_euclid(TAU) }
    }

    pub fn coords(&self) -> Vec<f64> {
        vec![self.base.coords[0], self.base.coords[1], self.alpha]
    }
}

/// `L(x)(cos α, sin α)` for the metric `g`.
pub fn unit_covector(g: &MetricField, x: &[Dual], alpha: &Dual) -> [Dual; 2] {
    let l = linalg::cholesky(&g.eval_dual(x), 2);
    let (c, s) = (alpha.cos(), alpha.sin());
    [&l[0] * &c, &l[2] * &c + &l[3] * &s]
}

pub fn unit_covector_at(g: &MetricField, p: &[f64]) -> [f64; 2] {
    let y = unit_covector(g, &constants(&p[..2]), &Dual::constant(p[2]));
    [y[0].value(), y[1].value()]
}

/// Liouville form `y₁ dx₁ + y₂ dx₂` on the bundle chart.
pub fn liouville_form(g: &MetricField) -> KForm {
    let g = g.clone();
    KForm::from_fn(Chart::bundle(g.chart.clone()), 1, move |p| {
        let y = unit_covector(&g, &p[..2], &p[2]);
        let [y0, y1] = y;
        vec![y0, y1, Dual::zero()]
    })
}

/// Reeb field of the Liouville form for an arbitrary base metric.
pub fn reeb_field_for(g: &MetricField) -> VectorField {
    let g = g.clone();
    VectorField::from_fn(Chart::bundle(g.chart.clone()), move |p| {
        let x = &p[..2];
        let ycov = |q: &[Dual]| unit_covector(&g, &q[..2], &q[2]).to_vec();
        let y = ycov(p);
        let ginv = linalg::inverse(&g.eval_dual(x), 2);
        let xdot = linalg::mat_vec(&ginv, &y);
        let dginv = jacobian(|q: &[Dual]| linalg::inverse(&g.eval_dual(q), 2), x);
        let ydot: Vec<Dual> = (0..2)
            .map(|k| {
                let mut s = Dual::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        s += &y[i] * &y[j] * &dginv[i * 2 + j][k];
                    }
                }
                s * -0.5
            })
            .collect();
        let jy = jacobian(ycov, p);
        // ẏ − D_ẋ y is vertical; its component along ∂_α y (unit in g*) is α̇
        let rest: Vec<Dual> = (0..2).map(|k| &ydot[k] - &jy[k][0] * &xdot[0] - &jy[k][1] * &xdot[1]).collect();
        let fiber = [jy[0][2].clone(), jy[1][2].clone()];
        let adot = linalg::bilinear(&ginv, &fiber, &rest);
        vec![xdot[0].clone(), xdot[1].clone(), adot]
    })
}

/// Reeb field `X_c` of regime `c` on `Bundle(StereoPlane(c))`.
pub fn reeb_field(c: f64) -> VectorField {
    reeb_field_for(&conformal_metric(c))
}

/// Euclidean metric on the involuted chart of the `c = 0` regime.
pub fn involuted_metric() -> MetricField {
    MetricField::euclidean(Chart::InvolutedPlane)
}

/// Sasaki–Mok metric on `T*M`: `g(ẋ_V, ẋ_W) + g*(∇y_V, ∇y_W)` with
/// `(∇y)_k = ẏ_k − Γ^j_{ik} ẋ^i y_j`. Vectors are `(ẋ₁, ẋ₂, ẏ₁, ẏ₂)`.
pub fn cotangent_inner(g: &MetricField, x: &[f64], y: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let xd = constants(x);
    let gm = linalg::to_f64(&g.eval_dual(&xd));
    let ginv = linalg::to_f64(&linalg::inverse(&g.eval_dual(&xd), 2));
    let gamma = linalg::to_f64(&christoffel_dual(g, &xd));
    let cov = |u: &[f64]| -> [f64; 2] {
        let mut out = [u[2], u[3]];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *o -= gamma[(j * 2 + i) * 2 + k] * u[i] * y[j];
                }
            }
        }
        out
    };
    let (cv, cw) = (cov(v), cov(w));
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += gm[i * 2 + j] * v[i] * w[j] + ginv[i * 2 + j] * cv[i] * cw[j];
        }
    }
    s
}

/// Splits `W = (ẋ, ẏ)` at the covector `(x, y)` into its horizontal part
/// `(ẋ, Γ(ẋ)y)` and vertical part `(0, ẏ − Γ(ẋ)y)`.
pub fn split_horizontal_vertical(g: &MetricField, x: &[f64], y: &[f64], w: &[f64]) -> Result<([f64; 4], [f64; 4])> {
    if !g.chart.contains(x) {
        return Err(Error::OutOfDomain { chart: g.chart.to_string(), point: x.to_vec() });
    }
    let gamma = linalg::to_f64(&christoffel_dual(g, &constants(x)));
    let mut conn = [0.0; 2];
    for (k, cv) in conn.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *cv += gamma[(j * 2 + i) * 2 + k] * w[i] * y[j];
            }
        }
    }
    let h = [w[0], w[1], conn[0], conn[1]];
    let v = [0.0, 0.0, w[2] - conn[0], w[3] - conn[1]];
    Ok((h, v))
}

/// The lift metric restricted to the unit cotangent bundle, in bundle
/// coordinates.
#[derive(Clone, Debug)]
pub struct LiftMetric {
    pub base: MetricField,
    pub metric: MetricField,
}

pub fn lift_metric(g: &MetricField) -> LiftMetric {
    let base = g.clone();
    let gb = g.clone();
    let metric = MetricField::from_fn(Chart::bundle(g.chart.clone()), move |p| {
        let x = &p[..2];
        let ycov = |q: &[Dual]| unit_covector(&gb, &q[..2], &q[2]).to_vec();
        let y = ycov(p);
        let jy = jacobian(ycov, p);
        let gm = gb.eval_dual(x);
        let ginv = linalg::inverse(&gm, 2);
        let gamma = christoffel_dual(&gb, x);
        // coordinate basis E_m = (e_m, ∂_m y), E_α = (0, ∂_α y)
        let xdot = |m: usize, i: usize| if m == i { 1.0 } else { 0.0 };
        let nabla: Vec<Vec<Dual>> = (0..3)
            .map(|m| {
                (0..2)
                    .map(|k| {
                        let mut v = jy[k][m].clone();
                        if m < 2 {
                            for j in 0..2 {
                                v -= &gamma[(j * 2 + m) * 2 + k] * &y[j];
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![Dual::zero(); 9];
        for a in 0..3 {
            for b in a..3 {
                let mut v = linalg::bilinear(&ginv, &nabla[a], &nabla[b]);
                if a < 2 && b < 2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let w = xdot(a, i) * xdot(b, j);
                            if w != 0.0 {
                                v += &gm[i * 2 + j] * w;
                            }
                        }
                    }
                }
                out[a * 3 + b] = v.clone();
                out[b * 3 + a] = v;
            }
        }
        out
    });
    LiftMetric { base, metric }
}

/// Two vectors spanning `ker a` for a nonzero covector `a` on a 3-chart.
pub fn kernel_basis(a: &[f64]) -> [[f64; 3]; 2] {
    let k = (0..3).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap();
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let mut out = [[0.0; 3]; 2];
    for (r, &i) in others.iter().enumerate() {
        out[r][i] = 1.0;
        out[r][k] = -a[i] / a[k];
    }
    out
}

/// Checks the adapted-metric conditions for a Reeb field `r` of `alpha`:
/// orthogonality to `ker α`, unit norm, `ι_R g = α`, `curl R = R` and
/// `div R = 0` with respect to `μ = α∧dα`.
pub fn adapted_metric_check(
    alpha: &KForm,
    r: &VectorField,
    g: &MetricField,
    probes: &[Vec<f64>],
    tolerance: f64,
) -> Result<VerificationReport> {
    let mu = VolumeForm::new(contact_volume(alpha)?)?;
    let cr = curl(r, g, &mu)?;
    let dv = divergence(r, &mu)?;
    let rows = sweep(probes, |p| {
        let a = alpha.eval(p);
        let rv = r.eval(p);
        let gm = g.eval(p);
        let gdot = |u: &[f64], v: &[f64]| -> f64 {
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| gm[i * 3 + j] * u[i] * v[j]).sum()
        };
        let orth = kernel_basis(&a).iter().map(|y| gdot(&rv, y).abs() / gdot(y, y).sqrt()).fold(0.0, f64::max);
        let nsq = gdot(&rv, &rv);
        let iota: Vec<f64> = (0..3).map(|j| (0..3).map(|i| gm[i * 3 + j] * rv[i]).sum()).collect();
        let ci = linalg::max_abs_diff(&iota, &a);
        let cu = linalg::max_abs_diff(&cr.eval(p), &rv);
        (orth, nsq, ci, cu, dv.eval(p).abs())
    });
    let col = |f: fn(&(f64, f64, f64, f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let nsq = col(|r| r.1);
    let nmin = nsq.iter().copied().fold(f64::INFINITY, f64::min);
    let nmax = nsq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport::combine(
        "adapted_metric",
        None,
        &[
            VerificationReport::from_residuals("orthogonality", None, &col(|r| r.0), tolerance),
            VerificationReport::from_residuals("unit_norm", None, &nsq.iter().map(|v| (v - 1.0).abs()).collect::<Vec<_>>(), tolerance)
                .with_detail("norm_sq_min", nmin)
                .with_detail("norm_sq_max", nmax),
            VerificationReport::from_residuals("iota_r_g_equals_alpha", None, &col(|r| r.2), tolerance),
            VerificationReport::from_residuals("curl_equals_r", None, &col(|r| r.3), tolerance),
            VerificationReport::from_residuals("divergence", None, &col(|r| r.4), tolerance),
        ],
    ))
}

/// Sectional curvatures of a 3-D metric at the probes, over the coordinate
/// planes and planes spanned with two fixed oblique directions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub mean: f64,
}

impl CurvatureReport {
    /// Largest deviation from a target constant.
    pub fn deviation_from(&self, target: f64) -> f64 {
        (self.max - target).abs().max((self.min - target).abs())
    }
}

pub fn curvature_report(g: &MetricField, probes: &[Vec<f64>]) -> CurvatureReport {
    let extra = vec![vec![1.0, 1.0, 0.5], vec![-0.3, 1.0, 1.0]];
    let values: Vec<f64> = sweep(probes, |p| crate::chart::sectional_curvatures_with(g, p, &extra)).into_iter().flatten().collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CurvatureReport { samples: probes.len(), min, max, spread: max - min, mean: values.iter().sum::<f64>() / values.len().max(1) as f64 }
}

/// Lowered Riemann tensor of the lift metric at a point (for inspection).
pub fn lift_riemann(lift: &LiftMetric, p: &[f64]) -> Vec<f64> {
    linalg::to_f64(&riemann_lowered_dual(&lift.metric, &constants(p)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicClass {
    Horizontal,
    Vertical,
    Oblique,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    pub speed: f64,
    pub residual: f64,
    pub max_spacing: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { speed: 1e-6, residual: 1e-6, max_spacing: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicClassification {
    pub class: GeodesicClass,
    pub max_residual: f64,
    pub min_base_speed: f64,
    pub max_base_speed: f64,
    pub min_fiber_speed: f64,
}

/// Weights of the first derivative at `z` from values at nodes `x`.
pub fn fd_weights(z: f64, x: &[f64]) -> Vec<f64> {
    // Fornberg's recursion, first derivative only
    let n = x.len();
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

fn unwrap_angles(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    let mut offset = 0.0;
    for (i, &v) in a.iter().enumerate() {
        if i > 0 {
            let d = v + offset - out[i - 1];
            if d > std::f64::consts::PI {
                offset -= TAU;
            } else if d < -std::f64::consts::PI {
                offset += TAU;
            }
        }
        out.push(v + offset);
    }
    out
}

/// Classifies a bundle trajectory `(x₁, x₂, α)` by the covariant derivative
/// of its covector along the base curve, using five-point finite
/// differences on the (possibly nonuniform) sample times.
pub fn classify_geodesic(traj: &Trajectory, g_base: &MetricField, th: &ClassifyThresholds) -> Result<GeodesicClassification> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::TooSparse(format!("{n} samples, need at least 5")));
    }
    // near-coincident samples (event refinements) would wreck the stencils
    let mut kept: Vec<&crate::dynamics::Sample> = Vec::with_capacity(n);
    for s in &traj.samples {
        if kept.last().is_none_or(|k| s.t - k.t > 1e-9 * th.max_spacing) {
            kept.push(s);
        }
    }
    let n = kept.len();
    if n < 5 {
        return Err(Error::TooSparse(format!("{n} distinct samples, need at least 5")));
    }
    let t: Vec<f64> = kept.iter().map(|s| s.t).collect();
    let gap = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if gap > th.max_spacing {
        return Err(Error::TooSparse(format!("sample spacing {gap:e} exceeds {:e}", th.max_spacing)));
    }
    let alpha = unwrap_angles(&kept.iter().map(|s| s.state[2]).collect::<Vec<_>>());
    let pts: Vec<[f64; 3]> = kept.iter().zip(&alpha).map(|(s, a)| [s.state[0], s.state[1], *a]).collect();
    let theta: Vec<[f64; 2]> = pts.iter().map(|p| unit_covector_at(g_base, p)).collect();
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let w = fd_weights(t[i], &t[lo..lo + 5]);
            let d = |f: &dyn Fn(usize) -> f64| (0..5).map(|s| w[s] * f(lo + s)).sum::<f64>();
            let xd = [d(&|j| pts[j][0]), d(&|j| pts[j][1])];
            let td = [d(&|j| theta[j][0]), d(&|j| theta[j][1])];
            let x = &pts[i][..2];
            let gm = g_base.eval(x);
            let ginv = linalg::to_f64(&linalg::inverse(&constants(&gm), 2));
            let gamma = linalg::to_f64(&christoffel_dual(g_base, &constants(x)));
            let mut cov = td;
            for (k, cv) in cov.iter_mut().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        *cv -= gamma[(b * 2 + a) * 2 + k] * xd[a] * theta[i][b];
                    }
                }
            }
            let nrm = |m: &[f64], v: &[f64]| -> f64 {
                (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| m[a * 2 + b] * v[a] * v[b]).sum::<f64>().max(0.0).sqrt()
            };
            (nrm(&ginv, &cov), nrm(&gm, &xd), nrm(&ginv, &td))
        })
        .collect();
    let max_res = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_base = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_base = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let min_fiber = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let class = if max_res < th.residual && min_base > th.speed {
        GeodesicClass::Horizontal
    } else if max_base < th.speed && min_fiber > th.speed {
        GeodesicClass::Vertical
    } else {
        GeodesicClass::Oblique
    };
    Ok(GeodesicClassification {
        class,
        max_residual: max_res,
        min_base_speed: min_base,
        max_base_speed: max_base,
        min_fiber_speed: min_fiber,
    })
}
