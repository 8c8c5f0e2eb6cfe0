//! Coordinate charts, the conformally flat metrics of the regularized Kepler
//! problem, their connection and curvature, and the stereographic maps onto
//! the model surfaces.
//!
//! For an energy level `c` the base metric on the plane is
//! `g = λ(x)² ⟨·,·⟩` with `λ(x) = 2 / (|x|² − 2c)`; it has constant Gauss
//! curvature `−2c`. Conventions fixed here:
//!
//! * `c < 0`: the plane is the stereographic chart of the sphere of radius
//!   `r = 1/√(2|c|)` projected from the north pole; the origin maps to the
//!   south pole. A second chart ([`Chart::StereoPlaneDual`]) covers the north
//!   pole through the orientation-preserving transition
//!   `x ↦ 2|c|·(x₁, −x₂)/|x|²`.
//! * `c = 0`: the chart is the punctured plane; the involution
//!   `x ↦ 2x/|x|²` carries the metric to the Euclidean plane
//!   ([`Chart::InvolutedPlane`]).
//! * `c > 0`: the chart is the exterior `|x|² > 2c`, an inverted Poincaré
//!   disk; the surface is the upper sheet of the two-sheeted hyperboloid of
//!   radius `1/√(2c)` in Minkowski space. The same transition formula maps it
//!   onto the interior disk `|x|² < 2c`, which contains the collision point.

use crate::ad::{constants, jacobian, Dual, VecFn};
use crate::error::{Error, Result};
use crate::linalg::{self, idx};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Points closer than this to a chart boundary are rejected.
pub const DOMAIN_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Chart {
    /// Regime chart for energy `c` (see module docs).
    StereoPlane(f64),
    /// Second chart of the regime atlas for `c ≠ 0`.
    StereoPlaneDual(f64),
    /// Image of the `c = 0` chart under `x ↦ 2x/|x|²`; Euclidean metric.
    InvolutedPlane,
    /// Spherical coordinates `(φ, θ)` on the sphere of radius `1/√(−2c)`.
    SphericalSphere(f64),
    /// Upper half-plane `(x, y)` with the metric of curvature `−2c`.
    HalfPlane(f64),
    /// Phase space `(q₁, q₂, p₁, p₂)`.
    PhaseChart4D,
    /// Plain coordinates of the given dimension.
    Euclidean(usize),
    /// Unit cotangent bundle over a 2-D base: `(x₁, x₂, α)`.
    Bundle(Box<Chart>),
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::StereoPlane(c) => write!(f, "StereoPlane({c})"),
            Chart::StereoPlaneDual(c) => write!(f, "StereoPlaneDual({c})"),
            Chart::InvolutedPlane => write!(f, "InvolutedPlane"),
            Chart::SphericalSphere(c) => write!(f, "SphericalSphere({c})"),
            Chart::HalfPlane(c) => write!(f, "HalfPlane({c})"),
            Chart::PhaseChart4D => write!(f, "PhaseChart4D"),
            Chart::Euclidean(n) => write!(f, "Euclidean({n})"),
            Chart::Bundle(b) => write!(f, "Bundle({b})"),
        }
    }
}

impl Chart {
    pub fn dim(&self) -> usize {
        match self {
            Chart::PhaseChart4D => 4,
            Chart::Euclidean(n) => *n,
            Chart::Bundle(b) => b.dim() + 1,
            _ => 2,
        }
    }

    /// Second chart of the regime atlas: the dual stereographic chart for
    /// `c ≠ 0`, the involuted plane for `c = 0`.
    pub fn regime_dual(c: f64) -> Chart {
        if c == 0.0 {
            Chart::InvolutedPlane
        } else {
            Chart::StereoPlaneDual(c)
        }
    }

    pub fn bundle(base: Chart) -> Chart {
        Chart::Bundle(Box::new(base))
    }

    /// Domain predicate.
    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim() || p.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let r2 = |p: &[f64]| p[0] * p[0] + p[1] * p[1];
        match self {
            Chart::StereoPlane(c) => {
                if *c < 0.0 {
                    true
                } else if *c == 0.0 {
                    r2(p).sqrt() >= DOMAIN_MARGIN
                } else {
                    r2(p) - 2.0 * c >= DOMAIN_MARGIN
                }
            }
            Chart::StereoPlaneDual(c) => {
                if *c < 0.0 {
                    true
                } else if *c > 0.0 {
                    2.0 * c - r2(p) >= DOMAIN_MARGIN
                } else {
                    false
                }
            }
            Chart::SphericalSphere(_) => p[1] > DOMAIN_MARGIN && p[1] < PI - DOMAIN_MARGIN,
            Chart::HalfPlane(_) => p[1] >= DOMAIN_MARGIN,
            Chart::InvolutedPlane | Chart::PhaseChart4D | Chart::Euclidean(_) => true,
            Chart::Bundle(base) => base.contains(&p[..base.dim()]),
        }
    }

    /// Indices of coordinates that are angles (compared on the circle).
    pub fn angle_components(&self) -> Vec<usize> {
        match self {
            Chart::Bundle(base) => {
                let mut v = base.angle_components();
                v.push(base.dim());
                v
            }
            Chart::SphericalSphere(_) => vec![0],
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRegime {
    pub c: f64,
    pub sign_class: SignClass,
}

impl EnergyRegime {
    pub fn new(c: f64) -> Self {
        let sign_class = if c < 0.0 {
            SignClass::Negative
        } else if c == 0.0 {
            SignClass::Zero
        } else {
            SignClass::Positive
        };
        EnergyRegime { c, sign_class }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Result<Self> {
        if !chart.contains(&coords) {
            return Err(Error::OutOfDomain { chart: chart.to_string(), point: coords });
        }
        Ok(ChartPoint { chart, coords })
    }
}

/// A Riemannian metric on a chart, stored as a closure returning the
/// row-major coefficient matrix. Evaluating at [`Dual`] coordinates yields
/// derivatives of every entry.
#[derive(Clone)]
pub struct MetricField {
    pub chart: Chart,
    f: VecFn,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricField({})", self.chart)
    }
}

impl MetricField {
    pub fn new(chart: Chart, f: VecFn) -> Self {
        MetricField { chart, f }
    }

    pub fn from_fn<F>(chart: Chart, f: F) -> Self
    where
        F: Fn(&[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    {
        MetricField { chart, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn eval_dual(&self, p: &[Dual]) -> Vec<Dual> {
        (self.f)(p)
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        linalg::to_f64(&self.eval_dual(&constants(p)))
    }

    pub fn function(&self) -> VecFn {
        self.f.clone()
    }

    /// `∂_k g_{ij}`, laid out as `[(i * n + j) * n + k]`.
    pub fn deriv(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let jac = jacobian(|q: &[Dual]| self.eval_dual(q), &constants(p));
        let mut out = vec![0.0; n * n * n];
        for (e, row) in jac.iter().enumerate() {
            for (k, d) in row.iter().enumerate() {
                out[e * n + k] = d.value();
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> MetricField {
        let f = self.f.clone();
        MetricField::from_fn(self.chart.clone(), move |p| f(p).iter().map(|v| v * factor).collect())
    }

    /// Identity metric on `chart`.
    pub fn euclidean(chart: Chart) -> MetricField {
        let n = chart.dim();
        MetricField::from_fn(chart, move |_| linalg::identity(n))
    }

    /// `g(X, Y)` at a float point.
    pub fn inner(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        linalg::bilinear_f64(&self.eval_dual(&constants(p)), u, v).value()
    }
}

/// Conformal factor `λ = 2 / (|x|² − 2c)`.
pub fn conformal_factor(c: f64, x: &[Dual]) -> Dual {
    (&x[0] * &x[0] + &x[1] * &x[1] - 2.0 * c).recip() * 2.0
}

/// The constant-curvature metric `(2/(|x|²−2c))²·I` of energy level `c`.
pub fn conformal_metric(c: f64) -> MetricField {
    conformal_metric_on(Chart::StereoPlane(c), c)
}

/// The same metric on the second chart of the regime atlas (`c ≠ 0`).
pub fn conformal_metric_dual(c: f64) -> MetricField {
    conformal_metric_on(Chart::StereoPlaneDual(c), c)
}

fn conformal_metric_on(chart: Chart, c: f64) -> MetricField {
    MetricField::from_fn(chart, move |x| {
        let l2 = conformal_factor(c, x).square();
        linalg::scaled_identity(2, &l2)
    })
}

/// Round metric `r²(sin²θ dφ² + dθ²)` of the sphere of curvature `−2c`.
pub fn sphere_spherical_metric(c: f64) -> MetricField {
    let r2 = 1.0 / (-2.0 * c);
    MetricField::from_fn(Chart::SphericalSphere(c), move |p| {
        let s = p[1].sin();
        vec![s.square() * r2, Dual::zero(), Dual::zero(), Dual::constant(r2)]
    })
}

/// Half-plane metric `(dx² + dy²)/(2c y²)` of curvature `−2c`.
pub fn half_plane_metric(c: f64) -> MetricField {
    MetricField::from_fn(Chart::HalfPlane(c), move |p| {
        let f = (p[1].square() * (2.0 * c)).recip();
        linalg::scaled_identity(2, &f)
    })
}

/// Levi-Civita connection, `Γ^k_{ij}` at `[(k * n + i) * n + j]`.
pub fn christoffel_dual(g: &MetricField, p: &[Dual]) -> Vec<Dual> {
    let n = g.dim();
    let gm = g.eval_dual(p);
    let ginv = linalg::inverse(&gm, n);
    // dg[(i*n + j)][l] = ∂_l g_ij
    let dg = jacobian(|q: &[Dual]| g.eval_dual(q), p);
    let mut gamma = vec![Dual::zero(); n * n * n];
    // lowered Γ_{l i j} = ½(∂_j g_li + ∂_i g_lj − ∂_l g_ij)
    let mut lower = vec![Dual::zero(); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = (&dg[idx(n, l, i)][j] + &dg[idx(n, l, j)][i] - &dg[idx(n, i, j)][l]) * 0.5;
                lower[(l * n + i) * n + j] = v.clone();
                lower[(l * n + j) * n + i] = v;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: Dual = (0..n).map(|l| &ginv[idx(n, k, l)] * &lower[(l * n + i) * n + j]).sum();
                gamma[(k * n + i) * n + j] = v.clone();
                gamma[(k * n + j) * n + i] = v;
            }
        }
    }
    gamma
}

fn check_domain(g: &MetricField, p: &ChartPoint) -> Result<()> {
    if p.chart != g.chart {
        return Err(Error::ChartMismatch(p.chart.to_string(), g.chart.to_string()));
    }
    if !g.chart.contains(&p.coords) {
        return Err(Error::OutOfDomain { chart: g.chart.to_string(), point: p.coords.clone() });
    }
    Ok(())
}

pub fn christoffel(g: &MetricField, p: &ChartPoint) -> Result<Vec<f64>> {
    check_domain(g, p)?;
    Ok(linalg::to_f64(&christoffel_dual(g, &constants(&p.coords))))
}

/// Riemann tensor with all indices lowered, `R_{abcd}` at
/// `[((a * n + b) * n + c) * n + d]`, with the convention
/// `R(∂_c, ∂_d)∂_b = R^a_{bcd} ∂_a` so that the sectional curvature is
/// `R_{abcd} u^a v^b u^c v^d / |u ∧ v|²`.
pub fn riemann_lowered_dual(g: &MetricField, p: &[Dual]) -> Vec<Dual> {
    let n = g.dim();
    let gamma = christoffel_dual(g, p);
    let dgamma = jacobian(|q: &[Dual]| christoffel_dual(g, q), p);
    let gm = g.eval_dual(p);
    let gi = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
    let mut upper = vec![Dual::zero(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = &dgamma[gi(a, d, b)][c] - &dgamma[gi(a, c, b)][d];
                    for e in 0..n {
                        v += &gamma[gi(a, c, e)] * &gamma[gi(e, d, b)];
                        v -= &gamma[gi(a, d, e)] * &gamma[gi(e, c, b)];
                    }
                    upper[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    let mut lower = vec![Dual::zero(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    lower[((a * n + b) * n + c) * n + d] = (0..n).map(|e| &gm[idx(n, a, e)] * &upper[((e * n + b) * n + c) * n + d]).sum();
                }
            }
        }
    }
    lower
}

/// Sectional curvature of the plane spanned by `u`, `v` at a float point.
pub fn sectional_curvature(g: &MetricField, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let n = g.dim();
    let r = linalg::to_f64(&riemann_lowered_dual(g, &constants(p)));
    sectional_from(&r, &g.eval(p), n, u, v)
}

fn sectional_from(r: &[f64], gm: &[f64], n: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut num = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    num += r[((a * n + b) * n + c) * n + d] * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    let ip = |x: &[f64], y: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gm[i * n + j] * x[i] * y[j];
            }
        }
        s
    };
    num / (ip(u, u) * ip(v, v) - ip(u, v).powi(2))
}

/// Sectional curvatures of the coordinate planes `(∂_i, ∂_j)`, `i < j`.
pub fn coordinate_sectional_curvatures(g: &MetricField, p: &[f64]) -> Vec<f64> {
    let n = g.dim();
    let r = linalg::to_f64(&riemann_lowered_dual(g, &constants(p)));
    let gm = g.eval(p);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut u = vec![0.0; n];
            let mut v = vec![0.0; n];
            u[i] = 1.0;
            v[j] = 1.0;
            out.push(sectional_from(&r, &gm, n, &u, &v));
        }
    }
    out
}

/// Sectional curvatures on the coordinate planes plus the planes spanned by
/// pairs of the given extra directions.
pub fn sectional_curvatures_with(g: &MetricField, p: &[f64], extra: &[Vec<f64>]) -> Vec<f64> {
    let n = g.dim();
    let r = linalg::to_f64(&riemann_lowered_dual(g, &constants(p)));
    let gm = g.eval(p);
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    dirs.extend(extra.iter().cloned());
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        for j in (i + 1)..dirs.len() {
            out.push(sectional_from(&r, &gm, n, &dirs[i], &dirs[j]));
        }
    }
    out
}

/// Gauss curvature of a 2-D metric through the Riemann tensor.
pub fn gauss_curvature(g: &MetricField, p: &ChartPoint) -> Result<f64> {
    check_domain(g, p)?;
    if g.dim() != 2 {
        return Err(Error::UnsupportedDimension(g.dim()));
    }
    Ok(sectional_curvature(g, &p.coords, &[1.0, 0.0], &[0.0, 1.0]))
}

/// Transition from the regime chart to its second chart (and back; the map
/// is an involution). For `c = 0` this is `x ↦ 2x/|x|²`; otherwise
/// `x ↦ 2|c|·(x₁, −x₂)/|x|²`.
pub fn chart_transition(c: f64, x: &[Dual]) -> Vec<Dual> {
    let r2 = &x[0] * &x[0] + &x[1] * &x[1];
    if c == 0.0 {
        let f = r2.recip() * 2.0;
        vec![&x[0] * &f, &x[1] * &f]
    } else {
        let f = r2.recip() * (2.0 * c.abs());
        vec![&x[0] * &f, -(&x[1] * &f)]
    }
}

pub fn chart_transition_f64(c: f64, x: &[f64]) -> [f64; 2] {
    let v = chart_transition(c, &constants(x));
    [v[0].value(), v[1].value()]
}

/// Embedding of the regime chart into the model surface (generic in the
/// scalar so pullbacks can be taken by AD).
pub fn stereographic_embedding(c: f64, x: &[Dual]) -> Vec<Dual> {
    let r2x = &x[0] * &x[0] + &x[1] * &x[1];
    if c < 0.0 {
        // ξ = r²x, inverse stereographic projection from the north pole
        let r = 1.0 / (-2.0 * c).sqrt();
        let rr = r * r;
        let xi: Vec<Dual> = x.iter().map(|v| v * rr).collect();
        let s = &r2x * (rr * rr);
        let den = (&s + rr).recip();
        vec![&xi[0] * &den * (2.0 * rr), &xi[1] * &den * (2.0 * rr), (&s - rr) * &den * r]
    } else if c == 0.0 {
        let f = r2x.recip() * 2.0;
        vec![&x[0] * &f, &x[1] * &f, Dual::zero()]
    } else {
        // ξ = x/|x|² lands in the Poincaré disk of radius R = 1/√(2c)
        let big_r = 1.0 / (2.0 * c).sqrt();
        let rr = big_r * big_r;
        let inv = r2x.recip();
        let xi: Vec<Dual> = x.iter().map(|v| v * &inv).collect();
        let s = &inv; // |ξ|² = 1/|x|²
        let den = (rr - s).recip();
        vec![&xi[0] * &den * (2.0 * rr), &xi[1] * &den * (2.0 * rr), (s + rr) * &den * big_r]
    }
}

/// Signature of the ambient metric that induces the surface metric.
pub fn ambient_signature(c: f64) -> [f64; 3] {
    if c > 0.0 {
        [1.0, 1.0, -1.0]
    } else {
        [1.0, 1.0, 1.0]
    }
}

/// Maps a regime-chart point onto the model surface: the sphere of radius
/// `1/√(2|c|)` (`c < 0`), the involuted plane (`c = 0`, third coordinate
/// zero) or the upper hyperboloid sheet `x²+y²−z² = −1/(2c)` (`c > 0`).
pub fn stereographic_map(c: f64, x: &[f64]) -> Result<[f64; 3]> {
    let chart = Chart::StereoPlane(c);
    if !chart.contains(x) {
        return Err(Error::OutOfDomain { chart: chart.to_string(), point: x.to_vec() });
    }
    let v = stereographic_embedding(c, &constants(x));
    Ok([v[0].value(), v[1].value(), v[2].value()])
}

/// Pullback of the ambient metric through [`stereographic_embedding`].
pub fn stereographic_pullback(c: f64, x: &[f64]) -> [f64; 4] {
    let j = crate::ad::jacobian_f64(|q: &[Dual]| stereographic_embedding(c, q), x);
    let eta = ambient_signature(c);
    let mut out = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            out[a * 2 + b] = (0..3).map(|k| eta[k] * j[k][a] * j[k][b]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: f64, x: &[f64]) -> ChartPoint {
        ChartPoint::new(Chart::StereoPlane(c), x.to_vec()).unwrap()
    }

    #[test]
    fn conformal_metric_values() {
        assert_eq!(conformal_metric(-0.5).eval(&[0.0, 0.0]), vec![4.0, 0.0, 0.0, 4.0]);
        assert_eq!(conformal_metric(0.0).eval(&[1.0, 0.0]), vec![4.0, 0.0, 0.0, 4.0]);
        assert!(Chart::StereoPlane(0.3).contains(&[1.0, 0.0]));
        let g = conformal_metric(0.3).eval(&[1.0, 0.0]);
        assert!((g[0] - 25.0).abs() < 1e-12 && (g[3] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn domain_margins() {
        assert!(!Chart::StereoPlane(0.0).contains(&[0.0, 0.0]));
        assert!(!Chart::StereoPlane(0.5).contains(&[1.0, 0.0]));
        assert!(Chart::StereoPlane(-2.0).contains(&[0.0, 0.0]));
        assert!(Chart::StereoPlaneDual(0.5).contains(&[0.0, 0.0]));
        assert!(!Chart::StereoPlaneDual(0.5).contains(&[1.0, 0.0]));
        assert!(matches!(
            gauss_curvature(&conformal_metric(0.0), &ChartPoint { chart: Chart::StereoPlane(0.0), coords: vec![0.0, 0.0] }),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn gauss_curvature_examples() {
        let k = gauss_curvature(&conformal_metric(-0.5), &pt(-0.5, &[0.3, -0.7])).unwrap();
        assert!((k - 1.0).abs() < 1e-8, "{k}");
        let k = gauss_curvature(&conformal_metric(0.0), &pt(0.0, &[2.0, 1.0])).unwrap();
        assert!(k.abs() < 1e-8, "{k}");
        let k = gauss_curvature(&conformal_metric(0.4), &pt(0.4, &[1.2, 0.5])).unwrap();
        assert!((k + 0.8).abs() < 1e-8, "{k}");
    }

    #[test]
    fn model_metrics_have_expected_curvature() {
        let k = gauss_curvature(&sphere_spherical_metric(-2.0), &ChartPoint::new(Chart::SphericalSphere(-2.0), vec![0.3, 1.1]).unwrap())
            .unwrap();
        assert!((k - 4.0).abs() < 1e-10);
        let k = gauss_curvature(&half_plane_metric(0.3), &ChartPoint::new(Chart::HalfPlane(0.3), vec![0.3, 1.7]).unwrap()).unwrap();
        assert!((k + 0.6).abs() < 1e-10);
    }

    #[test]
    fn christoffel_vanishes_at_critical_point_of_conformal_factor() {
        let gamma = christoffel(&conformal_metric(-0.5), &pt(-0.5, &[0.0, 0.0])).unwrap();
        assert!(gamma.iter().all(|v| v.abs() < 1e-15));
        let flat = MetricField::euclidean(Chart::InvolutedPlane);
        let p = ChartPoint::new(Chart::InvolutedPlane, vec![0.4, 2.0]).unwrap();
        assert!(christoffel(&flat, &p).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn stereographic_examples() {
        let s = stereographic_map(-0.5, &[0.0, 0.0]).unwrap();
        assert!((s[0]).abs() < 1e-15 && (s[1]).abs() < 1e-15 && (s[2] + 1.0).abs() < 1e-15);
        let s = stereographic_map(0.0, &[2.0, 0.0]).unwrap();
        assert_eq!(&s[..2], &[1.0, 0.0]);
        let s = stereographic_map(0.5, &[2.0, 0.0]).unwrap();
        assert!((s[0] * s[0] + s[1] * s[1] - s[2] * s[2] + 1.0).abs() < 1e-12);
        assert!(s[2] > 0.0);
        assert!(stereographic_map(0.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn transition_is_an_isometric_involution() {
        for &c in &[-0.5, -2.0, 0.0, 0.3] {
            let x = if c > 0.0 { [1.1, -0.4] } else { [0.7, 0.2] };
            let y = chart_transition_f64(c, &x);
            let back = chart_transition_f64(c, &y);
            assert!(linalg::max_abs_diff(&back, &x) < 1e-14);
            let j = crate::ad::jacobian_f64(|q: &[Dual]| chart_transition(c, q), &x);
            let target = if c == 0.0 { MetricField::euclidean(Chart::InvolutedPlane).eval(&y) } else { conformal_metric_dual(c).eval(&y) };
            let g = conformal_metric(c).eval(&x);
            for a in 0..2 {
                for b in 0..2 {
                    let pull: f64 =
                        (0..2).flat_map(|k| (0..2).map(move |l| (k, l))).map(|(k, l)| j[k][a] * target[k * 2 + l] * j[l][b]).sum();
                    assert!((pull - g[a * 2 + b]).abs() < 1e-12 * g[0].abs().max(1.0));
                }
            }
        }
    }
}
