//! Differential forms and vector fields on a chart, stored as coefficient
//! closures, with the operations needed for Beltrami and contact checks.
//!
//! A k-form on an n-chart keeps its `C(n, k)` coefficients in lexicographic
//! order of the strictly increasing index tuples. All identities are checked
//! pointwise: derivatives come from evaluating the coefficient closures at
//! [`Dual`] points.
//!
//! Orientation: the coordinate volume `dx¹∧…∧dxⁿ` is positive.

use crate::ad::{constants, jacobian, Dual, ScalarFn, VecFn};
use crate::chart::{Chart, MetricField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::report::VerificationReport;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// Default sample count for pointwise identity sweeps.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Default tolerance for AD-based identities.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Volume coefficients below this are treated as degenerate.
pub const VOLUME_EPS: f64 = 1e-12;

/// Strictly increasing `k`-tuples of `0..n`, lexicographic.
pub fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

fn tuple_position(n: usize, tuple: &[usize]) -> Option<usize> {
    index_tuples(n, tuple.len()).iter().position(|t| t == tuple)
}

/// Sign of the permutation sorting `seq` (0 if it has repeats).
fn permutation_sign(seq: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] == seq[j] {
                return 0.0;
            }
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn require_same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a != b {
        return Err(Error::ChartMismatch(a.to_string(), b.to_string()));
    }
    Ok(())
}

#[derive(Clone)]
pub struct ScalarField {
    pub chart: Chart,
    f: ScalarFn,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.chart)
    }
}

impl ScalarField {
    pub fn from_fn<F>(chart: Chart, f: F) -> Self
    where
        F: Fn(&[Dual]) -> Dual + Send + Sync + 'static,
    {
        ScalarField { chart, f: Arc::new(f) }
    }

    pub fn constant(chart: Chart, v: f64) -> Self {
        ScalarField::from_fn(chart, move |_| Dual::constant(v))
    }

    pub fn eval_dual(&self, p: &[Dual]) -> Dual {
        (self.f)(p)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.eval_dual(&constants(p)).value()
    }

    pub fn function(&self) -> ScalarFn {
        self.f.clone()
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        crate::ad::gradient(|q: &[Dual]| self.eval_dual(q), &constants(p)).iter().map(Dual::value).collect()
    }

    /// As a 0-form.
    pub fn to_form(&self) -> KForm {
        let f = self.f.clone();
        KForm::from_fn(self.chart.clone(), 0, move |p| vec![f(p)])
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.f.clone(), other.f.clone());
        ScalarField::from_fn(self.chart.clone(), move |p| a(p) * b(p))
    }

    pub fn recip(&self) -> ScalarField {
        let a = self.f.clone();
        ScalarField::from_fn(self.chart.clone(), move |p| a(p).recip())
    }
}

#[derive(Clone)]
pub struct VectorField {
    pub chart: Chart,
    f: VecFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({})", self.chart)
    }
}

impl VectorField {
    pub fn from_fn<F>(chart: Chart, f: F) -> Self
    where
        F: Fn(&[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    {
        VectorField { chart, f: Arc::new(f) }
    }

    pub fn new(chart: Chart, f: VecFn) -> Self {
        VectorField { chart, f }
    }

    pub fn zero(chart: Chart) -> Self {
        let n = chart.dim();
        VectorField::from_fn(chart, move |_| vec![Dual::zero(); n])
    }

    /// Constant field.
    pub fn constant(chart: Chart, v: Vec<f64>) -> Self {
        VectorField::from_fn(chart, move |_| constants(&v))
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

    pub fn component(&self, i: usize) -> ScalarField {
        let f = self.f.clone();
        ScalarField::from_fn(self.chart.clone(), move |p| f(p).swap_remove(i))
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let f = self.f.clone();
        VectorField::from_fn(self.chart.clone(), move |p| f(p).iter().map(|v| v * s).collect())
    }

    pub fn scaled_by(&self, s: &ScalarField) -> VectorField {
        let (f, g) = (self.f.clone(), s.function());
        VectorField::from_fn(self.chart.clone(), move |p| {
            let k = g(p);
            f(p).iter().map(|v| v * &k).collect()
        })
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let (f, g) = (self.f.clone(), other.f.clone());
        VectorField::from_fn(self.chart.clone(), move |p| f(p).iter().zip(g(p).iter()).map(|(a, b)| a + b).collect())
    }
}

#[derive(Clone)]
pub struct KForm {
    pub chart: Chart,
    pub degree: usize,
    f: VecFn,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(degree {}, {})", self.degree, self.chart)
    }
}

impl KForm {
    /// Form with coefficient closure returning `C(n, degree)` values.
    pub fn from_fn<F>(chart: Chart, degree: usize, f: F) -> Self
    where
        F: Fn(&[Dual]) -> Vec<Dual> + Send + Sync + 'static,
    {
        KForm { chart, degree, f: Arc::new(f) }
    }

    pub fn new(chart: Chart, degree: usize, f: VecFn) -> Result<Self> {
        if degree > chart.dim() {
            return Err(Error::DegreeOverflow { degree, dim: chart.dim() });
        }
        Ok(KForm { chart, degree, f })
    }

    /// `dx^{i₁}∧…∧dx^{i_k}` for strictly increasing indices.
    pub fn basis(chart: Chart, indices: &[usize]) -> Result<Self> {
        let n = chart.dim();
        let pos = tuple_position(n, indices).ok_or(Error::DegreeOverflow { degree: indices.len(), dim: n })?;
        let len = index_tuples(n, indices.len()).len();
        Ok(KForm::from_fn(chart, indices.len(), move |_| {
            let mut v = vec![Dual::zero(); len];
            v[pos] = Dual::one();
            v
        }))
    }

    /// Coordinate volume `dx¹∧…∧dxⁿ`.
    pub fn coordinate_volume(chart: Chart) -> KForm {
        KForm::from_fn(chart, 0, |_| vec![Dual::one()]).with_degree_of_volume()
    }

    fn with_degree_of_volume(mut self) -> KForm {
        self.degree = self.chart.dim();
        self
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

    /// Coefficient of the given increasing index tuple as a scalar field.
    pub fn coefficient(&self, indices: &[usize]) -> Option<ScalarField> {
        let pos = tuple_position(self.dim(), indices)?;
        if indices.len() != self.degree {
            return None;
        }
        let f = self.f.clone();
        Some(ScalarField::from_fn(self.chart.clone(), move |p| f(p).swap_remove(pos)))
    }

    /// Evaluates the form on `degree` tangent vectors at `p`.
    pub fn eval_on(&self, p: &[f64], vectors: &[Vec<f64>]) -> f64 {
        let coeffs = self.eval(p);
        apply_form(&coeffs, self.dim(), self.degree, vectors)
    }

    pub fn scaled(&self, s: f64) -> KForm {
        let f = self.f.clone();
        KForm::from_fn(self.chart.clone(), self.degree, move |p| f(p).iter().map(|v| v * s).collect())
    }

    pub fn scaled_by(&self, s: &ScalarField) -> KForm {
        let (f, g) = (self.f.clone(), s.function());
        KForm::from_fn(self.chart.clone(), self.degree, move |p| {
            let k = g(p);
            f(p).iter().map(|v| v * &k).collect()
        })
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        require_same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::ChartMismatch(format!("degree {}", self.degree), format!("degree {}", other.degree)));
        }
        let (f, g) = (self.f.clone(), other.f.clone());
        Ok(KForm::from_fn(self.chart.clone(), self.degree, move |p| f(p).iter().zip(g(p).iter()).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        self.add(&other.scaled(-1.0))
    }
}

/// `ω(v₁, …, v_k) = Σ_I ω_I det[v_r^{I_s}]`.
pub fn apply_form(coeffs: &[f64], n: usize, k: usize, vectors: &[Vec<f64>]) -> f64 {
    if k == 0 {
        return coeffs[0];
    }
    let tuples = index_tuples(n, k);
    let mut acc = 0.0;
    for (pos, t) in tuples.iter().enumerate() {
        let m: Vec<Dual> = (0..k).flat_map(|r| t.iter().map(move |&s| (r, s))).map(|(r, s)| Dual::constant(vectors[r][s])).collect();
        acc += coeffs[pos] * linalg::determinant(&m, k).value();
    }
    acc
}

/// A top-degree form used as the volume in curl and divergence.
#[derive(Clone, Debug)]
pub struct VolumeForm {
    pub form: KForm,
}

impl VolumeForm {
    pub fn new(form: KForm) -> Result<Self> {
        if form.degree != form.dim() {
            return Err(Error::DegreeOverflow { degree: form.degree, dim: form.dim() });
        }
        Ok(VolumeForm { form })
    }

    pub fn coordinate(chart: Chart) -> Self {
        VolumeForm { form: KForm::coordinate_volume(chart) }
    }

    pub fn chart(&self) -> &Chart {
        &self.form.chart
    }

    pub fn coefficient_dual(&self, p: &[Dual]) -> Dual {
        self.form.eval_dual(p).swap_remove(0)
    }

    pub fn coefficient(&self, p: &[f64]) -> f64 {
        self.coefficient_dual(&constants(p)).value()
    }

    pub fn scaled_by(&self, f: &ScalarField) -> VolumeForm {
        VolumeForm { form: self.form.scaled_by(f) }
    }

    pub fn scaled(&self, s: f64) -> VolumeForm {
        VolumeForm { form: self.form.scaled(s) }
    }
}

pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    require_same_chart(&a.chart, &b.chart)?;
    let n = a.dim();
    let (p, q) = (a.degree, b.degree);
    if p + q > n {
        return Err(Error::DegreeOverflow { degree: p + q, dim: n });
    }
    let ta = index_tuples(n, p);
    let tb = index_tuples(n, q);
    let tk = index_tuples(n, p + q);
    let mut table = Vec::new();
    for (ia, i) in ta.iter().enumerate() {
        for (ib, j) in tb.iter().enumerate() {
            let mut merged: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
            let sign = permutation_sign(&merged);
            if sign == 0.0 {
                continue;
            }
            merged.sort_unstable();
            let ik = tk.iter().position(|t| *t == merged).expect("sorted tuple");
            table.push((ia, ib, ik, sign));
        }
    }
    let len = tk.len();
    let (fa, fb) = (a.f.clone(), b.f.clone());
    Ok(KForm::from_fn(a.chart.clone(), p + q, move |x| {
        let ca = fa(x);
        let cb = fb(x);
        let mut out = vec![Dual::zero(); len];
        for &(ia, ib, ik, sign) in &table {
            out[ik] += &ca[ia] * &cb[ib] * sign;
        }
        out
    }))
}

pub fn exterior_derivative(a: &KForm) -> Result<KForm> {
    let n = a.dim();
    let k = a.degree;
    if k >= n {
        return Err(Error::DegreeOverflow { degree: k + 1, dim: n });
    }
    let ta = index_tuples(n, k);
    let tk = index_tuples(n, k + 1);
    // d(f dx^I) = Σ_j ∂_j f dx^j ∧ dx^I
    let mut table = Vec::new();
    for (ik, t) in tk.iter().enumerate() {
        for m in 0..t.len() {
            let j = t[m];
            let rest: Vec<usize> = t.iter().enumerate().filter(|(s, _)| *s != m).map(|(_, v)| *v).collect();
            let ia = ta.iter().position(|u| *u == rest).expect("sub-tuple");
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            table.push((ik, j, ia, sign));
        }
    }
    let len = tk.len();
    let fa = a.f.clone();
    Ok(KForm::from_fn(a.chart.clone(), k + 1, move |x| {
        let jac = jacobian(|q: &[Dual]| fa(q), x);
        let mut out = vec![Dual::zero(); len];
        for &(ik, j, ia, sign) in &table {
            out[ik] += &jac[ia][j] * sign;
        }
        out
    }))
}

pub fn interior_product(x: &VectorField, a: &KForm) -> Result<KForm> {
    require_same_chart(&x.chart, &a.chart)?;
    let n = a.dim();
    let k = a.degree;
    if k == 0 {
        return Err(Error::DegreeUnderflow);
    }
    let ta = index_tuples(n, k);
    let tk = index_tuples(n, k - 1);
    // ι_X(f dx^{i₁}∧…∧dx^{i_k}) = Σ_m (−1)^m X^{i_m} f dx^{I∖i_m}
    let mut table = Vec::new();
    for (ia, t) in ta.iter().enumerate() {
        for m in 0..t.len() {
            let rest: Vec<usize> = t.iter().enumerate().filter(|(s, _)| *s != m).map(|(_, v)| *v).collect();
            let ik = tk.iter().position(|u| *u == rest).expect("sub-tuple");
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            table.push((ia, t[m], ik, sign));
        }
    }
    let len = tk.len();
    let (fx, fa) = (x.f.clone(), a.f.clone());
    Ok(KForm::from_fn(a.chart.clone(), k - 1, move |p| {
        let xv = fx(p);
        let ca = fa(p);
        let mut out = vec![Dual::zero(); len];
        for &(ia, comp, ik, sign) in &table {
            out[ik] += &xv[comp] * &ca[ia] * sign;
        }
        out
    }))
}

/// `α(X)` as a scalar field.
pub fn pairing(alpha: &KForm, x: &VectorField) -> Result<ScalarField> {
    let f = interior_product(x, alpha)?;
    if f.degree != 0 {
        return Err(Error::DegreeOverflow { degree: alpha.degree, dim: 1 });
    }
    let g = f.function();
    Ok(ScalarField::from_fn(alpha.chart.clone(), move |p| g(p).swap_remove(0)))
}

/// `ι_X g`, the metric dual 1-form.
pub fn flat(x: &VectorField, g: &MetricField) -> Result<KForm> {
    require_same_chart(&x.chart, &g.chart)?;
    let n = g.dim();
    let (fx, fg) = (x.f.clone(), g.function());
    Ok(KForm::from_fn(x.chart.clone(), 1, move |p| {
        let xv = fx(p);
        let gm = fg(p);
        (0..n).map(|j| (0..n).map(|i| &gm[i * n + j] * &xv[i]).sum()).collect()
    }))
}

/// Inverse of [`flat`].
pub fn sharp(a: &KForm, g: &MetricField) -> Result<VectorField> {
    require_same_chart(&a.chart, &g.chart)?;
    if a.degree != 1 {
        return Err(Error::DegreeOverflow { degree: a.degree, dim: 1 });
    }
    let n = g.dim();
    let (fa, fg) = (a.f.clone(), g.function());
    Ok(VectorField::from_fn(a.chart.clone(), move |p| {
        let ginv = linalg::inverse(&fg(p), n);
        linalg::mat_vec(&ginv, &fa(p))
    }))
}

fn curl_from_two_form(beta: &[Dual], m: &Dual) -> Vec<Dual> {
    // ι_Z(m dx¹∧dx²∧dx³) has coefficients (m Z³, −m Z², m Z¹) on (12, 13, 23);
    // equating with β solves the 3×3 system.
    let inv = m.recip();
    vec![&beta[2] * &inv, -(&beta[1] * &inv), &beta[0] * &inv]
}

/// Curl with respect to `(g, μ)`: the field with `ι_{curl X} μ = d ι_X g`.
/// Only dimension 3 is supported.
pub fn curl(x: &VectorField, g: &MetricField, mu: &VolumeForm) -> Result<VectorField> {
    require_same_chart(&x.chart, &g.chart)?;
    require_same_chart(&x.chart, mu.chart())?;
    if x.dim() != 3 {
        return Err(Error::UnsupportedDimension(x.dim()));
    }
    let beta = exterior_derivative(&flat(x, g)?)?;
    let (fb, fm) = (beta.function(), mu.form.function());
    Ok(VectorField::from_fn(x.chart.clone(), move |p| {
        let b = fb(p);
        let m = fm(p).swap_remove(0);
        curl_from_two_form(&b, &m)
    }))
}

/// Curl at a float point, rejecting degenerate volume coefficients.
pub fn curl_at(x: &VectorField, g: &MetricField, mu: &VolumeForm, p: &[f64]) -> Result<Vec<f64>> {
    let m = mu.coefficient(p);
    if m.abs() < VOLUME_EPS {
        return Err(Error::DegenerateVolume(m.abs()));
    }
    Ok(curl(x, g, mu)?.eval(p))
}

/// The function `q` with `L_X μ = d ι_X μ = q μ`.
pub fn divergence(x: &VectorField, mu: &VolumeForm) -> Result<ScalarField> {
    require_same_chart(&x.chart, mu.chart())?;
    let lie = exterior_derivative(&interior_product(x, &mu.form)?)?;
    let (fl, fm) = (lie.function(), mu.form.function());
    Ok(ScalarField::from_fn(x.chart.clone(), move |p| {
        let l = fl(p).swap_remove(0);
        let m = fm(p).swap_remove(0);
        l / m
    }))
}

pub fn divergence_at(x: &VectorField, mu: &VolumeForm, p: &[f64]) -> Result<f64> {
    let m = mu.coefficient(p);
    if m.abs() < VOLUME_EPS {
        return Err(Error::DegenerateVolume(m.abs()));
    }
    Ok(divergence(x, mu)?.eval(p))
}

/// `α ∧ (dα)ⁿ` on a `(2n+1)`-chart.
pub fn contact_volume(alpha: &KForm) -> Result<KForm> {
    let dim = alpha.dim();
    if alpha.degree != 1 || dim % 2 == 0 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let da = exterior_derivative(alpha)?;
    let mut acc = alpha.clone();
    for _ in 0..(dim - 1) / 2 {
        acc = wedge(&acc, &da)?;
    }
    Ok(acc)
}

/// Evaluates `f` at every probe point in parallel, preserving order.
pub fn sweep<T, F>(probes: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    probes.par_iter().map(|p| f(p)).collect()
}

/// Reports the smallest `|α∧(dα)ⁿ|` coefficient over the probes relative to
/// the coordinate volume; passes iff it exceeds `threshold`.
pub fn contact_check(alpha: &KForm, probes: &[Vec<f64>], threshold: f64) -> VerificationReport {
    let vol = match contact_volume(alpha) {
        Ok(v) => v,
        Err(e) => {
            return VerificationReport::from_lower_bound("contact", None, &[], threshold)
                .with_note(format!("not a 1-form on an odd-dimensional chart: {e}"))
        }
    };
    let values = sweep(probes, |p| vol.eval(p)[0].abs());
    VerificationReport::from_lower_bound("contact", None, &values, threshold)
}

/// Checks the rescaled-volume statements for a field with `curl X = f X`
/// with respect to `(g, μ)`: `X` preserves `f μ`, has curl `X` with respect
/// to `(g, f μ)`, and `L_X μ = d(1/f) ∧ d ι_X g`.
pub fn rescaled_volume_check(
    x: &VectorField,
    g: &MetricField,
    mu: &VolumeForm,
    f: &ScalarField,
    probes: &[Vec<f64>],
    tolerance: f64,
) -> Result<VerificationReport> {
    for p in probes {
        let v = f.eval(p);
        if v.abs() < VOLUME_EPS {
            return Err(Error::ZeroFactor(v.abs()));
        }
    }
    let mu_t = mu.scaled_by(f);
    let curl_plain = curl(x, g, mu)?;
    let curl_t = curl(x, g, &mu_t)?;
    let div_t = divergence(x, &mu_t)?;
    let lie = exterior_derivative(&interior_product(x, &mu.form)?)?;
    let rhs = wedge(&exterior_derivative(&f.recip().to_form())?, &exterior_derivative(&flat(x, g)?)?)?;
    let rows = sweep(probes, |p| {
        let xv = x.eval(p);
        let fv = f.eval(p);
        let pre = linalg::max_abs_diff(&curl_plain.eval(p), &xv.iter().map(|v| v * fv).collect::<Vec<_>>());
        let c = linalg::max_abs_diff(&curl_t.eval(p), &xv);
        let d = div_t.eval(p).abs();
        let l = (lie.eval(p)[0] - rhs.eval(p)[0]).abs();
        (pre, c, d, l)
    });
    let mk = |name: &str, sel: fn(&(f64, f64, f64, f64)) -> f64| {
        let r: Vec<f64> = rows.iter().map(sel).collect();
        VerificationReport::from_residuals(name, None, &r, tolerance)
    };
    Ok(VerificationReport::combine(
        "rescaled_volume",
        None,
        &[
            mk("curl_equals_fx", |r| r.0),
            mk("rescaled_curl", |r| r.1),
            mk("rescaled_divergence", |r| r.2),
            mk("lie_derivative_identity", |r| r.3),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e3() -> Chart {
        Chart::Euclidean(3)
    }

    #[test]
    fn basis_wedge_and_self_wedge() {
        let c = Chart::Euclidean(2);
        let dx = KForm::basis(c.clone(), &[0]).unwrap();
        let dy = KForm::basis(c.clone(), &[1]).unwrap();
        let w = wedge(&dx, &dy).unwrap();
        assert_eq!(w.eval_on(&[0.3, 0.1], &[vec![1.0, 0.0], vec![0.0, 1.0]]), 1.0);
        let a = KForm::from_fn(e3(), 1, |p| vec![p[1].sin(), &p[0] * &p[2], p[0].exp()]);
        let aa = wedge(&a, &a).unwrap();
        assert!(aa.eval(&[0.2, 0.7, -1.1]).iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(wedge(&w, &dx), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn exterior_derivative_examples() {
        let c = Chart::Euclidean(2);
        let k = ScalarField::constant(c.clone(), 3.0).to_form();
        assert!(exterior_derivative(&k).unwrap().eval(&[1.0, 2.0]).iter().all(|v| *v == 0.0));
        let x1dx2 = KForm::from_fn(c.clone(), 1, |p| vec![Dual::zero(), p[0].clone()]);
        assert_eq!(exterior_derivative(&x1dx2).unwrap().eval(&[0.4, -3.0]), vec![1.0]);
        let top = KForm::coordinate_volume(c);
        assert!(exterior_derivative(&top).is_err());
    }

    #[test]
    fn interior_product_examples() {
        let c = Chart::Euclidean(2);
        let area = KForm::basis(c.clone(), &[0, 1]).unwrap();
        let d1 = VectorField::constant(c.clone(), vec![1.0, 0.0]);
        assert_eq!(interior_product(&d1, &area).unwrap().eval(&[0.0, 0.0]), vec![0.0, 1.0]);
        let x = VectorField::from_fn(e3(), |p| vec![p[1].clone(), p[2].sin(), &p[0] * &p[0]]);
        let mu = KForm::coordinate_volume(e3());
        let twice = interior_product(&x, &interior_product(&x, &mu).unwrap()).unwrap();
        assert!(twice.eval(&[0.3, 0.2, 0.9]).iter().all(|v| v.abs() < 1e-15));
        let zero_form = ScalarField::constant(c, 1.0).to_form();
        assert!(matches!(interior_product(&d1, &zero_form), Err(Error::DegreeUnderflow)));
    }

    #[test]
    fn flat_examples() {
        let g = MetricField::euclidean(Chart::Euclidean(2));
        let d1 = VectorField::constant(Chart::Euclidean(2), vec![1.0, 0.0]);
        assert_eq!(flat(&d1, &g).unwrap().eval(&[0.5, 0.5]), vec![1.0, 0.0]);
        let g0 = crate::chart::conformal_metric(0.0);
        let d1 = VectorField::constant(Chart::StereoPlane(0.0), vec![1.0, 0.0]);
        assert_eq!(flat(&d1, &g0).unwrap().eval(&[1.0, 0.0]), vec![4.0, 0.0]);
        let other = VectorField::constant(Chart::Euclidean(2), vec![1.0, 0.0]);
        assert!(matches!(flat(&other, &g0), Err(Error::ChartMismatch(..))));
    }

    #[test]
    fn curl_examples() {
        let g = MetricField::euclidean(e3());
        let mu = VolumeForm::coordinate(e3());
        let zero = VectorField::zero(e3());
        assert_eq!(curl(&zero, &g, &mu).unwrap().eval(&[0.1, 0.2, 0.3]), vec![0.0, 0.0, 0.0]);
        let rot = VectorField::from_fn(e3(), |p| vec![-p[1].clone(), p[0].clone(), Dual::zero()]);
        assert_eq!(curl(&rot, &g, &mu).unwrap().eval(&[0.4, -1.0, 2.0]), vec![0.0, 0.0, 2.0]);
        let degenerate = VolumeForm::coordinate(e3()).scaled(0.0);
        assert!(matches!(curl_at(&rot, &g, &degenerate, &[0.0, 0.0, 0.0]), Err(Error::DegenerateVolume(_))));
        assert!(matches!(
            curl(
                &VectorField::zero(Chart::Euclidean(2)),
                &MetricField::euclidean(Chart::Euclidean(2)),
                &VolumeForm::coordinate(Chart::Euclidean(2))
            ),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn divergence_examples() {
        let mu = VolumeForm::coordinate(e3());
        let c = VectorField::constant(e3(), vec![1.0, -2.0, 0.5]);
        assert_eq!(divergence(&c, &mu).unwrap().eval(&[1.0, 1.0, 1.0]), 0.0);
        let x = VectorField::from_fn(e3(), |p| vec![p[0].clone(), Dual::zero(), Dual::zero()]);
        assert_eq!(divergence(&x, &mu).unwrap().eval(&[0.3, 2.0, -1.0]), 1.0);
    }

    #[test]
    fn contact_check_examples() {
        let probes: Vec<Vec<f64>> = (0..20).map(|i| vec![0.1 * i as f64, -0.2, 0.05 * i as f64]).collect();
        let dz = KForm::basis(e3(), &[2]).unwrap();
        assert!(!contact_check(&dz, &probes, 1e-3).pass);
        let std = KForm::from_fn(e3(), 1, |p| vec![Dual::zero(), p[0].clone(), Dual::one()]);
        let r = contact_check(&std, &probes, 1e-3);
        assert!(r.pass);
        assert!((r.min_value - 1.0).abs() < 1e-15 && (r.max_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaled_volume_reduces_to_plain_checks_for_unit_factor() {
        // ABC field: curl = X and divergence-free for the Euclidean structure
        let x = VectorField::from_fn(e3(), |p| {
            vec![p[2].sin() + p[1].cos() * 0.5, p[0].sin() * 0.3 + p[2].cos(), p[1].sin() * 0.5 + p[0].cos() * 0.3]
        });
        let g = MetricField::euclidean(e3());
        let mu = VolumeForm::coordinate(e3());
        let probes: Vec<Vec<f64>> = (0..10).map(|i| vec![0.3 * i as f64, 1.0 - 0.1 * i as f64, 0.7 * i as f64]).collect();
        let r = rescaled_volume_check(&x, &g, &mu, &ScalarField::constant(e3(), 1.0), &probes, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        let zero = ScalarField::constant(e3(), 0.0);
        assert!(matches!(rescaled_volume_check(&x, &g, &mu, &zero, &probes, 1e-10), Err(Error::ZeroFactor(_))));
    }

    #[test]
    fn index_tuples_are_lexicographic() {
        assert_eq!(index_tuples(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(index_tuples(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(index_tuples(2, 3).len(), 0);
    }
}
