//! Forward-mode automatic differentiation with nested dual numbers.
//!
//! A [`Dual`] is a real number extended by any number of independent
//! infinitesimals `ε_0, ε_1, …` with `ε_i² = 0` (distinct infinitesimals
//! commute and their products survive). Coefficients are stored densely,
//! indexed by the subset of infinitesimals they multiply, so a value carrying
//! `k` tags holds `2^k` coefficients.
//!
//! Differentiating with respect to an input seeds a tag that no argument uses
//! yet and extracts that tag's coefficient afterwards. Because the extracted
//! value is itself a [`Dual`], derivatives nest: Christoffel symbols computed
//! by AD inside a closure can be differentiated again for curvature.

use smallvec::{smallvec, SmallVec};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

type Coeffs = SmallVec<[f64; 8]>;

/// Shared vector-valued coefficient function of chart coordinates.
pub type VecFn = Arc<dyn Fn(&[Dual]) -> Vec<Dual> + Send + Sync>;
/// Shared scalar coefficient function of chart coordinates.
pub type ScalarFn = Arc<dyn Fn(&[Dual]) -> Dual + Send + Sync>;

/// Nested dual number; see the module documentation.
#[derive(Clone, PartialEq)]
pub struct Dual {
    c: Coeffs,
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.len() == 1 {
            write!(f, "Dual({})", self.c[0])
        } else {
            write!(f, "Dual{:?}", self.c.as_slice())
        }
    }
}

impl Default for Dual {
    fn default() -> Self {
        Dual::constant(0.0)
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { c: smallvec![v] }
    }

    pub fn zero() -> Self {
        Dual::constant(0.0)
    }

    pub fn one() -> Self {
        Dual::constant(1.0)
    }

    /// Real part.
    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Number of tag slots in use (`log2` of the coefficient count).
    #[inline]
    pub fn tags(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    fn widened(&self, len: usize) -> Coeffs {
        let mut c = self.c.clone();
        c.resize(len, 0.0);
        c
    }

    /// Returns `self + dir·ε_tag`.
    pub fn seeded(&self, tag: usize, dir: f64) -> Dual {
        let len = self.c.len().max(1 << (tag + 1));
        let mut c = self.widened(len);
        c[1 << tag] += dir;
        Dual { c }
    }

    /// Coefficient of `ε_tag`, as a dual number in the remaining tags.
    pub fn tangent(&self, tag: usize) -> Dual {
        let bit = 1usize << tag;
        if self.c.len() <= bit {
            return Dual::constant(0.0);
        }
        let mut c: Coeffs = smallvec![0.0; bit];
        for (s, v) in c.iter_mut().enumerate() {
            *v = self.c[s | bit];
        }
        Dual { c }.trimmed()
    }

    /// Drops every coefficient that involves `ε_tag` or a later tag.
    pub fn truncated(&self, tag: usize) -> Dual {
        let bit = 1usize << tag;
        if self.c.len() <= bit {
            return self.clone();
        }
        Dual { c: self.c[..bit].iter().copied().collect() }.trimmed()
    }

    fn trimmed(mut self) -> Dual {
        while self.c.len() > 1 {
            let half = self.c.len() / 2;
            if self.c[half..].iter().all(|v| *v == 0.0) {
                self.c.truncate(half);
            } else {
                break;
            }
        }
        self
    }

    fn mul_dense(a: &Coeffs, b: &Coeffs) -> Coeffs {
        let n = a.len().max(b.len());
        let mut out: Coeffs = smallvec![0.0; n];
        for (s, o) in out.iter_mut().enumerate() {
            // enumerate submasks of s
            let mut sub = s;
            let mut acc = 0.0;
            loop {
                let rest = s ^ sub;
                if sub < a.len() && rest < b.len() {
                    acc += a[sub] * b[rest];
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & s;
            }
            *o = acc;
        }
        out
    }

    /// Applies a scalar function given its derivatives `f, f', f'', …` at
    /// the real part. Only as many derivatives as tags are consulted.
    fn compose(&self, derivs: impl Fn(usize) -> f64) -> Dual {
        let k = self.tags();
        if k == 0 {
            return Dual::constant(derivs(0));
        }
        let mut nil = self.c.clone();
        nil[0] = 0.0;
        let mut out: Coeffs = smallvec![0.0; self.c.len()];
        out[0] = derivs(0);
        let mut power = nil.clone();
        let mut factorial = 1.0;
        for order in 1..=k {
            factorial *= order as f64;
            let d = derivs(order) / factorial;
            if d != 0.0 {
                for (o, p) in out.iter_mut().zip(power.iter()) {
                    *o += d * p;
                }
            }
            if order < k {
                power = Dual::mul_dense(&power, &nil);
            }
        }
        Dual { c: out }
    }

    pub fn sin(&self) -> Dual {
        let (s, c) = self.value().sin_cos();
        self.compose(|k| match k % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        })
    }

    pub fn cos(&self) -> Dual {
        let (s, c) = self.value().sin_cos();
        self.compose(|k| match k % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        })
    }

    pub fn exp(&self) -> Dual {
        let e = self.value().exp();
        self.compose(|_| e)
    }

    pub fn ln(&self) -> Dual {
        let x = self.value();
        self.compose(|k| {
            if k == 0 {
                x.ln()
            } else {
                let mut f = 1.0;
                for j in 1..k {
                    f *= j as f64;
                }
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * f / x.powi(k as i32)
            }
        })
    }

    /// Real power `self^r`; the real part must be positive unless `r` is an
    /// integer.
    pub fn powf(&self, r: f64) -> Dual {
        let x = self.value();
        self.compose(|k| {
            let mut coef = 1.0;
            for j in 0..k {
                coef *= r - j as f64;
            }
            if coef == 0.0 {
                0.0
            } else {
                coef * x.powf(r - k as f64)
            }
        })
    }

    pub fn powi(&self, n: i32) -> Dual {
        if n >= 0 && self.tags() == 0 {
            return Dual::constant(self.value().powi(n));
        }
        let x = self.value();
        self.compose(|k| {
            let mut coef = 1.0;
            for j in 0..k {
                coef *= (n - j as i32) as f64;
            }
            if coef == 0.0 {
                0.0
            } else {
                coef * x.powi(n - k as i32)
            }
        })
    }

    pub fn sqrt(&self) -> Dual {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Dual {
        let x = self.value();
        self.compose(|k| {
            let mut f = 1.0;
            for j in 1..=k {
                f *= j as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * f / x.powi(k as i32 + 1)
        })
    }

    /// `|x|`, differentiable away from zero.
    pub fn abs(&self) -> Dual {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn signum(&self) -> f64 {
        self.value().signum()
    }

    pub fn square(&self) -> Dual {
        self * self
    }
}

/// Smallest tag not used by any of the arguments.
pub fn fresh_tag(args: &[Dual]) -> usize {
    args.iter().map(Dual::tags).max().unwrap_or(0)
}

pub fn constants(p: &[f64]) -> Vec<Dual> {
    p.iter().copied().map(Dual::constant).collect()
}

pub fn values(p: &[Dual]) -> Vec<f64> {
    p.iter().map(Dual::value).collect()
}

/// Directional derivative of a vector-valued function.
pub fn directional<F>(f: F, p: &[Dual], dir: &[f64]) -> Vec<Dual>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let tag = fresh_tag(p);
    let seeded: Vec<Dual> = p.iter().zip(dir).map(|(x, d)| if *d != 0.0 { x.seeded(tag, *d) } else { x.clone() }).collect();
    f(&seeded).iter().map(|y| y.tangent(tag)).collect()
}

/// Value and directional derivative in one evaluation.
pub fn value_and_directional<F>(f: F, p: &[Dual], dir: &[f64]) -> (Vec<Dual>, Vec<Dual>)
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let tag = fresh_tag(p);
    let seeded: Vec<Dual> = p.iter().zip(dir).map(|(x, d)| if *d != 0.0 { x.seeded(tag, *d) } else { x.clone() }).collect();
    let out = f(&seeded);
    (out.iter().map(|y| y.truncated(tag)).collect(), out.iter().map(|y| y.tangent(tag)).collect())
}

/// `jac[i][j] = ∂f_i/∂p_j`.
pub fn jacobian<F>(f: F, p: &[Dual]) -> Vec<Vec<Dual>>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let n = p.len();
    let mut cols = Vec::with_capacity(n);
    let mut dir = vec![0.0; n];
    for j in 0..n {
        dir[j] = 1.0;
        cols.push(directional(&f, p, &dir));
        dir[j] = 0.0;
    }
    let m = cols.first().map_or(0, Vec::len);
    (0..m).map(|i| cols.iter().map(|col| col[i].clone()).collect()).collect()
}

pub fn gradient<F>(f: F, p: &[Dual]) -> Vec<Dual>
where
    F: Fn(&[Dual]) -> Dual,
{
    let g = |q: &[Dual]| vec![f(q)];
    jacobian(g, p).pop().unwrap_or_default()
}

/// Plain-float Jacobian.
pub fn jacobian_f64<F>(f: F, p: &[f64]) -> Vec<Vec<f64>>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    jacobian(f, &constants(p)).into_iter().map(|row| row.iter().map(Dual::value).collect()).collect()
}

// ---------------------------------------------------------------------------
// arithmetic

fn add_coeffs(a: &Coeffs, b: &Coeffs, sign: f64) -> Coeffs {
    let n = a.len().max(b.len());
    let mut out: Coeffs = smallvec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        *o = x + sign * y;
    }
    out
}

impl<'a> Add<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn add(self, rhs: &Dual) -> Dual {
        if self.c.len() == 1 && rhs.c.len() == 1 {
            return Dual::constant(self.c[0] + rhs.c[0]);
        }
        Dual { c: add_coeffs(&self.c, &rhs.c, 1.0) }
    }
}

impl<'a> Sub<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn sub(self, rhs: &Dual) -> Dual {
        if self.c.len() == 1 && rhs.c.len() == 1 {
            return Dual::constant(self.c[0] - rhs.c[0]);
        }
        Dual { c: add_coeffs(&self.c, &rhs.c, -1.0) }
    }
}

impl<'a> Mul<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn mul(self, rhs: &Dual) -> Dual {
        if rhs.c.len() == 1 {
            return self * rhs.c[0];
        }
        if self.c.len() == 1 {
            return rhs * self.c[0];
        }
        Dual { c: Dual::mul_dense(&self.c, &rhs.c) }
    }
}

impl<'a> Div<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn div(self, rhs: &Dual) -> Dual {
        if rhs.c.len() == 1 {
            return self * (1.0 / rhs.c[0]);
        }
        self * &rhs.recip()
    }
}

impl Neg for &Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { c: self.c.iter().map(|v| -v).collect() }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(mut self) -> Dual {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl Add<f64> for &Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        let mut c = self.c.clone();
        c[0] += rhs;
        Dual { c }
    }
}

impl Sub<f64> for &Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        self + (-rhs)
    }
}

impl Mul<f64> for &Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual { c: self.c.iter().map(|v| v * rhs).collect() }
    }
}

impl Div<f64> for &Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        self * (1.0 / rhs)
    }
}

impl Add<&Dual> for f64 {
    type Output = Dual;
    fn add(self, rhs: &Dual) -> Dual {
        rhs + self
    }
}

impl Sub<&Dual> for f64 {
    type Output = Dual;
    fn sub(self, rhs: &Dual) -> Dual {
        -(rhs - self)
    }
}

impl Mul<&Dual> for f64 {
    type Output = Dual;
    fn mul(self, rhs: &Dual) -> Dual {
        rhs * self
    }
}

impl Div<&Dual> for f64 {
    type Output = Dual;
    fn div(self, rhs: &Dual) -> Dual {
        &rhs.recip() * self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dual> for Dual {
            type Output = Dual;
            fn $m(self, rhs: Dual) -> Dual {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dual> for Dual {
            type Output = Dual;
            fn $m(self, rhs: &Dual) -> Dual {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Dual> for &'a Dual {
            type Output = Dual;
            fn $m(self, rhs: Dual) -> Dual {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Dual {
            type Output = Dual;
            fn $m(self, rhs: f64) -> Dual {
                (&self).$m(rhs)
            }
        }
        impl $tr<Dual> for f64 {
            type Output = Dual;
            fn $m(self, rhs: Dual) -> Dual {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Dual> for Dual {
    fn add_assign(&mut self, rhs: &Dual) {
        if self.c.len() < rhs.c.len() {
            self.c.resize(rhs.c.len(), 0.0);
        }
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl AddAssign<Dual> for Dual {
    fn add_assign(&mut self, rhs: Dual) {
        *self += &rhs;
    }
}

impl SubAssign<&Dual> for Dual {
    fn sub_assign(&mut self, rhs: &Dual) {
        if self.c.len() < rhs.c.len() {
            self.c.resize(rhs.c.len(), 0.0);
        }
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
    }
}

impl SubAssign<Dual> for Dual {
    fn sub_assign(&mut self, rhs: Dual) {
        *self -= &rhs;
    }
}

impl MulAssign<f64> for Dual {
    fn mul_assign(&mut self, rhs: f64) {
        for a in self.c.iter_mut() {
            *a *= rhs;
        }
    }
}

impl std::iter::Sum for Dual {
    fn sum<I: Iterator<Item = Dual>>(iter: I) -> Dual {
        let mut acc = Dual::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}
