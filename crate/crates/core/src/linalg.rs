//! Small dense matrices over [`Dual`], row-major, dimension at most 4.

use crate::ad::Dual;

#[inline]
pub fn idx(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

pub fn identity(n: usize) -> Vec<Dual> {
    let mut m = vec![Dual::zero(); n * n];
    for i in 0..n {
        m[idx(n, i, i)] = Dual::one();
    }
    m
}

pub fn scaled_identity(n: usize, s: &Dual) -> Vec<Dual> {
    let mut m = vec![Dual::zero(); n * n];
    for i in 0..n {
        m[idx(n, i, i)] = s.clone();
    }
    m
}

pub fn determinant(m: &[Dual], n: usize) -> Dual {
    match n {
        1 => m[0].clone(),
        2 => &m[0] * &m[3] - &m[1] * &m[2],
        3 => &m[0] * (&m[4] * &m[8] - &m[5] * &m[7]) - &m[1] * (&m[3] * &m[8] - &m[5] * &m[6]) + &m[2] * (&m[3] * &m[7] - &m[4] * &m[6]),
        _ => {
            // cofactor expansion along the first row
            let mut acc = Dual::zero();
            for j in 0..n {
                let minor = minor(m, n, 0, j);
                let term = &m[j] * determinant(&minor, n - 1);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn minor(m: &[Dual], n: usize, row: usize, col: usize) -> Vec<Dual> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            out.push(m[idx(n, i, j)].clone());
        }
    }
    out
}

/// Inverse via the adjugate; fine for the well-conditioned metrics used here.
pub fn inverse(m: &[Dual], n: usize) -> Vec<Dual> {
    if n == 1 {
        return vec![m[0].recip()];
    }
    let det_inv = determinant(m, n).recip();
    if n == 2 {
        return vec![&m[3] * &det_inv, -(&m[1] * &det_inv), -(&m[2] * &det_inv), &m[0] * &det_inv];
    }
    let mut out = vec![Dual::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let c = determinant(&minor(m, n, j, i), n - 1);
            let c = if (i + j) % 2 == 0 { c } else { -c };
            out[idx(n, i, j)] = c * &det_inv;
        }
    }
    out
}

pub fn mat_vec(m: &[Dual], v: &[Dual]) -> Vec<Dual> {
    let n = v.len();
    let rows = m.len() / n;
    (0..rows).map(|i| (0..n).map(|j| &m[idx(n, i, j)] * &v[j]).sum()).collect()
}

pub fn dot(a: &[Dual], b: &[Dual]) -> Dual {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `uᵀ M v`.
pub fn bilinear(m: &[Dual], u: &[Dual], v: &[Dual]) -> Dual {
    dot(u, &mat_vec(m, v))
}

pub fn bilinear_f64(m: &[Dual], u: &[f64], v: &[f64]) -> Dual {
    let n = u.len();
    let mut acc = Dual::zero();
    for i in 0..n {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if v[j] != 0.0 {
                acc += &m[idx(n, i, j)] * (u[i] * v[j]);
            }
        }
    }
    acc
}

pub fn mat_mul(a: &[Dual], b: &[Dual], n: usize) -> Vec<Dual> {
    let mut out = vec![Dual::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            out[idx(n, i, j)] = (0..n).map(|k| &a[idx(n, i, k)] * &b[idx(n, k, j)]).sum();
        }
    }
    out
}

pub fn transpose(a: &[Dual], n: usize) -> Vec<Dual> {
    let mut out = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            out[idx(n, i, j)] = a[idx(n, j, i)].clone();
        }
    }
    out
}

/// `Aᵀ M A` for square `A`.
pub fn congruence(m: &[Dual], a: &[Dual], n: usize) -> Vec<Dual> {
    mat_mul(&transpose(a, n), &mat_mul(m, a, n), n)
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
pub fn cholesky(m: &[Dual], n: usize) -> Vec<Dual> {
    let mut l = vec![Dual::zero(); n * n];
    for j in 0..n {
        let mut d = m[idx(n, j, j)].clone();
        for k in 0..j {
            d -= l[idx(n, j, k)].square();
        }
        let d = d.sqrt();
        for i in (j + 1)..n {
            let mut s = m[idx(n, i, j)].clone();
            for k in 0..j {
                s -= &l[idx(n, i, k)] * &l[idx(n, j, k)];
            }
            l[idx(n, i, j)] = s / &d;
        }
        l[idx(n, j, j)] = d;
    }
    l
}

pub fn to_f64(m: &[Dual]) -> Vec<f64> {
    m.iter().map(Dual::value).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Frobenius norm of `a - b`.
pub fn frobenius_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &[f64], n: usize) -> f64 {
    let mat = nalgebra::DMatrix::from_row_slice(n, n, m);
    let eig = nalgebra::SymmetricEigen::new(mat);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Solves `A x = b` for a small dense float system (partial pivoting).
pub fn solve_f64(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mat = nalgebra::DMatrix::from_row_slice(n, n, a);
    let rhs = nalgebra::DVector::from_column_slice(b);
    mat.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::constants;

    #[test]
    fn inverse_and_cholesky_round_trip() {
        let m = constants(&[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let inv = inverse(&m, 3);
        let prod = to_f64(&mat_mul(&m, &inv, 3));
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(max_abs_diff(&prod, &id) < 1e-14);
        let l = cholesky(&m, 3);
        let llt = to_f64(&mat_mul(&l, &transpose(&l, 3), 3));
        assert!(max_abs_diff(&llt, &to_f64(&m)) < 1e-14);
        assert_eq!(l[idx(3, 0, 1)].value(), 0.0);
    }

    #[test]
    fn four_by_four_determinant() {
        let m = constants(&[2.0, 0.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 1.0, 4.0, 1.0, 0.0, 0.0, 0.0, 5.0]);
        // expand along last row: 5 * det([[2,0,1],[1,3,0],[0,1,4]]) = 5 * 25
        assert!((determinant(&m, 4).value() - 125.0).abs() < 1e-12);
    }
}
