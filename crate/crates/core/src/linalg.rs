//! Symmetric tridiagonal solves and eigenpairs.
//!
//! Matrices are stored as `diag[0..n]` and `off[0..n-1]`, where `off[i]`
//! couples rows `i` and `i + 1`.

use crate::error::{Error, Result};

/// Solve a symmetric positive definite tridiagonal system by elimination
/// without pivoting. A non-positive pivot means the matrix is not positive
/// definite and is reported as [`Error::IndefiniteOperator`].
pub fn solve_spd_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - off[i - 1] * c[i - 1];
        }
        if !(pivot > 0.0) {
            return Err(Error::IndefiniteOperator { row: i, pivot });
        }
        if i + 1 < n {
            c[i] = off[i] / pivot;
        }
        d[i] = if i == 0 { rhs[0] } else { rhs[i] - off[i - 1] * d[i - 1] };
        d[i] /= pivot;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// `sub`/`diag`/`sup`. Used for shifted, possibly indefinite systems.
#[derive(Debug, Clone)]
struct TridiagonalLu {
    // U has up to two super-diagonals after pivoting.
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        du.push(0.0);
        let mut dl = sub.to_vec();
        let mut du2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swap = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let m = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
                l[i] = m;
                d[i + 1] -= m * du[i];
                du2[i] = 0.0;
            } else {
                swap[i] = true;
                let m = d[i] / dl[i];
                l[i] = m;
                d[i] = dl[i];
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                du2[i] = du[i + 1];
                du[i + 1] *= -m;
            }
            dl[i] = 0.0;
        }
        Self {
            u0: d,
            u1: du,
            u2: du2,
            l,
            swap,
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= self.l[i] * rhs[i];
        }
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= self.u1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * rhs[i + 2];
            }
            let p = if self.u0[i].abs() < tiny { tiny } else { self.u0[i] };
            rhs[i] = v / p;
        }
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue number `k` (0-based, ascending) by Sturm bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// An eigenpair with a Euclidean-unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn tri_apply(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * v[i];
            if i > 0 {
                acc += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += off[i] * v[i + 1];
            }
            acc
        })
        .collect()
}

fn unit(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

/// The `count` smallest eigenpairs, ascending. Eigenvalues come from
/// bisection, eigenvectors from inverse iteration; the reported value is the
/// Rayleigh quotient of the final vector.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], count: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let n = diag.len();
    let count = count.min(n);
    let scale = diag.iter().chain(off).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut out: Vec<EigenPair> = Vec::with_capacity(count);
    for k in 0..count {
        let lambda = tridiagonal_eigenvalue(diag, off, k);
        let shift = lambda + 1e-14 * scale;
        let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
        let lu = TridiagonalLu::factor(off, &shifted, off);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 + k * 104729) % 97) as f64 / 97.0).collect();
        unit(&mut v);
        let mut residual = f64::INFINITY;
        let mut value = lambda;
        for _ in 0..8 {
            let previous = residual;
            lu.solve(&mut v);
            // keep clear of previously found (possibly close) eigenvectors
            for p in &out {
                let proj: f64 = p.vector.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(&p.vector).for_each(|(x, y)| *x -= proj * y);
            }
            unit(&mut v);
            let av = tri_apply(diag, off, &v);
            value = av.iter().zip(&v).map(|(a, b)| a * b).sum();
            residual = av.iter().zip(&v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
            // stop once converged and no longer improving
            if residual <= tol * scale && residual > 0.5 * previous {
                break;
            }
        }
        if !(residual <= tol * scale) {
            return Err(Error::Eigensolver {
                index: k,
                residual,
                order: n,
            });
        }
        out.push(EigenPair {
            value,
            vector: v,
            residual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn spd_solve_matches_product() {
        let diag = vec![4.0, 5.0, 3.0, 6.0];
        let off = vec![1.0, -2.0, 0.5];
        let x = vec![1.0, -1.0, 2.0, 0.5];
        let b = tri_apply(&diag, &off, &x);
        let y = solve_spd_tridiagonal(&diag, &off, &b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn indefinite_detected() {
        let err = solve_spd_tridiagonal(&[1.0, 1.0], &[2.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::IndefiniteOperator { row: 1, .. }));
    }

    #[test]
    fn pivoted_lu_solves_indefinite() {
        let sub = vec![3.0, -1.0, 2.0];
        let diag = vec![0.0, 1.0, -2.0, 4.0];
        let sup = vec![1.0, 5.0, 1.0];
        let x = vec![0.3, -1.2, 2.0, 1.0];
        let b: Vec<f64> = (0..4)
            .map(|i| {
                let mut acc = diag[i] * x[i];
                if i > 0 {
                    acc += sub[i - 1] * x[i - 1];
                }
                if i < 3 {
                    acc += sup[i] * x[i + 1];
                }
                acc
            })
            .collect();
        let lu = TridiagonalLu::factor(&sub, &diag, &sup);
        let mut y = b.clone();
        lu.solve(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 50;
        let (d, e) = laplacian(n);
        let pairs = tridiagonal_lowest(&d, &e, 5, 1e-10).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert_abs_diff_eq!(p.value, exact, epsilon = 1e-12);
            let sign = p.vector[0].signum();
            let norm = (2.0 / (n + 1) as f64).sqrt();
            for (i, v) in p.vector.iter().enumerate() {
                assert_abs_diff_eq!(sign * v, norm * ((i + 1) as f64 * theta).sin(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sturm_counts() {
        let (d, e) = laplacian(10);
        assert_eq!(sturm_count(&d, &e, -0.1), 0);
        assert_eq!(sturm_count(&d, &e, 4.1), 10);
        assert_eq!(sturm_count(&d, &e, 2.0 + 1e-9), 5);
    }
}
