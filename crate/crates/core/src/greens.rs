//! Dirichlet Green's functions of `−a* d²/dx² + q0` on `(0, L)` and of
//! `−Δ + q0` on the unit square.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::{Grid2D, Mesh1D};

/// Which one-sided limit to take when `x == y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalSide {
    /// Limit from `x < y`.
    Below,
    /// Limit from `x > y`.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenPartials {
    pub dx: f64,
    pub dy: f64,
    pub dl: f64,
}

/// `G(x, y; L)` with `−a* ∂²G/∂x² + q0 G = δ(x − y)`, `G(0, y) = G(L, y) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKernel1D {
    pub a_star: f64,
    pub q0: f64,
    pub length: f64,
}

impl GreenKernel1D {
    pub fn new(a_star: f64, q0: f64, length: f64) -> Result<Self> {
        if !(a_star > 0.0 && a_star.is_finite()) {
            return Err(invalid("a_star", format!("must be positive, got {a_star}")));
        }
        if !(q0 >= 0.0 && q0.is_finite()) {
            return Err(invalid("q0", format!("must be non-negative, got {q0}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid("length", format!("must be positive, got {length}")));
        }
        Ok(Self { a_star, q0, length })
    }

    pub fn unit(a_star: f64, q0: f64) -> Result<Self> {
        Self::new(a_star, q0, 1.0)
    }

    pub fn kappa(&self) -> f64 {
        (self.q0 / self.a_star).sqrt()
    }

    /// Solution of the homogeneous equation vanishing at 0.
    pub fn phi(&self, x: f64) -> f64 {
        if self.q0 == 0.0 {
            x
        } else {
            (self.kappa() * x).sinh()
        }
    }

    /// Solution of the homogeneous equation vanishing at `length`.
    pub fn psi(&self, x: f64, length: f64) -> f64 {
        if self.q0 == 0.0 {
            length - x
        } else {
            (self.kappa() * (length - x)).sinh()
        }
    }

    /// `a*` times the Wronskian of `phi` and `psi`.
    pub fn wronskian(&self, length: f64) -> f64 {
        if self.q0 == 0.0 {
            self.a_star * length
        } else {
            let k = self.kappa();
            self.a_star * k * (k * length).sinh()
        }
    }

    fn check(&self, x: f64, y: f64) -> Result<()> {
        let l = self.length;
        let slack = 1e-12 * l;
        if !(x >= -slack && x <= l + slack && y >= -slack && y <= l + slack) {
            return Err(Error::Domain { x, y, length: l });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x, y)?;
        Ok(self.eval_with_length(x, y, self.length))
    }

    /// Closed form with an explicit interval length, no domain check.
    pub fn eval_with_length(&self, x: f64, y: f64, length: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        self.phi(lo) * self.psi(hi, length) / self.wronskian(length)
    }

    /// Partial derivatives in `x`, `y` and `L`. On the diagonal a side must
    /// be given.
    pub fn partials(&self, x: f64, y: f64, side: Option<DiagonalSide>) -> Result<GreenPartials> {
        self.check(x, y)?;
        let below = match (x.partial_cmp(&y), side) {
            (Some(std::cmp::Ordering::Less), _) => true,
            (Some(std::cmp::Ordering::Greater), _) => false,
            (_, Some(DiagonalSide::Below)) => true,
            (_, Some(DiagonalSide::Above)) => false,
            (_, None) => return Err(Error::DiagonalSideUnspecified(x)),
        };
        Ok(self.partials_sided(x, y, below))
    }

    /// Partials for the branch `x < y` (`below`) or `x > y`, evaluated as
    /// smooth functions of `(x, y)` on that branch.
    pub fn partials_sided(&self, x: f64, y: f64, below: bool) -> GreenPartials {
        let l = self.length;
        if below {
            let (dlo, dhi, dl) = self.branch_partials(x, y, l);
            GreenPartials { dx: dlo, dy: dhi, dl }
        } else {
            let (dlo, dhi, dl) = self.branch_partials(y, x, l);
            GreenPartials { dx: dhi, dy: dlo, dl }
        }
    }

    /// Partials of `phi(s) psi(t) / W` in `s`, `t` and `L`.
    fn branch_partials(&self, s: f64, t: f64, l: f64) -> (f64, f64, f64) {
        let a = self.a_star;
        if self.q0 == 0.0 {
            let d = a * l;
            ((l - t) / d, -s / d, s * t / (a * l * l))
        } else {
            let k = self.kappa();
            let d = a * k * (k * l).sinh();
            let ds = k * (k * s).cosh() * (k * (l - t)).sinh() / d;
            let dt = -k * (k * s).sinh() * (k * (l - t)).cosh() / d;
            let dl = k * (k * s).sinh() * (k * t).sinh() / (d * (k * l).sinh());
            (ds, dt, dl)
        }
    }
}

/// Nyström discretization `u_i = Σ_j w_j G(z_i, z_j; L) f_j` of a Green's
/// operator, applied in O(n) via the product structure of the kernel.
///
/// The nodes `z_i` may be any increasing sequence; the weights `w_j` are the
/// quadrature weights of the integration variable.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenOperator {
    kernel: GreenKernel1D,
    phi: Vec<f64>,
    psi: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl GreenOperator {
    pub fn new(kernel: GreenKernel1D, mesh: &Mesh1D) -> Result<Self> {
        if (mesh.length() - kernel.length).abs() > 1e-12 * kernel.length {
            return Err(invalid("mesh", "mesh length differs from kernel length"));
        }
        Ok(Self::with_coordinates(kernel, mesh.nodes(), mesh.weights(), kernel.length))
    }

    /// Operator with kernel `G(z_i, z_j; length)` and weights `w_j`.
    pub fn with_coordinates(kernel: GreenKernel1D, z: &[f64], weights: &[f64], length: f64) -> Self {
        assert_eq!(z.len(), weights.len());
        Self {
            kernel,
            phi: z.iter().map(|&x| kernel.phi(x)).collect(),
            psi: z.iter().map(|&x| kernel.psi(x, length)).collect(),
            weights: weights.to_vec(),
            scale: 1.0 / kernel.wronskian(length),
        }
    }

    pub fn kernel(&self) -> &GreenKernel1D {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::MeshMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(self.apply_unchecked(f))
    }

    pub(crate) fn apply_unchecked(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        let mut left = 0.0;
        for i in 0..n {
            left += self.weights[i] * self.phi[i] * f[i];
            out[i] = self.psi[i] * left;
        }
        let mut right = 0.0;
        for i in (0..n).rev() {
            out[i] += self.phi[i] * right;
            right += self.weights[i] * self.psi[i] * f[i];
        }
        out.iter_mut().for_each(|v| *v *= self.scale);
        out
    }

    /// `Σ_j w_j G(z_i, z_j)² f_j`.
    pub fn apply_squared(&self, f: &[f64]) -> Result<Vec<f64>> {
        let squared = Self {
            kernel: self.kernel,
            phi: self.phi.iter().map(|v| v * v).collect(),
            psi: self.psi.iter().map(|v| v * v).collect(),
            weights: self.weights.clone(),
            scale: self.scale * self.scale,
        };
        squared.apply(f)
    }

    /// Dense matrix `K_ij = G(z_i, z_j) w_j`.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        Array2::from_shape_fn((n, n), |(i, j)| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            self.phi[lo] * self.psi[hi] * self.scale * self.weights[j]
        })
    }
}

/// Sine-spectral Dirichlet Green's operator of `−Δ + q0` on the unit square.
#[derive(Debug, Clone)]
pub struct GreenOperator2D {
    q0: f64,
    modes: usize,
    grid: Grid2D,
    /// `analysis[j, m] = √2 sin((j+1)π x_m) w_m`
    analysis: Array2<f64>,
    /// `synthesis[j, m] = √2 sin((j+1)π x_m)`
    synthesis: Array2<f64>,
    denom: Array2<f64>,
}

impl GreenOperator2D {
    pub fn new(q0: f64, modes: usize, grid: &Grid2D) -> Result<Self> {
        if !(q0 >= 0.0 && q0.is_finite()) {
            return Err(invalid("q0", format!("must be non-negative, got {q0}")));
        }
        let n = grid.n();
        if modes == 0 || modes > n - 1 {
            return Err(invalid("modes", format!("must be in 1..={}, got {modes}", n - 1)));
        }
        let h = grid.h();
        let pi = std::f64::consts::PI;
        let synthesis = Array2::from_shape_fn((modes, n), |(j, m)| {
            std::f64::consts::SQRT_2 * ((j + 1) as f64 * pi * grid.coord(m)).sin()
        });
        let analysis = Array2::from_shape_fn((modes, n), |(j, m)| {
            let w = if m == 0 || m + 1 == n { 0.5 * h } else { h };
            synthesis[[j, m]] * w
        });
        let denom = Array2::from_shape_fn((modes, modes), |(j, k)| {
            let (a, b) = ((j + 1) as f64, (k + 1) as f64);
            (a * a + b * b) * pi * pi + q0
        });
        Ok(Self {
            q0,
            modes,
            grid: grid.clone(),
            analysis,
            synthesis,
            denom,
        })
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n();
        if f.len() != n * n {
            return Err(Error::MeshMismatch {
                expected: n * n,
                got: f.len(),
            });
        }
        let fm = ArrayView2::from_shape((n, n), f).expect("shape checked");
        let coeff = self.analysis.dot(&fm).dot(&self.analysis.t()) / &self.denom;
        let u = self.synthesis.t().dot(&coeff).dot(&self.synthesis);
        Ok(u.iter().copied().collect())
    }
}

/// One-shot form of [`GreenOperator2D::apply`].
pub fn apply_green_2d(q0: f64, modes: usize, grid: &Grid2D, f: &[f64]) -> Result<Vec<f64>> {
    GreenOperator2D::new(q0, modes, grid)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        let g = GreenKernel1D::unit(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(g.eval(0.25, 0.75).unwrap(), 0.0625, epsilon = 1e-15);
        let g1 = GreenKernel1D::unit(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(g1.eval(0.5, 0.5).unwrap(), 0.231_058_6, epsilon = 2e-7);
        for y in [0.0, 0.3, 1.0] {
            assert_eq!(g1.eval(0.0, y).unwrap(), 0.0);
            assert_abs_diff_eq!(g1.eval(1.0, y).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn domain_error() {
        let g = GreenKernel1D::unit(1.0, 0.0).unwrap();
        assert!(matches!(g.eval(1.5, 0.2), Err(Error::Domain { .. })));
        assert!(matches!(g.eval(0.2, -0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn partial_examples() {
        let g = GreenKernel1D::unit(1.0, 0.0).unwrap();
        let p = g.partials(0.25, 0.75, None).unwrap();
        assert_abs_diff_eq!(p.dx, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.dy, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.dl, 0.1875, epsilon = 1e-15);
        assert!(matches!(g.partials(0.4, 0.4, None), Err(Error::DiagonalSideUnspecified(_))));
        let below = g.partials(0.4, 0.4, Some(DiagonalSide::Below)).unwrap();
        let above = g.partials(0.4, 0.4, Some(DiagonalSide::Above)).unwrap();
        // jump of ∂x G across the diagonal is −1/a*
        assert_abs_diff_eq!(above.dx - below.dx, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn partials_match_finite_differences() {
        for q0 in [0.0, 2.5] {
            let g = GreenKernel1D::new(1.3, q0, 1.2).unwrap();
            let d = 1e-6;
            for &(x, y) in &[(0.2, 0.9), (1.0, 0.3), (0.55, 0.6)] {
                let p = g.partials(x, y, None).unwrap();
                let fx = (g.eval_with_length(x + d, y, 1.2) - g.eval_with_length(x - d, y, 1.2)) / (2.0 * d);
                let fy = (g.eval_with_length(x, y + d, 1.2) - g.eval_with_length(x, y - d, 1.2)) / (2.0 * d);
                let fl = (g.eval_with_length(x, y, 1.2 + d) - g.eval_with_length(x, y, 1.2 - d)) / (2.0 * d);
                assert_abs_diff_eq!(p.dx, fx, epsilon = 1e-8);
                assert_abs_diff_eq!(p.dy, fy, epsilon = 1e-8);
                assert_abs_diff_eq!(p.dl, fl, epsilon = 1e-8);
                let q = g.partials(y, x, None).unwrap();
                assert_abs_diff_eq!(p.dx, q.dy, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn apply_examples() {
        let mesh = Mesh1D::uniform(1.0, 401).unwrap();
        let op = GreenOperator::new(GreenKernel1D::unit(1.0, 0.0).unwrap(), &mesh).unwrap();
        let u = op.apply(&vec![1.0; mesh.len()]).unwrap();
        for (x, v) in mesh.nodes().iter().zip(&u) {
            assert_abs_diff_eq!(*v, x * (1.0 - x) / 2.0, epsilon = 1e-6);
        }
        assert!(op.apply(&vec![0.0; mesh.len()]).unwrap().iter().all(|&v| v == 0.0));
        let s = op.apply(&mesh.map(|x| (PI * x).sin())).unwrap();
        assert_abs_diff_eq!(s[200], 1.0 / (PI * PI), epsilon = 1e-5);
        assert!(op.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn fast_apply_matches_dense() {
        let mesh = Mesh1D::uniform(1.0, 41).unwrap();
        let op = GreenOperator::new(GreenKernel1D::unit(0.7, 3.0).unwrap(), &mesh).unwrap();
        let f = mesh.map(|x| (7.0 * x).cos() + x);
        let fast = op.apply(&f).unwrap();
        let dense = op.to_dense().dot(&ndarray::Array1::from(f));
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_d_single_mode() {
        let grid = Grid2D::new(33).unwrap();
        let f = grid.map(|x, y| 2.0 * (PI * x).sin() * (PI * y).sin());
        let u = apply_green_2d(0.0, 32, &grid, &f).unwrap();
        for (a, b) in u.iter().zip(&f) {
            assert_abs_diff_eq!(*a, b / (2.0 * PI * PI), epsilon = 1e-12);
        }
        assert!(apply_green_2d(-1.0, 4, &grid, &f).is_err());
    }

    #[test]
    fn two_d_constant_source_centre() {
        let grid = Grid2D::new(257).unwrap();
        let f = vec![1.0; 257 * 257];
        let u = apply_green_2d(0.0, 256, &grid, &f).unwrap();
        let centre = u[128 * 257 + 128];
        assert_abs_diff_eq!(centre, 0.073_671_4, epsilon = 2e-4);
    }
}
