//! Random Helmholtz source problem `P u + q(x/ε) u = f` with Dirichlet
//! conditions, solved by the twice-iterated integral equation
//!
//! ```text
//! u = 𝒢f − 𝒢q𝒢f + 𝒢q𝒢q u
//! ```
//!
//! together with its Gaussian corrector limits.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::greens::{GreenKernel1D, GreenOperator, GreenOperator2D};
use crate::linalg::solve_spd_tridiagonal;
use crate::mesh::{Grid2D, Mesh1D};
use crate::randfield::{FieldRealization, MaProcessSpec};

pub const DEFAULT_TRUNCATION_RHO: f64 = 0.5;
pub const POWER_ITERATIONS: usize = 20;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzSolution {
    pub u_eps: Vec<f64>,
    pub u0: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Residual after each sweep.
    pub residual_history: Vec<f64>,
    /// Power-iteration estimate of `‖𝒢q𝒢q‖`.
    pub op_norm_estimate: f64,
    /// Whether the potential was switched off because the estimate exceeded
    /// the truncation threshold.
    pub truncated: bool,
}

/// Fixed-point solve of `u = v0 − 𝒢(q v0) + 𝒢q𝒢q u`, where `v0 = 𝒢 source`.
pub(crate) fn neumann_solve(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    norm: impl Fn(&[f64]) -> f64,
    v0: &[f64],
    q: &[f64],
    truncation_rho: f64,
    tol: f64,
) -> Result<HelmholtzSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    let n = v0.len();
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let twice = |v: &[f64]| apply(&mul(q, &apply(&mul(q, v))));

    let mut estimate = 0.0;
    if q.iter().any(|&v| v != 0.0) {
        let mut v = vec![1.0; n];
        for _ in 0..POWER_ITERATIONS {
            let nv = norm(&v);
            if nv == 0.0 {
                break;
            }
            let tv = twice(&v);
            let ntv = norm(&tv);
            estimate = ntv / nv;
            if ntv == 0.0 {
                break;
            }
            v = tv.iter().map(|x| x / ntv).collect();
        }
    }
    let truncated = estimate > truncation_rho;
    let zero_q;
    let q = if truncated {
        zero_q = vec![0.0; n];
        &zero_q[..]
    } else {
        q
    };

    let gqv0 = apply(&mul(q, v0));
    let b: Vec<f64> = v0.iter().zip(&gqv0).map(|(a, c)| a - c).collect();
    let mut u = v0.to_vec();
    let mut history = Vec::new();
    for it in 1..=MAX_FIXED_POINT_ITERATIONS {
        let tu = if q.iter().all(|&v| v == 0.0) { vec![0.0; n] } else { twice(&u) };
        let next: Vec<f64> = b.iter().zip(&tu).map(|(a, c)| a + c).collect();
        let diff: Vec<f64> = next.iter().zip(&u).map(|(a, c)| a - c).collect();
        let residual = norm(&diff);
        history.push(residual);
        u = next;
        if residual <= tol {
            return Ok(HelmholtzSolution {
                u_eps: u,
                u0: v0.to_vec(),
                iterations: it,
                residual,
                residual_history: history,
                op_norm_estimate: estimate,
                truncated,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_FIXED_POINT_ITERATIONS,
        residual: *history.last().unwrap_or(&f64::NAN),
        norm_estimate: estimate,
    })
}

fn check_common(epsilon: f64, alpha: f64, truncation_rho: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(0.0..0.25).contains(&alpha) {
        return Err(invalid("alpha", format!("must lie in [0, 1/4), got {alpha}")));
    }
    if !(truncation_rho > 0.0 && truncation_rho < 1.0) {
        return Err(invalid("truncation_rho", format!("must lie in (0, 1), got {truncation_rho}")));
    }
    Ok(())
}

/// `(u_ε − u0) / ε^{d(1/2 − α)}`.
pub fn corrector(sol: &HelmholtzSolution, epsilon: f64, d: u32, alpha: f64) -> Vec<f64> {
    let scale = epsilon.powf(d as f64 * (0.5 - alpha));
    sol.u_eps.iter().zip(&sol.u0).map(|(u, v)| (u - v) / scale).collect()
}

/// Three-point finite-difference solve of `−a* u'' + (q0 + potential) u = f`
/// with homogeneous Dirichlet conditions on a uniform mesh.
pub fn solve_fd(kernel: &GreenKernel1D, mesh: &Mesh1D, potential: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = mesh.len();
    for v in [potential.len(), f.len()] {
        if v != n {
            return Err(Error::MeshMismatch { expected: n, got: v });
        }
    }
    let h2 = mesh.h() * mesh.h();
    let a = kernel.a_star / h2;
    let m = n - 2;
    let diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * a + kernel.q0 + potential[i]).collect();
    let off = vec![-a; m - 1];
    let inner = solve_spd_tridiagonal(&diag, &off, &f[1..n - 1])?;
    let mut u = vec![0.0; n];
    u[1..n - 1].copy_from_slice(&inner);
    Ok(u)
}

/// The 1D source problem on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    pub kernel: GreenKernel1D,
    pub mesh: Mesh1D,
    pub field: MaProcessSpec,
    pub source: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub truncation_rho: f64,
    op: GreenOperator,
    u0: Vec<f64>,
}

impl HelmholtzProblem {
    pub fn new(kernel: GreenKernel1D, mesh: Mesh1D, field: MaProcessSpec, source: Vec<f64>, epsilon: f64) -> Result<Self> {
        if source.len() != mesh.len() {
            return Err(Error::MeshMismatch {
                expected: mesh.len(),
                got: source.len(),
            });
        }
        if source.iter().any(|v| !v.is_finite()) {
            return Err(invalid("source", "must be finite"));
        }
        field.validate()?;
        check_common(epsilon, 0.0, DEFAULT_TRUNCATION_RHO)?;
        let op = GreenOperator::new(kernel, &mesh)?;
        let u0 = op.apply(&source)?;
        Ok(Self {
            kernel,
            mesh,
            field,
            source,
            epsilon,
            alpha: 0.0,
            truncation_rho: DEFAULT_TRUNCATION_RHO,
            op,
            u0,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_common(self.epsilon, alpha, self.truncation_rho)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_truncation_rho(mut self, rho: f64) -> Result<Self> {
        check_common(self.epsilon, self.alpha, rho)?;
        self.truncation_rho = rho;
        Ok(self)
    }

    pub fn green(&self) -> &GreenOperator {
        &self.op
    }

    /// `u0 = 𝒢 f`.
    pub fn homogenized_solve(&self) -> &[f64] {
        &self.u0
    }

    /// Amplitude factor `ε^{−α}`.
    pub fn amplitude_scale(&self) -> f64 {
        self.epsilon.powf(-self.alpha)
    }

    /// Corrector normalization `ε^{1/2 − α}`.
    pub fn corrector_scale(&self) -> f64 {
        self.epsilon.powf(0.5 - self.alpha)
    }

    /// Sample of the scaled potential `ε^{−α} q(x/ε)`.
    pub fn realize(&self, seed: u64) -> Result<FieldRealization> {
        self.field
            .with_amplitude(self.field.amplitude * self.amplitude_scale())
            .sample(self.epsilon, &self.mesh, seed)
    }

    pub fn perturbed_solve(&self, seed: u64, tol: f64) -> Result<HelmholtzSolution> {
        let q = self.realize(seed)?;
        self.perturbed_solve_with(&q, tol)
    }

    pub fn perturbed_solve_with(&self, q: &FieldRealization, tol: f64) -> Result<HelmholtzSolution> {
        self.check_realization(q)?;
        neumann_solve(
            |v| self.op.apply_unchecked(v),
            |v| self.mesh.norm(v),
            &self.u0,
            &q.values,
            self.truncation_rho,
            tol,
        )
    }

    pub fn direct_solve_fd(&self, q: &FieldRealization) -> Result<Vec<f64>> {
        self.check_realization(q)?;
        solve_fd(&self.kernel, &self.mesh, &q.values, &self.source)
    }

    /// `(u_ε − u0) / ε^{1/2 − α}`.
    pub fn corrector(&self, sol: &HelmholtzSolution) -> Vec<f64> {
        corrector(sol, self.epsilon, 1, self.alpha)
    }

    /// `−𝒢(q_ε u0) / ε^{1/2 − α}`.
    pub fn leading_corrector(&self, q: &FieldRealization) -> Result<Vec<f64>> {
        self.check_realization(q)?;
        let qu: Vec<f64> = q.values.iter().zip(&self.u0).map(|(a, b)| a * b).collect();
        let scale = self.corrector_scale();
        Ok(self.op.apply_unchecked(&qu).iter().map(|v| -v / scale).collect())
    }

    pub fn corrector_law_1d(&self) -> Result<CorrectorLawHelm1D> {
        let sigma2 = self.field.sigma2();
        let u0sq: Vec<f64> = self.u0.iter().map(|v| v * v).collect();
        let variance_fn = self.op.apply_squared(&u0sq)?.into_iter().map(|v| sigma2 * v).collect();
        Ok(CorrectorLawHelm1D { variance_fn, sigma2 })
    }

    /// Reduced moments `m_k = −(𝒢M_k) u0` and their limit covariance.
    pub fn moment_set(&self, tests: &[Vec<f64>]) -> Result<MomentSet> {
        let mut reduced = Vec::with_capacity(tests.len());
        for m in tests {
            let gm = self.op.apply(m)?;
            reduced.push(gm.iter().zip(&self.u0).map(|(a, b)| -a * b).collect::<Vec<_>>());
        }
        let sigma2 = self.field.sigma2();
        let covariance = Array2::from_shape_fn((tests.len(), tests.len()), |(j, k)| {
            sigma2 * self.mesh.dot(&reduced[j], &reduced[k])
        });
        Ok(MomentSet {
            tests: tests.to_vec(),
            reduced,
            covariance,
        })
    }

    /// `((u_ε − u0)/ε^{1/2 − α}, M_k)` for each test function.
    pub fn moment_functionals(&self, sol: &HelmholtzSolution, tests: &[Vec<f64>]) -> Vec<f64> {
        let c = self.corrector(sol);
        tests.iter().map(|m| self.mesh.dot(&c, m)).collect()
    }

    fn check_realization(&self, q: &FieldRealization) -> Result<()> {
        if q.values.len() != self.mesh.len() {
            return Err(Error::MeshMismatch {
                expected: self.mesh.len(),
                got: q.values.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectorLawHelm1D {
    /// `x ↦ Var u₁(x)` at the mesh nodes.
    pub variance_fn: Vec<f64>,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub tests: Vec<Vec<f64>>,
    pub reduced: Vec<Vec<f64>>,
    pub covariance: Array2<f64>,
}

/// The source problem for `−Δ + q0` on the unit square.
#[derive(Debug, Clone)]
pub struct HelmholtzProblem2D {
    pub grid: Grid2D,
    pub field: MaProcessSpec,
    pub source: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub truncation_rho: f64,
    op: GreenOperator2D,
    u0: Vec<f64>,
}

impl HelmholtzProblem2D {
    pub fn new(op: GreenOperator2D, field: MaProcessSpec, source: Vec<f64>, epsilon: f64) -> Result<Self> {
        field.validate()?;
        check_common(epsilon, 0.0, DEFAULT_TRUNCATION_RHO)?;
        let u0 = op.apply(&source)?;
        Ok(Self {
            grid: op.grid().clone(),
            field,
            source,
            epsilon,
            alpha: 0.0,
            truncation_rho: DEFAULT_TRUNCATION_RHO,
            op,
            u0,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_common(self.epsilon, alpha, self.truncation_rho)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn homogenized_solve(&self) -> &[f64] {
        &self.u0
    }

    /// Corrector normalization `ε^{2(1/2 − α)}`.
    pub fn corrector_scale(&self) -> f64 {
        self.epsilon.powf(2.0 * (0.5 - self.alpha))
    }

    pub fn perturbed_solve(&self, seed: u64, tol: f64) -> Result<HelmholtzSolution> {
        let amp = self.field.amplitude * self.epsilon.powf(-2.0 * self.alpha);
        let q = self.field.with_amplitude(amp).sample_2d(self.epsilon, &self.grid, seed)?;
        neumann_solve(
            |v| self.op.apply(v).expect("grid size fixed"),
            |v| self.grid.norm(v),
            &self.u0,
            &q.values,
            self.truncation_rho,
            tol,
        )
    }

    pub fn moment_functionals(&self, sol: &HelmholtzSolution, tests: &[Vec<f64>]) -> Vec<f64> {
        let c = corrector(sol, self.epsilon, 2, self.alpha);
        tests.iter().map(|m| self.grid.dot(&c, m)).collect()
    }

    pub fn moment_set(&self, tests: &[Vec<f64>]) -> Result<MomentSet> {
        let mut reduced = Vec::with_capacity(tests.len());
        for m in tests {
            let gm = self.op.apply(m)?;
            reduced.push(gm.iter().zip(&self.u0).map(|(a, b)| -a * b).collect::<Vec<_>>());
        }
        let sigma2 = self.field.sigma2_dim(2);
        let covariance = Array2::from_shape_fn((tests.len(), tests.len()), |(j, k)| {
            sigma2 * self.grid.dot(&reduced[j], &reduced[k])
        });
        Ok(MomentSet {
            tests: tests.to_vec(),
            reduced,
            covariance,
        })
    }
}

/// Zero-mean periodic solution of `−u₂'' = ⟨q⟩ − q` on the unit cell.
///
/// `q` holds samples at `n` uniform nodes of `[0, 1]`, both endpoints
/// included, so `q[0] == q[n-1]` for a periodic input.
pub fn periodic_cell_corrector_1d(q: &[f64]) -> Result<Vec<f64>> {
    let n = q.len();
    if n < 3 {
        return Err(invalid("q", "need at least 3 cell nodes"));
    }
    let mesh = Mesh1D::uniform(1.0, n)?;
    let h = mesh.h();
    let mean = mesh.integrate(q);
    let g: Vec<f64> = q.iter().map(|v| mean - v).collect();
    let cumulative = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (v[i] + v[i - 1]);
        }
        out
    };
    let slope: Vec<f64> = cumulative(&g).iter().map(|v| -v).collect();
    let mut u = cumulative(&slope);
    let drift = u[n - 1];
    for (i, v) in u.iter_mut().enumerate() {
        *v -= drift * mesh.nodes()[i];
    }
    let avg = mesh.integrate(&u);
    u.iter_mut().for_each(|v| *v -= avg);
    Ok(u)
}

/// `sup |u_ε − u0|` for the periodic potential `q(x/ε)` with homogenized
/// potential `⟨q⟩`, both solved by finite differences with `per_period`
/// cells per period.
pub fn periodic_sup_error(
    a_star: f64,
    q: impl Fn(f64) -> f64,
    q_mean: f64,
    f: impl Fn(f64) -> f64,
    epsilon: f64,
    per_period: usize,
) -> Result<f64> {
    let periods = (1.0 / epsilon).round();
    if (periods * epsilon - 1.0).abs() > 1e-9 {
        return Err(invalid("epsilon", "1/epsilon must be an integer"));
    }
    let mesh = Mesh1D::uniform(1.0, periods as usize * per_period + 1)?;
    let kernel = GreenKernel1D::unit(a_star, 0.0)?;
    let potential = mesh.map(|x| q(x / epsilon));
    let source = mesh.map(f);
    let u_eps = solve_fd(&kernel, &mesh, &potential, &source)?;
    let u0 = solve_fd(&kernel, &mesh, &vec![q_mean; mesh.len()], &source)?;
    Ok(u_eps.iter().zip(&u0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn problem(n: usize, eps: f64, amp: f64) -> HelmholtzProblem {
        let mesh = Mesh1D::uniform(1.0, n).unwrap();
        let f = vec![1.0; n];
        HelmholtzProblem::new(
            GreenKernel1D::unit(1.0, 0.0).unwrap(),
            mesh,
            MaProcessSpec::rademacher(&[0.5, 0.5]).with_amplitude(amp),
            f,
            eps,
        )
        .unwrap()
    }

    #[test]
    fn homogenized_matches_analytic() {
        let p = problem(201, 0.01, 1.0);
        for (x, u) in p.mesh.nodes().iter().zip(p.homogenized_solve()) {
            assert_abs_diff_eq!(*u, x * (1.0 - x) / 2.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn zero_amplitude_is_exact() {
        let p = problem(101, 0.02, 0.0);
        let s = p.perturbed_solve(4, 1e-12).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.u_eps, s.u0);
        assert!(p.corrector(&s).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn iteration_matches_fd() {
        let p = problem(401, 0.01, 3.0);
        for seed in 0..5 {
            let q = p.realize(seed).unwrap();
            let s = p.perturbed_solve_with(&q, 1e-13).unwrap();
            let d = p.direct_solve_fd(&q).unwrap();
            let err = s.u_eps.iter().zip(&d).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-10, "seed {seed}: {err}");
            assert!(!s.truncated);
        }
    }

    #[test]
    fn large_potential_is_truncated() {
        let p = problem(201, 0.2, 400.0);
        let s = p.perturbed_solve(1, 1e-10).unwrap();
        assert!(s.truncated);
        assert_eq!(s.u_eps, s.u0);
    }

    #[test]
    fn variance_law_at_centre() {
        let p = problem(3201, 1.0 / 400.0, 1.0);
        let law = p.corrector_law_1d().unwrap();
        assert_abs_diff_eq!(law.variance_fn[1600], 2.6972e-4, epsilon = 1e-7);
        assert_eq!(law.variance_fn[0], 0.0);
    }

    #[test]
    fn moment_covariance_constant_test() {
        let p = problem(1601, 0.01, 1.0);
        let set = p.moment_set(&[vec![1.0; 1601]]).unwrap();
        assert_abs_diff_eq!(set.covariance[[0, 0]], 1.0 / (16.0 * 630.0), epsilon = 1e-9);
    }

    #[test]
    fn fd_rejects_indefinite() {
        let mesh = Mesh1D::uniform(1.0, 11).unwrap();
        let k = GreenKernel1D::unit(1.0, 0.0).unwrap();
        let err = solve_fd(&k, &mesh, &vec![-1000.0; 11], &vec![1.0; 11]).unwrap_err();
        assert!(matches!(err, Error::IndefiniteOperator { .. }));
    }

    #[test]
    fn periodic_cell_single_mode() {
        let n = 1025;
        let q: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
        let u = periodic_cell_corrector_1d(&q).unwrap();
        let max = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_abs_diff_eq!(max, 1.0 / (4.0 * PI * PI), epsilon = 1e-6);
        for (i, v) in u.iter().enumerate() {
            let y = i as f64 / (n - 1) as f64;
            assert_abs_diff_eq!(*v, -(2.0 * PI * y).cos() / (4.0 * PI * PI), epsilon = 1e-6);
        }
        let flat = periodic_cell_corrector_1d(&[2.0; 17]).unwrap();
        assert!(flat.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(problem(11, 0.1, 1.0).with_alpha(0.3).is_err());
        assert!(problem(11, 0.1, 1.0).with_truncation_rho(1.0).is_err());
    }

    #[test]
    fn two_d_zero_amplitude() {
        let grid = Grid2D::new(33).unwrap();
        let op = GreenOperator2D::new(0.0, 32, &grid).unwrap();
        let p = HelmholtzProblem2D::new(op, MaProcessSpec::rademacher(&[1.0]).with_amplitude(0.0), vec![1.0; 33 * 33], 0.1)
            .unwrap();
        let s = p.perturbed_solve(0, 1e-12).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(p.moment_functionals(&s, &[vec![1.0; 33 * 33]]), vec![0.0]);
    }
}
