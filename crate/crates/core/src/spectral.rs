//! Eigenpairs of the perturbed and unperturbed 1D operators and the
//! rescaled eigenvalue, eigenvector and heat-flow correctors.
//!
//! `λ` always denotes an eigenvalue of the inverse operator `A = P⁻¹` and
//! `μ = 1/λ` the matching eigenvalue of `P`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::elliptic1d::{EllipticProblem1D, COMPONENT_B, COMPONENT_Q};
use crate::error::{invalid, Error, Result};
use crate::greens::GreenKernel1D;
use crate::linalg::tridiagonal_lowest;
use crate::mesh::Mesh1D;
use crate::randfield::MaProcessSpec;

/// Relative eigen-residual `‖Mu − μu‖ / ‖M‖` accepted from the eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    /// 1-based mode number.
    pub index: usize,
    pub lambda: f64,
    /// Unit vector in the quadrature norm, zero at the boundary.
    pub u: Vec<f64>,
    pub multiplicity: usize,
}

impl SpectralPair {
    pub fn mu(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// `λ_n = 1/(a* n²π² + q0)`, `u_n = √2 sin(nπx)`.
pub fn unperturbed_spectrum(a_star: f64, q0: f64, n_max: usize, mesh: &Mesh1D) -> Result<Vec<SpectralPair>> {
    GreenKernel1D::unit(a_star, q0)?;
    if n_max == 0 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    Ok((1..=n_max)
        .map(|n| {
            let k = n as f64 * PI;
            SpectralPair {
                index: n,
                lambda: 1.0 / (a_star * k * k + q0),
                u: sine_mode(n, mesh),
                multiplicity: 1,
            }
        })
        .collect())
}

/// Exact spectrum of the unperturbed three-point matrix on `mesh`: the
/// eigenvectors are the sampled sines, the eigenvalues
/// `μ_n = 4a*/h² sin²(nπh/2) + q0`.
pub fn discrete_unperturbed_spectrum(a_star: f64, q0: f64, n_max: usize, mesh: &Mesh1D) -> Result<Vec<SpectralPair>> {
    let h = mesh.h();
    let mut pairs = unperturbed_spectrum(a_star, q0, n_max, mesh)?;
    for p in &mut pairs {
        let s = (p.index as f64 * PI * h / 2.0).sin();
        p.lambda = 1.0 / (4.0 * a_star / (h * h) * s * s + q0);
    }
    Ok(pairs)
}

fn sine_mode(n: usize, mesh: &Mesh1D) -> Vec<f64> {
    let last = mesh.len() - 1;
    mesh.nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == 0 || i == last { 0.0 } else { SQRT_2 * (n as f64 * PI * x).sin() })
        .collect()
}

/// Three-point matrix of `−a* d²/dx² + q0 + potential` on interior nodes.
pub fn helmholtz_fd_matrix(a_star: f64, q0: f64, mesh: &Mesh1D, potential: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.len();
    let a = a_star / (mesh.h() * mesh.h());
    let diag = (1..n - 1).map(|i| 2.0 * a + q0 + potential[i]).collect();
    (diag, vec![-a; n - 3])
}

/// Lowest `n_max` eigenpairs of an interior tridiagonal matrix, returned as
/// inverse-operator pairs sorted by decreasing `λ`.
pub fn spectrum_from_matrix(diag: &[f64], off: &[f64], mesh: &Mesh1D, n_max: usize) -> Result<Vec<SpectralPair>> {
    if diag.len() + 2 != mesh.len() {
        return Err(Error::MeshMismatch {
            expected: mesh.len() - 2,
            got: diag.len(),
        });
    }
    let pairs = tridiagonal_lowest(diag, off, n_max, EIGEN_RESIDUAL_TOL)?;
    let mut out = Vec::with_capacity(pairs.len());
    for (k, p) in pairs.into_iter().enumerate() {
        if !(p.value > 0.0) {
            return Err(Error::IndefiniteOperator { row: k, pivot: p.value });
        }
        let mut u = vec![0.0; mesh.len()];
        u[1..mesh.len() - 1].copy_from_slice(&p.vector);
        let norm = mesh.norm(&u);
        u.iter_mut().for_each(|v| *v /= norm);
        out.push(SpectralPair {
            index: k + 1,
            lambda: 1.0 / p.value,
            u,
            multiplicity: 1,
        });
    }
    Ok(out)
}

/// `d_n`: half the distance to the nearest other eigenvalue in the list.
pub fn spectral_gaps(lambdas: &[f64]) -> Vec<f64> {
    (0..lambdas.len())
        .map(|n| {
            let mut d = f64::INFINITY;
            if n > 0 {
                d = d.min((lambdas[n] - lambdas[n - 1]).abs());
            }
            if n + 1 < lambdas.len() {
                d = d.min((lambdas[n] - lambdas[n + 1]).abs());
            }
            0.5 * d
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMatch {
    /// Position in the unperturbed list.
    pub reference: usize,
    /// Position in the perturbed list.
    pub perturbed: usize,
    pub gap: f64,
    /// `|λ^ε − λ| ≥ d_n`.
    pub flagged: bool,
}

/// Greedy nearest-eigenvalue matching. Gaps are computed within
/// `unperturbed`, so pass one more reference pair than will be matched.
pub fn match_eigenpairs(unperturbed: &[SpectralPair], perturbed: &[SpectralPair]) -> Vec<EigenMatch> {
    let lambdas: Vec<f64> = unperturbed.iter().map(|p| p.lambda).collect();
    let gaps = spectral_gaps(&lambdas);
    let mut used = vec![false; perturbed.len()];
    let mut out = Vec::new();
    for (n, p) in unperturbed.iter().enumerate() {
        let best = perturbed
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .min_by(|a, b| {
                let da = (a.1.lambda - p.lambda).abs();
                let db = (b.1.lambda - p.lambda).abs();
                da.total_cmp(&db)
            });
        if let Some((k, q)) = best {
            used[k] = true;
            out.push(EigenMatch {
                reference: n,
                perturbed: k,
                gap: gaps[n],
                flagged: (q.lambda - p.lambda).abs() >= gaps[n],
            });
        }
    }
    out
}

/// Which operator is perturbed.
#[derive(Debug, Clone)]
pub enum SpectralOperator {
    /// `−a* d²/dx² + q0 + q(x/ε)`.
    Helmholtz { field: MaProcessSpec },
    /// `−(a u')' + (q0 + q) u` with unit density.
    Elliptic(Box<EllipticProblem1D>),
}

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub a_star: f64,
    pub q0: f64,
    pub mesh: Mesh1D,
    pub epsilon: f64,
    pub n_max: usize,
    pub operator: SpectralOperator,
    /// Discrete unperturbed pairs `1..=n_max + 1`.
    reference: Vec<SpectralPair>,
}

/// Matched eigenpairs of one realization, aligned with the reference modes.
#[derive(Debug, Clone)]
pub struct SpectralRealization {
    pub pairs: Vec<SpectralPair>,
    pub matches: Vec<EigenMatch>,
}

impl SpectralRealization {
    pub fn flagged(&self) -> bool {
        self.matches.iter().any(|m| m.flagged)
    }
}

impl SpectralProblem {
    pub fn helmholtz(a_star: f64, q0: f64, mesh: Mesh1D, field: MaProcessSpec, epsilon: f64, n_max: usize) -> Result<Self> {
        field.validate()?;
        Self::build(a_star, q0, mesh, epsilon, n_max, SpectralOperator::Helmholtz { field })
    }

    pub fn elliptic(problem: EllipticProblem1D, n_max: usize) -> Result<Self> {
        let (a, q0, mesh, eps) = (problem.a_star(), problem.q0, problem.mesh.clone(), problem.epsilon);
        Self::build(a, q0, mesh, eps, n_max, SpectralOperator::Elliptic(Box::new(problem)))
    }

    fn build(a_star: f64, q0: f64, mesh: Mesh1D, epsilon: f64, n_max: usize, operator: SpectralOperator) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        if n_max == 0 || n_max + 2 >= mesh.len() {
            return Err(invalid("n_max", format!("must lie in 1..{}", mesh.len() - 2)));
        }
        let reference = discrete_unperturbed_spectrum(a_star, q0, n_max + 1, &mesh)?;
        Ok(Self {
            a_star,
            q0,
            mesh,
            epsilon,
            n_max,
            operator,
            reference,
        })
    }

    pub fn reference(&self) -> &[SpectralPair] {
        &self.reference[..self.n_max]
    }

    fn matrix(&self, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.operator {
            SpectralOperator::Helmholtz { field } => {
                let q = field.sample(self.epsilon, &self.mesh, seed)?;
                Ok(helmholtz_fd_matrix(self.a_star, self.q0, &self.mesh, &q.values))
            }
            SpectralOperator::Elliptic(p) => p.fd_matrix(&p.realize(seed)?),
        }
    }

    /// Perturbed pairs matched to the reference modes and sign-aligned so
    /// that `(u^ε_n, u_n) ≥ 0`.
    pub fn realize(&self, seed: u64) -> Result<SpectralRealization> {
        let (diag, off) = self.matrix(seed)?;
        let raw = spectrum_from_matrix(&diag, &off, &self.mesh, self.n_max + 1)?;
        let matches: Vec<EigenMatch> = match_eigenpairs(&self.reference, &raw)
            .into_iter()
            .take(self.n_max)
            .collect();
        let pairs = matches
            .iter()
            .map(|m| {
                let mut p = raw[m.perturbed].clone();
                let r = &self.reference[m.reference];
                if self.mesh.dot(&p.u, &r.u) < 0.0 {
                    p.u.iter_mut().for_each(|v| *v = -*v);
                }
                p.index = r.index;
                p
            })
            .collect();
        Ok(SpectralRealization { pairs, matches })
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            return Err(invalid("n", format!("mode must lie in 1..={}, got {n}", self.n_max)));
        }
        Ok(())
    }

    /// `((λ^ε_n)⁻¹ − λ_n⁻¹)/√ε`.
    pub fn eigenvalue_corrector(&self, r: &SpectralRealization, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        Ok((r.pairs[n - 1].mu() - self.reference[n - 1].mu()) / self.epsilon.sqrt())
    }

    /// `(λ^ε_n − λ_n)/√ε`.
    pub fn lambda_corrector(&self, r: &SpectralRealization, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        Ok((r.pairs[n - 1].lambda - self.reference[n - 1].lambda) / self.epsilon.sqrt())
    }

    /// `(u^ε_n − u_n, u_m)/√ε` for `n ≠ m`.
    pub fn eigenvector_fourier_corrector(&self, r: &SpectralRealization, n: usize, m: usize) -> Result<f64> {
        self.check_mode(n)?;
        self.check_mode(m)?;
        if n == m {
            return Err(Error::DiagonalCoefficient(n));
        }
        let un = &self.reference[n - 1].u;
        let diff: Vec<f64> = r.pairs[n - 1].u.iter().zip(un).map(|(a, b)| a - b).collect();
        Ok(self.mesh.dot(&diff, &self.reference[m - 1].u) / self.epsilon.sqrt())
    }

    /// `1 − (u_n, u^ε_n)`.
    pub fn overlap_defect(&self, r: &SpectralRealization, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        Ok(1.0 - self.mesh.dot(&r.pairs[n - 1].u, &self.reference[n - 1].u))
    }

    /// Heat-flow Fourier coefficient corrector for `u_t + ϵPu = 0`,
    /// `u(0) = g0`: the direct difference `(α^η_n − α_n)/η` with
    /// `α_n = e^{−ϵμ_n t}(u_n, g0)`, and the two-term first-order surrogate.
    pub fn heat_coefficient_corrector(
        &self,
        r: &SpectralRealization,
        n: usize,
        t: f64,
        evolution: f64,
        g0: &[f64],
    ) -> Result<HeatCorrector> {
        self.check_mode(n)?;
        if !(t >= 0.0) {
            return Err(invalid("t", format!("must be non-negative, got {t}")));
        }
        let eta = self.epsilon.sqrt();
        let reference = &self.reference[n - 1];
        let pert = &r.pairs[n - 1];
        let (mu, mu_eps) = (reference.mu(), pert.mu());
        let c = self.mesh.dot(&reference.u, g0);
        let c_eps = self.mesh.dot(&pert.u, g0);
        let decay = (-evolution * mu * t).exp();
        let direct = ((-evolution * mu_eps * t).exp() * c_eps - decay * c) / eta;
        let eigenvector_term = decay * (c_eps - c) / eta;
        let eigenvalue_term = decay * evolution * t * (mu - mu_eps) / eta * c;
        Ok(HeatCorrector {
            direct,
            surrogate: eigenvalue_term + eigenvector_term,
            eigenvalue_term,
            eigenvector_term,
        })
    }

    /// First-order limit laws, from the continuum spectrum.
    pub fn law(&self) -> Result<SpectralCorrectorLaw> {
        let sigma2 = match &self.operator {
            SpectralOperator::Helmholtz { field } => field.sigma2(),
            SpectralOperator::Elliptic(p) => p.triple.cross_sigma(COMPONENT_Q, COMPONENT_Q),
        };
        Ok(SpectralCorrectorLaw {
            a_star: self.a_star,
            q0: self.q0,
            sigma2,
        })
    }

    /// Limit variance of the elliptic eigenvalue corrector:
    /// `μ^ε − μ ≈ ∫ (−a* γ b₀ (u_n')² + q u_n²)`.
    pub fn elliptic_eigenvalue_variance(&self, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        let SpectralOperator::Elliptic(p) = &self.operator else {
            return Err(invalid("operator", "only defined for the elliptic operator"));
        };
        let k = n as f64 * PI;
        let s = p.triple.cross_sigma_matrix();
        let (b, q) = (COMPONENT_B, COMPONENT_Q);
        let ab = -p.a_star() * p.gamma;
        // ∫ (2k² cos²)², ∫ (2 cos² k²)(2 sin²), ∫ (2 sin²)² in closed form
        let i_bb = ab * ab * k.powi(4) * 1.5;
        let i_bq = ab * k * k * 0.5;
        let i_qq = 1.5;
        Ok(s[b][b] * i_bb + 2.0 * s[b][q] * i_bq + s[q][q] * i_qq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCorrector {
    pub direct: f64,
    pub surrogate: f64,
    pub eigenvalue_term: f64,
    pub eigenvector_term: f64,
}

/// Gaussian limits of the spectral correctors for the Helmholtz operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCorrectorLaw {
    pub a_star: f64,
    pub q0: f64,
    pub sigma2: f64,
}

impl SpectralCorrectorLaw {
    pub fn lambda(&self, n: usize) -> f64 {
        let k = n as f64 * PI;
        1.0 / (self.a_star * k * k + self.q0)
    }

    /// `∫ u_n² u_m²` for Dirichlet sines: 3/2 on the diagonal, 1 otherwise.
    pub fn sine_fourth_moment(n: usize, m: usize) -> f64 {
        if n == m {
            1.5
        } else {
            1.0
        }
    }

    /// Variance of the inverse-eigenvalue corrector, `σ² ∫ u_n⁴`.
    pub fn eigenvalue_variance(&self, n: usize) -> f64 {
        self.sigma2 * Self::sine_fourth_moment(n, n)
    }

    /// Covariance of the inverse-eigenvalue correctors of modes `n`, `m`.
    pub fn eigenvalue_covariance(&self, n: usize, m: usize) -> f64 {
        self.sigma2 * Self::sine_fourth_moment(n, m)
    }

    /// Covariance of the `λ` correctors: `σ² λ_n² λ_m² ∫ u_n² u_m²`.
    pub fn lambda_covariance(&self, n: usize, m: usize) -> f64 {
        self.sigma2 * (self.lambda(n) * self.lambda(m)).powi(2) * Self::sine_fourth_moment(n, m)
    }

    /// `σ² λ_n² λ_m² / (λ_n − λ_m)² ∫ u_n² u_m²`.
    pub fn fourier_variance(&self, n: usize, m: usize) -> Result<f64> {
        if n == m {
            return Err(Error::DiagonalCoefficient(n));
        }
        let (ln, lm) = (self.lambda(n), self.lambda(m));
        Ok(self.sigma2 * (ln * lm / (ln - lm)).powi(2) * Self::sine_fourth_moment(n, m))
    }

    /// Limit variance of the heat corrector, from the first-order
    /// representation `∫ q(y/ε)/√ε K(y) dy`, with modes up to `modes`.
    pub fn heat_variance(&self, n: usize, t: f64, evolution: f64, g0: &[f64], mesh: &Mesh1D, modes: usize) -> f64 {
        let mu = |k: usize| 1.0 / self.lambda(k);
        let coef = |k: usize| mesh.dot(&sine_mode(k, mesh), g0);
        let un = sine_mode(n, mesh);
        let mut kernel: Vec<f64> = un.iter().map(|u| -evolution * t * coef(n) * u * u).collect();
        for m in (1..=modes).filter(|&m| m != n) {
            let um = sine_mode(m, mesh);
            let w = coef(m) / (mu(m) - mu(n));
            kernel.iter_mut().zip(un.iter().zip(&um)).for_each(|(k, (a, b))| *k -= w * a * b);
        }
        let decay = (-evolution * mu(n) * t).exp();
        self.sigma2 * decay * decay * mesh.dot(&kernel, &kernel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analytic_spectrum() {
        let mesh = Mesh1D::uniform(1.0, 513).unwrap();
        let s = unperturbed_spectrum(1.0, 0.0, 6, &mesh).unwrap();
        assert_abs_diff_eq!(s[0].lambda, 0.101_321_2, epsilon = 1e-7);
        assert!(s.windows(2).all(|w| w[1].lambda < w[0].lambda));
        for a in &s {
            for b in &s {
                let expect = if a.index == b.index { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(mesh.dot(&a.u, &b.u), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_potential_reproduces_discrete_spectrum() {
        let mesh = Mesh1D::uniform(1.0, 401).unwrap();
        let field = MaProcessSpec::rademacher(&[1.0]).with_amplitude(0.0);
        let p = SpectralProblem::helmholtz(1.0, 0.5, mesh.clone(), field, 0.01, 5).unwrap();
        let r = p.realize(1).unwrap();
        assert!(!r.flagged());
        for (a, b) in r.pairs.iter().zip(p.reference()) {
            assert_abs_diff_eq!(a.lambda, b.lambda, epsilon = 1e-13);
            assert_abs_diff_eq!(p.eigenvalue_corrector(&r, a.index).unwrap(), 0.0, epsilon = 1e-7);
        }
        assert_abs_diff_eq!(p.eigenvector_fourier_corrector(&r, 1, 2).unwrap(), 0.0, epsilon = 1e-9);
        // continuum spectrum agrees to O(h²)
        let analytic = unperturbed_spectrum(1.0, 0.5, 5, &mesh).unwrap();
        for (a, b) in r.pairs.iter().zip(&analytic) {
            assert!((a.mu() - b.mu()).abs() / b.mu() < 1e-3);
        }
    }

    #[test]
    fn diagonal_fourier_rejected() {
        let mesh = Mesh1D::uniform(1.0, 101).unwrap();
        let p = SpectralProblem::helmholtz(1.0, 0.0, mesh, MaProcessSpec::rademacher(&[1.0]), 0.05, 3).unwrap();
        let r = p.realize(0).unwrap();
        assert!(matches!(p.eigenvector_fourier_corrector(&r, 2, 2), Err(Error::DiagonalCoefficient(2))));
    }

    #[test]
    fn law_values() {
        let law = SpectralCorrectorLaw {
            a_star: 1.0,
            q0: 0.0,
            sigma2: 1.0,
        };
        assert_eq!(law.eigenvalue_variance(3), 1.5);
        assert_abs_diff_eq!(law.fourier_variance(1, 2).unwrap(), 1.0 / (9.0 * PI.powi(4)), epsilon = 1e-15);
        assert!(law.fourier_variance(1, 1).is_err());
    }

    #[test]
    fn gaps_and_matching() {
        let g = spectral_gaps(&[1.0, 0.5, 0.2]);
        assert_eq!(g, vec![0.25, 0.15, 0.15]);
        let mesh = Mesh1D::uniform(1.0, 11).unwrap();
        let u = unperturbed_spectrum(1.0, 0.0, 3, &mesh).unwrap();
        let m = match_eigenpairs(&u, &u);
        assert!(m.iter().enumerate().all(|(i, e)| e.perturbed == i && !e.flagged));
    }

    #[test]
    fn heat_corrector_at_time_zero() {
        let mesh = Mesh1D::uniform(1.0, 401).unwrap();
        let p = SpectralProblem::helmholtz(1.0, 0.0, mesh.clone(), MaProcessSpec::rademacher(&[0.5, 0.5]), 0.01, 4).unwrap();
        let r = p.realize(5).unwrap();
        let g0 = mesh.map(|x| x * (1.0 - x));
        let h = p.heat_coefficient_corrector(&r, 1, 0.0, 1.0, &g0).unwrap();
        assert_eq!(h.eigenvalue_term, 0.0);
        assert_abs_diff_eq!(h.direct, h.eigenvector_term, epsilon = 1e-14);
    }

    #[test]
    fn residuals_small() {
        let mesh = Mesh1D::uniform(1.0, 801).unwrap();
        let q = MaProcessSpec::rademacher(&[0.5, 0.5]).sample(0.01, &mesh, 2).unwrap();
        let (d, e) = helmholtz_fd_matrix(1.0, 0.0, &mesh, &q.values);
        let pairs = tridiagonal_lowest(&d, &e, 8, EIGEN_RESIDUAL_TOL).unwrap();
        for p in pairs {
            assert!(p.residual < 1e-6, "{}", p.residual);
        }
    }
}
