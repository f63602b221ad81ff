//! One-dimensional random elliptic problem
//!
//! ```text
//! −(a_ε u')' + (q0 + q_ε) u = ρ_ε f  on (0, 1),  u(0) = u(1) = 0
//! ```
//!
//! with `1/a = (1 + γ b₀)/a_base`, `ρ = ρ̄ + δρ`, solved in harmonic
//! coordinates `z(x) = a* ∫₀ˣ dt/a(t)`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::greens::{GreenKernel1D, GreenOperator};
use crate::helmholtz::{neumann_solve, HelmholtzSolution, DEFAULT_TRUNCATION_RHO};
use crate::linalg::solve_spd_tridiagonal;
use crate::mesh::Mesh1D;
use crate::randfield::{CorrelatedTripleSpec, FieldRealization};

/// Component order inside the driving triple.
pub const COMPONENT_B: usize = 0;
pub const COMPONENT_RHO: usize = 1;
pub const COMPONENT_Q: usize = 2;

/// Largest admissible `γ · bound(b₀)`.
pub const MAX_CONTRAST: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct EllipticProblem1D {
    pub triple: CorrelatedTripleSpec,
    pub gamma: f64,
    pub a_base: f64,
    pub q0: f64,
    pub rho_bar: f64,
    pub source: Vec<f64>,
    pub mesh: Mesh1D,
    pub epsilon: f64,
    pub truncation_rho: f64,
    kernel: GreenKernel1D,
    u0: Vec<f64>,
    gf: Vec<f64>,
}

/// One sample of `(b₀, δρ, q)`.
#[derive(Debug, Clone)]
pub struct EllipticRealization {
    pub b0: FieldRealization,
    pub delta_rho: FieldRealization,
    pub q: FieldRealization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoords {
    pub z_eps: Vec<f64>,
    pub a_star: f64,
    /// `z_ε(x) − x`.
    pub delta_z: Vec<f64>,
    /// `dz/dx = a*/a_ε` at the nodes.
    pub dz_dx: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorKernels {
    /// `H_b(x_i, t_j)`, taking the limit `t → x⁺` on the diagonal.
    pub h_b: Array2<f64>,
    /// Jump `H_b(x, x⁻) − H_b(x, x⁺)` at each node.
    pub h_b_jump: Vec<f64>,
    pub h_rho: Array2<f64>,
    pub h_q: Array2<f64>,
}

/// Kernels `H_b`, `H_ρ`, `H_q` at a fixed `x_i`, as functions of `t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub h_b: Vec<f64>,
    pub h_b_jump: f64,
    pub h_rho: Vec<f64>,
    pub h_q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticLimitLaw {
    /// Integrated covariance of `(b, δρ, q̃)` with `b = γ b₀`, `q̃ = q − q0 b`.
    pub covariance: [[f64; 3]; 3],
    pub rho_jk: [[f64; 3]; 3],
    /// `√∫R_kk` for each component.
    pub sigma: [f64; 3],
    pub variance_fn: Vec<f64>,
}

impl EllipticProblem1D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        triple: CorrelatedTripleSpec,
        gamma: f64,
        a_base: f64,
        q0: f64,
        rho_bar: f64,
        source: Vec<f64>,
        mesh: Mesh1D,
        epsilon: f64,
    ) -> Result<Self> {
        triple.validate()?;
        if !(a_base > 0.0 && a_base.is_finite()) {
            return Err(invalid("a_base", format!("must be positive, got {a_base}")));
        }
        if !(gamma >= 0.0 && gamma * triple.component_bound(COMPONENT_B) <= MAX_CONTRAST) {
            return Err(invalid(
                "gamma",
                format!("gamma * bound(b0) must lie in [0, {MAX_CONTRAST}], got {gamma}"),
            ));
        }
        if !(rho_bar > 0.0 && rho_bar - triple.component_bound(COMPONENT_RHO) > 0.0) {
            return Err(invalid("rho_bar", "rho_bar must exceed the bound of delta_rho"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        if source.len() != mesh.len() {
            return Err(Error::MeshMismatch {
                expected: mesh.len(),
                got: source.len(),
            });
        }
        if (mesh.length() - 1.0).abs() > 1e-12 {
            return Err(invalid("mesh", "must cover [0, 1]"));
        }
        let kernel = GreenKernel1D::unit(a_base, q0)?;
        let op = GreenOperator::new(kernel, &mesh)?;
        let gf = op.apply(&source)?;
        let u0 = gf.iter().map(|v| rho_bar * v).collect();
        Ok(Self {
            triple,
            gamma,
            a_base,
            q0,
            rho_bar,
            source,
            mesh,
            epsilon,
            truncation_rho: DEFAULT_TRUNCATION_RHO,
            kernel,
            u0,
            gf,
        })
    }

    pub fn with_truncation_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(invalid("truncation_rho", format!("must lie in (0, 1), got {rho}")));
        }
        self.truncation_rho = rho;
        Ok(self)
    }

    /// `a* = 1/E{1/a} = a_base`.
    pub fn a_star(&self) -> f64 {
        self.a_base
    }

    pub fn kernel(&self) -> &GreenKernel1D {
        &self.kernel
    }

    /// `u0 = 𝒢(ρ̄ f)`.
    pub fn homogenized_solve(&self) -> &[f64] {
        &self.u0
    }

    pub fn realize(&self, seed: u64) -> Result<EllipticRealization> {
        let [b0, delta_rho, q] = self.triple.sample_triple(self.epsilon, &self.mesh, seed)?;
        Ok(EllipticRealization { b0, delta_rho, q })
    }

    /// `z(x) = x + γ ∫₀ˣ b₀`, integrated exactly on the piecewise-constant path.
    pub fn harmonic_coords(&self, b0: &FieldRealization) -> Result<HarmonicCoords> {
        let nodes = self.mesh.nodes();
        let mut z = Vec::with_capacity(nodes.len());
        let mut dz_dx = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        for (i, &x) in nodes.iter().enumerate() {
            let slope = 1.0 + self.gamma * b0.values[i];
            if !(slope > 0.0) {
                return Err(Error::NotElliptic { node: i, value: slope / self.a_base });
            }
            if i > 0 {
                acc += self.gamma * b0.integral(nodes[i - 1], x);
            }
            dz_dx.push(slope);
            z.push(x + acc);
        }
        let delta_z = z.iter().zip(nodes).map(|(a, b)| a - b).collect();
        Ok(HarmonicCoords {
            z_eps: z,
            a_star: self.a_base,
            delta_z,
            dz_dx,
        })
    }

    /// `q̃ = (1 − a*/a) q0 + q = q − q0 γ b₀`, with `b₀` averaged over dual cells.
    pub fn tilde_q(&self, r: &EllipticRealization) -> Vec<f64> {
        let b_avg = r.b0.dual_cell_averages(&self.mesh);
        r.q.values
            .iter()
            .zip(&b_avg)
            .map(|(q, b)| q - self.q0 * self.gamma * b)
            .collect()
    }

    /// `ρ_ε f` at the nodes.
    pub fn weighted_source(&self, r: &EllipticRealization) -> Vec<f64> {
        r.delta_rho
            .values
            .iter()
            .zip(&self.source)
            .map(|(d, f)| (self.rho_bar + d) * f)
            .collect()
    }

    /// Green's operator `𝒢_ε` with kernel `G(z(x), z(y); z(1))`.
    pub fn transformed_green(&self, coords: &HarmonicCoords) -> GreenOperator {
        let length = *coords.z_eps.last().expect("nonempty mesh");
        GreenOperator::with_coordinates(self.kernel, &coords.z_eps, self.mesh.weights(), length)
    }

    pub fn solve_transformed(&self, seed: u64, tol: f64) -> Result<HelmholtzSolution> {
        let r = self.realize(seed)?;
        self.solve_transformed_with(&r, tol)
    }

    pub fn solve_transformed_with(&self, r: &EllipticRealization, tol: f64) -> Result<HelmholtzSolution> {
        let coords = self.harmonic_coords(&r.b0)?;
        let op = self.transformed_green(&coords);
        let v0 = op.apply(&self.weighted_source(r))?;
        let mut sol = neumann_solve(
            |v| op.apply(v).expect("mesh fixed"),
            |v| self.mesh.norm(v),
            &v0,
            &self.tilde_q(r),
            self.truncation_rho,
            tol,
        )?;
        sol.u0 = self.u0.clone();
        Ok(sol)
    }

    /// Half-node coefficients `a_{i+1/2} = h / ∫_cell 1/a`.
    pub fn half_node_coefficients(&self, b0: &FieldRealization) -> Result<Vec<f64>> {
        let nodes = self.mesh.nodes();
        let h = self.mesh.h();
        nodes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let inv = (w[1] - w[0] + self.gamma * b0.integral(w[0], w[1])) / self.a_base;
                if !(inv > 0.0) {
                    return Err(Error::NotElliptic { node: i, value: inv / h });
                }
                Ok(h / inv)
            })
            .collect()
    }

    /// Conservative three-point matrix of `−(a u')' + (q0 + q) u` on interior nodes.
    pub fn fd_matrix(&self, r: &EllipticRealization) -> Result<(Vec<f64>, Vec<f64>)> {
        let a = self.half_node_coefficients(&r.b0)?;
        let n = self.mesh.len();
        let h2 = self.mesh.h() * self.mesh.h();
        let diag = (1..n - 1)
            .map(|i| (a[i - 1] + a[i]) / h2 + self.q0 + r.q.values[i])
            .collect();
        let off = (1..n - 2).map(|i| -a[i] / h2).collect();
        Ok((diag, off))
    }

    pub fn direct_solve_conservative(&self, r: &EllipticRealization) -> Result<Vec<f64>> {
        let (diag, off) = self.fd_matrix(r)?;
        let n = self.mesh.len();
        let rhs = self.weighted_source(r);
        let inner = solve_spd_tridiagonal(&diag, &off, &rhs[1..n - 1])?;
        let mut u = vec![0.0; n];
        u[1..n - 1].copy_from_slice(&inner);
        Ok(u)
    }

    /// `(u_ε − u0)/√ε`.
    pub fn corrector(&self, sol: &HelmholtzSolution) -> Vec<f64> {
        let s = self.epsilon.sqrt();
        sol.u_eps.iter().zip(&self.u0).map(|(u, v)| (u - v) / s).collect()
    }

    /// Kernel values at `x_i`.
    pub fn kernel_row(&self, i: usize) -> KernelRow {
        let nodes = self.mesh.nodes();
        let n = nodes.len();
        let x = nodes[i];
        let f = &self.source;
        let g = &self.kernel;
        // y-integrands on each segment use the branch of the side it lies on
        let mut a_int = 0.0;
        let mut c_int = 0.0;
        let mut tail = vec![0.0; n];
        for j in (0..n - 1).rev() {
            let below = j >= i;
            let (y0, y1) = (nodes[j], nodes[j + 1]);
            let p0 = g.partials_sided(x, y0, below);
            let p1 = g.partials_sided(x, y1, below);
            let hh = 0.5 * (y1 - y0);
            a_int += hh * (p0.dx * f[j] + p1.dx * f[j + 1]);
            c_int += hh * (p0.dl * f[j] + p1.dl * f[j + 1]);
            tail[j] = tail[j + 1] + hh * (p0.dy * f[j] + p1.dy * f[j + 1]);
        }
        let rb = self.rho_bar;
        let h_b = (0..n)
            .map(|j| rb * (if j < i { a_int } else { 0.0 } + tail[j] + c_int))
            .collect();
        let h_rho: Vec<f64> = (0..n).map(|j| g.eval_with_length(x, nodes[j], 1.0) * f[j]).collect();
        let h_q = (0..n)
            .map(|j| g.eval_with_length(x, nodes[j], 1.0) * rb * self.gf[j])
            .collect();
        KernelRow {
            h_b,
            h_b_jump: rb * a_int,
            h_rho,
            h_q,
        }
    }

    pub fn corrector_kernels(&self) -> CorrectorKernels {
        let n = self.mesh.len();
        let mut h_b = Array2::zeros((n, n));
        let mut h_rho = Array2::zeros((n, n));
        let mut h_q = Array2::zeros((n, n));
        let mut jump = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.kernel_row(i);
            for j in 0..n {
                h_b[[i, j]] = row.h_b[j];
                h_rho[[i, j]] = row.h_rho[j];
                h_q[[i, j]] = row.h_q[j];
            }
            jump.push(row.h_b_jump);
        }
        CorrectorKernels {
            h_b,
            h_b_jump: jump,
            h_rho,
            h_q,
        }
    }

    /// Integrated covariance of `(b, δρ, q̃)`.
    pub fn limit_covariance(&self) -> [[f64; 3]; 3] {
        let raw = self.triple.cross_sigma_matrix();
        let l = [
            [self.gamma, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-self.q0 * self.gamma, 0.0, 1.0],
        ];
        let mut out = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        acc += l[j][a] * raw[a][b] * l[k][b];
                    }
                }
                out[j][k] = acc;
            }
        }
        out
    }

    /// Limit variance of the corrector at node `i`.
    pub fn limit_variance_at(&self, i: usize, cov: &[[f64; 3]; 3]) -> f64 {
        let row = self.kernel_row(i);
        let nodes = self.mesh.nodes();
        let form = |hb: f64, j: usize| {
            let h = [hb, row.h_rho[j], -row.h_q[j]];
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += h[a] * cov[a][b] * h[b];
                }
            }
            acc
        };
        let mut total = 0.0;
        for j in 0..nodes.len() - 1 {
            // on [t_j, t_{j+1}] with t_{j+1} = x_i, the right end takes the t → x⁻ limit
            let right_hb = if j + 1 == i { row.h_b[j + 1] + row.h_b_jump } else { row.h_b[j + 1] };
            total += 0.5 * (nodes[j + 1] - nodes[j]) * (form(row.h_b[j], j) + form(right_hb, j + 1));
        }
        total
    }

    pub fn limit_law(&self) -> EllipticLimitLaw {
        let all: Vec<usize> = (0..self.mesh.len()).collect();
        self.limit_law_at(&all)
    }

    /// Limit law with the variance evaluated only at the listed nodes.
    pub fn limit_law_at(&self, nodes: &[usize]) -> EllipticLimitLaw {
        let covariance = self.limit_covariance();
        let sigma = [0, 1, 2].map(|k| covariance[k][k].max(0.0).sqrt());
        let mut rho_jk = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                rho_jk[j][k] = if sigma[j] > 0.0 && sigma[k] > 0.0 {
                    (covariance[j][k] / (sigma[j] * sigma[k])).clamp(-1.0, 1.0)
                } else {
                    0.0
                };
            }
        }
        let variance_fn = nodes.iter().map(|&i| self.limit_variance_at(i, &covariance)).collect();
        EllipticLimitLaw {
            covariance,
            rho_jk,
            sigma,
            variance_fn,
        }
    }
}
