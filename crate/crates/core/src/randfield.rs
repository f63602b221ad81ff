//! Stationary, bounded, finite-range random processes.
//!
//! A process is a random-phase moving average of iid bounded lattice noise:
//!
//! ```text
//! q(y) = amplitude · Σ_k w_k ξ_{k + floor(y + U)}
//! ```
//!
//! with one uniform phase `U` per realization. The lattice autocovariance is
//! `C(n) = amplitude² Var(ξ) Σ_k w_k w_{k+n}`, the continuous correlation is the
//! piecewise-linear interpolation of `C`, and values at distance larger than
//! `W + 1` are independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::{Grid2D, Mesh1D};

/// Largest number of lattice cells a single realization may span.
pub const MAX_LATTICE_CELLS: f64 = 2.0e8;

/// Law of the iid lattice noise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalDist {
    #[default]
    Rademacher,
    UniformPm1,
    TruncatedGaussian {
        bound: f64,
    },
}

impl MarginalDist {
    pub fn variance(&self) -> f64 {
        match *self {
            MarginalDist::Rademacher => 1.0,
            MarginalDist::UniformPm1 => 1.0 / 3.0,
            MarginalDist::TruncatedGaussian { bound } => {
                let mass = statrs::function::erf::erf(bound / std::f64::consts::SQRT_2);
                let density = (-0.5 * bound * bound).exp() / (2.0 * std::f64::consts::PI).sqrt();
                1.0 - 2.0 * bound * density / mass
            }
        }
    }

    /// Almost-sure bound on |ξ|.
    pub fn bound(&self) -> f64 {
        match *self {
            MarginalDist::Rademacher | MarginalDist::UniformPm1 => 1.0,
            MarginalDist::TruncatedGaussian { bound } => bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let MarginalDist::TruncatedGaussian { bound } = *self {
            if !(bound > 0.0 && bound.is_finite()) {
                return Err(invalid("marginal.bound", format!("must be positive, got {bound}")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MarginalDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            MarginalDist::UniformPm1 => rng.random_range(-1.0..1.0),
            MarginalDist::TruncatedGaussian { bound } => loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= bound {
                    break z;
                }
            },
        }
    }
}

fn default_amplitude() -> f64 {
    1.0
}

/// Moving-average process driven by a single noise sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaProcessSpec {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub marginal: MarginalDist,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl MaProcessSpec {
    pub fn new(weights: Vec<f64>, marginal: MarginalDist, amplitude: f64) -> Result<Self> {
        let spec = Self {
            weights,
            marginal,
            amplitude,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rademacher(weights: &[f64]) -> Self {
        Self {
            weights: weights.to_vec(),
            marginal: MarginalDist::Rademacher,
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(invalid("weights", "must be nonempty"));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights", "must be finite"));
        }
        if !self.amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        self.marginal.validate()
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    /// `C(n) = amplitude² Var(ξ) Σ_k w_k w_{k+n}`.
    pub fn autocovariance_lattice(&self, n: i64) -> f64 {
        self.amplitude * self.amplitude * self.marginal.variance() * lag_product(&self.weights, &self.weights, n)
    }

    /// Continuous correlation `R(τ) = E{q(y) q(y + τ)}`.
    pub fn correlation(&self, tau: f64) -> f64 {
        interpolate_lattice(tau.abs(), |n| self.autocovariance_lattice(n))
    }

    /// `σ² = ∫ R = amplitude² Var(ξ) (Σ w)²`.
    pub fn sigma2(&self) -> f64 {
        let s: f64 = self.weights.iter().sum();
        self.amplitude * self.amplitude * self.marginal.variance() * s * s
    }

    /// Integrated correlation of the tensor-product field in dimension `d`.
    pub fn sigma2_dim(&self, d: u32) -> f64 {
        let s: f64 = self.weights.iter().sum();
        self.amplitude * self.amplitude * self.marginal.variance() * s.powi(2 * d as i32)
    }

    /// Distance beyond which values are exactly independent.
    pub fn mixing_range(&self) -> f64 {
        (self.weights.len() + 1) as f64
    }

    /// Almost-sure bound on |q|.
    pub fn bound(&self) -> f64 {
        self.amplitude.abs() * self.marginal.bound() * self.weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// Sample `q(x/ε)` at the nodes of `mesh`.
    pub fn sample(&self, epsilon: f64, mesh: &Mesh1D, seed: u64) -> Result<FieldRealization> {
        self.validate()?;
        check_epsilon(epsilon)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase: f64 = rng.random();
        let cells = lattice_cells(mesh.length(), epsilon, phase)?;
        let noise = draw_noise(&self.marginal, &mut rng, cells + self.weights.len() - 1);
        let lattice = filter(&noise, &self.weights, self.amplitude, cells);
        Ok(FieldRealization::from_lattice(epsilon, seed, phase, lattice, mesh))
    }

    /// Sample the tensor-product field `amplitude Σ_{k,l} w_k w_l ξ_{k+i, l+j}`
    /// on a 2D grid, with an independent phase per axis.
    pub fn sample_2d(&self, epsilon: f64, grid: &Grid2D, seed: u64) -> Result<FieldRealization2D> {
        self.validate()?;
        check_epsilon(epsilon)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = (rng.random::<f64>(), rng.random::<f64>());
        let c0 = lattice_cells(1.0, epsilon, phase.0)?;
        let c1 = lattice_cells(1.0, epsilon, phase.1)?;
        let w = self.weights.len();
        let (r0, r1) = (c0 + w - 1, c1 + w - 1);
        if (r0 as f64) * (r1 as f64) > MAX_LATTICE_CELLS {
            return Err(Error::LatticeOverflow {
                cells: (r0 as f64) * (r1 as f64),
            });
        }
        let noise = draw_noise(&self.marginal, &mut rng, r0 * r1);
        // filter along the second axis, then the first
        let mut partial = vec![0.0; r0 * c1];
        for i in 0..r0 {
            let row = filter(&noise[i * r1..(i + 1) * r1], &self.weights, 1.0, c1);
            partial[i * c1..(i + 1) * c1].copy_from_slice(&row);
        }
        let mut lattice = vec![0.0; c0 * c1];
        for j in 0..c1 {
            for i in 0..c0 {
                let mut acc = 0.0;
                for (k, wk) in self.weights.iter().enumerate() {
                    acc += wk * partial[(i + k) * c1 + j];
                }
                lattice[i * c1 + j] = self.amplitude * acc;
            }
        }
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            let ia = cell_index(grid.coord(a), epsilon, phase.0, c0);
            for b in 0..n {
                let ib = cell_index(grid.coord(b), epsilon, phase.1, c1);
                values.push(lattice[ia * c1 + ib]);
            }
        }
        Ok(FieldRealization2D {
            epsilon,
            seed,
            phase,
            values,
        })
    }
}

/// Three processes driven by shared lattice noise.
///
/// Each component filters one or more independent noise channels; components
/// that share a channel are correlated through it. With a single channel all
/// integrated cross-correlations factor and the correlation matrix has rank one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedTripleSpec {
    #[serde(default)]
    pub marginal: MarginalDist,
    pub components: [TripleComponent; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleComponent {
    /// `filters[c]` is the weight sequence applied to noise channel `c`.
    pub filters: Vec<Vec<f64>>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl TripleComponent {
    pub fn single(weights: &[f64], amplitude: f64) -> Self {
        Self {
            filters: vec![weights.to_vec()],
            amplitude,
        }
    }

    pub fn on_channel(channel: usize, weights: &[f64], amplitude: f64) -> Self {
        let mut filters = vec![Vec::new(); channel + 1];
        filters[channel] = weights.to_vec();
        Self { filters, amplitude }
    }

    fn filter(&self, c: usize) -> &[f64] {
        self.filters.get(c).map(|f| f.as_slice()).unwrap_or(&[])
    }

    fn width(&self) -> usize {
        self.filters.iter().map(|f| f.len()).max().unwrap_or(0)
    }

    fn weight_sum(&self, c: usize) -> f64 {
        self.filter(c).iter().sum()
    }

    /// Almost-sure bound on |component| for noise bounded by `noise_bound`.
    pub fn bound(&self, noise_bound: f64) -> f64 {
        let total: f64 = self.filters.iter().flatten().map(|w| w.abs()).sum();
        self.amplitude.abs() * noise_bound * total
    }
}

impl CorrelatedTripleSpec {
    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        for comp in &self.components {
            if comp.width() == 0 {
                return Err(invalid("components.filters", "each component needs a nonempty filter"));
            }
            if comp.filters.iter().flatten().any(|w| !w.is_finite()) || !comp.amplitude.is_finite() {
                return Err(invalid("components", "weights and amplitudes must be finite"));
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.components.iter().map(|c| c.filters.len()).max().unwrap_or(0)
    }

    fn max_width(&self) -> usize {
        self.components.iter().map(|c| c.width()).max().unwrap_or(1)
    }

    pub fn component_bound(&self, k: usize) -> f64 {
        self.components[k].bound(self.marginal.bound())
    }

    pub fn mixing_range(&self) -> f64 {
        (self.max_width() + 1) as f64
    }

    /// `C_jk(n) = E{p_j(cell m) p_k(cell m + n)}`.
    pub fn cross_covariance_lattice(&self, j: usize, k: usize, n: i64) -> f64 {
        let (a, b) = (&self.components[j], &self.components[k]);
        let lag: f64 = (0..self.channels())
            .map(|c| lag_product(b.filter(c), a.filter(c), n))
            .sum();
        a.amplitude * b.amplitude * self.marginal.variance() * lag
    }

    /// `R_jk(τ) = E{p_j(y) p_k(y + τ)}`.
    pub fn cross_correlation(&self, j: usize, k: usize, tau: f64) -> f64 {
        interpolate_lattice(tau, |n| self.cross_covariance_lattice(j, k, n))
    }

    /// `∫ R_jk(τ) dτ`.
    pub fn cross_sigma(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (&self.components[j], &self.components[k]);
        let s: f64 = (0..self.channels()).map(|c| a.weight_sum(c) * b.weight_sum(c)).sum();
        a.amplitude * b.amplitude * self.marginal.variance() * s
    }

    pub fn cross_sigma_matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (j, row) in m.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = self.cross_sigma(j, k);
            }
        }
        m
    }

    pub fn sample_triple(&self, epsilon: f64, mesh: &Mesh1D, seed: u64) -> Result<[FieldRealization; 3]> {
        self.validate()?;
        check_epsilon(epsilon)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase: f64 = rng.random();
        let cells = lattice_cells(mesh.length(), epsilon, phase)?;
        let len = cells + self.max_width() - 1;
        let noise: Vec<Vec<f64>> = (0..self.channels())
            .map(|_| draw_noise(&self.marginal, &mut rng, len))
            .collect();
        let build = |comp: &TripleComponent| {
            let mut lattice = vec![0.0; cells];
            for (c, xi) in noise.iter().enumerate() {
                let w = comp.filter(c);
                if w.is_empty() {
                    continue;
                }
                for (dst, v) in lattice.iter_mut().zip(filter(xi, w, comp.amplitude, cells)) {
                    *dst += v;
                }
            }
            FieldRealization::from_lattice(epsilon, seed, phase, lattice, mesh)
        };
        Ok([
            build(&self.components[0]),
            build(&self.components[1]),
            build(&self.components[2]),
        ])
    }
}

/// One path `x ↦ q(x/ε)` together with its node samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub epsilon: f64,
    pub seed: u64,
    pub phase: f64,
    /// Value on the lattice cell `y ∈ [j − U, j + 1 − U)`.
    lattice: Vec<f64>,
    prefix: Vec<f64>,
    /// Samples at the mesh nodes.
    pub values: Vec<f64>,
}

impl FieldRealization {
    fn from_lattice(epsilon: f64, seed: u64, phase: f64, lattice: Vec<f64>, mesh: &Mesh1D) -> Self {
        let mut prefix = Vec::with_capacity(lattice.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in &lattice {
            acc += v;
            prefix.push(acc);
        }
        let values = mesh
            .nodes()
            .iter()
            .map(|&x| lattice[cell_index(x, epsilon, phase, lattice.len())])
            .collect();
        Self {
            epsilon,
            seed,
            phase,
            lattice,
            prefix,
            values,
        }
    }

    /// A realization that is identically zero on `mesh`.
    pub fn zero(epsilon: f64, mesh: &Mesh1D) -> Self {
        Self::from_lattice(epsilon, 0, 0.0, vec![0.0], mesh)
    }

    pub fn lattice(&self) -> &[f64] {
        &self.lattice
    }

    pub fn at(&self, x: f64) -> f64 {
        self.lattice[cell_index(x, self.epsilon, self.phase, self.lattice.len())]
    }

    fn antiderivative(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        let j = y.floor() as usize;
        if j >= self.lattice.len() {
            return self.prefix[self.lattice.len()];
        }
        self.prefix[j] + (y - j as f64) * self.lattice[j]
    }

    /// Exact `∫_a^b q(x/ε) dx` of the piecewise-constant path.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let ya = a / self.epsilon + self.phase;
        let yb = b / self.epsilon + self.phase;
        self.epsilon * (self.antiderivative(yb) - self.antiderivative(ya))
    }

    /// Averages of the path over the dual cells `[x_i − h/2, x_i + h/2] ∩ [0, L]`.
    pub fn dual_cell_averages(&self, mesh: &Mesh1D) -> Vec<f64> {
        let h = mesh.h();
        let n = mesh.len();
        mesh.nodes()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let a = if i == 0 { 0.0 } else { x - 0.5 * h };
                let b = if i + 1 == n { mesh.length() } else { x + 0.5 * h };
                self.integral(a, b) / (b - a)
            })
            .collect()
    }
}

/// Node samples of a 2D tensor-product field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization2D {
    pub epsilon: f64,
    pub seed: u64,
    pub phase: (f64, f64),
    pub values: Vec<f64>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    Ok(())
}

fn lattice_cells(length: f64, epsilon: f64, phase: f64) -> Result<usize> {
    let cells = (length / epsilon + phase).floor() + 1.0;
    if !cells.is_finite() || cells > MAX_LATTICE_CELLS {
        return Err(Error::LatticeOverflow { cells });
    }
    Ok(cells as usize)
}

fn cell_index(x: f64, epsilon: f64, phase: f64, cells: usize) -> usize {
    let j = (x / epsilon + phase).floor();
    (j.max(0.0) as usize).min(cells - 1)
}

fn draw_noise<R: Rng>(marginal: &MarginalDist, rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| marginal.sample(rng)).collect()
}

/// `out_j = amplitude Σ_k w_k ξ_{j+k}` for `j < count`.
fn filter(noise: &[f64], weights: &[f64], amplitude: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| {
            amplitude
                * weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * noise.get(j + k).copied().unwrap_or(0.0))
                    .sum::<f64>()
        })
        .collect()
}

/// `Σ_k a_{k+n} b_k`, zero-padded.
fn lag_product(a: &[f64], b: &[f64], n: i64) -> f64 {
    b.iter()
        .enumerate()
        .filter_map(|(k, bk)| {
            let idx = k as i64 + n;
            (idx >= 0 && (idx as usize) < a.len()).then(|| a[idx as usize] * bk)
        })
        .sum()
}

fn interpolate_lattice(tau: f64, cov: impl Fn(i64) -> f64) -> f64 {
    let n = tau.floor();
    let f = tau - n;
    let n = n as i64;
    (1.0 - f) * cov(n) + f * cov(n + 1)
}
