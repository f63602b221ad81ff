//! Experiment configuration files.
//!
//! One JSON document per experiment, tagged by `kind`. Every field except
//! `kind` has a default; the defaults reproduce the reference acceptance
//! runs, including the pass/fail thresholds.

use std::f64::consts::PI;

use corrlab_core::asymptotics::{CorrelationModel, MAX_DIMENSION};
use corrlab_core::randfield::{CorrelatedTripleSpec, MaProcessSpec, TripleComponent};
use corrlab_core::MarginalDist;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    FieldStats(FieldStatsConfig),
    HelmholtzCorrector(HelmholtzCorrectorConfig),
    #[serde(rename = "helmholtz-moments-2d")]
    HelmholtzMoments2d(Moments2dConfig),
    EllipticCorrector(EllipticCorrectorConfig),
    SpectralCorrector(SpectralCorrectorConfig),
    HeatCorrector(HeatCorrectorConfig),
    ScalingStudy(ScalingStudyConfig),
    PeriodicCompare(PeriodicCompareConfig),
}

/// Kind names with one-line descriptions, in listing order.
pub const KINDS: [(&str, &str); 8] = [
    ("field-stats", "integrated correlation and lag covariances of a moving-average field"),
    ("helmholtz-corrector", "pointwise corrector variance and moment functionals, 1D Helmholtz"),
    ("helmholtz-moments-2d", "moment functionals of the 2D Helmholtz corrector on the unit square"),
    ("elliptic-corrector", "corrector variance of the 1D divergence-form problem"),
    ("spectral-corrector", "eigenvalue and eigenvector correctors of the 1D Helmholtz operator"),
    ("heat-corrector", "heat-flow Fourier coefficient correctors"),
    ("scaling-study", "corrector scaling exponents: Monte Carlo in 1D and radial quadrature in d = 1..5"),
    ("periodic-compare", "periodic homogenization error against the random case"),
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> &'static str {
        let i = match self {
            Self::FieldStats(_) => 0,
            Self::HelmholtzCorrector(_) => 1,
            Self::HelmholtzMoments2d(_) => 2,
            Self::EllipticCorrector(_) => 3,
            Self::SpectralCorrector(_) => 4,
            Self::HeatCorrector(_) => 5,
            Self::ScalingStudy(_) => 6,
            Self::PeriodicCompare(_) => 7,
        };
        KINDS[i].0
    }

    /// Default configuration of the named kind.
    pub fn default_for(kind: &str) -> Option<Self> {
        Some(match kind {
            "field-stats" => Self::FieldStats(Default::default()),
            "helmholtz-corrector" => Self::HelmholtzCorrector(Default::default()),
            "helmholtz-moments-2d" => Self::HelmholtzMoments2d(Default::default()),
            "elliptic-corrector" => Self::EllipticCorrector(Default::default()),
            "spectral-corrector" => Self::SpectralCorrector(Default::default()),
            "heat-corrector" => Self::HeatCorrector(Default::default()),
            "scaling-study" => Self::ScalingStudy(Default::default()),
            "periodic-compare" => Self::PeriodicCompare(Default::default()),
            _ => return None,
        })
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::FieldStats(c) => c.seed,
            Self::HelmholtzCorrector(c) => c.seed,
            Self::HelmholtzMoments2d(c) => c.seed,
            Self::EllipticCorrector(c) => c.seed,
            Self::SpectralCorrector(c) => c.seed,
            Self::HeatCorrector(c) => c.seed,
            Self::ScalingStudy(c) => c.seed,
            Self::PeriodicCompare(c) => c.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::FieldStats(c) => c.validate(),
            Self::HelmholtzCorrector(c) => c.validate(),
            Self::HelmholtzMoments2d(c) => c.validate(),
            Self::EllipticCorrector(c) => c.validate(),
            Self::SpectralCorrector(c) => c.validate(),
            Self::HeatCorrector(c) => c.validate(),
            Self::ScalingStudy(c) => c.validate(),
            Self::PeriodicCompare(c) => c.validate(),
        }
    }
}

fn bad(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn epsilon(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(bad(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn epsilon_list(field: &str, list: &[f64], min: usize) -> Result<(), CliError> {
    if list.len() < min {
        return Err(bad(field, format!("need at least {min} values, got {}", list.len())));
    }
    for (i, &v) in list.iter().enumerate() {
        epsilon(&format!("{field}[{i}]"), v)?;
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(bad(field, "must be strictly decreasing"));
    }
    Ok(())
}

fn samples(field: &str, n: usize, min: usize) -> Result<(), CliError> {
    if n < min {
        return Err(bad(field, format!("need at least {min}, got {n}")));
    }
    Ok(())
}

fn points(field: &str, list: &[f64]) -> Result<(), CliError> {
    for (i, &x) in list.iter().enumerate() {
        if !(x > 0.0 && x < 1.0) {
            return Err(bad(&format!("{field}[{i}]"), format!("must lie in (0, 1), got {x}")));
        }
    }
    Ok(())
}

fn core(field: &str, r: corrlab_core::Result<()>) -> Result<(), CliError> {
    r.map_err(|e| bad(field, e))
}

/// A source term, test function or initial condition on `[0, 1]`; in 2D
/// the tensor product of the 1D profile with itself is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    Sine { mode: u32 },
    Linear { intercept: f64, slope: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Sine { mode } => (2f64).sqrt() * (mode as f64 * PI * x).sin(),
            Self::Linear { intercept, slope } => intercept + slope * x,
        }
    }

    pub fn eval_2d(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            _ => self.eval(x) * self.eval(y),
        }
    }

    fn validate(&self, field: &str) -> Result<(), CliError> {
        match *self {
            Self::Constant { value } if !value.is_finite() => Err(bad(field, "value must be finite")),
            Self::Sine { mode: 0 } => Err(bad(field, "mode must be at least 1")),
            Self::Linear { intercept, slope } if !(intercept.is_finite() && slope.is_finite()) => {
                Err(bad(field, "coefficients must be finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsLevel {
    #[serde(rename = "1%")]
    OnePercent,
    #[serde(rename = "5%")]
    FivePercent,
}

/// Monte Carlo pass/fail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Agreement with a limit value within this many standard errors.
    pub z_max: f64,
    pub skewness_max: f64,
    pub excess_kurtosis_max: f64,
    pub ks_level: KsLevel,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            z_max: 4.0,
            skewness_max: 0.15,
            excess_kurtosis_max: 0.3,
            ks_level: KsLevel::OnePercent,
        }
    }
}

impl Thresholds {
    fn validate(&self) -> Result<(), CliError> {
        positive("thresholds.z_max", self.z_max)?;
        positive("thresholds.skewness_max", self.skewness_max)?;
        positive("thresholds.excess_kurtosis_max", self.excess_kurtosis_max)
    }
}

fn default_field() -> MaProcessSpec {
    MaProcessSpec::rademacher(&[0.5, 0.5])
}

fn validate_field(field: &MaProcessSpec) -> Result<(), CliError> {
    core("field", field.validate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldStatsConfig {
    pub seed: u64,
    pub samples: usize,
    pub epsilon: f64,
    pub field: MaProcessSpec,
    /// Lags, in units of ε, at which `R(τ)` is estimated.
    pub lags: Vec<f64>,
    /// Base point of the lag products.
    pub base_point: f64,
    pub thresholds: Thresholds,
}

impl Default for FieldStatsConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 4000,
            epsilon: 1e-3,
            field: default_field(),
            lags: vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.5],
            base_point: 0.5,
            thresholds: Thresholds::default(),
        }
    }
}

impl FieldStatsConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon("epsilon", self.epsilon)?;
        validate_field(&self.field)?;
        for (i, &l) in self.lags.iter().enumerate() {
            non_negative(&format!("lags[{i}]"), l)?;
        }
        points("base_point", &[self.base_point])?;
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HelmholtzCorrectorConfig {
    pub seed: u64,
    pub samples: usize,
    pub epsilon: f64,
    /// Mesh nodes per correlation length.
    pub nodes_per_epsilon: usize,
    pub a_star: f64,
    pub q0: f64,
    pub alpha: f64,
    pub truncation_rho: f64,
    pub tol: f64,
    pub field: MaProcessSpec,
    pub source: Profile,
    pub points: Vec<f64>,
    pub moments: Vec<Profile>,
    pub thresholds: Thresholds,
}

impl Default for HelmholtzCorrectorConfig {
    fn default() -> Self {
        Self {
            seed: 2,
            samples: 2000,
            epsilon: 1.0 / 400.0,
            nodes_per_epsilon: 8,
            a_star: 1.0,
            q0: 0.0,
            alpha: 0.0,
            truncation_rho: 0.5,
            tol: 1e-10,
            field: default_field(),
            source: Profile::default(),
            points: vec![0.25, 0.5, 0.75],
            moments: vec![Profile::default(), Profile::Sine { mode: 1 }],
            thresholds: Thresholds::default(),
        }
    }
}

fn helmholtz_common(a_star: f64, q0: f64, alpha: f64, truncation_rho: f64, tol: f64) -> Result<(), CliError> {
    positive("a_star", a_star)?;
    non_negative("q0", q0)?;
    if !(0.0..0.25).contains(&alpha) {
        return Err(bad("alpha", format!("must lie in [0, 0.25), got {alpha}")));
    }
    if !(truncation_rho > 0.0 && truncation_rho < 1.0) {
        return Err(bad("truncation_rho", format!("must lie in (0, 1), got {truncation_rho}")));
    }
    positive("tol", tol)
}

fn nodes_per_epsilon(n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(bad("nodes_per_epsilon", format!("need at least 2, got {n}")));
    }
    Ok(())
}

impl HelmholtzCorrectorConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon("epsilon", self.epsilon)?;
        nodes_per_epsilon(self.nodes_per_epsilon)?;
        helmholtz_common(self.a_star, self.q0, self.alpha, self.truncation_rho, self.tol)?;
        validate_field(&self.field)?;
        self.source.validate("source")?;
        points("points", &self.points)?;
        for (i, m) in self.moments.iter().enumerate() {
            m.validate(&format!("moments[{i}]"))?;
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Moments2dConfig {
    pub seed: u64,
    pub samples: usize,
    pub epsilon: f64,
    /// Nodes per side of the square grid.
    pub grid_nodes: usize,
    /// Sine modes per direction of the spectral Green's operator.
    pub modes: usize,
    pub q0: f64,
    pub alpha: f64,
    pub truncation_rho: f64,
    pub tol: f64,
    pub field: MaProcessSpec,
    pub source: Profile,
    pub moments: Vec<Profile>,
    pub thresholds: Thresholds,
}

impl Default for Moments2dConfig {
    fn default() -> Self {
        Self {
            seed: 3,
            samples: 400,
            epsilon: 1.0 / 16.0,
            grid_nodes: 129,
            modes: 127,
            q0: 0.0,
            alpha: 0.0,
            truncation_rho: 0.5,
            tol: 1e-10,
            field: default_field(),
            source: Profile::default(),
            moments: vec![Profile::default(), Profile::Sine { mode: 1 }],
            thresholds: Thresholds::default(),
        }
    }
}

impl Moments2dConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon("epsilon", self.epsilon)?;
        if self.grid_nodes < 9 {
            return Err(bad("grid_nodes", "need at least 9 nodes per side"));
        }
        if self.modes == 0 || self.modes > self.grid_nodes - 2 {
            return Err(bad("modes", format!("must lie in 1..={}", self.grid_nodes - 2)));
        }
        helmholtz_common(1.0, self.q0, self.alpha, self.truncation_rho, self.tol)?;
        validate_field(&self.field)?;
        self.source.validate("source")?;
        if self.moments.is_empty() {
            return Err(bad("moments", "need at least one test function"));
        }
        for (i, m) in self.moments.iter().enumerate() {
            m.validate(&format!("moments[{i}]"))?;
        }
        self.thresholds.validate()
    }
}

/// Three components on three channels: `b` and `δρ` share channel 0,
/// `δρ` and `q` share channel 2, `b` and `q` share channel 1.
pub fn default_triple() -> CorrelatedTripleSpec {
    CorrelatedTripleSpec {
        marginal: MarginalDist::Rademacher,
        components: [
            TripleComponent {
                filters: vec![vec![0.5, 0.5], vec![0.3]],
                amplitude: 1.0,
            },
            TripleComponent {
                filters: vec![vec![0.4], vec![], vec![0.6, 0.2]],
                amplitude: 0.8,
            },
            TripleComponent {
                filters: vec![vec![], vec![0.7], vec![0.5]],
                amplitude: 0.8,
            },
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticCorrectorConfig {
    pub seed: u64,
    pub samples: usize,
    pub epsilon: f64,
    pub nodes_per_epsilon: usize,
    pub triple: CorrelatedTripleSpec,
    pub gamma: f64,
    pub a_base: f64,
    pub q0: f64,
    pub rho_bar: f64,
    pub truncation_rho: f64,
    pub tol: f64,
    pub source: Profile,
    pub points: Vec<f64>,
    pub thresholds: Thresholds,
}

impl Default for EllipticCorrectorConfig {
    fn default() -> Self {
        Self {
            seed: 4,
            samples: 2000,
            epsilon: 1.0 / 400.0,
            nodes_per_epsilon: 8,
            triple: default_triple(),
            gamma: 0.5,
            a_base: 1.0,
            q0: 1.0,
            rho_bar: 2.0,
            truncation_rho: 0.5,
            tol: 1e-10,
            source: Profile::default(),
            points: vec![0.25, 0.5, 0.75],
            thresholds: Thresholds::default(),
        }
    }
}

impl EllipticCorrectorConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon("epsilon", self.epsilon)?;
        nodes_per_epsilon(self.nodes_per_epsilon)?;
        core("triple", self.triple.validate())?;
        non_negative("gamma", self.gamma)?;
        positive("a_base", self.a_base)?;
        non_negative("q0", self.q0)?;
        positive("rho_bar", self.rho_bar)?;
        helmholtz_common(self.a_base, self.q0, 0.0, self.truncation_rho, self.tol)?;
        self.source.validate("source")?;
        points("points", &self.points)?;
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralCorrectorConfig {
    pub seed: u64,
    pub samples: usize,
    /// Decreasing; limit-law checks use the last (smallest) value.
    pub epsilons: Vec<f64>,
    pub nodes_per_epsilon: usize,
    pub a_star: f64,
    pub q0: f64,
    pub field: MaProcessSpec,
    pub n_max: usize,
    /// Modes whose eigenvalue correctors are reported.
    pub modes: Vec<usize>,
    /// `(n, m)` pairs of eigenvector Fourier correctors.
    pub fourier_pairs: Vec<(usize, usize)>,
    pub thresholds: Thresholds,
    /// Admissible range of the mean-square eigenvalue error exponent.
    pub eigenvalue_slope: (f64, f64),
    pub overlap_slope_min: f64,
}

impl Default for SpectralCorrectorConfig {
    fn default() -> Self {
        Self {
            seed: 5,
            samples: 2000,
            epsilons: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0],
            nodes_per_epsilon: 8,
            a_star: 1.0,
            q0: 0.0,
            field: default_field(),
            n_max: 8,
            modes: vec![1, 2, 3],
            fourier_pairs: vec![(1, 2)],
            thresholds: Thresholds::default(),
            eigenvalue_slope: (0.85, 1.15),
            overlap_slope_min: 0.8,
        }
    }
}

fn mode_in(field: &str, n: usize, n_max: usize) -> Result<(), CliError> {
    if n == 0 || n > n_max {
        return Err(bad(field, format!("mode must lie in 1..={n_max}, got {n}")));
    }
    Ok(())
}

impl SpectralCorrectorConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon_list("epsilons", &self.epsilons, 1)?;
        nodes_per_epsilon(self.nodes_per_epsilon)?;
        positive("a_star", self.a_star)?;
        non_negative("q0", self.q0)?;
        validate_field(&self.field)?;
        if self.n_max == 0 {
            return Err(bad("n_max", "must be at least 1"));
        }
        for (i, &n) in self.modes.iter().enumerate() {
            mode_in(&format!("modes[{i}]"), n, self.n_max)?;
        }
        for (i, &(n, m)) in self.fourier_pairs.iter().enumerate() {
            mode_in(&format!("fourier_pairs[{i}]"), n, self.n_max)?;
            mode_in(&format!("fourier_pairs[{i}]"), m, self.n_max)?;
            if n == m {
                return Err(bad(&format!("fourier_pairs[{i}]"), "diagonal coefficient is second order"));
            }
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatCorrectorConfig {
    pub seed: u64,
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub nodes_per_epsilon: usize,
    pub a_star: f64,
    pub q0: f64,
    pub field: MaProcessSpec,
    pub n_max: usize,
    pub mode: usize,
    pub time: f64,
    /// Evolution constant in `u_t + c P u = 0`.
    pub evolution: f64,
    pub initial: Profile,
    /// Modes kept in the limit-variance series.
    pub law_modes: usize,
    pub thresholds: Thresholds,
}

impl Default for HeatCorrectorConfig {
    fn default() -> Self {
        Self {
            seed: 6,
            samples: 1000,
            epsilons: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0],
            nodes_per_epsilon: 8,
            a_star: 1.0,
            q0: 0.0,
            field: default_field(),
            n_max: 8,
            mode: 1,
            time: 0.02,
            evolution: 1.0,
            initial: Profile::Linear { intercept: 1.0, slope: 1.0 },
            law_modes: 64,
            thresholds: Thresholds::default(),
        }
    }
}

impl HeatCorrectorConfig {
    fn validate(&self) -> Result<(), CliError> {
        samples("samples", self.samples, 2)?;
        epsilon_list("epsilons", &self.epsilons, 1)?;
        nodes_per_epsilon(self.nodes_per_epsilon)?;
        positive("a_star", self.a_star)?;
        non_negative("q0", self.q0)?;
        validate_field(&self.field)?;
        if self.n_max == 0 {
            return Err(bad("n_max", "must be at least 1"));
        }
        mode_in("mode", self.mode, self.n_max)?;
        non_negative("time", self.time)?;
        positive("evolution", self.evolution)?;
        self.initial.validate("initial")?;
        if self.law_modes < self.mode {
            return Err(bad("law_modes", "must be at least mode"));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingStudyConfig {
    pub seed: u64,
    /// Monte Carlo part: realizations per (α, ε); 0 skips it.
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub nodes_per_epsilon: usize,
    pub alphas: Vec<f64>,
    pub a_star: f64,
    pub q0: f64,
    pub truncation_rho: f64,
    pub tol: f64,
    pub field: MaProcessSpec,
    pub source: Profile,
    /// Quadrature part: dimensions to evaluate; empty skips it.
    pub dimensions: Vec<usize>,
    pub radius: f64,
    pub dimension_epsilons: Vec<f64>,
    pub correlation: CorrelationModel,
    /// Admissible range of the `α = 0` exponent of `E‖u_ε − u0‖²`.
    pub mse_slope: (f64, f64),
    /// Tolerance on the corrector exponents `d(1/2 − α)` and `min(d, 4)`.
    pub exponent_tol: f64,
    /// Required reduction of the max residual by the logarithmic regressor.
    pub log_fit_gain: f64,
    pub constant_rel_tol: f64,
}

impl Default for ScalingStudyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            samples: 500,
            epsilons: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0, 1.0 / 800.0],
            nodes_per_epsilon: 8,
            alphas: vec![0.0, 0.1, 0.2],
            a_star: 1.0,
            q0: 0.0,
            truncation_rho: 0.5,
            tol: 1e-10,
            field: default_field(),
            source: Profile::default(),
            dimensions: vec![1, 2, 3, 4, 5],
            radius: 1.0,
            dimension_epsilons: vec![0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
            correlation: CorrelationModel::default(),
            mse_slope: (0.85, 1.15),
            exponent_tol: 0.1,
            log_fit_gain: 10.0,
            constant_rel_tol: 0.01,
        }
    }
}

impl ScalingStudyConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.samples > 0 {
            samples("samples", self.samples, 2)?;
            epsilon_list("epsilons", &self.epsilons, 3)?;
            nodes_per_epsilon(self.nodes_per_epsilon)?;
            for (i, &a) in self.alphas.iter().enumerate() {
                helmholtz_common(self.a_star, self.q0, a, self.truncation_rho, self.tol)
                    .map_err(|e| bad(&format!("alphas[{i}]"), e))?;
            }
            validate_field(&self.field)?;
            self.source.validate("source")?;
        }
        for (i, &d) in self.dimensions.iter().enumerate() {
            if d == 0 || d > MAX_DIMENSION {
                return Err(bad(&format!("dimensions[{i}]"), format!("must lie in 1..={MAX_DIMENSION}")));
            }
        }
        if !self.dimensions.is_empty() {
            positive("radius", self.radius)?;
            epsilon_list("dimension_epsilons", &self.dimension_epsilons, 4)?;
            let (hi, lo) = (self.dimension_epsilons[0], *self.dimension_epsilons.last().unwrap());
            if (hi / lo).log10() < 1.5 {
                return Err(bad("dimension_epsilons", "must span at least 1.5 decades"));
            }
        }
        if !(self.mse_slope.0 < self.mse_slope.1) {
            return Err(bad("mse_slope", "lower bound must be below upper bound"));
        }
        positive("exponent_tol", self.exponent_tol)?;
        positive("log_fit_gain", self.log_fit_gain)?;
        positive("constant_rel_tol", self.constant_rel_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicCompareConfig {
    pub seed: u64,
    pub a_star: f64,
    /// Potential `amplitude · cos(2πy)` on the unit cell.
    pub amplitude: f64,
    /// Reciprocals must be integers.
    pub epsilons: Vec<f64>,
    pub nodes_per_period: usize,
    pub cell_nodes: usize,
    /// Random counterpart: realizations per ε (0 skips it).
    pub random_samples: usize,
    pub random_epsilons: Vec<f64>,
    pub nodes_per_epsilon: usize,
    pub field: MaProcessSpec,
    pub slope_target: f64,
    pub slope_tol: f64,
    pub amplitude_rel_tol: f64,
}

impl Default for PeriodicCompareConfig {
    fn default() -> Self {
        Self {
            seed: 8,
            a_star: 1.0,
            amplitude: 1.0,
            epsilons: vec![1.0 / 10.0, 1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0],
            nodes_per_period: 64,
            cell_nodes: 1025,
            random_samples: 200,
            random_epsilons: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0],
            nodes_per_epsilon: 8,
            field: default_field(),
            slope_target: 2.0,
            slope_tol: 0.05,
            amplitude_rel_tol: 0.005,
        }
    }
}

impl PeriodicCompareConfig {
    fn validate(&self) -> Result<(), CliError> {
        positive("a_star", self.a_star)?;
        if !(self.amplitude.is_finite() && self.amplitude.abs() < self.a_star * PI * PI) {
            return Err(bad("amplitude", "must be finite and below a_star·π² in magnitude"));
        }
        epsilon_list("epsilons", &self.epsilons, 3)?;
        for (i, &e) in self.epsilons.iter().enumerate() {
            if ((1.0 / e).round() * e - 1.0).abs() > 1e-9 {
                return Err(bad(&format!("epsilons[{i}]"), "1/epsilon must be an integer"));
            }
        }
        if self.nodes_per_period < 4 {
            return Err(bad("nodes_per_period", "need at least 4"));
        }
        if self.cell_nodes < 9 {
            return Err(bad("cell_nodes", "need at least 9"));
        }
        if self.random_samples > 0 {
            samples("random_samples", self.random_samples, 2)?;
            epsilon_list("random_epsilons", &self.random_epsilons, 3)?;
            nodes_per_epsilon(self.nodes_per_epsilon)?;
            validate_field(&self.field)?;
        }
        positive("slope_tol", self.slope_tol)?;
        positive("amplitude_rel_tol", self.amplitude_rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_round_trips() {
        for (kind, _) in KINDS {
            let cfg = ExperimentConfig::default_for(kind).unwrap();
            assert_eq!(cfg.kind(), kind);
            cfg.validate().unwrap();
            let back = ExperimentConfig::parse(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::parse(r#"{"kind": "field-stats", "samples": 10}"#).unwrap();
        let ExperimentConfig::FieldStats(c) = cfg else { panic!() };
        assert_eq!(c.samples, 10);
        assert_eq!(c.epsilon, FieldStatsConfig::default().epsilon);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse(r#"{"kind": "helmholtz-corrector", "epsilon": -0.1}"#).unwrap_err();
        assert!(e.to_string().contains("epsilon"), "{e}");
        let e = ExperimentConfig::parse(r#"{"kind": "field-stats", "sample": 3}"#).unwrap_err();
        assert!(e.to_string().contains("sample"), "{e}");
        let e = ExperimentConfig::parse(r#"{"kind": "nope"}"#).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        let e = ExperimentConfig::parse(r#"{"kind": "spectral-corrector", "fourier_pairs": [[2, 2]]}"#).unwrap_err();
        assert!(e.to_string().contains("fourier_pairs[0]"), "{e}");
    }
}
