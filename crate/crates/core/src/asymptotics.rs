//! Small-ε variance of the leading corrector in dimension `d` through the
//! Fourier representation of the double integral
//! `∫∫ H(y) H(z) R((y − z)/ε) dy dz` with the truncated kernel
//! `H(x) = |x|^{2−d} 1{|x| ≤ α}`.
//!
//! Transform convention: `f̂(ξ) = ∫ e^{−iξ·x} f(x) dx`, so the double
//! integral equals `(2π)^{−d} ∫ |Ĥ(ξ)|² εᵈ R̂(εξ) dξ`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::bessel::bessel_j;
use crate::ensemble::{loglog_slope, loglog_slope_with_log, LogLogFit, LogLogFitWithLog};
use crate::error::{invalid, Error, Result};
use crate::quad::{Adaptive, Unconverged};

pub const MAX_DIMENSION: usize = 6;

/// Relative tolerance of every radial quadrature in this module.
pub const QUADRATURE_TOL: f64 = 1e-11;

/// Surface measure of the unit sphere in `Rᵈ`.
pub fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * PI.powf(h) / gamma(h)
}

/// Radial correlation model, given by its Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationModel {
    /// `R̂(ξ) = exp(−ℓ²|ξ|²/2)`.
    Gaussian { length: f64 },
}

impl Default for CorrelationModel {
    fn default() -> Self {
        Self::Gaussian { length: 1.0 }
    }
}

impl CorrelationModel {
    pub fn spectral(&self, rho: f64) -> f64 {
        match *self {
            Self::Gaussian { length } => (-0.5 * (length * rho).powi(2)).exp(),
        }
    }

    /// `R(x)` at `|x| = r` in dimension `d`.
    pub fn spatial(&self, r: f64, d: usize) -> f64 {
        match *self {
            Self::Gaussian { length } => {
                (2.0 * PI * length * length).powf(-0.5 * d as f64) * (-0.5 * (r / length).powi(2)).exp()
            }
        }
    }

    /// `∫R = R̂(0)`.
    pub fn integral(&self) -> f64 {
        self.spectral(0.0)
    }

    /// Frequency beyond which `R̂` is below `1e−20 R̂(0)`.
    pub fn cutoff(&self) -> f64 {
        match *self {
            Self::Gaussian { length } => (2.0 * 20.0 * std::f64::consts::LN_10).sqrt() / length,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { length } if !(length > 0.0 && length.is_finite()) => {
                Err(invalid("correlation.length", "must be positive and finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSetup {
    pub dimension: usize,
    pub alpha: f64,
    #[serde(default)]
    pub correlation: CorrelationModel,
}

/// Radial profile `ρ ↦ Ĥ(ρ)` of the truncated kernel.
#[derive(Debug, Clone, Copy)]
pub struct HankelProfile {
    dimension: usize,
    alpha: f64,
}

impl HankelProfile {
    pub fn eval(&self, rho: f64) -> f64 {
        let a = self.alpha;
        let x = rho * a;
        if self.dimension == 1 {
            // 2 ∫₀^α r cos(ρr) dr
            if x < 0.05 {
                let x2 = x * x;
                return a * a * (1.0 - x2 / 4.0 + x2 * x2 / 72.0 - x2 * x2 * x2 / 2880.0);
            }
            return 2.0 * (a * x.sin() / rho + (x.cos() - 1.0) / (rho * rho));
        }
        let d = self.dimension as f64;
        let nu = 0.5 * d - 1.0;
        let pre = (2.0 * PI).powf(0.5 * d);
        if x < 2.0 {
            let q = -0.25 * x * x;
            let mut term = 1.0 / (gamma(nu + 1.0) * 2f64.powf(nu));
            let mut sum = term / 2.0;
            for k in 1..60 {
                let kf = k as f64;
                term *= q / (kf * (nu + kf));
                let t = term / (2.0 * kf + 2.0);
                sum += t;
                if t.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            return pre * a * a * sum;
        }
        // ∫₀^X z^{1−ν} J_ν(z) dz = 2^{1−ν}/Γ(ν) − X^{1−ν} J_{ν−1}(X)
        let head = if nu == 0.0 { 0.0 } else { 2f64.powf(1.0 - nu) / gamma(nu) };
        pre / (rho * rho) * (head - x.powf(1.0 - nu) * bessel_j(nu - 1.0, x))
    }
}

/// Radial Fourier transform of `f` supported in `|x| ≤ support`, by
/// adaptive quadrature of `(2π)^{d/2} ρ^{1−d/2} ∫ f(r) J_{d/2−1}(ρr) r^{d/2} dr`.
pub fn radial_transform<F: Fn(f64) -> f64>(d: usize, f: F, support: f64, rho: f64) -> Result<f64> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(invalid("dimension", format!("must be in 1..={MAX_DIMENSION}")));
    }
    let df = d as f64;
    let nu = 0.5 * df - 1.0;
    let pieces = ((rho * support / PI).ceil() as usize).clamp(1, 100_000);
    let breaks: Vec<f64> = (0..=pieces).map(|i| support * i as f64 / pieces as f64).collect();
    // |J_ν| ≤ 1 bounds the integrand, which fixes an absolute floor
    let q = Adaptive::new(QUADRATURE_TOL, 0.0);
    let bound: f64 = breaks
        .windows(2)
        .map(|w| q.estimate(w[0], w[1], &mut |r| f(r).abs() * r.powf(0.5 * df)))
        .sum();
    let q = Adaptive::new(QUADRATURE_TOL, 1e-14 * bound / pieces as f64);
    let value = if rho == 0.0 {
        // J_ν(ρr) (ρr)^{−ν} → 2^{−ν}/Γ(ν+1)
        let c = 2f64.powf(-nu) / gamma(nu + 1.0);
        q.integrate_panels(&breaks, &mut |r| f(r) * r.powf(df - 1.0))
            .map(|v| c * (2.0 * PI).powf(0.5 * df) * v)
    } else {
        q.integrate_panels(&breaks, &mut |r| f(r) * bessel_j(nu, rho * r) * r.powf(0.5 * df))
            .map(|v| (2.0 * PI).powf(0.5 * df) * rho.powf(1.0 - 0.5 * df) * v)
    };
    value.map_err(|u| Error::Quadrature { rho, estimate: u.estimate })
}

/// `(2π)^{−d} S_{d−1} ∫₀^∞ ĥ(ρ)² εᵈ R̂(ερ) ρ^{d−1} dρ` for a radial profile
/// transform `ĥ` that oscillates on the frequency scale `1/scale`.
pub fn fourier_variance<F: Fn(f64) -> f64>(
    d: usize,
    profile_hat: F,
    scale: f64,
    correlation: &CorrelationModel,
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", "must be positive and finite"));
    }
    if d == 0 || d > MAX_DIMENSION {
        return Err(invalid("dimension", format!("must be in 1..={MAX_DIMENSION}")));
    }
    correlation.validate()?;
    let rho_max = correlation.cutoff() / epsilon;
    let width = (PI / scale).min(rho_max / 8.0);
    let panels = (rho_max / width).ceil() as usize;
    if panels > 50_000_000 {
        return Err(invalid("epsilon", "too small for the radial quadrature"));
    }
    let df = d as f64;
    let mut integrand = |rho: f64| {
        let h = profile_hat(rho);
        h * h * correlation.spectral(epsilon * rho) * rho.powi(d as i32 - 1)
    };
    let q = Adaptive::new(QUADRATURE_TOL, 0.0);
    let mut total = crate::ensemble::KahanSum::default();
    let mut last = 0.0;
    for i in 0..panels {
        let a = i as f64 * width;
        let b = ((i + 1) as f64 * width).min(rho_max);
        // absolute floor relative to what has accumulated so far
        last = q
            .integrate_abs(a, b, &mut integrand, 1e-14 * total.value().abs()).map_err(|Unconverged { at, estimate }| Error::Quadrature {
            rho: at,
            estimate,
        })?;
        total.add(last);
    }
    let sum = total.value();
    if !(sum > 0.0) || last.abs() > 1e-10 * sum {
        return Err(Error::Quadrature {
            rho: rho_max,
            estimate: sum,
        });
    }
    Ok((2.0 * PI).powf(-df) * sphere_area(d) * epsilon.powf(df) * sum)
}

impl RadialSetup {
    pub fn new(dimension: usize, alpha: f64) -> Result<Self> {
        let s = Self {
            dimension,
            alpha,
            correlation: CorrelationModel::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_correlation(mut self, correlation: CorrelationModel) -> Result<Self> {
        self.correlation = correlation;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension > MAX_DIMENSION {
            return Err(invalid("dimension", format!("must be in 1..={MAX_DIMENSION}")));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive and finite"));
        }
        self.correlation.validate()
    }

    pub fn hankel_profile(&self) -> HankelProfile {
        HankelProfile {
            dimension: self.dimension,
            alpha: self.alpha,
        }
    }

    /// The kernel itself, `|x|^{2−d}` on the ball.
    pub fn kernel(&self, r: f64) -> f64 {
        if r <= self.alpha {
            r.powi(2 - self.dimension as i32)
        } else {
            0.0
        }
    }

    pub fn variance_fourier(&self, epsilon: f64) -> Result<f64> {
        let h = self.hankel_profile();
        fourier_variance(self.dimension, |r| h.eval(r), self.alpha, &self.correlation, epsilon)
    }

    /// `∫H²`, finite for `d ≤ 3`.
    pub fn kernel_l2_squared(&self) -> Option<f64> {
        let d = self.dimension;
        (d <= 3).then(|| sphere_area(d) * self.alpha.powi(4 - d as i32) / (4 - d) as f64)
    }

    /// `S_{d−1} ∫₀^∞ R̂(r) r^{d−5} dr = ∫ R̂(ξ)/|ξ|⁴ dξ`, finite for `d ≥ 5`.
    pub fn inverse_quartic_moment(&self) -> Result<Option<f64>> {
        let d = self.dimension;
        if d < 5 {
            return Ok(None);
        }
        let top = self.correlation.cutoff();
        let breaks: Vec<f64> = (0..=16).map(|i| top * i as f64 / 16.0).collect();
        let v = Adaptive::new(QUADRATURE_TOL, 0.0)
            .integrate_panels(&breaks, &mut |r| self.correlation.spectral(r) * r.powi(d as i32 - 5))
            .map_err(|u| Error::Quadrature { rho: u.at, estimate: u.estimate })?;
        Ok(Some(sphere_area(d) * v))
    }

    /// Exponent `p` and constant `C` of the leading behaviour `C εᵖ`; `None`
    /// in the logarithmic case `d = 4`.
    pub fn leading_order(&self) -> Result<Option<(f64, f64)>> {
        let d = self.dimension;
        if let Some(l2) = self.kernel_l2_squared() {
            return Ok(Some((d as f64, self.correlation.integral() * l2)));
        }
        match self.inverse_quartic_moment()? {
            // Ĥ(ρ) ~ (d − 2) S_{d−1} / ρ² at high frequency
            Some(m) => {
                let c = (d as f64 - 2.0) * sphere_area(d);
                Ok(Some((4.0, (2.0 * PI).powf(-(d as f64)) * c * c * m)))
            }
            None => Ok(None),
        }
    }
}

/// Variance values over an epsilon list with fitted exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub pairs: Vec<(f64, f64)>,
    pub plain: LogLogFit,
    pub augmented: LogLogFitWithLog,
}

pub fn scaling_study(setup: &RadialSetup, epsilons: &[f64]) -> Result<VarianceCurve> {
    if epsilons.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: epsilons.len(),
        });
    }
    let (lo, hi) = epsilons
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(lo > 0.0) || (hi / lo).log10() < 1.5 {
        return Err(invalid("epsilons", "must be positive and span at least 1.5 decades"));
    }
    let pairs = epsilons
        .iter()
        .map(|&e| setup.variance_fourier(e).map(|v| (e, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceCurve {
        plain: loglog_slope(&pairs)?,
        augmented: loglog_slope_with_log(&pairs)?,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn three_dim_profile() {
        let h = RadialSetup::new(3, 1.0).unwrap().hankel_profile();
        assert_relative_eq!(h.eval(0.0), 2.0 * PI, max_relative = 1e-13);
        for &rho in &[0.01f64, 0.7, 1.99, 2.01, 5.0, 37.0] {
            let exact = 4.0 * PI * (1.0 - rho.cos()) / (rho * rho);
            assert_relative_eq!(h.eval(rho), exact, epsilon = 1e-9);
        }
        // long truncation: ρ² Ĥ / 4π oscillates around 1
        let far = RadialSetup::new(3, 1e4).unwrap().hankel_profile();
        let mean: f64 = (0..2000).map(|i| 3.0 + i as f64 * 1e-3).map(|r| far.eval(r) * r * r / (4.0 * PI)).sum::<f64>() / 2000.0;
        assert!((mean - 1.0).abs() < 1e-2, "{mean}");
    }

    #[test]
    fn profile_matches_generic_transform() {
        for d in 1..=6 {
            let s = RadialSetup::new(d, 1.3).unwrap();
            let h = s.hankel_profile();
            for &rho in &[0.0, 0.4, 1.6, 3.0, 11.0, 26.0] {
                let q = radial_transform(d, |r| s.kernel(r), 1.3, rho).unwrap();
                assert_relative_eq!(h.eval(rho), q, max_relative = 1e-8, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_setup() {
        assert!(RadialSetup::new(0, 1.0).is_err());
        assert!(RadialSetup::new(7, 1.0).is_err());
        assert!(RadialSetup::new(2, -1.0).is_err());
        assert!(RadialSetup::new(2, 1.0).unwrap().variance_fourier(0.0).is_err());
    }
}
