//! Deterministic parallel Monte Carlo and the statistics used to judge it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};

/// Largest tolerated fraction of failed realizations.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Minimum sample size for [`normality_stats`].
pub const MIN_NORMALITY_SAMPLES: usize = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` at epsilon position `eps_index`.
pub fn derive_seed(experiment_seed: u64, eps_index: usize, index: usize) -> u64 {
    let a = splitmix64(experiment_seed);
    let b = splitmix64(a ^ (eps_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(b ^ (index as u64).wrapping_mul(0xABC9_8388_FB8B_35A7))
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = KahanSum::default();
    xs.into_iter().for_each(|x| k.add(x));
    k.value()
}

/// One failed realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

/// Successful outputs of one batch in realization-index order.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub values: Vec<T>,
    pub seeds: Vec<u64>,
    pub failures: Vec<Failure>,
}

/// Parallel map over realization indices with fixed seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ensemble {
    pub seed: u64,
    pub workers: usize,
}

impl Ensemble {
    pub fn new(seed: u64, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        Ok(Self { seed, workers })
    }

    /// Run `n` realizations of `task` for epsilon position `eps_index`.
    /// Results are collected by index, so the output does not depend on the
    /// number of workers.
    pub fn run<T, F>(&self, eps_index: usize, n: usize, task: F) -> Result<Batch<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?;
        let seeds: Vec<u64> = (0..n).map(|i| derive_seed(self.seed, eps_index, i)).collect();
        let raw: Vec<Result<T>> = pool.install(|| seeds.par_iter().map(|&s| task(s)).collect());
        let mut values = Vec::with_capacity(n);
        let mut ok_seeds = Vec::with_capacity(n);
        let mut failures = Vec::new();
        for (index, (r, &seed)) in raw.into_iter().zip(&seeds).enumerate() {
            match r {
                Ok(v) => {
                    values.push(v);
                    ok_seeds.push(seed);
                }
                Err(e) => failures.push(Failure {
                    index,
                    seed,
                    message: e.to_string(),
                }),
            }
        }
        if failures.len() as f64 > MAX_FAILURE_FRACTION * n as f64 {
            return Err(Error::TooManyFailures {
                failed: failures.len(),
                total: n,
                first_seed: failures[0].seed,
            });
        }
        Ok(Batch {
            values,
            seeds: ok_seeds,
            failures,
        })
    }
}

/// Moments of a sample with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr_mean: f64,
    /// `√((m4 − s⁴)/n)`.
    pub stderr_variance: f64,
    /// Sample mean of the squares.
    pub second_moment: f64,
    pub stderr_second_moment: f64,
}

pub fn sample_stats(xs: &[f64]) -> Result<SampleStats> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = kahan_sum(xs.iter().copied()) / nf;
    let m2 = kahan_sum(xs.iter().map(|x| (x - mean).powi(2))) / nf;
    let m4 = kahan_sum(xs.iter().map(|x| (x - mean).powi(4))) / nf;
    let variance = m2 * nf / (nf - 1.0);
    let sq_mean = kahan_sum(xs.iter().map(|x| x * x)) / nf;
    let sq_var = kahan_sum(xs.iter().map(|x| (x * x - sq_mean).powi(2))) / (nf - 1.0);
    Ok(SampleStats {
        n,
        mean,
        variance,
        stderr_mean: (variance / nf).sqrt(),
        stderr_variance: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        second_moment: sq_mean,
        stderr_second_moment: (sq_var / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityStats {
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance to the normal with fitted mean and variance.
    pub ks_statistic: f64,
}

/// Unbiased skewness `G1`, excess kurtosis `G2` and the KS statistic.
pub fn normality_stats(xs: &[f64]) -> Result<NormalityStats> {
    let n = xs.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_NORMALITY_SAMPLES,
            got: n,
        });
    }
    let nf = n as f64;
    let mean = kahan_sum(xs.iter().copied()) / nf;
    let m2 = kahan_sum(xs.iter().map(|x| (x - mean).powi(2))) / nf;
    if !(m2 > 0.0) || m2 < 1e-28 * mean * mean {
        return Err(Error::DegenerateSample);
    }
    let m3 = kahan_sum(xs.iter().map(|x| (x - mean).powi(3))) / nf;
    let m4 = kahan_sum(xs.iter().map(|x| (x - mean).powi(4))) / nf;
    let g1 = m3 / m2.powf(1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let skewness = (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1;
    let excess_kurtosis = ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));
    let sd = (m2 * nf / (nf - 1.0)).sqrt();
    let normal = Normal::new(mean, sd).map_err(|_| Error::DegenerateSample)?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ks_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / nf).abs().max(((i + 1) as f64 / nf - c).abs())
        })
        .fold(0.0, f64::max);
    Ok(NormalityStats {
        skewness,
        excess_kurtosis,
        ks_statistic,
    })
}

/// Asymptotic KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Asymptotic KS critical value at the 5% level.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

/// Sample covariance and its standard error.
pub fn covariance(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    let n = a.len().min(b.len());
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let ma = kahan_sum(a[..n].iter().copied()) / nf;
    let mb = kahan_sum(b[..n].iter().copied()) / nf;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let cov = kahan_sum(prods.iter().copied()) / (nf - 1.0);
    let spread = kahan_sum(prods.iter().map(|p| (p - cov).powi(2))) / (nf - 1.0);
    Ok((cov, (spread / nf).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFitWithLog {
    pub slope: f64,
    /// Coefficient of `log |ln ε|`.
    pub log_coefficient: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

fn log_data(pairs: &[(f64, f64)], min: usize) -> Result<Vec<(f64, f64)>> {
    if pairs.len() < min {
        return Err(Error::TooFewSamples {
            needed: min,
            got: pairs.len(),
        });
    }
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(e, v))| {
            if !(e > 0.0) {
                return Err(Error::NonPositive { index: i, value: e });
            }
            if !(v > 0.0) {
                return Err(Error::NonPositive { index: i, value: v });
            }
            Ok((e.ln(), v.ln()))
        })
        .collect()
}

/// Least squares solve of a small dense normal system.
fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &yv) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += r[i] * r[j];
            }
            a[i][p] += r[i] * yv;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..p {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=p {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

/// Least squares of `ln v` against `ln ε`.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    let data = log_data(pairs, 3)?;
    let rows: Vec<Vec<f64>> = data.iter().map(|(x, _)| vec![*x, 1.0]).collect();
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let c = least_squares(&rows, &y);
    let max_residual = data
        .iter()
        .map(|(x, yv)| (yv - c[0] * x - c[1]).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFit {
        slope: c[0],
        intercept: c[1],
        max_residual,
    })
}

/// Least squares of `ln v` against `ln ε` and `ln |ln ε|`.
pub fn loglog_slope_with_log(pairs: &[(f64, f64)]) -> Result<LogLogFitWithLog> {
    let data = log_data(pairs, 4)?;
    if let Some(i) = pairs.iter().position(|&(e, _)| e == 1.0) {
        return Err(invalid("epsilon", format!("entry {i}: ln|ln ε| undefined at ε = 1")));
    }
    let rows: Vec<Vec<f64>> = data.iter().map(|(x, _)| vec![*x, x.abs().ln(), 1.0]).collect();
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let c = least_squares(&rows, &y);
    let max_residual = data
        .iter()
        .zip(&rows)
        .map(|((_, yv), r)| (yv - c[0] * r[0] - c[1] * r[1] - c[2]).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFitWithLog {
        slope: c[0],
        log_coefficient: c[1],
        intercept: c[2],
        max_residual,
    })
}
