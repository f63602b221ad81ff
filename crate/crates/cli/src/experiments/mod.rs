//! Experiment drivers: each turns a validated config into a [`Report`].

mod elliptic;
mod field;
mod helmholtz;
mod periodic;
mod scaling;
mod spectral;

use corrlab_core::ensemble::{
    covariance, ks_critical_1pct, ks_critical_5pct, normality_stats, sample_stats, Batch, Ensemble,
    MIN_NORMALITY_SAMPLES,
};
use corrlab_core::Error;

use crate::config::{ExperimentConfig, KsLevel, Thresholds};
use crate::report::Report;
use crate::CliError;

pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Report, CliError> {
    let mut report = Report::new(config.kind(), config.seed(), config.hash());
    let ens = Ensemble::new(config.seed(), workers)?;
    match config {
        ExperimentConfig::FieldStats(c) => field::run(c, &ens, &mut report)?,
        ExperimentConfig::HelmholtzCorrector(c) => helmholtz::run_1d(c, &ens, &mut report)?,
        ExperimentConfig::HelmholtzMoments2d(c) => helmholtz::run_2d(c, &ens, &mut report)?,
        ExperimentConfig::EllipticCorrector(c) => elliptic::run(c, &ens, &mut report)?,
        ExperimentConfig::SpectralCorrector(c) => spectral::run_spectral(c, &ens, &mut report)?,
        ExperimentConfig::HeatCorrector(c) => spectral::run_heat(c, &ens, &mut report)?,
        ExperimentConfig::ScalingStudy(c) => scaling::run(c, &ens, &mut report)?,
        ExperimentConfig::PeriodicCompare(c) => periodic::run(c, &ens, &mut report)?,
    }
    Ok(report)
}

/// Samples of one functional, column `k` of the per-realization outputs.
fn column(batch: &Batch<Vec<f64>>, k: usize) -> Vec<f64> {
    batch.values.iter().map(|v| v[k]).collect()
}

fn ks_critical(level: KsLevel, n: usize) -> f64 {
    match level {
        KsLevel::OnePercent => ks_critical_1pct(n),
        KsLevel::FivePercent => ks_critical_5pct(n),
    }
}

fn finish_batch(report: &mut Report, batch: &mut Batch<Vec<f64>>) {
    report.counts.realizations += batch.values.len() + batch.failures.len();
    report.absorb_failures(std::mem::take(&mut batch.failures));
}

/// Moments of `xs`, plus a check of the variance against `target`.
fn variance_check(
    report: &mut Report,
    eps: Option<f64>,
    name: &str,
    xs: &[f64],
    target: f64,
    t: &Thresholds,
) -> Result<(), CliError> {
    let s = sample_stats(xs)?;
    report.sample_stats(eps, name, &s);
    report.value(eps, name, "limit_variance", target);
    report.within(format!("{name} variance"), s.variance, target, t.z_max * s.stderr_variance);
    Ok(())
}

/// Skewness, excess kurtosis and KS checks; skipped for small or
/// degenerate samples.
fn normality_checks(report: &mut Report, eps: Option<f64>, name: &str, xs: &[f64], t: &Thresholds) -> Result<(), CliError> {
    if xs.len() < MIN_NORMALITY_SAMPLES {
        return Ok(());
    }
    let st = match normality_stats(xs) {
        Ok(st) => st,
        Err(Error::DegenerateSample) => {
            report.value(eps, name, "degenerate", 1.0);
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    report.normality(eps, name, &st);
    report.within(format!("{name} skewness"), st.skewness, 0.0, t.skewness_max);
    report.within(format!("{name} excess kurtosis"), st.excess_kurtosis, 0.0, t.excess_kurtosis_max);
    let crit = ks_critical(t.ks_level, xs.len());
    report.within(format!("{name} KS"), st.ks_statistic, 0.0, crit);
    Ok(())
}

fn covariance_check(
    report: &mut Report,
    eps: Option<f64>,
    name: &str,
    a: &[f64],
    b: &[f64],
    target: f64,
    t: &Thresholds,
) -> Result<(), CliError> {
    let (cov, se) = covariance(a, b)?;
    report.value(eps, name, "covariance", cov);
    report.value(eps, name, "stderr_covariance", se);
    report.value(eps, name, "limit_covariance", target);
    report.within(format!("{name} covariance"), cov, target, t.z_max * se);
    Ok(())
}

fn fmt_eps(e: f64) -> String {
    let inv = 1.0 / e;
    if (inv - inv.round()).abs() < 1e-9 {
        format!("1/{}", inv.round())
    } else {
        format!("{e}")
    }
}
