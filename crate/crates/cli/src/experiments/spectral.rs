use corrlab_core::ensemble::{loglog_slope, sample_stats, Ensemble};
use corrlab_core::spectral::SpectralProblem;
use corrlab_core::Mesh1D;

use super::{covariance_check, finish_batch, fmt_eps, normality_checks, variance_check};
use crate::config::{HeatCorrectorConfig, SpectralCorrectorConfig};
use crate::report::Report;
use crate::CliError;

/// Minimum decay exponent of the mean heat remainder `|direct − surrogate|`.
pub const REMAINDER_SLOPE_MIN: f64 = 0.25;

/// Drop realizations whose last column marks an ambiguous eigenpair match.
fn unflagged(values: &[Vec<f64>]) -> (Vec<Vec<f64>>, usize) {
    let (keep, drop): (Vec<_>, Vec<_>) = values.iter().partition(|v| *v.last().unwrap() == 0.0);
    (keep.into_iter().cloned().collect(), drop.len())
}

fn col(values: &[Vec<f64>], k: usize) -> Vec<f64> {
    values.iter().map(|v| v[k]).collect()
}

pub(super) fn run_spectral(c: &SpectralCorrectorConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let nm = c.modes.len();
    let np = c.fourier_pairs.len();
    let mut mse = Vec::new();
    let mut defect = Vec::new();
    let last = c.epsilons.len() - 1;
    for (ei, &eps) in c.epsilons.iter().enumerate() {
        let mesh = Mesh1D::resolving(eps, c.nodes_per_epsilon)?;
        report.mesh_entry(Some(eps), format!("{} nodes (ε = {})", mesh.len(), fmt_eps(eps)), mesh.len());
        let problem = SpectralProblem::helmholtz(c.a_star, c.q0, mesh, c.field.clone(), eps, c.n_max)?;
        let mut batch = ens.run(ei, c.samples, |seed| {
            let r = problem.realize(seed)?;
            let mut out = Vec::with_capacity(3 * nm + np + 1);
            for &n in &c.modes {
                out.push(problem.eigenvalue_corrector(&r, n)?);
            }
            for &n in &c.modes {
                out.push(problem.lambda_corrector(&r, n)?);
            }
            for &n in &c.modes {
                out.push(problem.overlap_defect(&r, n)?);
            }
            for &(n, m) in &c.fourier_pairs {
                out.push(problem.eigenvector_fourier_corrector(&r, n, m)?);
            }
            out.push(if r.flagged() { 1.0 } else { 0.0 });
            Ok(out)
        })?;
        finish_batch(report, &mut batch);
        let (values, flagged) = unflagged(&batch.values);
        report.counts.flagged += flagged;
        report.value(Some(eps), "flagged", "count", flagged as f64);
        let law = problem.law()?;
        let at_check = ei == last;
        let e = Some(eps);

        for (k, &n) in c.modes.iter().enumerate() {
            let name = format!("eigenvalue_corrector[{n}]");
            let xs = col(&values, k);
            let s = sample_stats(&xs)?;
            if k == 0 {
                // E(μ^ε − μ)² = ε · E(corrector²)
                mse.push((eps, eps * s.second_moment));
            }
            report.value(e, &name, "second_moment", s.second_moment);
            report.value(e, &name, "stderr_second_moment", s.stderr_second_moment);
            if at_check {
                variance_check(report, e, &name, &xs, law.eigenvalue_variance(n), &c.thresholds)?;
                normality_checks(report, e, &name, &xs, &c.thresholds)?;
            } else {
                report.sample_stats(e, &name, &s);
            }
            let d = sample_stats(&col(&values, 2 * nm + k))?;
            report.value(e, &format!("overlap_defect[{n}]"), "mean", d.mean);
            if k == 0 {
                defect.push((eps, d.mean));
            }
        }
        if at_check {
            for j in 0..nm {
                for k in j + 1..nm {
                    let (n, m) = (c.modes[j], c.modes[k]);
                    covariance_check(
                        report,
                        e,
                        &format!("lambda_corrector[{n},{m}]"),
                        &col(&values, nm + j),
                        &col(&values, nm + k),
                        law.lambda_covariance(n, m),
                        &c.thresholds,
                    )?;
                }
            }
            for (p, &(n, m)) in c.fourier_pairs.iter().enumerate() {
                let name = format!("fourier_corrector[{n},{m}]");
                let xs = col(&values, 3 * nm + p);
                variance_check(report, e, &name, &xs, law.fourier_variance(n, m)?, &c.thresholds)?;
                normality_checks(report, e, &name, &xs, &c.thresholds)?;
            }
        }
    }
    if c.epsilons.len() >= 3 {
        let fit = loglog_slope(&mse)?;
        report.value(None, "eigenvalue_mse", "slope", fit.slope);
        let (lo, hi) = c.eigenvalue_slope;
        report.within("eigenvalue MSE slope", fit.slope, 0.5 * (lo + hi), 0.5 * (hi - lo));
        if defect.iter().all(|&(_, d)| d > 0.0) {
            let fit = loglog_slope(&defect)?;
            report.value(None, "overlap_defect", "slope", fit.slope);
            report.at_least("overlap defect slope", fit.slope, c.overlap_slope_min);
        }
    }
    Ok(())
}

pub(super) fn run_heat(c: &HeatCorrectorConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let last = c.epsilons.len() - 1;
    let mut remainder = Vec::new();
    for (ei, &eps) in c.epsilons.iter().enumerate() {
        let mesh = Mesh1D::resolving(eps, c.nodes_per_epsilon)?;
        report.mesh_entry(Some(eps), format!("{} nodes (ε = {})", mesh.len(), fmt_eps(eps)), mesh.len());
        let g0 = mesh.map(|x| c.initial.eval(x));
        let problem = SpectralProblem::helmholtz(c.a_star, c.q0, mesh.clone(), c.field.clone(), eps, c.n_max)?;
        let mut batch = ens.run(ei, c.samples, |seed| {
            let r = problem.realize(seed)?;
            let h = problem.heat_coefficient_corrector(&r, c.mode, c.time, c.evolution, &g0)?;
            Ok(vec![h.direct, h.surrogate, (h.direct - h.surrogate).abs(), if r.flagged() { 1.0 } else { 0.0 }])
        })?;
        finish_batch(report, &mut batch);
        let (values, flagged) = unflagged(&batch.values);
        report.counts.flagged += flagged;
        let e = Some(eps);
        let direct = col(&values, 0);
        let surrogate = col(&values, 1);
        let rem = sample_stats(&col(&values, 2))?;
        report.value(e, "remainder", "mean_abs", rem.mean);
        remainder.push((eps, rem.mean));
        if ei == last {
            let target = problem.law()?.heat_variance(c.mode, c.time, c.evolution, &g0, &mesh, c.law_modes);
            variance_check(report, e, "heat_direct", &direct, target, &c.thresholds)?;
            normality_checks(report, e, "heat_direct", &direct, &c.thresholds)?;
            report.sample_stats(e, "heat_surrogate", &sample_stats(&surrogate)?);
        } else {
            report.sample_stats(e, "heat_direct", &sample_stats(&direct)?);
            report.sample_stats(e, "heat_surrogate", &sample_stats(&surrogate)?);
        }
    }
    if remainder.len() >= 3 && remainder.iter().all(|&(_, r)| r > 0.0) {
        let fit = loglog_slope(&remainder)?;
        report.value(None, "remainder", "slope", fit.slope);
        report.at_least("heat remainder slope", fit.slope, REMAINDER_SLOPE_MIN);
    }
    Ok(())
}
