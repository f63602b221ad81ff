use corrlab_core::asymptotics::{scaling_study, sphere_area, CorrelationModel, RadialSetup};
use corrlab_core::ensemble::{loglog_slope, sample_stats, Ensemble};
use corrlab_core::helmholtz::HelmholtzProblem;
use corrlab_core::{GreenKernel1D, Mesh1D};

use statrs::function::gamma::gamma;

use super::{finish_batch, fmt_eps};
use crate::config::ScalingStudyConfig;
use crate::report::Report;
use crate::CliError;

pub(super) fn run(c: &ScalingStudyConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    if c.samples > 0 {
        monte_carlo(c, ens, report)?;
    }
    for &d in &c.dimensions {
        radial(c, d, report)?;
    }
    Ok(())
}

/// `E‖u_ε − u0‖²` against ε for each amplitude exponent α.
fn monte_carlo(c: &ScalingStudyConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let meshes: Vec<Mesh1D> = c
        .epsilons
        .iter()
        .map(|&e| Mesh1D::resolving(e, c.nodes_per_epsilon))
        .collect::<Result<_, _>>()?;
    for (&e, m) in c.epsilons.iter().zip(&meshes) {
        report.mesh_entry(Some(e), format!("{} nodes (ε = {})", m.len(), fmt_eps(e)), m.len());
    }
    let kernel = GreenKernel1D::unit(c.a_star, c.q0)?;
    for (ai, &alpha) in c.alphas.iter().enumerate() {
        let mut pairs = Vec::with_capacity(c.epsilons.len());
        for (ei, (&eps, mesh)) in c.epsilons.iter().zip(&meshes).enumerate() {
            let source = mesh.map(|x| c.source.eval(x));
            let problem = HelmholtzProblem::new(kernel, mesh.clone(), c.field.clone(), source, eps)?
                .with_alpha(alpha)?
                .with_truncation_rho(c.truncation_rho)?;
            let mut batch = ens.run(ai * c.epsilons.len() + ei, c.samples, |seed| {
                let sol = problem.perturbed_solve(seed, c.tol)?;
                let diff: Vec<f64> = sol.u_eps.iter().zip(&sol.u0).map(|(a, b)| a - b).collect();
                let n = mesh.norm(&diff);
                Ok(vec![n * n, if sol.truncated { 1.0 } else { 0.0 }])
            })?;
            finish_batch(report, &mut batch);
            report.counts.truncated += batch.values.iter().filter(|v| v[1] > 0.0).count();
            let s = sample_stats(&batch.values.iter().map(|v| v[0]).collect::<Vec<_>>())?;
            let name = format!("mse[alpha={alpha}]");
            report.value(Some(eps), &name, "mean", s.mean);
            report.value(Some(eps), &name, "stderr_mean", s.stderr_mean);
            pairs.push((eps, s.mean));
        }
        if pairs.len() < 3 {
            continue;
        }
        let fit = loglog_slope(&pairs)?;
        report.value(None, &format!("mse[alpha={alpha}]"), "slope", fit.slope);
        if alpha == 0.0 {
            let (lo, hi) = c.mse_slope;
            report.within("MSE slope at alpha = 0", fit.slope, 0.5 * (lo + hi), 0.5 * (hi - lo));
        }
        report.within(
            format!("error exponent at alpha = {alpha}"),
            0.5 * fit.slope,
            0.5 - alpha,
            c.exponent_tol,
        );
    }
    Ok(())
}

/// Deterministic variance of the kernel-weighted field in dimension `d`.
fn radial(c: &ScalingStudyConfig, d: usize, report: &mut Report) -> Result<(), CliError> {
    let setup = RadialSetup::new(d, c.radius)?.with_correlation(c.correlation)?;
    let curve = scaling_study(&setup, &c.dimension_epsilons)?;
    let name = format!("radial_variance[d={d}]");
    for &(e, v) in &curve.pairs {
        report.value(Some(e), &name, "variance", v);
    }
    report.value(None, &name, "slope", curve.plain.slope);
    report.value(None, &name, "max_residual", curve.plain.max_residual);
    report.value(None, &name, "log_fit_slope", curve.augmented.slope);
    report.value(None, &name, "log_fit_log_coefficient", curve.augmented.log_coefficient);
    report.value(None, &name, "log_fit_max_residual", curve.augmented.max_residual);

    if d == 4 {
        let gain = curve.plain.max_residual / curve.augmented.max_residual.max(f64::MIN_POSITIVE);
        report.value(None, &name, "log_fit_gain", gain);
        report.at_least("d = 4 log-corrected fit residual gain", gain, c.log_fit_gain);
        return Ok(());
    }
    let expected = d.min(4) as f64;
    report.within(format!("variance exponent d = {d}"), curve.plain.slope, expected, c.exponent_tol);

    if d >= 5 {
        if let (Some(m), CorrelationModel::Gaussian { length }) =
            (setup.inverse_quartic_moment()?, setup.correlation)
        {
            // S_{d−1} ∫₀^∞ exp(−ℓ²r²/2) r^{d−5} dr in closed form
            let h = 0.5 * (d as f64 - 4.0);
            let closed = sphere_area(d) * 0.5 * (2.0f64).powf(h) * gamma(h) / length.powi(d as i32 - 4);
            report.value(None, &name, "inverse_quartic_moment", m);
            report.within(
                format!("inverse quartic moment d = {d}"),
                m / closed,
                1.0,
                c.constant_rel_tol,
            );
        }
    }
    if let Some((p, constant)) = setup.leading_order()? {
        let &(e, v) = curve.pairs.last().expect("at least four epsilons");
        let ratio = v / (constant * e.powf(p));
        report.value(None, &name, "limit_constant", constant);
        report.value(Some(e), &name, "ratio_to_leading_order", ratio);
        if d <= 3 {
            report.within(format!("leading-order ratio d = {d}"), ratio, 1.0, c.constant_rel_tol);
        }
    }
    Ok(())
}
