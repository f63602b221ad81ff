use std::f64::consts::PI;

use corrlab_core::ensemble::{loglog_slope, sample_stats, Ensemble};
use corrlab_core::helmholtz::{periodic_cell_corrector_1d, periodic_sup_error, HelmholtzProblem};
use corrlab_core::{GreenKernel1D, Mesh1D};

use super::{finish_batch, fmt_eps};
use crate::config::PeriodicCompareConfig;
use crate::report::Report;
use crate::CliError;

/// Tolerance on the random-case error exponent, whose target is 1/2.
pub const RANDOM_SLOPE_TOL: f64 = 0.1;

pub(super) fn run(c: &PeriodicCompareConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let amp = c.amplitude;
    let q = |y: f64| amp * (2.0 * PI * y).cos();
    let f = |_: f64| 1.0;

    // cell problem −u₂'' = ⟨q⟩ − q
    let cell = Mesh1D::uniform(1.0, c.cell_nodes)?;
    let u2 = periodic_cell_corrector_1d(&cell.map(q))?;
    let u2_max = u2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let u2_exact = amp / (4.0 * PI * PI);
    report.value(None, "cell_corrector", "max_abs", u2_max);
    report.value(None, "cell_corrector", "analytic_max_abs", u2_exact);
    if amp != 0.0 {
        report.within("cell corrector amplitude", u2_max / u2_exact, 1.0, c.amplitude_rel_tol);
    }

    // u0 = x(1 − x)/(2a*) for f = 1, ⟨q⟩ = 0
    let u0_max = 0.125 / c.a_star;
    let mut pairs = Vec::with_capacity(c.epsilons.len());
    for &eps in &c.epsilons {
        let nodes = (1.0 / eps).round() as usize * c.nodes_per_period + 1;
        report.mesh_entry(Some(eps), format!("{nodes} nodes (ε = {}, periodic)", fmt_eps(eps)), nodes);
        let err = periodic_sup_error(c.a_star, q, 0.0, f, eps, c.nodes_per_period)?;
        report.value(Some(eps), "periodic_sup_error", "value", err);
        if u2_max > 0.0 {
            report.value(Some(eps), "periodic_sup_error", "ratio_to_cell_prediction", err / (eps * eps * u2_max * u0_max / c.a_star));
        }
        pairs.push((eps, err));
    }
    if pairs.len() >= 3 && pairs.iter().all(|&(_, e)| e > 0.0) {
        let fit = loglog_slope(&pairs)?;
        report.value(None, "periodic_sup_error", "slope", fit.slope);
        report.within("periodic error exponent", fit.slope, c.slope_target, c.slope_tol);
    }

    if c.random_samples == 0 {
        return Ok(());
    }
    let kernel = GreenKernel1D::unit(c.a_star, 0.0)?;
    let mut random = Vec::with_capacity(c.random_epsilons.len());
    for (ei, &eps) in c.random_epsilons.iter().enumerate() {
        let mesh = Mesh1D::resolving(eps, c.nodes_per_epsilon)?;
        report.mesh_entry(Some(eps), format!("{} nodes (ε = {}, random)", mesh.len(), fmt_eps(eps)), mesh.len());
        let source = mesh.map(f);
        let problem = HelmholtzProblem::new(kernel, mesh.clone(), c.field.clone(), source, eps)?;
        let mut batch = ens.run(ei, c.random_samples, |seed| {
            let q = problem.realize(seed)?;
            let u = problem.direct_solve_fd(&q)?;
            let diff: Vec<f64> = u.iter().zip(problem.homogenized_solve()).map(|(a, b)| a - b).collect();
            Ok(vec![mesh.norm(&diff)])
        })?;
        finish_batch(report, &mut batch);
        let s = sample_stats(&batch.values.iter().map(|v| v[0]).collect::<Vec<_>>())?;
        report.value(Some(eps), "random_l2_error", "mean", s.mean);
        report.value(Some(eps), "random_l2_error", "stderr_mean", s.stderr_mean);
        random.push((eps, s.mean));
    }
    if random.len() >= 3 && random.iter().all(|&(_, e)| e > 0.0) {
        let fit = loglog_slope(&random)?;
        report.value(None, "random_l2_error", "slope", fit.slope);
        report.within("random error exponent", fit.slope, 0.5, RANDOM_SLOPE_TOL);
    }
    Ok(())
}
