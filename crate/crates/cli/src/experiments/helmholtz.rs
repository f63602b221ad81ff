use corrlab_core::ensemble::Ensemble;
use corrlab_core::helmholtz::{HelmholtzProblem, HelmholtzProblem2D};
use corrlab_core::{GreenKernel1D, GreenOperator2D, Grid2D, Mesh1D};

use super::{column, covariance_check, finish_batch, fmt_eps, normality_checks, variance_check};
use crate::config::{HelmholtzCorrectorConfig, Moments2dConfig};
use crate::report::Report;
use crate::CliError;

pub(super) fn run_1d(c: &HelmholtzCorrectorConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let eps = c.epsilon;
    let mesh = Mesh1D::resolving(eps, c.nodes_per_epsilon)?;
    report.mesh_entry(Some(eps), format!("{} nodes (ε = {})", mesh.len(), fmt_eps(eps)), mesh.len());
    let source = mesh.map(|x| c.source.eval(x));
    let tests: Vec<Vec<f64>> = c.moments.iter().map(|m| mesh.map(|x| m.eval(x))).collect();
    let problem = HelmholtzProblem::new(GreenKernel1D::unit(c.a_star, c.q0)?, mesh.clone(), c.field.clone(), source, eps)?
        .with_alpha(c.alpha)?
        .with_truncation_rho(c.truncation_rho)?;
    let np = c.points.len();

    let mut batch = ens.run(0, c.samples, |seed| {
        let q = problem.realize(seed)?;
        let sol = problem.perturbed_solve_with(&q, c.tol)?;
        let corr = problem.corrector(&sol);
        let lead = problem.leading_corrector(&q)?;
        let mut out = Vec::with_capacity(2 * np + tests.len() + 1);
        out.extend(c.points.iter().map(|&x| mesh.interpolate(&corr, x)));
        out.extend(c.points.iter().map(|&x| mesh.interpolate(&lead, x)));
        out.extend(problem.moment_functionals(&sol, &tests));
        out.push(if sol.truncated { 1.0 } else { 0.0 });
        Ok(out)
    })?;
    finish_batch(report, &mut batch);
    let truncated = column(&batch, 2 * np + tests.len()).iter().filter(|&&t| t > 0.0).count();
    report.counts.truncated += truncated;
    report.value(Some(eps), "truncated", "fraction", truncated as f64 / c.samples as f64);

    let law = problem.corrector_law_1d()?;
    report.value(Some(eps), "sigma2", "analytic", law.sigma2);
    for (k, &x) in c.points.iter().enumerate() {
        let target = mesh.interpolate(&law.variance_fn, x);
        variance_check(report, Some(eps), &format!("corrector({x})"), &column(&batch, k), target, &c.thresholds)?;
        let lead = column(&batch, np + k);
        let s = corrlab_core::ensemble::sample_stats(&lead)?;
        report.sample_stats(Some(eps), &format!("leading_corrector({x})"), &s);
    }
    if !tests.is_empty() {
        let set = problem.moment_set(&tests)?;
        for j in 0..tests.len() {
            let a = column(&batch, 2 * np + j);
            for k in j..tests.len() {
                let b = column(&batch, 2 * np + k);
                covariance_check(report, Some(eps), &format!("moment[{j},{k}]"), &a, &b, set.covariance[[j, k]], &c.thresholds)?;
            }
            normality_checks(report, Some(eps), &format!("moment[{j}]"), &a, &c.thresholds)?;
        }
    }
    Ok(())
}

pub(super) fn run_2d(c: &Moments2dConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let eps = c.epsilon;
    let grid = Grid2D::new(c.grid_nodes)?;
    let n = grid.n();
    report.mesh_entry(Some(eps), format!("{n}×{n} grid, {} sine modes", c.modes), n * n);
    let op = GreenOperator2D::new(c.q0, c.modes, &grid)?;
    let source = grid.map(|x, y| c.source.eval_2d(x, y));
    let tests: Vec<Vec<f64>> = c.moments.iter().map(|m| grid.map(|x, y| m.eval_2d(x, y))).collect();
    let mut problem = HelmholtzProblem2D::new(op, c.field.clone(), source, eps)?.with_alpha(c.alpha)?;
    problem.truncation_rho = c.truncation_rho;

    let mut batch = ens.run(0, c.samples, |seed| {
        let sol = problem.perturbed_solve(seed, c.tol)?;
        let mut out = problem.moment_functionals(&sol, &tests);
        out.push(if sol.truncated { 1.0 } else { 0.0 });
        Ok(out)
    })?;
    finish_batch(report, &mut batch);
    let truncated = column(&batch, tests.len()).iter().filter(|&&t| t > 0.0).count();
    report.counts.truncated += truncated;
    report.value(Some(eps), "truncated", "fraction", truncated as f64 / c.samples as f64);

    let set = problem.moment_set(&tests)?;
    report.value(Some(eps), "sigma2", "analytic", c.field.sigma2_dim(2));
    for j in 0..tests.len() {
        let a = column(&batch, j);
        variance_check(report, Some(eps), &format!("moment[{j}]"), &a, set.covariance[[j, j]], &c.thresholds)?;
        for k in j + 1..tests.len() {
            let b = column(&batch, k);
            covariance_check(report, Some(eps), &format!("moment[{j},{k}]"), &a, &b, set.covariance[[j, k]], &c.thresholds)?;
        }
        normality_checks(report, Some(eps), &format!("moment[{j}]"), &a, &c.thresholds)?;
    }
    Ok(())
}
