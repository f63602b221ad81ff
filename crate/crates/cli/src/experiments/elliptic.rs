use corrlab_core::elliptic1d::EllipticProblem1D;
use corrlab_core::ensemble::Ensemble;
use corrlab_core::Mesh1D;

use super::{column, finish_batch, fmt_eps, normality_checks, variance_check};
use crate::config::EllipticCorrectorConfig;
use crate::report::Report;
use crate::CliError;

const COMPONENTS: [&str; 3] = ["b0", "delta_rho", "q"];

pub(super) fn run(c: &EllipticCorrectorConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let eps = c.epsilon;
    let mesh = Mesh1D::resolving(eps, c.nodes_per_epsilon)?;
    report.mesh_entry(Some(eps), format!("{} nodes (ε = {})", mesh.len(), fmt_eps(eps)), mesh.len());
    let source = mesh.map(|x| c.source.eval(x));
    let problem = EllipticProblem1D::new(
        c.triple.clone(),
        c.gamma,
        c.a_base,
        c.q0,
        c.rho_bar,
        source,
        mesh.clone(),
        eps,
    )?
    .with_truncation_rho(c.truncation_rho)?;
    let nodes: Vec<usize> = c.points.iter().map(|&x| mesh.nearest(x)).collect();

    let mut batch = ens.run(0, c.samples, |seed| {
        let sol = problem.solve_transformed(seed, c.tol)?;
        let corr = problem.corrector(&sol);
        let mut out: Vec<f64> = nodes.iter().map(|&i| corr[i]).collect();
        out.push(if sol.truncated { 1.0 } else { 0.0 });
        Ok(out)
    })?;
    finish_batch(report, &mut batch);
    let truncated = column(&batch, nodes.len()).iter().filter(|&&t| t > 0.0).count();
    report.counts.truncated += truncated;
    report.value(Some(eps), "truncated", "fraction", truncated as f64 / c.samples as f64);

    let law = problem.limit_law_at(&nodes);
    report.value(None, "a_star", "analytic", problem.a_star());
    for j in 0..3 {
        report.value(None, COMPONENTS[j], "sigma", law.sigma[j]);
        for k in j + 1..3 {
            report.value(None, &format!("{}~{}", COMPONENTS[j], COMPONENTS[k]), "rho_jk", law.rho_jk[j][k]);
        }
    }
    for (k, &i) in nodes.iter().enumerate() {
        let x = mesh.nodes()[i];
        let name = format!("corrector({x})");
        let xs = column(&batch, k);
        variance_check(report, Some(eps), &name, &xs, law.variance_fn[k], &c.thresholds)?;
        normality_checks(report, Some(eps), &name, &xs, &c.thresholds)?;
    }
    Ok(())
}
