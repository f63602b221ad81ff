use corrlab_core::ensemble::{sample_stats, Ensemble};
use corrlab_core::Mesh1D;

use super::{column, finish_batch, variance_check};
use crate::config::FieldStatsConfig;
use crate::report::Report;
use crate::CliError;

pub(super) fn run(c: &FieldStatsConfig, ens: &Ensemble, report: &mut Report) -> Result<(), CliError> {
    let eps = c.epsilon;
    let max_lag = c.lags.iter().copied().fold(0.0, f64::max);
    if c.base_point + max_lag * eps >= 1.0 {
        return Err(CliError::Config("lags: base_point + lag·epsilon must stay below 1".into()));
    }
    let mesh = Mesh1D::uniform(1.0, 3)?;
    report.mesh_entry(Some(eps), format!("lattice of {} cells", (1.0 / eps).ceil()), mesh.len());
    let x0 = c.base_point;
    let mut batch = ens.run(0, c.samples, |seed| {
        let q = c.field.sample(eps, &mesh, seed)?;
        let mut out = vec![q.integral(0.0, 1.0) / eps.sqrt()];
        let base = q.at(x0);
        out.extend(c.lags.iter().map(|&l| base * q.at(x0 + l * eps)));
        Ok(out)
    })?;
    finish_batch(report, &mut batch);

    let sigma2 = c.field.sigma2();
    report.value(Some(eps), "sigma2", "analytic", sigma2);
    variance_check(report, Some(eps), "scaled_integral", &column(&batch, 0), sigma2, &c.thresholds)?;
    for (k, &lag) in c.lags.iter().enumerate() {
        let name = format!("lag_product[{lag}]");
        let s = sample_stats(&column(&batch, k + 1))?;
        let r = c.field.correlation(lag);
        report.sample_stats(Some(eps), &name, &s);
        report.value(Some(eps), &name, "analytic", r);
        report.within(format!("R({lag})"), s.mean, r, c.thresholds.z_max * s.stderr_mean);
    }
    Ok(())
}
