//! Experiment reports and their CSV, JSON and text renderings.

use std::fmt::Write as _;
use std::path::Path;

use corrlab_core::ensemble::{Failure, NormalityStats, SampleStats};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TOOL: &str = "corrlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub epsilon: Option<f64>,
    pub functional: String,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|observed − target| ≤ tolerance`.
    Within,
    /// `observed ≥ target`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub realizations: usize,
    pub failed: usize,
    pub truncated: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub epsilons: Vec<f64>,
    /// Mesh description per ε, e.g. `"3201 nodes"`.
    pub mesh: Vec<String>,
    pub counts: Counts,
    pub failures: Vec<Failure>,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(experiment: &str, seed: u64, config_hash: String) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            experiment: experiment.into(),
            seed,
            config_hash,
            epsilons: Vec::new(),
            mesh: Vec::new(),
            counts: Counts::default(),
            failures: Vec::new(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn mesh_entry(&mut self, epsilon: Option<f64>, description: String, nodes: usize) {
        if let Some(e) = epsilon {
            self.epsilons.push(e);
        }
        self.mesh.push(description);
        self.value(epsilon, "mesh", "nodes", nodes as f64);
    }

    pub fn value(&mut self, epsilon: Option<f64>, functional: &str, statistic: &str, value: f64) {
        self.rows.push(Row {
            epsilon,
            functional: functional.into(),
            statistic: statistic.into(),
            value,
        });
    }

    pub fn sample_stats(&mut self, epsilon: Option<f64>, functional: &str, s: &SampleStats) {
        for (name, v) in [
            ("n", s.n as f64),
            ("mean", s.mean),
            ("stderr_mean", s.stderr_mean),
            ("variance", s.variance),
            ("stderr_variance", s.stderr_variance),
        ] {
            self.value(epsilon, functional, name, v);
        }
    }

    pub fn normality(&mut self, epsilon: Option<f64>, functional: &str, s: &NormalityStats) {
        self.value(epsilon, functional, "skewness", s.skewness);
        self.value(epsilon, functional, "excess_kurtosis", s.excess_kurtosis);
        self.value(epsilon, functional, "ks_statistic", s.ks_statistic);
    }

    pub fn within(&mut self, name: impl Into<String>, observed: f64, target: f64, tolerance: f64) -> bool {
        let target = target + 0.0;
        let passed = (observed - target).abs() <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            observed,
            target,
            tolerance,
            relation: Relation::Within,
            passed,
        });
        passed
    }

    pub fn at_least(&mut self, name: impl Into<String>, observed: f64, target: f64) -> bool {
        let passed = observed >= target;
        self.checks.push(Check {
            name: name.into(),
            observed,
            target,
            tolerance: 0.0,
            relation: Relation::AtLeast,
            passed,
        });
        passed
    }

    pub fn absorb_failures(&mut self, failures: Vec<Failure>) {
        self.counts.failed += failures.len();
        self.failures.extend(failures);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "experiment",
            "seed",
            "config_hash",
            "version",
            "epsilon",
            "functional",
            "statistic",
            "value",
        ])
        .map_err(csv_err)?;
        let seed = self.seed.to_string();
        for r in &self.rows {
            let eps = r.epsilon.map(|e| e.to_string()).unwrap_or_default();
            w.write_record([
                self.experiment.as_str(),
                &seed,
                &self.config_hash,
                &self.version,
                &eps,
                &r.functional,
                &r.statistic,
                &r.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} | experiment {}", self.tool, self.version, self.experiment);
        let _ = writeln!(s, "seed {} | config sha256 {}", self.seed, self.config_hash);
        let eps: Vec<String> = self.epsilons.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "epsilons [{}]", eps.join(", "));
        let _ = writeln!(s, "mesh {}", self.mesh.join("; "));
        let c = &self.counts;
        let _ = writeln!(
            s,
            "realizations {} | failed {} | truncated {} | flagged {}",
            c.realizations, c.failed, c.truncated, c.flagged
        );
        for f in &self.failures {
            let _ = writeln!(s, "  failed realization {} (seed {}): {}", f.index, f.seed, f.message);
        }
        s.push('\n');
        for ch in &self.checks {
            let verdict = if ch.passed { "PASS" } else { "FAIL" };
            let _ = match ch.relation {
                Relation::Within => writeln!(
                    s,
                    "{verdict} {}: observed {:.6e}, target {:.6e} ± {:.3e}",
                    ch.name, ch.observed, ch.target, ch.tolerance
                ),
                Relation::AtLeast => writeln!(
                    s,
                    "{verdict} {}: observed {:.6e}, required ≥ {:.6e}",
                    ch.name, ch.observed, ch.target
                ),
            };
        }
        let total = self.checks.len();
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "\n{passed}/{total} checks passed");
        s
    }

    /// Write `report.csv`, `report.json`, `summary.txt` and the config echo.
    pub fn write(&self, dir: &Path, config_json: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let files = [
            ("report.csv", self.to_csv()?),
            ("report.json", self.to_json()),
            ("summary.txt", self.summary()),
            ("config.json", config_json.to_string()),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
