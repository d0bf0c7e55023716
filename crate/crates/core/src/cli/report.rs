use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::suite::RNG_NAME;
use crate::error::{Error, Result};
use crate::verify::CheckReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run report. Field order is the serialized order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub rng: String,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    /// Max residual per `(model, n)`; scans only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Vec<AggregateRow>>,
    /// Wall-clock data, `null` in deterministic mode.
    pub timing: Option<Timing>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Failed checks that count against the run.
    pub blocking: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub model: String,
    pub n: usize,
    pub checks: usize,
    #[serde(with = "nullable")]
    pub max_residual: f64,
    pub all_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_s: f64,
    pub wall_time_s: f64,
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
            blocking: checks.iter().filter(|c| c.blocks()).count(),
        }
    }
}

/// Sort key of the report rows: model, size, check name, seed.
pub fn sort_checks(checks: &mut [CheckReport]) {
    checks.sort_by(|a, b| {
        (a.model.as_str(), a.n, a.name.as_str(), a.seed).cmp(&(b.model.as_str(), b.n, b.name.as_str(), b.seed))
    });
}

pub fn aggregate(checks: &[CheckReport]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, usize), AggregateRow> = BTreeMap::new();
    for c in checks {
        let row = groups.entry((c.model.clone(), c.n)).or_insert_with(|| AggregateRow {
            model: c.model.clone(),
            n: c.n,
            checks: 0,
            max_residual: 0.0,
            all_pass: true,
        });
        row.checks += 1;
        let r = if c.residual.is_nan() { f64::INFINITY } else { c.residual };
        row.max_residual = row.max_residual.max(r);
        row.all_pass &= c.pass;
    }
    groups.into_values().collect()
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig, mut checks: Vec<CheckReport>, timing: Option<Timing>) -> Self {
        sort_checks(&mut checks);
        let summary = Summary::of(&checks);
        RunReport {
            version: VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            rng: RNG_NAME.to_string(),
            checks,
            summary,
            aggregate: None,
            timing: if config.deterministic_report { None } else { timing },
        }
    }

    pub fn with_aggregate(mut self) -> Self {
        self.aggregate = Some(aggregate(&self.checks));
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Write to `path`, or standard output when absent.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = self.to_json();
        match path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Error::Config(format!("cannot write report {}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .map_err(|e| Error::Config(format!("cannot write report: {e}")))
            }
        }
    }

    /// Short human summary.
    pub fn human(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = match (c.pass, c.gated) {
                (true, _) => "ok",
                (false, true) => "FAIL",
                (false, false) => "fail (reported)",
            };
            let seed = c.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:<16} n={} seed={:<4} {:<24} {:>10.3e} / {:.0e}  {status}\n",
                c.model, c.n, seed, c.name, c.residual, c.tol
            ));
        }
        if let Some(rows) = &self.aggregate {
            s.push_str("\nmodel            n  checks  max residual\n");
            for r in rows {
                s.push_str(&format!("{:<16} {:<2} {:<7} {:.3e}\n", r.model, r.n, r.checks, r.max_residual));
            }
        }
        let m = &self.summary;
        s.push_str(&format!(
            "{} checks, {} passed, {} failed ({} blocking)\n",
            m.total, m.passed, m.failed, m.blocking
        ));
        s
    }
}
