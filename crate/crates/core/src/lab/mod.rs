//! Configuration, run records, the acceptance suite and the command-line front end.
//!
//! A run writes into `<root>/<experiment>/`: one CSV per table, `summary.json`
//! and `record.json`. The record is written last, also when checks fail or the
//! experiment errors.

mod cli;
mod config;
mod experiments;
mod record;
mod suite;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

pub use cli::{dispatch, EXIT_ASSERT, EXIT_CONFIG, EXIT_OK};
pub use config::{
    Experiment, GridConfig, MuRule, PhysicsConfig, PotentialConfig, PotentialFamily, RunConfig, ScanConfig, TimeConfig,
};
pub use experiments::run;
pub use record::{code_version, format_float, Cell, Check, Outcome, RunRecord, Status, Table, SCHEMA_VERSION};
pub use suite::{run_suite, suite_members, Profile, SuiteEntry, SuiteOptions, SuiteSummary};

use crate::error::Result;

/// Default output root.
pub const DEFAULT_OUT: &str = "gclab-out";
/// Environment variable naming the output root.
pub const OUT_ENV: &str = "GCLAB_OUT";

/// `--out`, then `GCLAB_OUT`, then the config's `out`, then `./gclab-out`.
pub fn output_root(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs a validated config and writes its artifacts into `dir`.
///
/// Experiment errors are not returned: they end up in the record with
/// [`Status::Error`]. Only I/O failures while writing are returned.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<RunRecord> {
    let started_unix = now_unix();
    let start = Instant::now();
    let result = run(cfg);
    let wall_time_s = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    let mut artifacts = Vec::new();
    let (status, error, checks) = match result {
        Ok(out) => {
            for t in &out.tables {
                let p = dir.join(format!("{}.csv", t.name));
                t.write_csv(&p)?;
                artifacts.push(p);
            }
            let p = dir.join("summary.json");
            let summary = json!({
                "schema_version": SCHEMA_VERSION,
                "experiment": cfg.experiment,
                "pass": out.pass(),
                "checks": out.checks,
                "result": out.summary,
            });
            record::write_json(&p, &summary)?;
            artifacts.push(p);
            let status = if out.pass() { Status::Pass } else { Status::Fail };
            (status, None, out.checks)
        }
        Err(e) => (Status::Error, Some(e.to_string()), vec![]),
    };
    let rec = RunRecord {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.experiment,
        config: cfg.clone(),
        code_version: code_version(),
        started_unix,
        wall_time_s,
        status,
        error,
        checks,
        artifacts,
    };
    record::write_json(&dir.join("record.json"), &rec)?;
    Ok(rec)
}
