use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Experiment, RunConfig};
use super::record::{self, format_float, Check, Status, Table, SCHEMA_VERSION};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    /// Wall-time budget in seconds.
    pub fn budget_s(self) -> f64 {
        match self {
            Profile::Quick => 60.0,
            Profile::Full => 300.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteOptions {
    /// Stop after the first member that does not pass.
    pub first_failure: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub label: String,
    pub experiment: Experiment,
    pub status: Status,
    pub wall_time_s: f64,
    pub error: Option<String>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub schema_version: u32,
    pub profile: Profile,
    pub code_version: String,
    pub wall_time_s: f64,
    pub pass: bool,
    /// Members not run because an earlier one failed.
    pub skipped: Vec<String>,
    pub entries: Vec<SuiteEntry>,
    /// Suite-level checks (the wall-time budget).
    pub checks: Vec<Check>,
}

impl SuiteSummary {
    /// `(criterion, pass)` for every criterion that has at least one check.
    pub fn criteria(&self) -> Vec<(u8, bool)> {
        let mut out: Vec<(u8, bool)> = vec![];
        let all = self.entries.iter().flat_map(|e| e.checks.iter()).chain(&self.checks);
        for c in all {
            if let Some(n) = c.criterion {
                match out.iter_mut().find(|(m, _)| *m == n) {
                    Some(slot) => slot.1 &= c.pass,
                    None => out.push((n, c.pass)),
                }
            }
        }
        out.sort();
        out
    }
}

/// The registered members of a profile, labelled.
pub fn suite_members(profile: Profile) -> Vec<(String, RunConfig)> {
    let d = RunConfig::defaults;
    let mut interp_64 = d(Experiment::Interpolate);
    interp_64.physics.alpha = 6.0;
    interp_64.physics.beta = 4.0;
    interp_64.physics.kappa = 1.0;
    let mut members = vec![
        ("commutator".to_string(), d(Experiment::Commutator)),
        ("evolve".into(), d(Experiment::Evolve)),
        ("convexity".into(), d(Experiment::Convexity)),
        ("interpolate-4-6".into(), d(Experiment::Interpolate)),
        ("interpolate-6-4".into(), interp_64),
        ("smoothing".into(), d(Experiment::Smoothing)),
        ("appel-check".into(), d(Experiment::AppelCheck)),
        ("carleman".into(), d(Experiment::Carleman)),
        ("l110".into(), d(Experiment::L110)),
        ("annulus".into(), d(Experiment::Annulus)),
        ("threshold".into(), d(Experiment::Threshold)),
        ("hardy-pipeline".into(), d(Experiment::HardyPipeline)),
        ("airy".into(), d(Experiment::Airy)),
        ("ode-a".into(), d(Experiment::OdeA)),
        ("counterexample".into(), d(Experiment::Counterexample)),
    ];
    if profile == Profile::Quick {
        members.retain(|(l, _)| l != "hardy-pipeline");
        for (_, c) in members.iter_mut() {
            match c.experiment {
                Experiment::Carleman | Experiment::L110 => c.scan.radii = vec![8.0, 16.0],
                Experiment::Convexity => c.scan.amplitudes.clear(),
                _ => {}
            }
        }
    }
    members
}

/// Runs the members in order under `<root>/suite/<label>/` and writes
/// `summary.json`, `summary.md` and `summary.csv` into `<root>/suite/`.
pub fn run_suite(profile: Profile, members: &[(String, RunConfig)], opts: SuiteOptions, root: &Path) -> Result<SuiteSummary> {
    let dir = root.join("suite");
    let start = Instant::now();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut stop = false;
    for (label, cfg) in members {
        if stop {
            skipped.push(label.clone());
            continue;
        }
        let entry = match cfg.validate() {
            Err(e) => SuiteEntry {
                label: label.clone(),
                experiment: cfg.experiment,
                status: Status::Error,
                wall_time_s: 0.0,
                error: Some(e.to_string()),
                checks: vec![Check::failed("configuration valid", None, e.to_string())],
            },
            Ok(()) => {
                let rec = super::execute(cfg, &dir.join(label))?;
                let mut checks = rec.checks;
                if let Some(e) = &rec.error {
                    checks.push(Check::failed("experiment completed", None, e.clone()));
                }
                SuiteEntry {
                    label: label.clone(),
                    experiment: cfg.experiment,
                    status: rec.status,
                    wall_time_s: rec.wall_time_s,
                    error: rec.error,
                    checks,
                }
            }
        };
        stop = opts.first_failure && entry.status != Status::Pass;
        entries.push(entry);
    }
    let wall = start.elapsed().as_secs_f64();
    let checks = vec![Check::le("suite wall time (s)", Some(14), wall, profile.budget_s()).timed()];
    let pass = skipped.is_empty() && entries.iter().all(|e| e.status == Status::Pass) && checks.iter().all(|c| c.pass);
    let summary = SuiteSummary {
        schema_version: SCHEMA_VERSION,
        profile,
        code_version: record::code_version(),
        wall_time_s: wall,
        pass,
        skipped,
        entries,
        checks,
    };
    record::write_json(&dir.join("summary.json"), &summary)?;
    record::write_atomic(&dir.join("summary.md"), markdown(&summary).as_bytes())?;
    csv_table(&summary).write_csv(&dir.join("summary.csv"))?;
    Ok(summary)
}

fn csv_table(s: &SuiteSummary) -> Table {
    let mut t = Table::new("summary", &["member", "experiment", "check", "criterion", "pass", "value", "bound"]);
    for e in &s.entries {
        for c in &e.checks {
            let value = match (c.timing, c.value) {
                (false, Some(v)) => format_float(v),
                _ => String::new(),
            };
            t.push(vec![
                e.label.clone().into(),
                e.experiment.name().into(),
                c.name.clone().into(),
                c.criterion.map(|n| n.to_string()).unwrap_or_default().into(),
                c.pass.into(),
                value.into(),
                c.bound.clone().into(),
            ]);
        }
    }
    t
}

fn markdown(s: &SuiteSummary) -> String {
    let mark = |p: bool| if p { "pass" } else { "FAIL" };
    let mut m = String::new();
    let _ = writeln!(m, "# gclab suite ({:?})\n", s.profile);
    let _ = writeln!(m, "{}; wall time {:.1} s; overall {}\n", s.code_version, s.wall_time_s, mark(s.pass));
    let _ = writeln!(m, "| criterion | result |\n|---|---|");
    for (n, p) in s.criteria() {
        let _ = writeln!(m, "| {n} | {} |", mark(p));
    }
    let _ = writeln!(m, "\n| member | check | criterion | value | bound | result |\n|---|---|---|---|---|---|");
    for e in &s.entries {
        for c in &e.checks {
            let v = c.value.map(|v| format!("{v:.6e}")).unwrap_or_default();
            let crit = c.criterion.map(|n| n.to_string()).unwrap_or_default();
            let _ = writeln!(m, "| {} | {} | {crit} | {v} | {} | {} |", e.label, c.name, c.bound, mark(c.pass));
        }
    }
    for c in &s.checks {
        let crit = c.criterion.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(m, "| suite | {} | {crit} | {:.3} | {} | {} |", c.name, c.value.unwrap_or(f64::NAN), c.bound, mark(c.pass));
    }
    if !s.skipped.is_empty() {
        let _ = writeln!(m, "\nSkipped after first failure: {}", s.skipped.join(", "));
    }
    m
}
