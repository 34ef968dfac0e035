use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use super::config::{Experiment, MuRule, PotentialFamily, RunConfig};
use super::record::{Check, Status};
use super::suite::{run_suite, suite_members, Profile, SuiteOptions};
use super::{execute, output_root};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ASSERT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gclab",
    version,
    about = "Gaussian-mean convexity, Carleman and Hardy-threshold experiments",
    allow_negative_numbers = true
)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML config; missing keys take the experiment's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root (overrides GCLAB_OUT and the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 2 when a check fails.
    #[arg(long)]
    assert: bool,
    /// threshold: fail unless sup_ε E(γ) > 0; implies --assert.
    #[arg(long)]
    assert_positive: bool,
    /// suite: profile to run.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// suite: stop at the first failing member.
    #[arg(long)]
    first_failure: bool,
    /// Worker threads for internal scans.
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long)]
    n_points: Option<usize>,
    /// Half-width L of the box [-L, L).
    #[arg(long)]
    half_width: Option<f64>,
    /// Sampling step; K = 1/dt.
    #[arg(long)]
    dt: Option<f64>,
    /// Split-step size.
    #[arg(long)]
    step: Option<f64>,
    /// Heat-flow time for the weight-loss check.
    #[arg(long)]
    heat: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed μ instead of (1+ε)^{-3}γR².
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    z_re: Option<f64>,
    #[arg(long)]
    z_im: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    potential: Option<PotentialFamily>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    potential_radius: Option<f64>,
    /// I1, I2, I3, I4 or all.
    #[arg(long)]
    identity: Option<String>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    half_widths: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    probes: Option<Vec<f64>>,
}

impl Cli {
    fn apply(&self, c: &mut RunConfig) {
        macro_rules! set {
            ($($flag:ident => $target:expr;)*) => {
                $(if let Some(v) = &self.$flag { $target = v.clone(); })*
            };
        }
        set! {
            n_points => c.grid.n_points;
            half_width => c.grid.half_width;
            dt => c.time.dt;
            step => c.time.step;
            heat => c.time.heat;
            gamma => c.physics.gamma;
            alpha => c.physics.alpha;
            beta => c.physics.beta;
            kappa => c.physics.kappa;
            r => c.physics.r;
            eps => c.physics.eps;
            z_re => c.physics.z[0];
            z_im => c.physics.z[1];
            s => c.physics.s;
            delta => c.physics.delta;
            m => c.physics.m;
            rho => c.physics.rho;
            lambda => c.physics.lambda;
            potential => c.potential.family;
            amplitude => c.potential.amplitude;
            potential_radius => c.potential.radius;
            identity => c.identity;
            radii => c.scan.radii;
            amplitudes => c.scan.amplitudes;
            gammas => c.scan.gammas;
            half_widths => c.scan.half_widths;
            probes => c.scan.probes;
        }
        if let Some(mu) = self.mu {
            c.physics.mu_rule = MuRule::Fixed(mu);
        }
        c.assert |= self.assert || self.assert_positive;
        c.assert_positive |= self.assert_positive;
    }
}

fn line(c: &Check) -> String {
    let v = c.value.map(|v| format!(" value={v:e}")).unwrap_or_default();
    let crit = c.criterion.map(|n| format!(" [criterion {n}]")).unwrap_or_default();
    let detail = if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) };
    format!("{} {}{crit}{v} bound {}{detail}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.bound)
}

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("gclab: configuration error: {msg}");
    EXIT_CONFIG
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_error("--threads must be at least 1");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.experiment == Experiment::Suite {
        return suite(&cli);
    }
    if cli.profile.is_some() || cli.first_failure {
        return config_error("--profile and --first-failure only apply to `suite`");
    }
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p, Some(cli.experiment)) {
            Ok(c) => c,
            Err(e) => return config_error(e),
        },
        None => RunConfig::defaults(cli.experiment),
    };
    cli.apply(&mut cfg);
    if let Err(e) = cfg.validate() {
        return config_error(e);
    }
    let dir = output_root(cli.out.as_deref(), cfg.out.as_deref()).join(cfg.experiment.name());
    let rec = match execute(&cfg, &dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("gclab: cannot write artifacts: {e}");
            return EXIT_CONFIG;
        }
    };
    for c in &rec.checks {
        println!("{}", line(c));
    }
    println!("record: {}", dir.join("record.json").display());
    match rec.status {
        Status::Pass => EXIT_OK,
        Status::Fail if cfg.assert => EXIT_ASSERT,
        Status::Fail => EXIT_OK,
        Status::Error => {
            eprintln!("gclab: {} failed: {}", cfg.experiment, rec.error.unwrap_or_default());
            EXIT_CONFIG
        }
    }
}

fn suite(cli: &Cli) -> i32 {
    if cli.config.is_some() {
        return config_error("`suite` runs registered configs and takes no --config");
    }
    let profile = cli.profile.unwrap_or(Profile::Full);
    let mut members = suite_members(profile);
    for (_, c) in members.iter_mut() {
        cli.apply(c);
        c.assert = true;
    }
    let root = output_root(cli.out.as_deref(), None);
    let summary = match run_suite(profile, &members, SuiteOptions { first_failure: cli.first_failure }, &root) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("gclab: cannot write artifacts: {e}");
            return EXIT_CONFIG;
        }
    };
    for e in &summary.entries {
        for c in &e.checks {
            println!("{}: {}", e.label, line(c));
        }
    }
    for c in &summary.checks {
        println!("suite: {}", line(c));
    }
    for (n, p) in summary.criteria() {
        println!("criterion {n:>2}: {}", if p { "pass" } else { "FAIL" });
    }
    println!("summary: {}", root.join("suite").join("summary.md").display());
    if summary.pass {
        EXIT_OK
    } else {
        EXIT_ASSERT
    }
}
