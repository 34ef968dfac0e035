use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::propagators::PotentialSpec;

/// Experiment ids, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Evolve,
    Convexity,
    Interpolate,
    Smoothing,
    AppelCheck,
    Commutator,
    Carleman,
    L110,
    Annulus,
    Threshold,
    HardyPipeline,
    Airy,
    OdeA,
    Counterexample,
    Suite,
}

impl Experiment {
    pub const ALL: [Experiment; 15] = [
        Experiment::Evolve,
        Experiment::Convexity,
        Experiment::Interpolate,
        Experiment::Smoothing,
        Experiment::AppelCheck,
        Experiment::Commutator,
        Experiment::Carleman,
        Experiment::L110,
        Experiment::Annulus,
        Experiment::Threshold,
        Experiment::HardyPipeline,
        Experiment::Airy,
        Experiment::OdeA,
        Experiment::Counterexample,
        Experiment::Suite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::Convexity => "convexity",
            Experiment::Interpolate => "interpolate",
            Experiment::Smoothing => "smoothing",
            Experiment::AppelCheck => "appel-check",
            Experiment::Commutator => "commutator",
            Experiment::Carleman => "carleman",
            Experiment::L110 => "l110",
            Experiment::Annulus => "annulus",
            Experiment::Threshold => "threshold",
            Experiment::HardyPipeline => "hardy-pipeline",
            Experiment::Airy => "airy",
            Experiment::OdeA => "ode-a",
            Experiment::Counterexample => "counterexample",
            Experiment::Suite => "suite",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Sampling step on `[0, 1]`; `K = 1/dt` intervals.
    pub dt: f64,
    /// Split-step size for numerically evolved runs.
    pub step: f64,
    /// Heat-flow time for the weight-loss check.
    pub heat: f64,
}

impl TimeConfig {
    pub fn intervals(&self) -> Result<usize> {
        let k = 1.0 / self.dt;
        let r = k.round();
        if !(self.dt > 0.0 && self.dt <= 1.0) || (k - r).abs() > 1e-9 * k {
            return Err(Error::Config(format!("time.dt = {} must be 1/K for a whole K ≥ 1", self.dt)));
        }
        Ok(r as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRule {
    /// `μ = (1+ε)^{−3}γR²`.
    Standard,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub r: f64,
    pub eps: f64,
    pub mu_rule: MuRule,
    /// `[a, b]` for `z = a + ib`.
    pub z: [f64; 2],
    pub s: f64,
    pub delta: f64,
    pub m: f64,
    pub rho: f64,
    pub lambda: f64,
    /// `(a, exponent)` of the sub-exponential tail `e^{(a/4)|x|^exponent}`.
    pub decay: [f64; 2],
}

impl PhysicsConfig {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z[0], self.z[1])
    }

    pub fn mu(&self) -> f64 {
        match self.mu_rule {
            MuRule::Standard => self.gamma * self.r * self.r / (1.0 + self.eps).powi(3),
            MuRule::Fixed(mu) => mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFamily {
    Zero,
    Sech2,
    Bump,
    Const,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: PotentialFamily,
    pub amplitude: f64,
    pub radius: f64,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        let a = self.amplitude;
        if !a.is_finite() {
            return Err(Error::Config("potential.amplitude must be finite".into()));
        }
        Ok(match self.family {
            PotentialFamily::Zero => PotentialSpec::zero(),
            PotentialFamily::Sech2 => PotentialSpec::sech2(a),
            PotentialFamily::Bump => {
                if !(self.radius > 0.0) {
                    return Err(Error::Config(format!("potential.radius = {} must be positive", self.radius)));
                }
                PotentialSpec::compact_bump(a, self.radius)
            }
            PotentialFamily::Const => PotentialSpec::constant(Complex64::new(a, 0.0)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub radii: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub gammas: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub probes: Vec<f64>,
}

/// Everything one run needs. Every key is required once defaults are merged in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub assert: bool,
    /// Turns a non-positive `sup E` into a failed check (threshold only).
    pub assert_positive: bool,
    /// `I1` … `I4` or `all`.
    pub identity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub physics: PhysicsConfig,
    pub potential: PotentialConfig,
    pub scan: ScanConfig,
}

fn radii_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

impl RunConfig {
    /// Registered defaults of an experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = RunConfig {
            experiment,
            assert: false,
            assert_positive: false,
            identity: "all".into(),
            out: None,
            grid: GridConfig { n_points: 1024, half_width: 30.0 },
            time: TimeConfig { dt: 0.01, step: 1e-3, heat: 0.25 },
            physics: PhysicsConfig {
                gamma: 0.05,
                alpha: 4.0,
                beta: 6.0,
                kappa: 1.0,
                r: 8.0,
                eps: 0.1,
                mu_rule: MuRule::Standard,
                z: [0.0, 1.0],
                s: 0.5,
                delta: 0.1,
                m: 20.0,
                rho: 1.0 / 9.0,
                lambda: 1.0,
                decay: [0.1, 1.5],
            },
            potential: PotentialConfig { family: PotentialFamily::Zero, amplitude: 0.0, radius: 1.0 },
            scan: ScanConfig {
                radii: vec![8.0, 16.0, 32.0],
                amplitudes: vec![],
                gammas: vec![],
                half_widths: vec![],
                probes: vec![],
            },
        };
        match experiment {
            Experiment::Evolve => {
                c.physics.gamma = 0.5;
                c.potential = PotentialConfig { family: PotentialFamily::Sech2, amplitude: 0.5, radius: 1.0 };
            }
            Experiment::Convexity => {
                c.grid = GridConfig { n_points: 2048, half_width: 60.0 };
                c.scan.amplitudes = vec![0.2, 0.1, 0.05];
            }
            Experiment::Interpolate => {
                c.grid = GridConfig { n_points: 2048, half_width: 60.0 };
                c.physics.kappa = 0.5;
            }
            Experiment::Smoothing => {
                c.grid = GridConfig { n_points: 2048, half_width: 80.0 };
                c.time.dt = 1.0 / 64.0;
                c.physics.gamma = 0.02;
                c.scan.probes = vec![-3.0, -1.0, 0.0, 0.5, 2.0, 4.0];
            }
            Experiment::AppelCheck => {
                c.physics.gamma = 0.02;
                c.physics.z = [0.1, 1.0];
                c.time.dt = 1e-3;
                c.scan.probes = vec![0.0, 0.25, 0.5, 1.0];
            }
            Experiment::Carleman => {
                c.physics.gamma = 0.6;
                c.grid = GridConfig { n_points: 2048, half_width: 20.0 };
                c.time.dt = 1.0 / 400.0;
            }
            Experiment::L110 => {
                c.grid.n_points = 256;
                c.time.dt = 1.0 / 400.0;
            }
            Experiment::Annulus => {
                c.time.dt = 1.0 / 400.0;
                c.scan.radii = radii_grid(4.0, 12.0, 0.5);
            }
            Experiment::Threshold => {
                c.physics.gamma = 0.6;
                c.scan.gammas = (0..=1000).map(|k| 0.3 + k as f64 * 4e-4 + 1.7e-4).collect();
            }
            Experiment::HardyPipeline => {
                c.grid = GridConfig { n_points: 4096, half_width: 96.0 };
                c.time.dt = 1.0 / 2000.0;
            }
            Experiment::OdeA => {
                c.physics.r = 4.0;
                c.scan.radii = vec![2.0, 4.0];
            }
            Experiment::Counterexample => {
                c.physics.r = 1.0;
                c.scan.half_widths = vec![10.0, 20.0, 40.0];
            }
            Experiment::Airy => {
                c.grid = GridConfig { n_points: 2048, half_width: 60.0 };
            }
            Experiment::Commutator | Experiment::Suite => {}
        }
        c
    }

    /// Parses a TOML document on top of the experiment's defaults. `fallback`
    /// names the experiment when the document does not.
    pub fn from_toml_str(text: &str, fallback: Option<Experiment>) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let named = match user.get("experiment") {
            Some(v) => Some(
                Experiment::deserialize(v.clone())
                    .map_err(|e| Error::Config(format!("experiment: {}", e.message())))?,
            ),
            None => None,
        };
        let experiment = match (named, fallback) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config is for `{a}` but `{b}` was requested")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("config does not name an experiment".into())),
        };
        let base = toml::Table::try_from(RunConfig::defaults(experiment))
            .map_err(|e| Error::Config(format!("defaults: {e}")))?;
        let merged = merge(base, user);
        let cfg: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, fallback: Option<Experiment>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, fallback)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.n_points, self.grid.half_width).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every parameter the experiment reads.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let p = &self.physics;
        let all = [
            p.gamma, p.alpha, p.beta, p.kappa, p.r, p.eps, p.z[0], p.z[1], p.s, p.delta, p.m, p.rho, p.lambda,
            p.decay[0], p.decay[1], self.time.dt, self.time.step, self.time.heat, self.grid.half_width,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all numeric parameters must be finite".into());
        }
        if let MuRule::Fixed(mu) = p.mu_rule {
            if !(mu > 0.0 && mu.is_finite()) {
                return bad(format!("mu = {mu} must be positive"));
            }
        }
        if p.z[0] < 0.0 {
            return bad(format!("Re z = {} < 0 is ill-posed forward", p.z[0]));
        }
        let scan_ok = [&self.scan.radii, &self.scan.amplitudes, &self.scan.gammas, &self.scan.half_widths, &self.scan.probes]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !scan_ok {
            return bad("scan lists must be finite".into());
        }
        let need_grid = !matches!(
            self.experiment,
            Experiment::Commutator | Experiment::Threshold | Experiment::OdeA | Experiment::Counterexample | Experiment::Suite
        );
        if need_grid {
            self.grid()?;
        }
        let need_k = matches!(
            self.experiment,
            Experiment::Convexity
                | Experiment::Smoothing
                | Experiment::Carleman
                | Experiment::L110
                | Experiment::Annulus
                | Experiment::HardyPipeline
        );
        if need_k {
            let k = self.time.intervals()?;
            if k < crate::gaussian_means::MIN_INTERVALS {
                return bad(format!(
                    "time.dt = {} gives K = {k} < {} intervals",
                    self.time.dt,
                    crate::gaussian_means::MIN_INTERVALS
                ));
            }
        }
        self.potential.build()?;
        if self.assert_positive && self.experiment != Experiment::Threshold {
            return bad("assert_positive only applies to `threshold`".into());
        }
        if matches!(p.mu_rule, MuRule::Fixed(_)) && self.experiment != Experiment::Carleman {
            return bad("a fixed mu only applies to `carleman`".into());
        }
        match self.experiment {
            Experiment::Evolve => {
                if !(self.time.dt > 0.0 && self.time.dt <= crate::propagators::MAX_DT) {
                    return bad(format!("time.dt = {} outside (0, 1e-2]", self.time.dt));
                }
                if !(p.kappa > 0.0 && p.gamma > 0.0 && self.time.heat >= 0.0) {
                    return bad("evolve needs kappa > 0, gamma > 0 and time.heat ≥ 0".into());
                }
            }
            Experiment::Convexity => {
                if !(p.kappa > 0.0 && p.gamma >= 0.0) {
                    return bad("convexity needs kappa > 0 and gamma ≥ 0".into());
                }
                if self.potential.family != PotentialFamily::Zero
                    && !(self.time.step > 0.0 && self.time.step <= crate::propagators::MAX_DT)
                {
                    return bad(format!("time.step = {} outside (0, 1e-2]", self.time.step));
                }
            }
            Experiment::Interpolate => {
                if !(p.alpha > 0.0 && p.beta > 0.0 && p.kappa > 0.0 && p.s > 0.0 && p.s < 1.0) {
                    return bad("interpolate needs alpha, beta, kappa > 0 and s in (0, 1)".into());
                }
            }
            Experiment::Smoothing => {
                if !(p.gamma > 0.0 && p.kappa > 0.0 && p.decay[0] > 0.0 && p.decay[1] > 1.0 && p.decay[1] <= 2.0) {
                    return bad("smoothing needs gamma, kappa > 0 and decay = [a > 0, exponent in (1, 2]]".into());
                }
            }
            Experiment::AppelCheck => {
                if !(p.alpha > 0.0 && p.beta > 0.0 && p.gamma >= 0.0 && p.kappa > 0.0) {
                    return bad("appel-check needs alpha, beta, kappa > 0 and gamma ≥ 0".into());
                }
                if !(self.time.dt > 0.0 && self.time.dt <= 1e-3) {
                    return bad(format!("time.dt = {} outside (0, 1e-3] for the residual stencil", self.time.dt));
                }
                if self.scan.probes.iter().any(|t| !(0.0..=1.0).contains(t)) {
                    return bad("appel-check probes must lie in [0, 1]".into());
                }
            }
            Experiment::Commutator => {
                let known = self.identity == "all" || crate::weyl::IDENTITIES.contains(&self.identity.as_str());
                if !known {
                    return bad(format!("identity `{}` is not one of I1, I2, I3, I4, all", self.identity));
                }
            }
            Experiment::Carleman | Experiment::L110 => {
                if !(p.gamma > 0.0 && p.eps > 0.0) || self.scan.radii.is_empty() || self.scan.radii.iter().any(|r| *r < 4.0) {
                    return bad("carleman benches need gamma, eps > 0 and radii ≥ 4".into());
                }
            }
            Experiment::Annulus => {
                if self.scan.radii.len() < 5 || self.scan.radii.windows(2).any(|w| w[1] <= w[0]) || self.scan.radii[0] <= 0.0 {
                    return bad("annulus needs at least five increasing positive radii".into());
                }
                if self.scan.radii.last().copied().unwrap_or(0.0) + 1.0 > self.grid.half_width {
                    return bad("largest annulus must fit inside the box".into());
                }
            }
            Experiment::Threshold => {
                if !(p.gamma > 0.0) || self.scan.gammas.iter().any(|g| !(*g > 0.0)) {
                    return bad("threshold needs positive gammas".into());
                }
            }
            Experiment::HardyPipeline => {
                if !(p.gamma > 0.0 && p.eps > 0.0 && p.delta > 0.0 && p.m > 0.0 && p.r >= 1.0) {
                    return bad("hardy-pipeline needs gamma, eps, delta, m > 0 and R ≥ 1".into());
                }
                if 4.0 * p.m >= self.grid.half_width {
                    return bad(format!("cut-off 2M = {} at the doubled M must stay inside L = {}", 4.0 * p.m, self.grid.half_width));
                }
                if self.scan.radii.len() < 2 {
                    return bad("hardy-pipeline needs at least two radii for the growth fit".into());
                }
            }
            Experiment::OdeA => {
                if !(p.r >= 1.0) || self.scan.radii.iter().any(|r| !(*r >= 1.0 && *r <= p.r)) {
                    return bad("ode-a needs R ≥ 1 and scaled radii in [1, R]".into());
                }
            }
            Experiment::Counterexample => {
                if !(p.r >= 1.0) {
                    return bad(format!("counterexample needs R ≥ 1, got {}", p.r));
                }
                if !(p.rho >= 0.0 && p.rho < 0.125) {
                    return bad(format!("rho = {} must lie in [0, 1/8)", p.rho));
                }
                let h = &self.scan.half_widths;
                if h.len() < 2 || h.windows(2).any(|w| w[1] <= w[0]) || h[0] <= 0.0 {
                    return bad("counterexample needs two or more increasing box sizes".into());
                }
            }
            Experiment::Airy | Experiment::Suite => {}
        }
        Ok(())
    }
}

/// Recursive table merge; `over` wins on scalar and array keys.
fn merge(mut base: toml::Table, over: toml::Table) -> toml::Table {
    for (k, v) in over {
        match (base.remove(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                base.insert(k, toml::Value::Table(merge(b, o)));
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
    base
}
