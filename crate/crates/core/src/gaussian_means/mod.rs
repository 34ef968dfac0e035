//! Gaussian means `H(t) = ‖e^{w}u(t)‖²`, their logarithmic convexity, and
//! the functionals built on them.

mod functionals;
mod interpolation;
mod misleading;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{weighted_l2_norm, WeightSpec};
use crate::propagators::Trajectory;

pub use functionals::{
    linear_weight_interior_bound, smoothing_functional, subexponential_persistence, LinearWeightReport,
    PersistenceReport, SmoothingReport,
};
pub use interpolation::{theorem1_interpolation, InterpolationReport};
pub use misleading::{
    counterexample_demo, misleading_ode_solve, CounterexampleReport, MisleadingOdeReport, ScaledSolution,
    ShootingOutcome, WindowRow,
};

/// Minimum number of time intervals in a trace.
pub const MIN_INTERVALS: usize = 16;

/// Constants of the abstract convexity lemma. The correction exponent is
/// `M₀ + M₁ + M₁² + M₂ + M₂²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexityBudget {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl ConvexityBudget {
    pub fn total(&self) -> f64 {
        self.m0 + self.m1 + self.m1 * self.m1 + self.m2 + self.m2 * self.m2
    }
}

/// Sampled `H`, `log H`, frequency and second differences of one trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityTrace {
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    pub log_h: Vec<f64>,
    pub divergent: Vec<bool>,
    /// `N(t_k) ≈ (log H)'/2` at interior nodes with finite neighbours.
    pub frequency: Vec<Option<f64>>,
    /// `Δ²log H / Δt²` at interior nodes with finite neighbours.
    pub second_diff: Vec<Option<f64>>,
    /// `H ≡ 0`.
    pub trivial: bool,
    pub budget: ConvexityBudget,
}

impl ConvexityTrace {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn with_budget(mut self, budget: ConvexityBudget) -> Self {
        self.budget = budget;
        self
    }

    fn usable(&self, k: usize) -> bool {
        !self.divergent[k] && self.log_h[k].is_finite()
    }

    /// Longest run of usable samples, as an inclusive index range.
    pub fn finite_window(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut start = None;
        for k in 0..=self.times.len() {
            let ok = k < self.times.len() && self.usable(k);
            match (ok, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    let run = (s, k - 1);
                    if best.is_none_or(|b| run.1 - run.0 > b.1 - b.0) {
                        best = Some(run);
                    }
                    start = None;
                }
                _ => {}
            }
        }
        best
    }

    /// `max_k [log H(t_k) − (1−θ)log H(t_a) − θ log H(t_b)]` over the interior of the finite window.
    pub fn interpolation_excess(&self) -> Option<f64> {
        let (a, b) = self.finite_window()?;
        if b < a + 2 {
            return None;
        }
        let (ta, tb) = (self.times[a], self.times[b]);
        (a + 1..b)
            .map(|k| {
                let th = (self.times[k] - ta) / (tb - ta);
                self.log_h[k] - (1.0 - th) * self.log_h[a] - th * self.log_h[b]
            })
            .reduce(f64::max)
    }
}

/// Builds the trace of `H(t) = ‖e^{w}u(t)‖²` along a trajectory.
///
/// The trajectory must be uniformly sampled with at least 16 intervals and
/// every field resolved up to transform roundoff. The budget defaults to `M₁ = ‖V‖_∞`.
pub fn trace_h(traj: &Trajectory, w: &WeightSpec) -> Result<ConvexityTrace> {
    w.validate()?;
    let times = traj.times();
    if times.len() < MIN_INTERVALS + 1 {
        return Err(Error::Precondition(format!(
            "trace needs at least {} samples, got {}",
            MIN_INTERVALS + 1,
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|p| ((p[1] - p[0]) - dt).abs() > 1e-9 * dt.max(1e-300) + 1e-14) {
        return Err(Error::Precondition("trace needs uniformly spaced times".into()));
    }
    let mut log_h = Vec::with_capacity(times.len());
    let mut divergent = Vec::with_capacity(times.len());
    for f in traj.fields() {
        let r = f.resolution();
        if !r.is_resolved_to_roundoff() {
            return Err(Error::UnderResolved(format!(
                "t={}: boundary ratio {:e}, spectral tail {:e}",
                f.time(),
                r.boundary_ratio,
                r.spectral_tail
            )));
        }
        let n = weighted_l2_norm(f, w)?;
        log_h.push(n.log_sq);
        divergent.push(n.divergent);
    }
    if divergent.iter().all(|&d| d) {
        return Err(Error::Divergent("every sample of H diverges".into()));
    }
    let trivial = log_h.iter().all(|&l| l == f64::NEG_INFINITY);
    let h = log_h.iter().map(|l| l.exp()).collect();
    let usable = |k: usize| !divergent[k] && log_h[k].is_finite();
    let n = times.len();
    let mut frequency = vec![None; n];
    let mut second_diff = vec![None; n];
    for k in 1..n - 1 {
        if usable(k - 1) && usable(k) && usable(k + 1) {
            frequency[k] = Some((log_h[k + 1] - log_h[k - 1]) / (4.0 * dt));
            second_diff[k] = Some((log_h[k + 1] - 2.0 * log_h[k] + log_h[k - 1]) / (dt * dt));
        }
    }
    Ok(ConvexityTrace {
        times,
        h,
        log_h,
        divergent,
        frequency,
        second_diff,
        trivial,
        budget: ConvexityBudget { m0: 0.0, m1: traj.potential().sup_bound(), m2: 0.0 },
    })
}

/// Outcome of [`check_log_convexity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityCheck {
    pub pass: bool,
    /// Smallest `Δ²log H/Δt²` and where it occurs.
    pub worst_second_diff: f64,
    pub worst_second_diff_time: f64,
    /// Largest `log H(t) − chord(t) − corr(t)` and where it occurs.
    pub worst_interpolation_excess: f64,
    pub worst_interpolation_time: f64,
    /// Inclusive index range the checks ran on.
    pub window: (usize, usize),
}

/// Checks `Δ²log H/Δt² ≥ −budget − slack` and
/// `log H(t) ≤ chord(t) + budget·θ(1−θ)/2 + slack` on the maximal finite window.
pub fn check_log_convexity(trace: &ConvexityTrace, slack: f64) -> Result<ConvexityCheck> {
    let (a, b) = trace
        .finite_window()
        .filter(|(a, b)| b >= &(a + 2))
        .ok_or_else(|| Error::Divergent("no finite window of three or more samples".into()))?;
    let budget = trace.budget.total();
    let (mut worst_d2, mut worst_d2_t) = (f64::INFINITY, f64::NAN);
    for k in a + 1..b {
        if let Some(d2) = trace.second_diff[k] {
            if d2 < worst_d2 {
                worst_d2 = d2;
                worst_d2_t = trace.times[k];
            }
        }
    }
    let (ta, tb) = (trace.times[a], trace.times[b]);
    let (mut worst_ex, mut worst_ex_t) = (f64::NEG_INFINITY, f64::NAN);
    for k in a + 1..b {
        let th = (trace.times[k] - ta) / (tb - ta);
        let chord = (1.0 - th) * trace.log_h[a] + th * trace.log_h[b];
        let corr = budget * th * (1.0 - th) / 2.0 * (tb - ta).powi(2);
        let ex = trace.log_h[k] - chord - corr;
        if ex > worst_ex {
            worst_ex = ex;
            worst_ex_t = trace.times[k];
        }
    }
    let pass = worst_d2 >= -budget - slack && worst_ex <= slack;
    Ok(ConvexityCheck {
        pass,
        worst_second_diff: worst_d2,
        worst_second_diff_time: worst_d2_t,
        worst_interpolation_excess: worst_ex,
        worst_interpolation_time: worst_ex_t,
        window: (a, b),
    })
}

/// Settings for [`amplitude_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeScanConfig {
    /// Initial datum `e^{−κx²}`.
    pub kappa: f64,
    pub n_points: usize,
    pub half_width: f64,
    pub gamma: f64,
    pub dt: f64,
    pub intervals: usize,
    pub slack: f64,
}

impl Default for AmplitudeScanConfig {
    fn default() -> Self {
        // sech² scattering leaves e^{−π|x|/4} tails at t = 1, so the box must reach past 30;
        // a small γ keeps the roundoff floor times e^{2γL²} negligible
        Self { kappa: 1.0, n_points: 512, half_width: 40.0, gamma: 0.01, dt: 1e-3, intervals: 100, slack: 1e-5 }
    }
}

/// One amplitude of [`amplitude_scan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub amplitude: f64,
    /// Largest interior `log H − chord` along the perturbed flow.
    pub excess: f64,
    /// Largest interior gap between the perturbed and free `log H − chord` profiles.
    pub excess_over_free: f64,
    pub check: ConvexityCheck,
}

/// Gaussian `e^{−κx²}` under `∂_t u = i(∂²u + A sech²(x) u)` for each amplitude `A`;
/// the convexity deficit against the free flow should vanish linearly in `A`.
pub fn amplitude_scan(amplitudes: &[f64], cfg: &AmplitudeScanConfig) -> Result<Vec<AmplitudeRow>> {
    use crate::grid::{Grid1D, WaveField};
    use crate::propagators::{split_step_evolve_strided, PotentialSpec};
    use num_complex::Complex64;
    use rayon::prelude::*;

    let grid = Grid1D::new(cfg.n_points, cfg.half_width)?;
    let u0 = WaveField::from_fn(grid, 0.0, |x| Complex64::new((-cfg.kappa * x * x).exp(), 0.0))?;
    let steps = (1.0 / cfg.dt).round() as usize;
    if !steps.is_multiple_of(cfg.intervals) {
        return Err(Error::Precondition("intervals must divide the step count".into()));
    }
    let w = WeightSpec::Gaussian { gamma: cfg.gamma };
    let run = |a: f64| -> Result<ConvexityTrace> {
        let v = if a == 0.0 { PotentialSpec::zero() } else { PotentialSpec::sech2(a) };
        let tr = split_step_evolve_strided(&u0, &v, Complex64::new(0.0, 1.0), 1.0, cfg.dt, steps / cfg.intervals)?;
        trace_h(&tr, &w)
    };
    let deficit = |tr: &ConvexityTrace| -> Vec<f64> {
        let n = tr.log_h.len();
        (0..n)
            .map(|k| {
                let th = tr.times[k];
                tr.log_h[k] - (1.0 - th) * tr.log_h[0] - th * tr.log_h[n - 1]
            })
            .collect()
    };
    let free = deficit(&run(0.0)?);
    amplitudes
        .par_iter()
        .map(|&a| {
            let tr = run(a)?;
            let d = deficit(&tr);
            let n = d.len();
            let excess = d[1..n - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let excess_over_free =
                d[1..n - 1].iter().zip(&free[1..n - 1]).map(|(p, q)| p - q).fold(f64::NEG_INFINITY, f64::max);
            let check = check_log_convexity(&tr, cfg.slack)?;
            Ok(AmplitudeRow { amplitude: a, excess, excess_over_free, check })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, WaveField};
    use crate::propagators::{GaussianSampler, PotentialSpec};
    use num_complex::Complex64;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn free_trace(gamma: f64, k: usize) -> ConvexityTrace {
        let g = Grid1D::new(2048, 60.0).unwrap();
        let s = GaussianSampler { kappa: Complex64::new(1.0, 0.0), z: I, grid: g };
        let tr = Trajectory::sample(&s, &Trajectory::uniform_times(k), I, PotentialSpec::zero()).unwrap();
        trace_h(&tr, &WeightSpec::Gaussian { gamma }).unwrap()
    }

    #[test]
    fn free_gaussian_h_matches_integral() {
        let tr = free_trace(0.05, 100);
        // H(t) = (1+16t²)^{-1/2} √(π / (2/(1+16t²) − 0.1))
        for (k, &t) in tr.times.iter().enumerate() {
            let q = 1.0 + 16.0 * t * t;
            let want = q.powf(-0.5) * (std::f64::consts::PI / (2.0 / q - 0.1)).sqrt();
            assert!((tr.h[k] / want - 1.0).abs() < 1e-12, "t={t}");
        }
        assert!((tr.h[0] - (std::f64::consts::PI / 1.9).sqrt()).abs() < 1e-12);
        let c = check_log_convexity(&tr, 1e-5).unwrap();
        assert!(c.pass, "{c:?}");
        // N nondecreasing
        let n: Vec<f64> = tr.frequency.iter().flatten().copied().collect();
        assert!(n.windows(2).all(|w| w[1] >= w[0] - 1e-4));
    }

    #[test]
    fn zero_field_is_trivial_and_has_no_window() {
        let g = Grid1D::new(64, 8.0).unwrap();
        let fields = Trajectory::uniform_times(16).iter().map(|&t| WaveField::zeros(g, t)).collect();
        let tr = Trajectory::new(fields, I, PotentialSpec::zero(), 1.0 / 16.0).unwrap();
        let trace = trace_h(&tr, &WeightSpec::Gaussian { gamma: 0.1 }).unwrap();
        assert!(trace.trivial);
        assert!(check_log_convexity(&trace, 0.0).is_err());
    }

    #[test]
    fn constant_field_has_zero_second_difference() {
        let g = Grid1D::new(256, 12.0).unwrap();
        let fields = Trajectory::uniform_times(20)
            .iter()
            .map(|&t| WaveField::from_fn(g, t, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap())
            .collect();
        let tr = Trajectory::new(fields, I, PotentialSpec::zero(), 0.05).unwrap();
        let trace = trace_h(&tr, &WeightSpec::Gaussian { gamma: 0.1 }).unwrap();
        assert!(trace.second_diff.iter().flatten().all(|d| d.abs() < 1e-9));
        assert!(check_log_convexity(&trace, 1e-9).unwrap().pass);
    }

    #[test]
    fn concave_trace_fails_with_location() {
        let mut tr = free_trace(0.05, 20);
        let n = tr.log_h.len();
        for k in 0..n {
            let t = tr.times[k];
            tr.log_h[k] = -(t - 0.5).powi(2);
        }
        for k in 1..n - 1 {
            tr.second_diff[k] = Some(-2.0);
        }
        let c = check_log_convexity(&tr, 1e-5).unwrap();
        assert!(!c.pass);
        assert!((c.worst_interpolation_time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn amplitude_scan_deficit_shrinks_with_amplitude() {
        let rows = amplitude_scan(&[0.2, 0.1, 0.05], &AmplitudeScanConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.check.pass), "{rows:?}");
        assert!(rows.windows(2).all(|p| p[1].excess < p[0].excess));
        assert!(rows.windows(2).all(|p| p[1].excess_over_free < p[0].excess_over_free));
        assert!(rows[2].excess <= 1e-4);
    }

    #[test]
    fn too_few_samples_rejected() {
        let g = Grid1D::new(256, 12.0).unwrap();
        let s = GaussianSampler { kappa: Complex64::new(1.0, 0.0), z: I, grid: g };
        let tr = Trajectory::sample(&s, &Trajectory::uniform_times(8), I, PotentialSpec::zero()).unwrap();
        assert!(trace_h(&tr, &WeightSpec::Gaussian { gamma: 0.05 }).is_err());
    }
}
