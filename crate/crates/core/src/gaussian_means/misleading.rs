//! The formal convexity argument with weights `e^{a(t)x²}` and its refutation.
//!
//! With `w = 1/a` the profile equation `32a³ + a'' − 2a'²/a = 0` becomes
//! `w w'' = 32`, so `w` is convex wherever it is positive.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::grid::{weighted_log_integral, Grid1D};
use crate::numerics::{d1_central6, rk4_step};
use crate::propagators::{counterexample_log, counterexample_modulus_sq, oracle_counterexample};

/// RK4 step for the solution itself.
pub const ODE_STEP: f64 = 1e-4;
const SHOOT_STEP: f64 = 1e-3;
const SHOOT_RANGE: (f64, f64) = (-10.0, 10.0);
const SHOOT_SAMPLES: usize = 400;
const MAX_BISECTIONS: usize = 100;
/// Target number of residual probes per sampled profile.
const RESIDUAL_PROBES: usize = 1000;

fn rhs(_t: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], 32.0 / y[0]]
}

/// Integrates `w w'' = 32` from `(w, w')(0)` over `[0, t_end]` (sign of `h` picks the direction).
/// Returns `None` if `w` stops being positive.
fn integrate_w(w0: [f64; 2], t_end: f64, h: f64) -> Option<Vec<[f64; 2]>> {
    let n = (t_end / h).abs().round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = w0;
    out.push(y);
    for k in 0..n {
        y = rk4_step(&rhs, k as f64 * h, &y, h);
        if !(y[0] > 1e-8) || !y[0].is_finite() {
            return None;
        }
        out.push(y);
    }
    Some(out)
}

/// Result of shooting for `a(0) = 1`, `a'(1) = 0` on the slope `σ = a'(0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootingOutcome {
    pub converged: bool,
    /// Slope with the smallest `|a'(1)|` among positive solutions.
    pub best_sigma: f64,
    pub best_terminal_slope: f64,
    /// Sign changes of `a'(1)` found over the scan.
    pub sign_changes: usize,
    pub bisection_steps: usize,
}

fn terminal_slope(sigma: f64) -> Option<f64> {
    // a'(0) = σ  ⇔  w'(0) = −σ
    let path = integrate_w([1.0, -sigma], 1.0, SHOOT_STEP)?;
    let [w, wp] = *path.last()?;
    Some(-wp / (w * w))
}

fn shoot() -> ShootingOutcome {
    let (lo, hi) = SHOOT_RANGE;
    let sigmas: Vec<f64> = (0..=SHOOT_SAMPLES).map(|k| lo + (hi - lo) * k as f64 / SHOOT_SAMPLES as f64).collect();
    let values: Vec<(f64, f64)> = sigmas.iter().filter_map(|&s| terminal_slope(s).map(|v| (s, v))).collect();
    let best = values.iter().copied().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap_or((f64::NAN, f64::NAN));
    let brackets: Vec<(f64, f64)> = values
        .windows(2)
        .filter(|p| p[0].1.signum() != p[1].1.signum() && (p[1].0 - p[0].0) < 1.5 * (hi - lo) / SHOOT_SAMPLES as f64)
        .map(|p| (p[0].0, p[1].0))
        .collect();
    let mut out = ShootingOutcome {
        converged: false,
        best_sigma: best.0,
        best_terminal_slope: best.1,
        sign_changes: brackets.len(),
        bisection_steps: 0,
    };
    if let Some(&(mut a, mut b)) = brackets.first() {
        let fa = terminal_slope(a).unwrap_or(f64::NAN);
        for step in 1..=MAX_BISECTIONS {
            let m = 0.5 * (a + b);
            let Some(fm) = terminal_slope(m) else { break };
            out.bisection_steps = step;
            if fm.abs() < 1e-12 {
                out.converged = true;
                out.best_sigma = m;
                out.best_terminal_slope = fm;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
    }
    out
}

/// `a_R(t) = R a(Rt)` on `[−1, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledSolution {
    pub r: f64,
    /// `a_R(1) = R a(R)`.
    pub value_at_one: f64,
    pub residual_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MisleadingOdeReport {
    /// Uniform samples on `[−1, 1]` with spacing [`ODE_STEP`].
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub residual_max: f64,
    pub min_a: f64,
    pub evenness_deviation: f64,
    /// `a'(1)` of the returned solution.
    pub terminal_slope: f64,
    /// Attempt at the stated boundary data `a'(1) = 0`.
    pub shooting: ShootingOutcome,
    pub scaled: Vec<ScaledSolution>,
}

/// `max |32a³ + a'' − 2a'²/a|` with `a''` from a 6th-order stencil on `a'`.
fn residual(a: &[f64], ap: &[f64], h: f64) -> f64 {
    let n = a.len();
    let stride = ((n - 7) / RESIDUAL_PROBES).max(1);
    (3..n - 3)
        .step_by(stride)
        .map(|k| {
            let w: [f64; 7] = ap[k - 3..=k + 3].try_into().expect("window");
            let app = d1_central6(w, h);
            (32.0 * a[k].powi(3) + app - 2.0 * ap[k] * ap[k] / a[k]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves the profile equation with `a(0) = 1` on `[−R, R]`.
///
/// The stated data `a(0) = 1`, `a'(1) = 0` admit no positive solution:
/// `w` convex with `w'(1) = 0` forces `w(0) ≥ 8`. The shooting attempt is
/// recorded in the report and the even solution `a'(0) = 0` is returned.
pub fn misleading_ode_solve(r_max: f64) -> Result<MisleadingOdeReport> {
    precondition(r_max >= 1.0, || format!("R = {r_max} must be at least 1"))?;
    let h = ODE_STEP;
    let forward = integrate_w([1.0, 0.0], r_max, h).ok_or_else(|| Error::Shooting("w left (0, ∞)".into()))?;
    let backward = integrate_w([1.0, 0.0], -r_max, -h).ok_or_else(|| Error::Shooting("w left (0, ∞)".into()))?;
    let m = forward.len() - 1;
    // index i ↦ t = (i − m)h on [−R, R]
    let mut a_full = Vec::with_capacity(2 * m + 1);
    let mut ap_full = Vec::with_capacity(2 * m + 1);
    for y in backward.iter().rev().chain(forward.iter().skip(1)) {
        a_full.push(1.0 / y[0]);
        ap_full.push(-y[1] / (y[0] * y[0]));
    }
    let evenness_deviation =
        (0..=m).map(|k| (a_full[m + k] - a_full[m - k]).abs()).fold(0.0, f64::max);

    let one = (1.0 / h).round() as usize;
    let range = m - one..=m + one;
    let t: Vec<f64> = range.clone().map(|i| (i as f64 - m as f64) * h).collect();
    let a = a_full[range.clone()].to_vec();
    let a_prime = ap_full[range].to_vec();
    let residual_max = residual(&a, &a_prime, h);
    let min_a = a.iter().copied().fold(f64::INFINITY, f64::min);

    let mut radii = vec![];
    let mut r = 1.0;
    while r <= r_max + 1e-12 {
        radii.push(r);
        r *= 2.0;
    }
    if (radii.last().copied().unwrap_or(0.0) - r_max).abs() > 1e-12 {
        radii.push(r_max);
    }
    let scaled = radii
        .into_iter()
        .map(|r| {
            // a_R(t) = R a(Rt) sampled at spacing h/R, t ∈ [−1, 1]
            let reach = (r / h).round() as usize;
            let idx = m - reach..=m + reach;
            let ar: Vec<f64> = a_full[idx.clone()].iter().map(|v| r * v).collect();
            let apr: Vec<f64> = ap_full[idx].iter().map(|v| r * r * v).collect();
            ScaledSolution { r, value_at_one: ar[ar.len() - 1], residual_max: residual(&ar, &apr, h / r) }
        })
        .collect();

    Ok(MisleadingOdeReport {
        terminal_slope: a_prime[a_prime.len() - 1],
        t,
        a,
        a_prime,
        residual_max,
        min_a,
        evenness_deviation,
        shooting: shoot(),
        scaled,
    })
}

/// One box size of the counterexample demonstration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowRow {
    pub half_width: f64,
    pub n_points: usize,
    /// `log ‖e^{Rx²}u(0)‖` truncated to the box.
    pub lhs_log_norm: f64,
    pub lhs_divergent: bool,
    /// `log ‖e^{ρx²}u(∓1)‖`.
    pub rhs_log_norms: (f64, f64),
    pub rhs_divergent: bool,
    /// `max |u(x,0)|² − e^{−x²/2}|`.
    pub modulus_deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub r: f64,
    pub rho: f64,
    pub rows: Vec<WindowRow>,
    /// `log N(L_{k+1}) − log N(L_k)` for the left side.
    pub lhs_log_growth: Vec<f64>,
    /// `(2R − 1/2) L_k² / 2`.
    pub predicted_log_growth: Vec<f64>,
    pub lhs_growth_ok: bool,
    /// Relative change of the right side between the two largest boxes.
    pub rhs_relative_change: f64,
    /// `log ‖e^{ρx²}u(±1)‖` on the whole line.
    pub rhs_closed_form_log_norm: f64,
    /// Relative error of the largest box against the whole-line value.
    pub rhs_closed_form_error: f64,
    /// `‖e^{Rx²}u(0)‖² > ‖e^{ρx²}u(−1)‖‖e^{ρx²}u(1)‖` on the largest box.
    pub inequality_violated: bool,
}

fn grid_for(l: f64) -> Result<Grid1D> {
    let n = ((2.0 * l / 0.02).ceil() as usize).next_power_of_two().max(16);
    Grid1D::new(n, l)
}

/// Truncated weighted norms of `u = (t − i)^{−1/2} e^{ix²/(4(t−i))}` on growing boxes.
///
/// `rho` defaults to `min(R a(R), 1/9)` from [`misleading_ode_solve`].
pub fn counterexample_demo(r: f64, half_widths: &[f64], rho: Option<f64>) -> Result<CounterexampleReport> {
    precondition(r >= 1.0, || format!("R = {r} must be at least 1"))?;
    precondition(half_widths.len() >= 2, || "need at least two box sizes".into())?;
    precondition(half_widths.windows(2).all(|p| p[1] > p[0]) && half_widths[0] > 0.0, || {
        "box sizes must be positive and strictly increasing".into()
    })?;
    let rho = match rho {
        Some(p) => p,
        None => {
            let ode = misleading_ode_solve(r)?;
            let ra = ode.scaled.last().map(|s| s.value_at_one).unwrap_or(f64::NAN);
            ra.min(1.0 / 9.0)
        }
    };
    if !(0.0..0.125).contains(&rho) {
        return Err(Error::Config(format!("rho = {rho} must lie in [0, 1/8); the right side diverges otherwise")));
    }

    let mut rows = Vec::with_capacity(half_widths.len());
    for &l in half_widths {
        let g = grid_for(l)?;
        let u0 = oracle_counterexample(0.0, &g)?;
        let modulus_deviation = g
            .nodes()
            .iter()
            .zip(u0.samples())
            .map(|(&x, v)| (v.norm_sqr() - counterexample_modulus_sq(x, 0.0)).abs())
            .fold(0.0, f64::max);
        // |u|² underflows long before e^{2Rx²} overflows, so work from ln|u|²
        let log_mod = |t: f64| -> Vec<f64> { g.nodes().iter().map(|&x| 2.0 * counterexample_log(x, t).re).collect() };
        let lhs = weighted_log_integral(&g, &log_mod(0.0), |x| 2.0 * r * x * x, |_| true)?;
        let rm = weighted_log_integral(&g, &log_mod(-1.0), |x| 2.0 * rho * x * x, |_| true)?;
        let rp = weighted_log_integral(&g, &log_mod(1.0), |x| 2.0 * rho * x * x, |_| true)?;
        rows.push(WindowRow {
            half_width: l,
            n_points: g.n_points(),
            lhs_log_norm: lhs.log_norm(),
            lhs_divergent: lhs.divergent,
            rhs_log_norms: (rm.log_norm(), rp.log_norm()),
            rhs_divergent: rm.divergent || rp.divergent,
            modulus_deviation,
        });
    }
    let lhs_log_growth: Vec<f64> = rows.windows(2).map(|p| p[1].lhs_log_norm - p[0].lhs_log_norm).collect();
    let predicted_log_growth: Vec<f64> =
        half_widths[..half_widths.len() - 1].iter().map(|l| (2.0 * r - 0.5) * l * l / 2.0).collect();
    let lhs_growth_ok = lhs_log_growth.iter().zip(&predicted_log_growth).all(|(g, p)| g >= p);
    let k = rows.len();
    let rhs_relative_change = ((rows[k - 1].rhs_log_norms.1 - rows[k - 2].rhs_log_norms.1).exp() - 1.0).abs();
    // ∫ e^{2ρx²} 2^{−1/2} e^{−x²/4} dx
    let rhs_closed_form_log_norm =
        0.5 * (-0.5 * 2f64.ln() + 0.5 * (std::f64::consts::PI / (0.25 - 2.0 * rho)).ln());
    let rhs_closed_form_error = ((rows[k - 1].rhs_log_norms.1 - rhs_closed_form_log_norm).exp() - 1.0).abs();
    let last = &rows[k - 1];
    let inequality_violated = 2.0 * last.lhs_log_norm > last.rhs_log_norms.0 + last.rhs_log_norms.1;
    Ok(CounterexampleReport {
        r,
        rho,
        rows,
        lhs_log_growth,
        predicted_log_growth,
        lhs_growth_ok,
        rhs_relative_change,
        rhs_closed_form_log_norm,
        rhs_closed_form_error,
        inequality_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_solution_solves_profile_equation() {
        let rep = misleading_ode_solve(4.0).unwrap();
        assert!(rep.residual_max <= 1e-8, "{}", rep.residual_max);
        assert!(rep.min_a > 0.0);
        assert_eq!(rep.a[rep.a.len() / 2], 1.0);
        assert!(rep.evenness_deviation <= 1e-14);
        for s in &rep.scaled {
            assert!(s.residual_max <= 1e-8, "R={}: {}", s.r, s.residual_max);
        }
        // R a(R) decreases
        assert!(rep.scaled.windows(2).all(|p| p[1].value_at_one < p[0].value_at_one));
    }

    #[test]
    fn stated_boundary_data_unreachable() {
        let rep = misleading_ode_solve(1.0).unwrap();
        assert!(!rep.shooting.converged);
        assert_eq!(rep.shooting.sign_changes, 0);
        assert!(rep.shooting.best_terminal_slope < 0.0);
        assert!(rep.terminal_slope < 0.0);
    }

    #[test]
    fn demo_left_diverges_right_converges() {
        let rep = counterexample_demo(1.0, &[10.0, 20.0, 40.0, 80.0], Some(1.0 / 9.0)).unwrap();
        assert!(rep.lhs_growth_ok);
        assert!(rep.lhs_log_growth.iter().all(|g| *g > 100.0));
        assert!(rep.rows.iter().all(|r| r.lhs_divergent));
        assert!(rep.rows[2..].iter().all(|r| !r.rhs_divergent));
        assert!(rep.rhs_relative_change <= 1e-8);
        assert!(rep.rhs_closed_form_error <= 1e-8);
        assert!(rep.inequality_violated);
        assert!(rep.rows.iter().all(|r| r.modulus_deviation <= 1e-12));
    }

    #[test]
    fn unweighted_right_side_is_plain_norm() {
        let rep = counterexample_demo(1.0, &[20.0, 40.0], Some(0.0)).unwrap();
        // ‖u(±1)‖² = 2^{−1/2} √(4π)
        let want = 0.5 * (2f64.powf(-0.5) * (4.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((rep.rows[1].rhs_log_norms.0 - want).abs() < 1e-12);
    }

    #[test]
    fn rho_at_threshold_is_misconfiguration() {
        assert!(matches!(counterexample_demo(1.0, &[10.0, 20.0], Some(0.125)), Err(Error::Config(_))));
        assert!(counterexample_demo(1.0, &[20.0, 10.0], Some(0.1)).is_err());
    }
}
