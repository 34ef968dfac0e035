use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::grid::{spectral_derivative, weighted_integral, weighted_l2_norm, WaveField, WeightSpec};
use crate::numerics::simpson;
use crate::propagators::Trajectory;

/// Minimum number of time intervals for the smoothing functional.
pub const SMOOTHING_MIN_INTERVALS: usize = 64;
/// `ε₀` surrogate: largest admissible `‖V‖_{L¹_t L^∞_x}` for the linear-weight bound.
pub const LINEAR_WEIGHT_POTENTIAL_LIMIT: f64 = 0.1;
/// Cut-off radius `C` of the persistence tail integral.
pub const PERSISTENCE_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothingReport {
    /// `‖√(t(1−t)) e^{w} ∂_x u‖_{L²(dx dt)}`.
    pub value: f64,
    /// `‖e^{w}u(0)‖ + ‖e^{w}u(1)‖`.
    pub endpoint_sum: f64,
    pub ratio: f64,
    pub divergent: bool,
}

/// `‖e^{w}∂_x u‖²` computed as `‖∂_x(e^{w}u) − w' e^{w}u‖²`.
///
/// Differentiating the weighted field keeps the transform's roundoff at the
/// scale of the weighted solution; differentiating `u` and weighting after
/// would amplify it by `e^{w}` in the tails.
fn conjugated_gradient_sq(u: &WaveField, w: &WeightSpec) -> Result<(f64, bool)> {
    let t = u.time();
    let (e, de) = (w.exponent_at(t), w.exponent_derivative_at(t));
    let f = u.map_with_x(|x, v| {
        let m = v.norm();
        if m == 0.0 {
            v
        } else {
            v / m * (e(x) + m.ln()).exp()
        }
    });
    if !f.is_finite() {
        return Ok((f64::INFINITY, true));
    }
    let boundary = weighted_integral(&f, |_| 0.0, |_| true)?.divergent;
    let df = spectral_derivative(&f, 1)?.field;
    let h = u.grid().spacing();
    let sum: f64 = df
        .samples()
        .iter()
        .zip(f.samples())
        .zip(u.grid().nodes())
        .map(|((d, v), x)| (d - v * de(x)).norm_sqr())
        .sum();
    Ok((sum * h, boundary))
}

/// Space-time weighted gradient norm; Simpson in `t` for an even number of intervals.
pub fn smoothing_functional(traj: &Trajectory, w: &WeightSpec) -> Result<SmoothingReport> {
    w.validate()?;
    let n = traj.fields().len();
    precondition(n > SMOOTHING_MIN_INTERVALS, || {
        format!("smoothing functional needs at least {} time intervals", SMOOTHING_MIN_INTERVALS)
    })?;
    let mut divergent = false;
    let mut integrand = Vec::with_capacity(n);
    for f in traj.fields() {
        let t = f.time();
        let (g, div) = conjugated_gradient_sq(f, w)?;
        divergent |= div;
        integrand.push(t * (1.0 - t) * g);
    }
    let times = traj.times();
    let dt = times[1] - times[0];
    precondition(times.windows(2).all(|p| ((p[1] - p[0]) - dt).abs() <= 1e-9 * dt), || {
        "smoothing functional needs uniformly spaced times".into()
    })?;
    let value = simpson(&integrand, dt).sqrt();
    let n0 = weighted_l2_norm(traj.first(), w)?;
    let n1 = weighted_l2_norm(traj.last(), w)?;
    divergent |= n0.divergent || n1.divergent;
    let endpoint_sum = n0.norm() + n1.norm();
    let ratio = if endpoint_sum > 0.0 { value / endpoint_sum } else { 0.0 };
    Ok(SmoothingReport { value, endpoint_sum, ratio, divergent })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearWeightReport {
    /// `sup_t ‖e^{λx}u(t)‖ / (‖e^{λx}u(0)‖ + ‖e^{λx}u(1)‖)`.
    pub constant: f64,
    pub sup_time: f64,
    pub divergent: bool,
}

/// Interior control of linear exponential weights by the endpoint values.
pub fn linear_weight_interior_bound(traj: &Trajectory, lambda: f64) -> Result<LinearWeightReport> {
    let v_size = traj.potential().tail_profile(traj.grid(), &traj.times(), &[-1.0])[0];
    precondition(v_size <= LINEAR_WEIGHT_POTENTIAL_LIMIT, || {
        format!("‖V‖_{{L¹L^∞}} = {v_size} exceeds {LINEAR_WEIGHT_POTENTIAL_LIMIT}")
    })?;
    let w = WeightSpec::Linear { lambda };
    let norms = traj.fields().iter().map(|f| weighted_l2_norm(f, &w)).collect::<Result<Vec<_>>>()?;
    let divergent = norms.iter().any(|n| n.divergent);
    let ends = norms[0].norm() + norms[norms.len() - 1].norm();
    let (mut sup, mut sup_time) = (0.0, 0.0);
    for (n, f) in norms.iter().zip(traj.fields()) {
        if n.norm() > sup {
            sup = n.norm();
            sup_time = f.time();
        }
    }
    let constant = if ends > 0.0 { sup / ends } else { 0.0 };
    Ok(LinearWeightReport { constant, sup_time, divergent })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceReport {
    /// `sup_{interior t} ∫_{|x|>C} e^{b|x|^α}|u|²` with `b = a/4`, `C = 4`.
    pub sup_tail: f64,
    pub sup_time: f64,
    pub endpoint_tails: (f64, f64),
    pub divergent: bool,
}

/// Sub-exponential decay persistence: the weighted tail beyond `|x| = 4`.
pub fn subexponential_persistence(traj: &Trajectory, a: f64, alpha_exp: f64) -> Result<PersistenceReport> {
    precondition(a > 0.0, || format!("a = {a} must be positive"))?;
    precondition(alpha_exp > 1.0 && alpha_exp <= 2.0, || format!("exponent {alpha_exp} outside (1, 2]"))?;
    let b = a / 4.0;
    let tails = traj
        .fields()
        .iter()
        .map(|f| {
            // each node stands for the cell [x − h/2, x + h/2]; weight by the part beyond C
            let h = f.grid().spacing();
            let frac = move |x: f64| ((x.abs() + 0.5 * h - PERSISTENCE_RADIUS) / h).clamp(0.0, 1.0);
            weighted_integral(f, |x| b * x.abs().powf(alpha_exp) + frac(x).ln(), |x| frac(x) > 0.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let divergent = tails.iter().any(|t| t.divergent);
    let n = tails.len();
    let (mut sup, mut sup_time) = (0.0, f64::NAN);
    for k in 1..n.saturating_sub(1) {
        let v = tails[k].squared();
        if v >= sup {
            sup = v;
            sup_time = traj.fields()[k].time();
        }
    }
    Ok(PersistenceReport {
        sup_tail: sup,
        sup_time,
        endpoint_tails: (tails[0].squared(), tails[n - 1].squared()),
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::propagators::{GaussianSampler, PotentialSpec};
    use num_complex::Complex64;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn gaussian_traj(kappa: f64, n: usize, l: f64, k: usize) -> Trajectory {
        let g = Grid1D::new(n, l).unwrap();
        let s = GaussianSampler { kappa: Complex64::new(kappa, 0.0), z: I, grid: g };
        Trajectory::sample(&s, &Trajectory::uniform_times(k), I, PotentialSpec::zero()).unwrap()
    }

    fn zero_traj(k: usize) -> Trajectory {
        let g = Grid1D::new(64, 10.0).unwrap();
        let fields = Trajectory::uniform_times(k).iter().map(|&t| WaveField::zeros(g, t)).collect();
        Trajectory::new(fields, I, PotentialSpec::zero(), 1.0 / k as f64).unwrap()
    }

    #[test]
    fn smoothing_zero_and_refinement() {
        let w = WeightSpec::Gaussian { gamma: 0.05 };
        assert_eq!(smoothing_functional(&zero_traj(64), &w).unwrap().value, 0.0);
        let a = smoothing_functional(&gaussian_traj(1.0, 2048, 60.0, 64), &w).unwrap();
        let b = smoothing_functional(&gaussian_traj(1.0, 2048, 60.0, 128), &w).unwrap();
        assert!(!a.divergent && a.value.is_finite());
        assert!((a.value / b.value - 1.0).abs() < 1e-4, "{} {}", a.value, b.value);
        assert!(smoothing_functional(&gaussian_traj(1.0, 256, 20.0, 32), &w).is_err());
    }

    #[test]
    fn smoothing_ratio_bounded_over_family() {
        let w = WeightSpec::Gaussian { gamma: 0.02 };
        for kappa in [0.5, 1.0, 2.0] {
            let r = smoothing_functional(&gaussian_traj(kappa, 2048, 80.0, 64), &w).unwrap();
            assert!(!r.divergent && r.ratio <= 10.0, "kappa={kappa}: {r:?}");
        }
    }

    #[test]
    fn linear_weight_constants() {
        let r0 = linear_weight_interior_bound(&gaussian_traj(1.0, 2048, 60.0, 32), 0.0).unwrap();
        assert!((r0.constant - 0.5).abs() < 1e-12);
        let a = linear_weight_interior_bound(&gaussian_traj(1.0, 2048, 60.0, 32), 1.0).unwrap();
        let b = linear_weight_interior_bound(&gaussian_traj(1.0, 4096, 60.0, 32), 1.0).unwrap();
        assert!((a.constant / b.constant - 1.0).abs() < 1e-4);
        for lambda in [0.5, 1.0, 2.0] {
            let r = linear_weight_interior_bound(&gaussian_traj(1.0, 2048, 60.0, 32), lambda).unwrap();
            assert!(!r.divergent && r.constant <= 10.0, "{lambda}: {r:?}");
        }
    }

    #[test]
    fn linear_weight_rejects_large_potential() {
        let g = Grid1D::new(64, 10.0).unwrap();
        let s = GaussianSampler { kappa: Complex64::new(1.0, 0.0), z: I, grid: g };
        let tr = Trajectory::sample(&s, &[0.0, 0.5, 1.0], I, PotentialSpec::sech2(0.5)).unwrap();
        assert!(linear_weight_interior_bound(&tr, 1.0).is_err());
    }

    #[test]
    fn persistence_cases() {
        assert_eq!(subexponential_persistence(&zero_traj(16), 0.1, 1.5).unwrap().sup_tail, 0.0);
        let a = subexponential_persistence(&gaussian_traj(1.0, 2048, 60.0, 16), 0.1, 1.5).unwrap();
        let b = subexponential_persistence(&gaussian_traj(1.0, 4096, 60.0, 16), 0.1, 1.5).unwrap();
        assert!(!a.divergent && a.sup_tail.is_finite() && a.sup_tail > 0.0);
        // the cut at |x| = C costs O(h²)
        assert!((a.sup_tail / b.sup_tail - 1.0).abs() < 1e-3, "{} {}", a.sup_tail, b.sup_tail);
        // |u(1)|² decays like e^{-2x²/17}; b = 0.125 exceeds that rate
        let d = subexponential_persistence(&gaussian_traj(1.0, 2048, 60.0, 16), 0.5, 2.0).unwrap();
        assert!(d.divergent);
    }
}
