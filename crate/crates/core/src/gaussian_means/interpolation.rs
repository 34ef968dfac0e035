use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::grid::{weighted_l2_norm, WeightSpec, WeightedNorm};
use crate::propagators::Trajectory;

/// Three-point weighted interpolation `‖·u(s)‖ ≤ ‖·u(0)‖^{θ₀} ‖·u(1)‖^{θ₁}`
/// with weights `e^{x²/(αt+(1−t)β)²}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Weighted norms at `0`, `s`, `1`.
    pub norms: [WeightedNorm; 3],
    /// `θ₀ = β(1−s)/(αs+(1−s)β)` and `θ₁ = αs/(αs+(1−s)β)` as exact fractions.
    pub exponents: (String, String),
    pub exponents_f64: (f64, f64),
    /// `log LHS − θ₀ log N(0) − θ₁ log N(1)`; `None` if any norm is divergent.
    pub log_excess: Option<f64>,
}

impl InterpolationReport {
    pub fn divergent_endpoints(&self) -> Vec<f64> {
        [0.0, self.s, 1.0]
            .into_iter()
            .zip(&self.norms)
            .filter(|(_, n)| n.divergent)
            .map(|(t, _)| t)
            .collect()
    }
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::NonFinite(format!("{x} as a rational")))
}

/// Exact `(θ₀, θ₁)` for the binary values of `α, β, s`; they sum to one.
pub fn interpolation_exponents(alpha: f64, beta: f64, s: f64) -> Result<(BigRational, BigRational)> {
    let (a, b, s) = (exact(alpha)?, exact(beta)?, exact(s)?);
    let one = BigRational::one();
    let denom = &a * &s + (&one - &s) * &b;
    let th0 = &b * (&one - &s) / &denom;
    let th1 = &a * &s / &denom;
    debug_assert_eq!(&th0 + &th1, one);
    Ok((th0, th1))
}

/// Evaluates the interpolation inequality on a trajectory sampled at `0`, `s`, `1`.
pub fn theorem1_interpolation(traj: &Trajectory, alpha: f64, beta: f64, s: f64) -> Result<InterpolationReport> {
    precondition(alpha > 0.0 && beta > 0.0, || format!("alpha, beta must be positive: {alpha}, {beta}"))?;
    precondition(s > 0.0 && s < 1.0, || format!("s = {s} outside (0, 1)"))?;
    let (th0, th1) = interpolation_exponents(alpha, beta, s)?;
    let w = WeightSpec::Mixed { alpha, beta };
    let mut norms = [WeightedNorm { log_sq: 0.0, divergent: false }; 3];
    for (slot, t) in norms.iter_mut().zip([0.0, s, 1.0]) {
        let f = match traj.field_at_time(t) {
            Ok(f) => f.clone(),
            Err(_) => traj.interpolate_time(t)?,
        };
        *slot = weighted_l2_norm(&f, &w)?;
    }
    let e0 = th0.to_f64().unwrap_or(f64::NAN);
    let e1 = th1.to_f64().unwrap_or(f64::NAN);
    let log_excess = if norms.iter().any(|n| n.divergent) {
        None
    } else {
        Some(norms[1].log_norm() - e0 * norms[0].log_norm() - e1 * norms[2].log_norm())
    };
    Ok(InterpolationReport {
        s,
        alpha,
        beta,
        norms,
        exponents: (th0.to_string(), th1.to_string()),
        exponents_f64: (e0, e1),
        log_excess,
    })
}
