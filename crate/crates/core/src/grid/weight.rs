use serde::{Deserialize, Serialize};

use super::{Grid1D, WaveField};
use crate::error::{Error, Result};
use crate::numerics::{bump, LogSum};

/// Boundary-term ratio above which a weighted norm is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 1e-8;

/// Polynomial in time, `Σ c_k t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePoly(pub Vec<f64>);

impl TimePoly {
    /// `t(1 − t)`.
    pub fn parabola() -> Self {
        TimePoly(vec![0.0, 1.0, -1.0])
    }

    pub fn constant(c: f64) -> Self {
        TimePoly(vec![c])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        TimePoly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }
}

/// Weight families `e^{w(x,t)}` used by the weighted norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w = γ x²`.
    Gaussian { gamma: f64 },
    /// `w = λ x`.
    Linear { lambda: f64 },
    /// `w = x² / (αt + (1 − t)β)²`, with `t` taken from the field.
    Mixed { alpha: f64, beta: f64 },
    /// `w = μ (x/R + φ(t))²`.
    Moving { mu: f64, r: f64, phi: TimePoly },
    /// `w = γ φ_R(x)` with `φ_R = x²` on `|x| ≤ R` and `R²` outside.
    Truncated { gamma: f64, r: f64 },
    /// `w = γ (θ_ρ * φ_ε)(x)`, the mollified subquadratic weight.
    Subquadratic { gamma: f64, eps: f64, rho: f64 },
    /// `w = c |x|^p`.
    Power { coef: f64, exponent: f64 },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(m.to_string()));
        match *self {
            WeightSpec::Gaussian { gamma } if !(gamma >= 0.0) => bad("Gaussian weight needs gamma >= 0"),
            WeightSpec::Mixed { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => {
                bad("mixed weight needs alpha, beta > 0")
            }
            WeightSpec::Moving { mu, r, .. } if !(mu > 0.0 && r > 0.0) => bad("moving weight needs mu, R > 0"),
            WeightSpec::Truncated { r, .. } if !(r > 0.0) => bad("truncated weight needs R > 0"),
            WeightSpec::Subquadratic { eps, rho, .. } if !(eps > 0.0 && eps < 1.0 && rho > 0.0) => {
                bad("subquadratic weight needs eps in (0,1) and rho > 0")
            }
            WeightSpec::Linear { lambda } if !lambda.is_finite() => bad("linear weight needs finite lambda"),
            _ => Ok(()),
        }
    }

    /// Builds the exponent `w(·, t)` as a closure over `x`.
    pub fn exponent_at(&self, t: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match self.clone() {
            WeightSpec::Gaussian { gamma } => Box::new(move |x| gamma * x * x),
            WeightSpec::Linear { lambda } => Box::new(move |x| lambda * x),
            WeightSpec::Mixed { alpha, beta } => {
                let d = alpha * t + (1.0 - t) * beta;
                Box::new(move |x| x * x / (d * d))
            }
            WeightSpec::Moving { mu, r, phi } => {
                let p = phi.eval(t);
                Box::new(move |x| {
                    let y = x / r + p;
                    mu * y * y
                })
            }
            WeightSpec::Truncated { gamma, r } => Box::new(move |x| gamma * truncated_square(x, r)),
            WeightSpec::Subquadratic { gamma, eps, rho } => {
                let m = Mollified::new(eps, rho);
                Box::new(move |x| gamma * m.eval(x))
            }
            WeightSpec::Power { coef, exponent } => Box::new(move |x| coef * x.abs().powf(exponent)),
        }
    }

    /// `∂_x w(·, t)`.
    pub fn exponent_derivative_at(&self, t: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match self.clone() {
            WeightSpec::Gaussian { gamma } => Box::new(move |x| 2.0 * gamma * x),
            WeightSpec::Linear { lambda } => Box::new(move |_| lambda),
            WeightSpec::Mixed { alpha, beta } => {
                let d = alpha * t + (1.0 - t) * beta;
                Box::new(move |x| 2.0 * x / (d * d))
            }
            WeightSpec::Moving { mu, r, phi } => {
                let p = phi.eval(t);
                Box::new(move |x| 2.0 * mu * (x / r + p) / r)
            }
            WeightSpec::Truncated { gamma, r } => {
                Box::new(move |x| if x.abs() <= r { 2.0 * gamma * x } else { 0.0 })
            }
            WeightSpec::Subquadratic { gamma, eps, rho } => {
                let m = Mollified::new(eps, rho);
                Box::new(move |x| gamma * m.eval_derivative(x))
            }
            WeightSpec::Power { coef, exponent } => {
                Box::new(move |x| coef * exponent * x.signum() * x.abs().powf(exponent - 1.0))
            }
        }
    }
}

/// `φ_R(x)`.
pub fn truncated_square(x: f64, r: f64) -> f64 {
    if x.abs() <= r {
        x * x
    } else {
        r * r
    }
}

/// `φ_ε(x)`: `x²` on `|x| ≤ 1`, `(2|x|^{2−ε} − ε)/(2 − ε)` outside.
pub fn subquadratic(x: f64, eps: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        x * x
    } else {
        (2.0 * a.powf(2.0 - eps) - eps) / (2.0 - eps)
    }
}

fn subquadratic_derivative(x: f64, eps: f64) -> f64 {
    if x.abs() <= 1.0 {
        2.0 * x
    } else {
        2.0 * x.signum() * x.abs().powf(1.0 - eps)
    }
}

/// Convolution with the normalised radial mollifier `θ_ρ`, by a fixed Simpson rule.
struct Mollified {
    eps: f64,
    nodes: Vec<(f64, f64)>,
}

impl Mollified {
    const PANELS: usize = 400;

    fn new(eps: f64, rho: f64) -> Self {
        let n = Self::PANELS;
        let h = 2.0 * rho / n as f64;
        let mut nodes: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let y = -rho + i as f64 * h;
                let simpson = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                (y, simpson * bump(y / rho))
            })
            .collect();
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        nodes.iter_mut().for_each(|(_, w)| *w /= total);
        Self { eps, nodes }
    }

    fn eval(&self, x: f64) -> f64 {
        self.nodes.iter().map(|(y, w)| w * subquadratic(x - y, self.eps)).sum()
    }

    fn eval_derivative(&self, x: f64) -> f64 {
        self.nodes.iter().map(|(y, w)| w * subquadratic_derivative(x - y, self.eps)).sum()
    }
}

/// Weighted squared norm `∫ e^{2w}|f|²` kept in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    /// `ln Σ_j e^{2w(x_j)}|f_j|² h`; `-inf` for the zero field.
    pub log_sq: f64,
    /// The boundary node carried more than `1e-8` of the largest term: the tail is not in the box.
    pub divergent: bool,
}

impl WeightedNorm {
    pub fn log_norm(&self) -> f64 {
        0.5 * self.log_sq
    }

    /// The norm itself; `+inf` when it overflows `f64`.
    pub fn norm(&self) -> f64 {
        self.log_norm().exp()
    }

    pub fn squared(&self) -> f64 {
        self.log_sq.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.log_sq == f64::NEG_INFINITY
    }
}

/// `∫_{region} e^{log_weight(x)} |f|² dx` by the periodic rectangle rule, accumulated in the log domain.
pub fn weighted_integral(
    f: &WaveField,
    log_weight: impl Fn(f64) -> f64,
    region: impl Fn(f64) -> bool,
) -> Result<WeightedNorm> {
    if !f.is_finite() {
        return Err(Error::NonFinite("weighted norm input".into()));
    }
    let log_modulus: Vec<f64> = f.samples().iter().map(|v| v.norm_sqr().ln()).collect();
    weighted_log_integral(f.grid(), &log_modulus, log_weight, region)
}

/// As [`weighted_integral`], from `ln |f_j|²` directly; for fields whose samples underflow.
pub fn weighted_log_integral(
    grid: &Grid1D,
    log_modulus_sq: &[f64],
    log_weight: impl Fn(f64) -> f64,
    region: impl Fn(f64) -> bool,
) -> Result<WeightedNorm> {
    let n = grid.n_points();
    if log_modulus_sq.len() != n {
        return Err(Error::Precondition(format!("{} samples for {n} nodes", log_modulus_sq.len())));
    }
    let ln_h = grid.spacing().ln();
    let mut acc = LogSum::new();
    let mut boundary = f64::NEG_INFINITY;
    for (j, &lm) in log_modulus_sq.iter().enumerate() {
        let x = grid.node(j);
        if !region(x) || lm == f64::NEG_INFINITY {
            continue;
        }
        let term = log_weight(x) + lm + ln_h;
        if term.is_nan() || term == f64::INFINITY {
            return Err(Error::NonFinite(format!("weighted integrand at x={x}")));
        }
        acc.add(term);
        if j == 0 || j == n - 1 {
            boundary = boundary.max(term);
        }
    }
    let divergent =
        boundary > f64::NEG_INFINITY && boundary > acc.max_term() + DIVERGENCE_RATIO.ln();
    Ok(WeightedNorm { log_sq: acc.ln(), divergent })
}

/// `‖e^{w} f‖` for a weight family, evaluated at the field's time.
pub fn weighted_l2_norm(f: &WaveField, w: &WeightSpec) -> Result<WeightedNorm> {
    w.validate()?;
    let exponent = w.exponent_at(f.time());
    weighted_integral(f, |x| 2.0 * exponent(x), |_| true)
}

/// Checks `∫ e^{2√γ λx} e^{−λ²/2} dλ = √(2π) e^{2γx²}` by quadrature at each probe.
///
/// Returns the maximum relative error. The λ-integral is a trapezoid rule on a
/// window of half-width 40 around the integrand's peak, halved until two
/// successive refinements agree to 1e-14.
pub fn lambda_average_identity_check(gamma: f64, probes: &[f64]) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Precondition(format!("gamma must be positive, got {gamma}")));
    }
    let s = gamma.sqrt();
    let mut worst: f64 = 0.0;
    for &x in probes {
        let exponent = |l: f64| 2.0 * s * l * x - 0.5 * l * l;
        let centre = 2.0 * s * x;
        let half = 40.0;
        let mut panels = 200usize;
        let mut previous = f64::NAN;
        let log_integral = loop {
            let h = 2.0 * half / panels as f64;
            let mut acc = LogSum::new();
            for i in 0..=panels {
                let l = centre - half + i as f64 * h;
                let w = if i == 0 || i == panels { 0.5 * h } else { h };
                acc.add_weighted(exponent(l), w);
            }
            let value = acc.ln();
            if (value - previous).abs() < 1e-14 {
                break value;
            }
            previous = value;
            panels *= 2;
            if panels > 1 << 20 {
                return Err(Error::Quadrature(format!("lambda integral at x={x}")));
            }
        };
        let log_oracle = 0.5 * (2.0 * std::f64::consts::PI).ln() + 2.0 * gamma * x * x;
        worst = worst.max(((log_integral - log_oracle).exp() - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian(grid: Grid1D, kappa: f64) -> WaveField {
        WaveField::from_fn(grid, 0.0, |x| Complex64::new((-kappa * x * x).exp(), 0.0)).unwrap()
    }

    #[test]
    fn gaussian_weighted_norm_matches_integral() {
        // ∫ e^{0.1x²} e^{-2x²} dx = √(π/1.9)
        let g = Grid1D::new(1024, 20.0).unwrap();
        let n = weighted_l2_norm(&gaussian(g, 1.0), &WeightSpec::Gaussian { gamma: 0.05 }).unwrap();
        let exact = (PI / 1.9).sqrt();
        assert!((n.squared() / exact - 1.0).abs() < 1e-12);
        assert!(!n.divergent);
    }

    #[test]
    fn zero_gamma_is_plain_norm() {
        let g = Grid1D::new(256, 10.0).unwrap();
        let f = WaveField::from_fn(g, 0.0, |x| Complex64::new(x.cos(), x.sin()) * (-x * x / 3.0).exp())
            .unwrap();
        let n = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 0.0 }).unwrap();
        assert!((n.norm() / f.l2_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_flag_for_counterexample_modulus() {
        // |u(x,1)|² = 2^{-1/2} e^{-x²/4}; 2γ = 0.4 > 1/4
        let g = Grid1D::new(1024, 20.0).unwrap();
        let f = WaveField::from_fn(g, 1.0, |x| {
            Complex64::new(2f64.powf(-0.25) * (-x * x / 8.0).exp(), 0.0)
        })
        .unwrap();
        let n = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 0.2 }).unwrap();
        assert!(n.divergent);
        assert!(n.log_sq.is_finite());
        let ok = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 0.1 }).unwrap();
        assert!(!ok.divergent);
    }

    #[test]
    fn huge_weights_do_not_overflow() {
        let g = Grid1D::new(512, 40.0).unwrap();
        let f = gaussian(g, 0.25);
        let n = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 1.0 }).unwrap();
        assert!(n.log_sq.is_finite() && n.log_sq > 1000.0);
        assert!(n.norm().is_infinite());
    }

    #[test]
    fn gaussian_norm_monotone_in_gamma() {
        let g = Grid1D::new(512, 20.0).unwrap();
        let f = gaussian(g, 1.0);
        let mut last = f64::NEG_INFINITY;
        for k in 0..10 {
            let n = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 0.05 * k as f64 }).unwrap();
            assert!(n.log_sq >= last);
            last = n.log_sq;
        }
    }

    #[test]
    fn truncated_weight_increases_to_gaussian_value() {
        let g = Grid1D::new(1024, 20.0).unwrap();
        let f = gaussian(g, 1.0);
        let full = weighted_l2_norm(&f, &WeightSpec::Gaussian { gamma: 0.3 }).unwrap();
        let mut last = f64::NEG_INFINITY;
        for r in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let n = weighted_l2_norm(&f, &WeightSpec::Truncated { gamma: 0.3, r }).unwrap();
            assert!(n.log_sq >= last - 1e-15);
            assert!(n.log_sq <= full.log_sq + 1e-13);
            last = n.log_sq;
        }
        assert!((last - full.log_sq).abs() < 1e-12);
    }

    #[test]
    fn subquadratic_weight_is_below_quadratic_plus_mollifier_term() {
        let w = WeightSpec::Subquadratic { gamma: 1.0, eps: 0.2, rho: 0.5 };
        let e = w.exponent_at(0.0);
        for x in [-6.0, -1.0, 0.0, 0.7, 3.0, 10.0] {
            assert!(e(x) <= x * x + 0.25 + 1e-12, "x={x}");
        }
        // grows slower than |x|^{2-eps} at infinity
        let ratio = e(1e3) / 1e3f64.powf(1.8);
        assert!((ratio - 2.0 / 1.8).abs() < 1e-3, "{ratio}");
        assert!(w.validate().is_ok());
        assert!(WeightSpec::Subquadratic { gamma: 1.0, eps: 1.2, rho: 0.5 }.validate().is_err());
    }

    #[test]
    fn exponent_derivatives_match_difference_quotients() {
        let specs = [
            WeightSpec::Gaussian { gamma: 0.3 },
            WeightSpec::Linear { lambda: -1.5 },
            WeightSpec::Mixed { alpha: 4.0, beta: 6.0 },
            WeightSpec::Moving { mu: 0.7, r: 8.0, phi: TimePoly::parabola() },
            WeightSpec::Truncated { gamma: 0.2, r: 3.0 },
            WeightSpec::Subquadratic { gamma: 1.0, eps: 0.2, rho: 0.5 },
            WeightSpec::Power { coef: 0.4, exponent: 1.5 },
        ];
        for w in &specs {
            let (e, d) = (w.exponent_at(0.3), w.exponent_derivative_at(0.3));
            for x in [-4.7, -0.3, 0.9, 2.2, 5.1] {
                let h = 1e-5;
                let fd = (e(x + h) - e(x - h)) / (2.0 * h);
                assert!((fd - d(x)).abs() < 1e-6 * (1.0 + fd.abs()), "{w:?} at {x}: {fd} vs {}", d(x));
            }
        }
    }

    #[test]
    fn lambda_identity_examples() {
        assert!(lambda_average_identity_check(0.25, &[0.0]).unwrap() <= 1e-10);
        assert!(lambda_average_identity_check(0.25, &[2.0]).unwrap() <= 1e-10);
        assert!(lambda_average_identity_check(0.5, &[1.0]).unwrap() <= 1e-10);
        assert!(lambda_average_identity_check(-1.0, &[1.0]).is_err());
    }

    #[test]
    fn time_poly_eval_and_derivative() {
        let p = TimePoly::parabola();
        assert_eq!(p.eval(0.5), 0.25);
        assert_eq!(p.derivative().eval(0.0), 1.0);
        assert_eq!(p.derivative().derivative().eval(0.3), -2.0);
    }
}
