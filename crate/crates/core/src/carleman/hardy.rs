//! The Hardy threshold exponent and the cut-off pipeline of the contradiction argument.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::grid::{spectral_derivative, weighted_integral};
use crate::numerics::{golden_max, simpson, smooth_step, smooth_step_prime, smooth_step_second};
use crate::propagators::{PotentialSpec, Sampler};

/// Default constant multiplying `δ` in the threshold exponent.
pub const DEFAULT_DELTA_CONSTANT: f64 = 1.0;

/// Range of `ε` searched by [`sup_threshold_exponent`].
pub const EPS_MAX: f64 = 0.5;

/// `E = γ/(1+ε)³ − (1+ε)⁴/(4γ) − Cδ`.
pub fn hardy_threshold_exponent(gamma: f64, eps: f64, delta: f64, c: f64) -> Result<f64> {
    precondition(gamma > 0.0 && eps >= 0.0 && delta >= 0.0, || {
        format!("need γ > 0, ε ≥ 0, δ ≥ 0; got {gamma}, {eps}, {delta}")
    })?;
    Ok(gamma / (1.0 + eps).powi(3) - (1.0 + eps).powi(4) / (4.0 * gamma) - c * delta)
}

/// `(ε*, sup_{ε∈[0, 0.5]} E(γ, ε, 0))`.
pub fn sup_threshold_exponent(gamma: f64) -> Result<(f64, f64)> {
    let e = |eps: f64| hardy_threshold_exponent(gamma, eps, 0.0, 0.0).unwrap_or(f64::NEG_INFINITY);
    hardy_threshold_exponent(gamma, 0.0, 0.0, 0.0)?;
    let (x, v) = golden_max(e, 0.0, EPS_MAX, 1e-12);
    Ok([(0.0, e(0.0)), (EPS_MAX, e(EPS_MAX)), (x, v)].into_iter().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a }))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub gamma: f64,
    pub eps_star: f64,
    pub sup_e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdScan {
    pub rows: Vec<ThresholdRow>,
    /// Consecutive `γ` values between which `sup E` changes sign.
    pub sign_changes: Vec<(f64, f64)>,
    /// Exactly one sign change, in a cell containing `1/2`.
    pub change_at_half: bool,
}

pub fn threshold_scan(gammas: &[f64]) -> Result<ThresholdScan> {
    let rows: Vec<ThresholdRow> = gammas
        .iter()
        .map(|&g| sup_threshold_exponent(g).map(|(eps_star, sup_e)| ThresholdRow { gamma: g, eps_star, sup_e }))
        .collect::<Result<_>>()?;
    let sign_changes: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| (w[0].sup_e < 0.0) != (w[1].sup_e < 0.0))
        .map(|w| (w[0].gamma, w[1].gamma))
        .collect();
    let change_at_half = sign_changes.len() == 1 && {
        let (a, b) = sign_changes[0];
        a.min(b) <= 0.5 && 0.5 <= a.max(b)
    };
    Ok(ThresholdScan { rows, sign_changes, change_at_half })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PipelineParams {
    pub gamma: f64,
    pub r: f64,
    pub eps: f64,
    /// Half-size of the core region `|x/R| ≤ δ`, `|t − 1/2| ≤ δ`.
    pub delta: f64,
    /// Spatial cut-off scale `M`.
    pub m: f64,
    pub intervals: usize,
    /// Replace `η` by 1 (the `R → ∞` surrogate).
    pub eta_one: bool,
}

impl PipelineParams {
    pub fn new(gamma: f64, r: f64, eps: f64, delta: f64, m: f64) -> Self {
        Self { gamma, r, eps, delta, m, intervals: 2000, eta_one: false }
    }

    pub fn mu(&self) -> f64 {
        self.gamma * self.r * self.r / (1.0 + self.eps).powi(3)
    }

    /// `η(t)`: 0 where `t(1−t) ≤ 1/(2R)`, 1 where `t(1−t) ≥ 1/R`.
    pub fn eta(&self, t: f64) -> (f64, f64) {
        if self.eta_one {
            return (1.0, 0.0);
        }
        let s = 2.0 * self.r * t * (1.0 - t) - 1.0;
        (smooth_step(s), smooth_step_prime(s) * 2.0 * self.r * (1.0 - 2.0 * t))
    }
}

/// `θ(y)`: 1 on `|y| ≤ 1`, 0 on `|y| ≥ 2`, with its first two derivatives.
pub fn cutoff_theta(y: f64) -> (f64, f64, f64) {
    let s = y.abs() - 1.0;
    (1.0 - smooth_step(s), -smooth_step_prime(s) * y.signum(), -smooth_step_second(s))
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub params: PipelineParams,
    pub mu: f64,
    /// `sup_t ‖e^{γx²}u(t)‖`.
    pub apriori_sup: f64,
    /// `εR⁴/(8μ)·∫∫ W|g|²` with `W = e^{2ψ}e^{2μ(x/R+φ)²}`.
    pub lhs: f64,
    /// Same integrand restricted to `t(1−t) ≥ 1/R`.
    pub lhs_interior: f64,
    /// Same integrand restricted to `|x/R| ≤ δ`, `|t − 1/2| ≤ δ`.
    pub lhs_core: f64,
    /// `∫∫ W|·|²` of the potential, `η′` and cut-off terms of `(i∂_t+∂²)g`.
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    /// The `η′` term with `e^{2ψ}` replaced by its bound 1; this is the quantity that grows like `R`.
    pub term_ii_bound: f64,
    /// `∫∫ W|(i∂_t+∂²)g|²`.
    pub rhs: f64,
    pub carleman_holds: bool,
}

/// Evaluates the pieces of the Carleman inequality for `g = η(t)θ(x/M)u`, where `u` solves
/// `i∂_t u = −(∂² + V)u`.
///
/// All weighted quantities are formed from `F = e^{v}u`, `v = ψ + μ(x/R+φ)²`, and
/// `e^{v}∂_x u = ∂_x F − v_x F`, so no unweighted derivative is multiplied by a large weight.
pub fn hardy_cutoff_pipeline(u: &dyn Sampler, v: &PotentialSpec, p: &PipelineParams) -> Result<PipelineReport> {
    precondition(p.gamma > 0.0 && p.eps > 0.0 && p.r >= 4.0 && p.delta >= 0.0 && p.m > 0.0, || {
        format!("invalid pipeline parameters {p:?}")
    })?;
    precondition(p.intervals >= 16 && p.intervals.is_multiple_of(2), || "need an even interval count ≥ 16".into())?;
    let grid = u.grid();
    precondition(2.0 * p.m < grid.half_width(), || format!("2M = {} must fit in the box", 2.0 * p.m))?;
    let mu = p.mu();
    let (r, eps) = (p.r, p.eps);
    let psi_c = -(1.0 + eps) * r.powi(4) / (16.0 * mu);
    let pref = eps * r.powi(4) / (8.0 * mu);
    let dt = 1.0 / p.intervals as f64;
    let h = grid.spacing();
    let nodes = grid.nodes();
    let thetas: Vec<(f64, f64, f64)> = nodes.iter().map(|&x| cutoff_theta(x / p.m)).collect();
    let i = Complex64::i();
    let mut apriori: f64 = 0.0;
    let n = p.intervals + 1;
    let [mut lg, mut li, mut lc, mut t1, mut t2, mut t3, mut t2b, mut rh] = std::array::from_fn(|_| vec![0.0; n]);
    for k in 0..n {
        let t = k as f64 * dt;
        let f = u.field_at(t)?;
        let wn = weighted_integral(&f, |x| 2.0 * p.gamma * x * x, |_| true)?;
        if wn.divergent {
            return Err(Error::Divergent(format!("a-priori weighted norm at t = {t}")));
        }
        apriori = apriori.max(wn.norm());
        let phi = t * (1.0 - t);
        let psi = psi_c * phi;
        let vexp = |x: f64| psi + mu * (x / r + phi).powi(2);
        let weighted = f.map_with_x(|x, z| {
            let m = z.norm();
            if m == 0.0 {
                z
            } else {
                z / m * (vexp(x) + m.ln()).exp()
            }
        });
        if !weighted.is_finite() {
            return Err(Error::NonFinite(format!("weighted field at t = {t}")));
        }
        let dwf = spectral_derivative(&weighted, 1)?.field;
        let (eta, deta) = p.eta(t);
        let interior = t * (1.0 - t) >= 1.0 / r;
        let core = (t - 0.5).abs() <= p.delta;
        for (j, &x) in nodes.iter().enumerate() {
            let fw = weighted.samples()[j];
            let (th, th1, th2) = thetas[j];
            let vx = 2.0 * mu * (x / r + phi) / r;
            let ux = dwf.samples()[j] - vx * fw;
            let g = eta * th * fw;
            let a = -g * v.eval(x, t);
            let b = i * deta * th * fw;
            let c = eta * (th2 * fw / (p.m * p.m) + 2.0 * th1 * ux / p.m);
            lg[k] += g.norm_sqr() * h;
            if interior {
                li[k] += (th * fw).norm_sqr() * h;
            }
            if core && (x / r).abs() <= p.delta {
                lc[k] += (th * fw).norm_sqr() * h;
            }
            t1[k] += a.norm_sqr() * h;
            t2[k] += b.norm_sqr() * h;
            if deta != 0.0 {
                t2b[k] += (b.norm_sqr().ln() - 2.0 * psi).exp() * h;
            }
            t3[k] += c.norm_sqr() * h;
            rh[k] += (a + b + c).norm_sqr() * h;
        }
    }
    let q = |v: &[f64]| simpson(v, dt);
    let lhs = pref * q(&lg);
    let rhs = q(&rh);
    Ok(PipelineReport {
        params: *p,
        mu,
        apriori_sup: apriori,
        lhs,
        lhs_interior: pref * q(&li),
        lhs_core: pref * q(&lc),
        term_i: q(&t1),
        term_ii: q(&t2),
        term_iii: q(&t3),
        term_ii_bound: q(&t2b),
        rhs,
        carleman_holds: lhs <= rhs * (1.0 + super::CARLEMAN_SLACK),
    })
}

/// Least-squares slope of `ln II_bound` against `ln R`.
pub fn term_ii_growth(u: &dyn Sampler, v: &PotentialSpec, base: &PipelineParams, radii: &[f64]) -> Result<(f64, Vec<PipelineReport>)> {
    let reports: Vec<PipelineReport> = radii
        .iter()
        .map(|&r| hardy_cutoff_pipeline(u, v, &PipelineParams { r, ..*base }))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.term_ii_bound.ln()).collect();
    let coef = crate::numerics::least_squares(&[xs, vec![1.0; radii.len()]], &ys);
    Ok((coef[0], reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::propagators::GaussianSampler;

    #[test]
    fn threshold_values() {
        assert!(hardy_threshold_exponent(0.5, 0.0, 0.0, 1.0).unwrap().abs() < 1e-15);
        assert!(sup_threshold_exponent(0.6).unwrap().1 > 0.0);
        assert!(sup_threshold_exponent(0.4).unwrap().1 < 0.0);
        assert!(hardy_threshold_exponent(0.0, 0.0, 0.0, 1.0).is_err());
        let e = hardy_threshold_exponent(0.6, 0.1, 0.01, 2.0).unwrap();
        assert!((e - (0.6 / 1.331 - 1.4641 / 2.4 - 0.02)).abs() < 1e-12);
    }

    #[test]
    fn scan_changes_sign_at_half() {
        let gammas: Vec<f64> = (0..=1000).map(|k| 0.3 + k as f64 * 4e-4 + 1.7e-4).collect();
        let s = threshold_scan(&gammas).unwrap();
        assert!(s.change_at_half, "{:?}", s.sign_changes);
    }

    #[test]
    fn cutoffs() {
        assert_eq!(cutoff_theta(0.5), (1.0, 0.0, 0.0));
        assert_eq!(cutoff_theta(2.5).0, 0.0);
        let p = PipelineParams::new(0.05, 8.0, 0.1, 0.1, 20.0);
        assert_eq!(p.eta(0.01).0, 0.0);
        assert_eq!(p.eta(0.5).0, 1.0);
        let peak = (1..1000).map(|k| p.eta(k as f64 / 2000.0).1.abs()).fold(0.0, f64::max);
        assert!(peak <= 4.0 * p.r && peak > 0.5 * p.r, "{peak}");
    }

    fn sampler() -> GaussianSampler {
        GaussianSampler { kappa: Complex64::new(1.0, 0.0), z: Complex64::i(), grid: Grid1D::new(4096, 96.0).unwrap() }
    }

    #[test]
    fn pipeline_free_gaussian() {
        let u = sampler();
        let v = PotentialSpec::zero();
        let a = hardy_cutoff_pipeline(&u, &v, &PipelineParams::new(0.05, 8.0, 0.1, 0.1, 20.0)).unwrap();
        let b = hardy_cutoff_pipeline(&u, &v, &PipelineParams::new(0.05, 8.0, 0.1, 0.1, 40.0)).unwrap();
        assert!(a.carleman_holds && b.carleman_holds);
        assert_eq!(a.term_i, 0.0);
        assert!(b.term_iii * 10.0 <= a.term_iii, "{} {}", a.term_iii, b.term_iii);
        let mut one = PipelineParams::new(0.05, 8.0, 0.1, 0.1, 20.0);
        one.eta_one = true;
        assert_eq!(hardy_cutoff_pipeline(&u, &v, &one).unwrap().term_ii, 0.0);
    }

    #[test]
    fn term_ii_grows_linearly() {
        let base = PipelineParams::new(0.05, 8.0, 0.1, 0.1, 20.0);
        let (slope, reps) = term_ii_growth(&sampler(), &PotentialSpec::zero(), &base, &[8.0, 16.0, 32.0]).unwrap();
        assert!((slope - 1.0).abs() <= 0.3, "{slope}");
        for r in &reps {
            assert!(r.term_ii <= r.term_ii_bound && r.carleman_holds);
        }
    }
}
