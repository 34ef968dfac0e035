//! The Appel (conformal) transform
//!
//! `ũ(x,t) = (√(αβ)/d)^{1/2} u(√(αβ)x/d, s) exp((α−β)x² / (4z d))`,
//! `d = α(1−t) + βt`, `s = βt/d`.
//!
//! If `∂_s u = z(∂²u + Vu + F)` then `∂_t ũ = z(∂²ũ + Ṽũ + F̃)` with
//! `Ṽ = (αβ/d²) V(√(αβ)x/d, s)`. The inverse is the transform with `α` and `β` swapped.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::grid::{laplacian, weighted_integral, Grid1D, WaveField, WeightedNorm};
use crate::propagators::{PotentialKind, PotentialSpec, Sampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppelParams {
    pub alpha: f64,
    pub beta: f64,
    pub z: Complex64,
}

impl AppelParams {
    pub fn new(alpha: f64, beta: f64, z: Complex64) -> Result<Self> {
        precondition(alpha > 0.0 && beta > 0.0, || format!("alpha, beta must be positive: {alpha}, {beta}"))?;
        precondition(z.re >= 0.0 && z != Complex64::new(0.0, 0.0), || format!("z = {z} needs Re z ≥ 0, z ≠ 0"))?;
        Ok(Self { alpha, beta, z })
    }

    /// Parameters of the inverse map.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.beta, beta: self.alpha, z: self.z }
    }

    /// `d(t) = α(1−t) + βt`.
    pub fn denominator(&self, t: f64) -> f64 {
        self.alpha * (1.0 - t) + self.beta * t
    }

    /// `s(t) = βt / d(t)`.
    pub fn time_map(&self, t: f64) -> f64 {
        if self.alpha == self.beta {
            return t;
        }
        self.beta * t / self.denominator(t)
    }

    /// `√(αβ) / d(t)`.
    pub fn scale(&self, t: f64) -> f64 {
        if self.alpha == self.beta {
            return 1.0;
        }
        (self.alpha * self.beta).sqrt() / self.denominator(t)
    }

    /// `sup_t √(αβ)/d = √(max(α,β)/min(α,β))`.
    pub fn max_scale(&self) -> f64 {
        (self.alpha.max(self.beta) / self.alpha.min(self.beta)).sqrt()
    }

    /// `(α−β) / (4z d)`, the quadratic phase coefficient.
    pub fn phase_coefficient(&self, t: f64) -> Complex64 {
        (self.alpha - self.beta) / (4.0 * self.z * self.denominator(t))
    }

    /// Largest grid with the input's point count whose image stays in the input box for all `t`.
    pub fn output_grid(&self, input: &Grid1D) -> Result<Grid1D> {
        Grid1D::new(input.n_points(), input.half_width() / self.max_scale())
    }
}

/// `ũ(·, t)` on `out`, from `u(·, s(t))` interpolated spectrally.
pub fn appel_transform(u: &dyn Sampler, p: &AppelParams, t: f64, out: &Grid1D) -> Result<WaveField> {
    let s = p.time_map(t);
    let field = u.field_at(s)?;
    let input = field.grid();
    let scale = p.scale(t);
    if scale == 1.0 && p.alpha == p.beta && out == input {
        return Ok(field.with_time(t));
    }
    let reach = out.half_width() * scale;
    if reach > input.half_width() * (1.0 + 1e-12) {
        return Err(Error::OutOfBox { arg: reach, half_width: input.half_width() });
    }
    let points: Vec<f64> = out.nodes().iter().map(|x| scale * x).collect();
    let values = field.interpolate(&points);
    let amp = scale.sqrt();
    let c = p.phase_coefficient(t);
    let samples = out.nodes().iter().zip(values).map(|(&x, v)| v * amp * (c * x * x).exp()).collect();
    WaveField::new(*out, samples, t)
}

/// The transformed solution as a [`Sampler`].
#[derive(Clone)]
pub struct AppelSampler {
    pub inner: Arc<dyn Sampler>,
    pub params: AppelParams,
    pub grid: Grid1D,
}

impl Sampler for AppelSampler {
    fn grid(&self) -> Grid1D {
        self.grid
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        appel_transform(self.inner.as_ref(), &self.params, t, &self.grid)
    }
}

/// `Ṽ(x,t) = αβ/d² · V(√(αβ)x/d, s)`, with `‖Ṽ‖_∞ ≤ max(α/β, β/α)‖V‖_∞`.
pub fn appel_potential(v: &PotentialSpec, p: &AppelParams) -> PotentialSpec {
    let (inner, q) = (v.clone(), *p);
    let bound = (p.alpha / p.beta).max(p.beta / p.alpha) * v.sup_bound();
    let kind = if v.is_zero() { PotentialKind::Zero } else { PotentialKind::TimeDependent };
    PotentialSpec::custom(format!("appel({},{},{})", v.id(), p.alpha, p.beta), kind, bound, move |x, t| {
        let d = q.denominator(t);
        inner.eval(q.scale(t) * x, q.time_map(t)) * (q.alpha * q.beta / (d * d))
    })
}

/// `F̃ = (αβ/d²)(√(αβ)/d)^{1/2} e^{(α−β)x²/(4zd)} F(√(αβ)x/d, s)`.
#[derive(Clone)]
pub struct AppelSource {
    pub inner: Arc<dyn Sampler>,
    pub params: AppelParams,
    pub grid: Grid1D,
}

impl Sampler for AppelSource {
    fn grid(&self) -> Grid1D {
        self.grid
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        let d = self.params.denominator(t);
        let f = appel_transform(self.inner.as_ref(), &self.params, t, &self.grid)?;
        Ok(f.scaled(Complex64::new(self.params.alpha * self.params.beta / (d * d), 0.0)))
    }
}

pub fn appel_source(f: Arc<dyn Sampler>, p: &AppelParams, grid: Grid1D) -> AppelSource {
    AppelSource { inner: f, params: *p, grid }
}

/// `max_t ‖∂_t ũ − z(∂²ũ + Ṽũ)‖ / ‖ũ‖` over probe times, with a
/// fourth-order centred difference of step `dt` in `t` and a spectral `∂²`.
pub fn appel_residual(
    u: Arc<dyn Sampler>,
    v: &PotentialSpec,
    p: &AppelParams,
    probes: &[f64],
    dt: f64,
) -> Result<f64> {
    precondition(dt > 0.0 && dt <= 1e-3, || format!("time step {dt} outside (0, 1e-3]"))?;
    let out = p.output_grid(&u.grid())?;
    let tu = AppelSampler { inner: u, params: *p, grid: out };
    let vt = appel_potential(v, p);
    let mut worst: f64 = 0.0;
    for &t in probes {
        precondition(t - 2.0 * dt >= 0.0 && t + 2.0 * dt <= 1.0, || format!("probe {t} too close to the ends"))?;
        let f = |k: f64| tu.field_at(t + k * dt);
        let (m2, m1, c, p1, p2) = (f(-2.0)?, f(-1.0)?, f(0.0)?, f(1.0)?, f(2.0)?);
        let r = c.resolution();
        if !r.is_resolved_to_roundoff() {
            return Err(Error::UnderResolved(format!("transformed field at t={t}: {r:?}")));
        }
        // (−f₂ + 8f₁ − 8f₋₁ + f₋₂) / 12dt
        let dtu = p2
            .scaled(Complex64::new(-1.0, 0.0))
            .add(&p1.scaled(Complex64::new(8.0, 0.0)))
            .sub(&m1.scaled(Complex64::new(8.0, 0.0)))
            .add(&m2)
            .scaled(Complex64::new(1.0 / (12.0 * dt), 0.0));
        let rhs = laplacian(&c).add(&c.map_with_x(|x, w| w * vt.eval(x, t))).scaled(p.z);
        worst = worst.max(dtu.sub(&rhs).l2_norm() / c.l2_norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormIdentityReport {
    pub t: f64,
    pub s: f64,
    /// `‖e^{γx²}ũ(t)‖`.
    pub lhs: WeightedNorm,
    /// `‖e^{c y²}u(s)‖` with `c = γαβ/(αs+β(1−s))² + (α−β)a/(4|z|²(αs+β(1−s)))`.
    pub rhs: WeightedNorm,
    pub rhs_exponent: f64,
    pub relative_error: f64,
}

/// Compares the weighted norms on both sides of the change of variables.
pub fn appel_norm_identity(u: Arc<dyn Sampler>, p: &AppelParams, gamma: f64, t: f64) -> Result<NormIdentityReport> {
    let s = p.time_map(t);
    let out = if p.alpha == p.beta { u.grid() } else { p.output_grid(&u.grid())? };
    let ut = appel_transform(u.as_ref(), p, t, &out)?;
    let lhs = weighted_integral(&ut, |x| 2.0 * gamma * x * x, |_| true)?;
    let m = p.alpha * s + p.beta * (1.0 - s);
    let c = gamma * p.alpha * p.beta / (m * m) + (p.alpha - p.beta) * p.z.re / (4.0 * p.z.norm_sqr() * m);
    let rhs = weighted_integral(&u.field_at(s)?, |y| 2.0 * c * y * y, |_| true)?;
    if lhs.divergent || rhs.divergent {
        return Err(Error::Divergent(format!(
            "norm identity at t={t}: lhs divergent {}, rhs divergent {}",
            lhs.divergent, rhs.divergent
        )));
    }
    let relative_error = ((lhs.log_norm() - rhs.log_norm()).exp() - 1.0).abs();
    Ok(NormIdentityReport { t, s, lhs, rhs, rhs_exponent: c, relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::GaussianSampler;
    use proptest::prelude::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn gaussian(z: Complex64) -> Arc<dyn Sampler> {
        Arc::new(GaussianSampler { kappa: Complex64::new(1.0, 0.0), z, grid: Grid1D::new(1024, 30.0).unwrap() })
    }

    #[test]
    fn time_map_endpoints_and_collapse() {
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        assert_eq!(p.time_map(0.0), 0.0);
        assert_eq!(p.time_map(1.0), 1.0);
        let q = AppelParams::new(3.0, 3.0, I).unwrap();
        for t in [0.0, 0.3, 0.9] {
            assert_eq!(q.time_map(t), t);
        }
    }

    #[test]
    fn equal_parameters_are_identity() {
        let u = gaussian(I);
        let p = AppelParams::new(5.0, 5.0, I).unwrap();
        let a = appel_transform(u.as_ref(), &p, 0.4, &u.grid()).unwrap();
        assert_eq!(a, u.field_at(0.4).unwrap());
    }

    #[test]
    fn matches_direct_formula() {
        let u = gaussian(I);
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        let out = p.output_grid(&u.grid()).unwrap();
        let t = 0.37;
        let got = appel_transform(u.as_ref(), &p, t, &out).unwrap();
        let (d, s) = (4.0 * (1.0 - t) + 6.0 * t, 6.0 * t / (4.0 * (1.0 - t) + 6.0 * t));
        let sc = 24f64.sqrt() / d;
        let q = Complex64::new(1.0, 0.0) + 4.0 * I * s;
        for (x, v) in out.nodes().iter().zip(got.samples()) {
            let y = sc * x;
            let want = sc.sqrt() * q.sqrt().inv() * (-y * y / q).exp() * (-2.0 * x * x / (4.0 * I * d)).exp();
            assert!((v - want).norm() <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn value_at_origin_at_time_zero() {
        let u = gaussian(I);
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        let out = p.output_grid(&u.grid()).unwrap();
        let f = appel_transform(u.as_ref(), &p, 0.0, &out).unwrap();
        let j = out.n_points() / 2;
        assert_eq!(out.node(j), 0.0);
        assert!((f.samples()[j] - Complex64::new((6f64 / 4.0).powf(0.25), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn norm_identities() {
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        for t in [0.0, 0.25, 0.5, 1.0] {
            let r = appel_norm_identity(gaussian(I), &p, 0.02, t).unwrap();
            assert!(r.relative_error <= 1e-10, "t={t}: {r:?}");
            let plain = appel_norm_identity(gaussian(I), &p, 0.0, t).unwrap();
            assert!(plain.relative_error <= 1e-10);
        }
        let z = Complex64::new(0.1, 1.0);
        let p = AppelParams::new(4.0, 6.0, z).unwrap();
        let r = appel_norm_identity(gaussian(z), &p, 0.02, 0.6).unwrap();
        assert!(r.relative_error <= 1e-8, "{r:?}");
    }

    #[test]
    fn transformed_oracle_solves_equation() {
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        let r = appel_residual(gaussian(I), &PotentialSpec::zero(), &p, &[0.2, 0.5, 0.8], 1e-3).unwrap();
        assert!(r <= 1e-5, "{r}");
    }

    #[test]
    fn round_trip_recovers_field() {
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        let u = gaussian(I);
        let out = p.output_grid(&u.grid()).unwrap();
        let fwd: Arc<dyn Sampler> = Arc::new(AppelSampler { inner: u.clone(), params: p, grid: out });
        let back_grid = p.inverse().output_grid(&out).unwrap();
        let t = 0.45;
        let s = p.time_map(t);
        let back = appel_transform(fwd.as_ref(), &p.inverse(), s, &back_grid).unwrap();
        let direct = WaveField::new(back_grid, u.field_at(s).unwrap().interpolate(&back_grid.nodes()), s).unwrap();
        assert!(back.max_pointwise_distance(&direct) <= 1e-10);
    }

    #[test]
    fn out_of_box_rejected() {
        let u = gaussian(I);
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        assert!(matches!(appel_transform(u.as_ref(), &p, 0.0, &u.grid()), Err(Error::OutOfBox { .. })));
    }

    #[test]
    fn potential_bound_and_support() {
        let p = AppelParams::new(4.0, 6.0, I).unwrap();
        let c = appel_potential(&PotentialSpec::constant(Complex64::new(0.3, 0.0)), &p);
        let times: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let g = Grid1D::new(64, 5.0).unwrap();
        c.check_bound(&g, &times).unwrap();
        let peak = times.iter().map(|&t| c.eval(0.0, t).re).fold(0.0, f64::max);
        assert!((peak - 0.3 * 1.5).abs() < 1e-15);

        let bump = appel_potential(&PotentialSpec::compact_bump(1.0, 2.0), &p);
        let t = 0.5;
        let edge = 2.0 * p.denominator(t) / 24f64.sqrt();
        assert!(bump.eval(edge * 0.999, t).re > 0.0);
        assert_eq!(bump.eval(edge * 1.001, t).re, 0.0);
    }

    proptest! {
        #[test]
        fn time_map_is_increasing_bijection(a in 0.1f64..10.0, b in 0.1f64..10.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let p = AppelParams::new(a, b, I).unwrap();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(p.time_map(lo) < p.time_map(hi));
            let s = p.time_map(hi);
            prop_assert!((p.inverse().time_map(s) - hi).abs() < 1e-12);
        }
    }
}
