//! Evolution operators and closed-form solutions.
//!
//! Sign convention: `∂_t u = z(∂²u + V u)` with `z = a + ib`, `a ≥ 0`.
//! `z = i` is the Schrödinger flow, `z = a` real the heat flow.

mod airy;
mod oracle;
mod potential;
mod trajectory;

use num_complex::Complex64;

use crate::error::{precondition, Error, Result};
use crate::grid::{Grid1D, WaveField};
use crate::numerics::{fft_forward, fft_inverse, least_squares};

pub use airy::{airy_decay_fit, airy_function, airy_propagate};
pub use oracle::{counterexample_log, counterexample_modulus_sq, oracle_counterexample, oracle_gaussian};
pub use potential::{PotentialKind, PotentialSpec};
pub use trajectory::Trajectory;

/// Largest accepted time step.
pub const MAX_DT: f64 = 1e-2;
/// Growth factor on top of `e^{2M₁|z|t}` that trips the instability guard.
pub const GUARD_FACTOR: f64 = 10.0;

/// Anything that can produce `u(·, t)` on a fixed grid.
pub trait Sampler: Send + Sync {
    fn grid(&self) -> Grid1D;
    fn field_at(&self, t: f64) -> Result<WaveField>;
}

/// Closed-form Gaussian solution as a [`Sampler`].
#[derive(Debug, Clone, Copy)]
pub struct GaussianSampler {
    pub kappa: Complex64,
    pub z: Complex64,
    pub grid: Grid1D,
}

impl Sampler for GaussianSampler {
    fn grid(&self) -> Grid1D {
        self.grid
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        oracle_gaussian(self.kappa, t, self.z, &self.grid)
    }
}

/// The counterexample family as a [`Sampler`].
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleSampler {
    pub grid: Grid1D,
}

impl Sampler for CounterexampleSampler {
    fn grid(&self) -> Grid1D {
        self.grid
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        oracle_counterexample(t, &self.grid)
    }
}

/// Free evolution of fixed initial data, exact at every `t`.
#[derive(Debug, Clone)]
pub struct FreeSampler {
    pub initial: WaveField,
}

impl Sampler for FreeSampler {
    fn grid(&self) -> Grid1D {
        *self.initial.grid()
    }

    fn field_at(&self, t: f64) -> Result<WaveField> {
        Ok(free_propagate(&self.initial, t - self.initial.time()))
    }
}

/// `e^{-iξ²t}`: exact free Schrödinger evolution by `t`.
pub fn free_propagate(f: &WaveField, t: f64) -> WaveField {
    if t == 0.0 {
        return f.clone();
    }
    f.apply_multiplier(|xi| Complex64::from_polar(1.0, -xi * xi * t)).with_time(f.time() + t)
}

/// `e^{-aξ²}`: heat flow by `a`. Leaves the timestamp alone.
pub fn heat_regularize(f: &WaveField, a: f64) -> Result<WaveField> {
    precondition(a >= 0.0, || format!("heat_regularize needs a ≥ 0, got {a}"))?;
    if a == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_multiplier(|xi| Complex64::new((-a * xi * xi).exp(), 0.0)))
}

/// `h(T) = γa / (a + 4γ(a² + b²)T)`.
pub fn energy_lemma_weight(gamma: f64, z: Complex64, t: f64) -> f64 {
    gamma * z.re / (z.re + 4.0 * gamma * z.norm_sqr() * t)
}

/// Strang splitting recording every step.
pub fn split_step_evolve(
    f: &WaveField,
    v: &PotentialSpec,
    z: Complex64,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    split_step_evolve_strided(f, v, z, t_final, dt, 1)
}

/// Strang splitting (kinetic, potential, kinetic) recording every `stride`-th step
/// and the final one. `t_final` must be a whole number of steps.
pub fn split_step_evolve_strided(
    f: &WaveField,
    v: &PotentialSpec,
    z: Complex64,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    precondition(z.re >= 0.0, || format!("Re z = {} < 0", z.re))?;
    precondition(dt > 0.0 && dt <= MAX_DT * (1.0 + 1e-12), || format!("dt = {dt} outside (0, 1e-2]"))?;
    precondition(t_final > 0.0, || format!("t_final = {t_final} must be positive"))?;
    precondition(stride >= 1, || "stride must be ≥ 1".into())?;
    let steps_f = t_final / dt;
    let steps = steps_f.round() as usize;
    precondition((steps_f - steps as f64).abs() <= 1e-9 * steps_f.max(1.0), || {
        format!("t_final = {t_final} is not a multiple of dt = {dt}")
    })?;
    precondition(f.is_finite(), || "initial field is not finite".into())?;

    let grid = *f.grid();
    let t0 = f.time();
    let xs = grid.nodes();
    let half: Vec<Complex64> = grid.wavenumbers().iter().map(|&xi| (-z * xi * xi * dt * 0.5).exp()).collect();
    let static_factor: Option<Vec<Complex64>> = match v.kind() {
        PotentialKind::TimeDependent => None,
        _ => Some(xs.iter().map(|&x| (z * v.eval(x, t0) * dt).exp()).collect()),
    };

    let norm0 = f.l2_norm();
    let h = grid.spacing();
    // Adjacent kinetic half-steps are fused; `spec` carries a pending half-kick.
    let full: Vec<Complex64> = half.iter().map(|m| m * m).collect();
    let mut spec = f.samples().to_vec();
    fft_forward(&mut spec);
    spec.iter_mut().zip(&half).for_each(|(u, m)| *u *= m);
    let mut phys = vec![Complex64::new(0.0, 0.0); spec.len()];
    let mut out = vec![f.clone()];
    for k in 0..steps {
        phys.copy_from_slice(&spec);
        fft_inverse(&mut phys);
        match &static_factor {
            Some(p) => phys.iter_mut().zip(p).for_each(|(u, m)| *u *= m),
            None => {
                let tm = t0 + (k as f64 + 0.5) * dt;
                phys.iter_mut().zip(&xs).for_each(|(u, &x)| *u *= (z * v.eval(x, tm) * dt).exp());
            }
        }
        let t = t0 + (k + 1) as f64 * dt;
        let norm = (phys.iter().map(|u| u.norm_sqr()).sum::<f64>() * h).sqrt();
        let guard = norm0 * (2.0 * v.sup_bound() * z.norm() * (t - t0)).exp() * GUARD_FACTOR;
        if !norm.is_finite() || norm > guard {
            return Err(Error::Unstable { t, norm, guard });
        }
        spec.copy_from_slice(&phys);
        fft_forward(&mut spec);
        let record = (k + 1) % stride == 0 || k + 1 == steps;
        if record {
            spec.iter_mut().zip(&half).for_each(|(u, m)| *u *= m);
            phys.copy_from_slice(&spec);
            fft_inverse(&mut phys);
            out.push(WaveField::new(grid, phys.clone(), t)?);
            if k + 1 < steps {
                spec.iter_mut().zip(&half).for_each(|(u, m)| *u *= m);
            }
        } else {
            spec.iter_mut().zip(&full).for_each(|(u, m)| *u *= m);
        }
    }
    Trajectory::new(out, z, v.clone(), dt)
}

/// Errors of Strang splitting against a run at an eighth of the finest step.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderEstimate {
    pub dts: Vec<f64>,
    /// Relative L² error of `u(t_final)` for each step.
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln dt`.
    pub order: f64,
}

pub fn observed_order(f: &WaveField, v: &PotentialSpec, z: Complex64, t_final: f64, dts: &[f64]) -> Result<OrderEstimate> {
    precondition(dts.len() >= 2, || "order estimate needs at least two steps".into())?;
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let run = |dt: f64| -> Result<WaveField> {
        let steps = (t_final / dt).round() as usize;
        Ok(split_step_evolve_strided(f, v, z, t_final, dt, steps)?.last().clone())
    };
    let reference = run(finest / 8.0)?;
    let errors = dts.iter().map(|&dt| run(dt).map(|u| u.relative_l2_error(&reference))).collect::<Result<Vec<_>>>()?;
    precondition(errors.iter().all(|e| *e > 0.0), || "splitting error vanished; nothing to fit".into())?;
    let cols = vec![dts.iter().map(|d| d.ln()).collect(), vec![1.0; dts.len()]];
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let order = least_squares(&cols, &y)[0];
    Ok(OrderEstimate { dts: dts.to_vec(), errors, order })
}
