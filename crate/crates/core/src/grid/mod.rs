//! Periodic spatial grid, spectral calculus and weighted L² functionals.
//!
//! Fourier convention, used everywhere in the crate:
//! `û(ξ_k) = Σ_j u_j e^{-iξ_k x_j} h` with `ξ_k = πk/L`, `k ∈ [-n/2, n/2)`,
//! nodes `x_j = -L + j h`, `h = 2L/n`. The node set contains `-L` but not `+L`
//! (the periodic image of `-L`), so it is symmetric about 0 up to one node.

mod io;
mod weight;

pub use io::{read_binary, read_csv, write_binary, write_csv, BINARY_MAGIC};
pub use weight::{
    lambda_average_identity_check, weighted_integral, weighted_l2_norm, weighted_log_integral, TimePoly, WeightSpec,
    WeightedNorm,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft_forward, fft_inverse};

/// Amplitude ratio at the box edge below which a field counts as spatially resolved.
pub const BOUNDARY_TOLERANCE: f64 = 1e-14;
/// Spectral energy fraction in the top 10% of frequencies allowed for a resolved field.
pub const SPECTRAL_TAIL_TOLERANCE: f64 = 1e-10;
/// Boundary ratio accepted for evolved fields: transform roundoff alone leaves
/// about `ε√N ‖f‖` at every node, which already reaches `1e-14 max|f|`.
pub const ROUNDOFF_BOUNDARY_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    half_width: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, half_width: f64) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self { n_points, half_width })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Integer mode index of FFT slot `k` (`0..n/2-1`, then `-n/2..-1`).
    pub fn mode_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular wavenumbers `ξ_k = πk/L` in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = std::f64::consts::PI / self.half_width;
        (0..self.n_points).map(|k| dk * self.mode_index(k) as f64).collect()
    }

    /// Same grid with twice the points on the same box.
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points, half_width: self.half_width }
    }
}

/// Quality indicators for a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// `max(|f_0|, |f_{n-1}|) / max_j |f_j|`.
    pub boundary_ratio: f64,
    /// Fraction of spectral energy in the top 10% of |k|.
    pub spectral_tail: f64,
}

impl Resolution {
    pub fn spectrally_resolved(&self) -> bool {
        self.spectral_tail <= SPECTRAL_TAIL_TOLERANCE
    }

    pub fn is_resolved(&self) -> bool {
        self.boundary_ratio <= BOUNDARY_TOLERANCE && self.spectrally_resolved()
    }

    /// As [`Resolution::is_resolved`] with the boundary test relaxed to
    /// [`ROUNDOFF_BOUNDARY_TOLERANCE`], for fields that went through many FFTs.
    pub fn is_resolved_to_roundoff(&self) -> bool {
        self.boundary_ratio <= ROUNDOFF_BOUNDARY_TOLERANCE && self.spectrally_resolved()
    }
}

/// Complex samples of `u(·, t)` on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid1D,
    samples: Vec<Complex64>,
    time: f64,
}

impl WaveField {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>, time: f64) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::Format(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                samples.len()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("field sample {j}")));
        }
        if !time.is_finite() {
            return Err(Error::NonFinite("field time".into()));
        }
        Ok(Self { grid, samples, time })
    }

    /// Samples `f(x_j)` on every node.
    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, samples, time)
    }

    pub fn zeros(grid: Grid1D, time: f64) -> Self {
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); grid.n_points()], time }
    }

    pub(crate) fn from_parts_unchecked(grid: Grid1D, samples: Vec<Complex64>, time: f64) -> Self {
        Self { grid, samples, time }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(Σ |f_j|² h)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    /// Unweighted `‖f − g‖`.
    pub fn l2_distance(&self, other: &WaveField) -> f64 {
        let h = self.grid.spacing();
        (self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * h)
            .sqrt()
    }

    /// `‖f − g‖ / ‖g‖`.
    pub fn relative_l2_error(&self, reference: &WaveField) -> f64 {
        self.l2_distance(reference) / reference.l2_norm()
    }

    pub fn max_pointwise_distance(&self, other: &WaveField) -> f64 {
        self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Spectral coefficients `û(ξ_k)` in FFT order, with the crate's convention.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        fft_forward(&mut buf);
        let h = self.grid.spacing();
        for (k, v) in buf.iter_mut().enumerate() {
            // e^{iξ_k L} = (-1)^k
            let sign = if self.grid.mode_index(k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *v *= sign * h;
        }
        buf
    }

    /// `(2L)^{-1} Σ_k |û_k|²`, equal to `‖f‖²` by Parseval.
    pub fn spectral_energy(&self) -> f64 {
        self.spectrum().iter().map(|v| v.norm_sqr()).sum::<f64>() / (2.0 * self.grid.half_width())
    }

    pub fn resolution(&self) -> Resolution {
        let n = self.grid.n_points();
        let max = self.max_abs();
        let boundary = self.samples[0].norm().max(self.samples[n - 1].norm());
        let boundary_ratio = if max > 0.0 { boundary / max } else { 0.0 };
        let mut buf = self.samples.clone();
        fft_forward(&mut buf);
        let cutoff = 0.9 * (n / 2) as f64;
        let (mut tail, mut total) = (0.0, 0.0);
        for (k, v) in buf.iter().enumerate() {
            let e = v.norm_sqr();
            total += e;
            if (self.grid.mode_index(k).abs() as f64) > cutoff {
                tail += e;
            }
        }
        let spectral_tail = if total > 0.0 { tail / total } else { 0.0 };
        Resolution { boundary_ratio, spectral_tail }
    }

    /// Applies the Fourier multiplier `m(ξ)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> WaveField {
        let mut buf = self.samples.clone();
        fft_forward(&mut buf);
        for (v, xi) in buf.iter_mut().zip(self.grid.wavenumbers()) {
            *v *= m(xi);
        }
        fft_inverse(&mut buf);
        WaveField::from_parts_unchecked(self.grid, buf, self.time)
    }

    /// Pointwise map `f_j -> g(x_j, f_j)`.
    pub fn map_with_x(&self, g: impl Fn(f64, Complex64) -> Complex64) -> WaveField {
        let samples =
            self.samples.iter().enumerate().map(|(j, v)| g(self.grid.node(j), *v)).collect();
        WaveField::from_parts_unchecked(self.grid, samples, self.time)
    }

    pub fn scaled(&self, c: Complex64) -> WaveField {
        self.map_with_x(|_, v| c * v)
    }

    pub fn add(&self, other: &WaveField) -> WaveField {
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        WaveField::from_parts_unchecked(self.grid, samples, self.time)
    }

    pub fn sub(&self, other: &WaveField) -> WaveField {
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        WaveField::from_parts_unchecked(self.grid, samples, self.time)
    }

    /// Band-limited (trigonometric) interpolant evaluated at arbitrary points.
    ///
    /// The Nyquist mode is split symmetrically so the interpolant of a real field stays real.
    pub fn interpolate(&self, points: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let l = self.grid.half_width();
        let mut coef = self.samples.clone();
        fft_forward(&mut coef);
        coef.iter_mut().for_each(|c| *c /= n as f64);
        let dk = std::f64::consts::PI / l;
        let half = n / 2;
        points
            .iter()
            .map(|&y| {
                let s = y + l; // distance from the first node
                let step = Complex64::from_polar(1.0, dk * s);
                // k = 0 .. half-1
                let mut acc = Complex64::new(0.0, 0.0);
                let mut phase = Complex64::new(1.0, 0.0);
                for c in coef.iter().take(half) {
                    acc += c * phase;
                    phase *= step;
                }
                // negative modes k = -1 .. -(half-1)
                let back = step.conj();
                let mut phase = back;
                for k in 1..half {
                    acc += coef[n - k] * phase;
                    phase *= back;
                }
                // Nyquist, split between ±half
                let nyq = coef[half];
                let ang = dk * half as f64 * s;
                acc + nyq * ang.cos()
            })
            .collect()
    }
}

/// Result of a spectral derivative.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub field: WaveField,
    /// Input spectral tail exceeded [`SPECTRAL_TAIL_TOLERANCE`].
    pub under_resolved: bool,
}

/// Derivative of order 1, 2 or 3 by the Fourier multiplier `(iξ)^order`.
///
/// For odd orders the Nyquist mode is dropped (its derivative is not representable).
pub fn spectral_derivative(f: &WaveField, order: u32) -> Result<Derivative> {
    if !(1..=3).contains(&order) {
        return Err(Error::Precondition(format!("derivative order must be 1, 2 or 3, got {order}")));
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("spectral_derivative input".into()));
    }
    let under_resolved = !f.resolution().spectrally_resolved();
    let nyquist = std::f64::consts::PI * (f.grid().n_points() / 2) as f64 / f.grid().half_width();
    let field = f.apply_multiplier(|xi| {
        if order % 2 == 1 && (xi.abs() - nyquist).abs() < 1e-9 * nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi).powu(order)
        }
    });
    Ok(Derivative { field, under_resolved })
}

/// Spectral second derivative without the resolution bookkeeping.
pub fn laplacian(f: &WaveField) -> WaveField {
    f.apply_multiplier(|xi| Complex64::new(-xi * xi, 0.0))
}
