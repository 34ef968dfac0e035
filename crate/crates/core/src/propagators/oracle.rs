use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Grid1D, WaveField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gaussian evolved by `∂_t u = z ∂²u`:
/// `(1 + 4κzt)^{-1/2} exp(-κx² / (1 + 4κzt))`.
pub fn oracle_gaussian(kappa: Complex64, t: f64, z: Complex64, grid: &Grid1D) -> Result<WaveField> {
    let d = Complex64::new(1.0, 0.0) + 4.0 * kappa * z * t;
    let pre = d.sqrt().inv();
    let k = kappa / d;
    WaveField::from_fn(*grid, t, |x| pre * (-k * x * x).exp())
}

/// `u = (t - i)^{-1/2} exp(i x² / (4(t - i)))`, a free solution with
/// `|u|² = (1 + t²)^{-1/2} exp(-x² / (2(1 + t²)))`.
pub fn oracle_counterexample(t: f64, grid: &Grid1D) -> Result<WaveField> {
    let s = Complex64::new(t, -1.0);
    let pre = s.sqrt().inv();
    WaveField::from_fn(*grid, t, |x| pre * (I * x * x / (4.0 * s)).exp())
}

/// `ln u(x, t)` of [`oracle_counterexample`] on the principal branch; finite where `u` underflows.
pub fn counterexample_log(x: f64, t: f64) -> Complex64 {
    let s = Complex64::new(t, -1.0);
    -0.5 * s.ln() + I * x * x / (4.0 * s)
}

/// Closed-form `|u|²` of [`oracle_counterexample`].
pub fn counterexample_modulus_sq(x: f64, t: f64) -> f64 {
    let q = 1.0 + t * t;
    q.powf(-0.5) * (-x * x / (2.0 * q)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian;

    #[test]
    fn counterexample_modulus_matches_closed_form() {
        let g = Grid1D::new(512, 20.0).unwrap();
        for t in [-1.0, 0.0, 0.5, 1.0] {
            let u = oracle_counterexample(t, &g).unwrap();
            let worst = g
                .nodes()
                .iter()
                .zip(u.samples())
                .map(|(&x, v)| (v.norm_sqr() - counterexample_modulus_sq(x, t)).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-12, "t={t}: {worst}");
        }
    }

    #[test]
    fn log_form_agrees_with_samples() {
        let g = Grid1D::new(256, 10.0).unwrap();
        let u = oracle_counterexample(0.7, &g).unwrap();
        for (x, v) in g.nodes().iter().zip(u.samples()) {
            assert!((counterexample_log(*x, 0.7).exp() - v).norm() < 1e-14);
        }
    }

    #[test]
    fn counterexample_solves_free_equation() {
        let g = Grid1D::new(1024, 40.0).unwrap();
        let dt = 1e-4;
        let t = 0.3;
        let up = oracle_counterexample(t + dt, &g).unwrap();
        let um = oracle_counterexample(t - dt, &g).unwrap();
        let u = oracle_counterexample(t, &g).unwrap();
        let ut = up.sub(&um).scaled(Complex64::new(0.5 / dt, 0.0));
        let res = ut.sub(&laplacian(&u).scaled(I));
        assert!(res.l2_norm() <= 1e-6, "{}", res.l2_norm());
    }

    #[test]
    fn gaussian_at_zero_time_is_initial_profile() {
        let g = Grid1D::new(64, 8.0).unwrap();
        let u = oracle_gaussian(Complex64::new(1.0, 0.0), 0.0, I, &g).unwrap();
        for (x, v) in g.nodes().iter().zip(u.samples()) {
            assert!((v.re - (-x * x).exp()).abs() < 1e-15 && v.im == 0.0);
        }
    }
}
