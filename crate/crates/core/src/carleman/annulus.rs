//! Lower bound for the space-time mass in unit annuli,
//! `δ(R) = (∫₀¹∫_{R−1≤|x|≤R} |u|² + |∂_x u|²)^{1/2}`.

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::grid::{spectral_derivative, Grid1D};
use crate::numerics::{golden_max, least_squares, simpson};
use crate::propagators::Sampler;

/// Minimum central mass `∫₀¹∫_{|x|<1}|u|²`.
pub const CENTRAL_MASS_FLOOR: f64 = 1e-2;
/// Values of `δ` below this are dropped from the fit.
pub const DELTA_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Serialize)]
pub struct AnnulusFit {
    pub radii: Vec<f64>,
    pub log_delta: Vec<f64>,
    /// Fitted model `log δ(R) = −c R^p + b R + d + e ln R`.
    pub p: f64,
    pub c: f64,
    pub lower_order: [f64; 3],
    pub rms_residual: f64,
    pub central_mass: f64,
    pub energy: f64,
    pub excluded: usize,
}

/// Share of the cell `[x − h/2, x + h/2]` inside `lo ≤ |x| ≤ hi`.
fn cell_fraction(x: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let overlap = |a: f64, b: f64| ((x + h / 2.0).min(b) - (x - h / 2.0).max(a)).max(0.0);
    (overlap(lo, hi) + overlap(-hi, -lo)) / h
}

/// `(δ(R)² per radius, central mass, total energy)` with Simpson in `t` on `intervals` steps.
pub fn annulus_masses(u: &dyn Sampler, radii: &[f64], intervals: usize) -> Result<(Vec<f64>, f64, f64)> {
    precondition(intervals >= 16 && intervals.is_multiple_of(2), || "need an even interval count ≥ 16".into())?;
    let grid: Grid1D = u.grid();
    let l = grid.half_width();
    precondition(radii.iter().all(|&r| r >= 1.0 && r < l), || format!("radii must lie in [1, {l})"))?;
    let h = grid.spacing();
    let nodes = grid.nodes();
    let dt = 1.0 / intervals as f64;
    let mut per_r = vec![Vec::with_capacity(intervals + 1); radii.len()];
    let mut central = Vec::with_capacity(intervals + 1);
    let mut energy = Vec::with_capacity(intervals + 1);
    for k in 0..=intervals {
        let f = u.field_at(k as f64 * dt)?;
        let d = spectral_derivative(&f, 1)?;
        let dens: Vec<f64> =
            f.samples().iter().zip(d.field.samples()).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        for (j, &r) in radii.iter().enumerate() {
            per_r[j].push(nodes.iter().zip(&dens).map(|(&x, &v)| v * cell_fraction(x, h, r - 1.0, r)).sum::<f64>() * h);
        }
        central.push(
            nodes.iter().zip(f.samples()).map(|(&x, v)| v.norm_sqr() * cell_fraction(x, h, 0.0, 1.0)).sum::<f64>() * h,
        );
        energy.push(dens.iter().sum::<f64>() * h);
    }
    Ok((per_r.iter().map(|v| simpson(v, dt)).collect(), simpson(&central, dt), simpson(&energy, dt)))
}

fn fit_at(p: f64, radii: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let cols = vec![
        radii.iter().map(|r| -r.powf(p)).collect(),
        radii.to_vec(),
        vec![1.0; radii.len()],
        radii.iter().map(|r| r.ln()).collect(),
    ];
    let coef = least_squares(&cols, y);
    let rss: f64 = (0..y.len())
        .map(|i| {
            let m: f64 = cols.iter().zip(&coef).map(|(c, a)| c[i] * a).sum();
            (y[i] - m).powi(2)
        })
        .sum();
    (coef, rss)
}

pub fn annulus_lower_bound_scan(u: &dyn Sampler, radii: &[f64], intervals: usize) -> Result<AnnulusFit> {
    let (masses, central, energy) = annulus_masses(u, radii, intervals)?;
    if !(central >= CENTRAL_MASS_FLOOR) {
        return Err(Error::Precondition(format!("central mass {central:e} below {CENTRAL_MASS_FLOOR:e}")));
    }
    let (mut rs, mut ys) = (Vec::new(), Vec::new());
    for (&r, &m) in radii.iter().zip(&masses) {
        let d = m.sqrt();
        if d >= DELTA_FLOOR {
            rs.push(r);
            ys.push(d.ln());
        }
    }
    precondition(rs.len() >= 6, || format!("only {} radii above the floor", rs.len()))?;
    // Coarse scan then golden refinement of the residual minimum in p.
    let coarse = (0..=200).map(|k| 1.0 + k as f64 * 0.01).min_by(|a, b| fit_at(*a, &rs, &ys).1.total_cmp(&fit_at(*b, &rs, &ys).1));
    let p0 = coarse.unwrap_or(2.0);
    let (p, _) = golden_max(|p| -fit_at(p, &rs, &ys).1, (p0 - 0.01).max(1.0), (p0 + 0.01).min(3.0), 1e-8);
    let (coef, rss) = fit_at(p, &rs, &ys);
    Ok(AnnulusFit {
        log_delta: ys,
        radii: rs,
        p,
        c: coef[0],
        lower_order: [coef[1], coef[2], coef[3]],
        rms_residual: (rss / radii.len() as f64).sqrt(),
        central_mass: central,
        energy,
        excluded: radii.len() - masses.iter().filter(|m| m.sqrt() >= DELTA_FLOOR).count(),
    })
}
