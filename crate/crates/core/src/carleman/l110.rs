//! The exterior Carleman estimate
//! `(α^{3/2}/R²)‖e^{α(x/R+φ)²}g‖ ≤ C‖e^{α(x/R+φ)²}(i∂_t+∂²)g‖` for `|x/R + φ| ≥ 1` on `supp g`.
//!
//! The constant is unknown; the bench measures it on wave packets that nearly saturate the
//! estimate. With `f = e^{w}g`, `w = α(x/R+φ)²`, both norms are evaluated through the
//! conjugated operator `P = e^{w}(i∂_t+∂²)e^{−w}`, since `g` itself underflows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::grid::{spectral_derivative, Grid1D, WaveField};
use crate::numerics::{bump, bump_prime, simpson};

/// `f = A e^{ikx}` with `A = G(x − x_c(t)) E(t)`, riding the level set `x/R + φ(t) = y0`.
///
/// The centre path is linear, `φ(t) = (4αy0/R²)(t − t_center)`, and `k = −Rφ′/2`;
/// with these choices the zeroth-order symbol of `P` vanishes on the packet's centre line.
#[derive(Debug, Clone, Serialize)]
pub struct WavePacket {
    pub name: String,
    pub y0: f64,
    /// Half-width of the compact bump `G` in `x`.
    pub width: f64,
    pub t_center: f64,
    pub t_half: f64,
    pub amplitude: f64,
}

fn packet(name: &str, y0: f64, width: f64, t_center: f64, t_half: f64) -> WavePacket {
    WavePacket { name: name.into(), y0, width, t_center, t_half, amplitude: 1.0 }
}

pub fn packet_library() -> Vec<WavePacket> {
    vec![
        packet("y1.5", 1.5, 1.0, 0.5, 0.3),
        packet("y1.25", 1.25, 1.0, 0.4, 0.2),
        packet("y2-narrow", 2.0, 0.75, 0.6, 0.25),
        packet("y1.5-wide", 1.5, 1.5, 0.5, 0.4),
        packet("y1.75", 1.75, 1.0, 0.5, 0.3),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct L110Case {
    pub packet: WavePacket,
    pub r: f64,
    pub alpha: f64,
    pub n_points: usize,
    pub intervals: usize,
}

impl L110Case {
    /// `α = 8R²`.
    pub fn standard(packet: WavePacket, r: f64) -> Self {
        Self { packet, r, alpha: 8.0 * r * r, n_points: 256, intervals: 400 }
    }

    /// Slope of the centre path.
    pub fn phi_slope(&self) -> f64 {
        4.0 * self.alpha * self.packet.y0 / (self.r * self.r)
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi_slope() * (t - self.packet.t_center)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct L110Report {
    pub name: String,
    pub r: f64,
    pub alpha: f64,
    /// `‖e^{w}g‖`.
    pub lhs_norm: f64,
    /// `‖e^{w}(i∂_t+∂²)g‖`.
    pub rhs_norm: f64,
    /// `(α^{3/2}/R²)·lhs/rhs`; `None` for the zero function.
    pub constant: Option<f64>,
    pub min_abs_y: f64,
}

pub fn schrodinger_carleman_l110(case: &L110Case) -> Result<L110Report> {
    let (r, alpha, p) = (case.r, case.alpha, &case.packet);
    precondition(r > 0.0, || format!("R = {r} must be positive"))?;
    precondition(alpha >= 8.0 * r * r * (1.0 - 1e-12), || format!("alpha = {alpha} below 8R² = {}", 8.0 * r * r))?;
    precondition(case.intervals >= 16 && case.intervals.is_multiple_of(2), || "need an even interval count ≥ 16".into())?;
    precondition(p.t_center - p.t_half > 0.0 && p.t_center + p.t_half < 1.0, || "time support must sit inside (0, 1)".into())?;
    let local = Grid1D::new(case.n_points, 2.0 * p.width)?;
    let zeta = local.nodes();
    let g = WaveField::from_fn(local, 0.0, |s| Complex64::new(bump(s / p.width), 0.0))?;
    let res = g.resolution();
    if !res.spectrally_resolved() {
        return Err(Error::UnderResolved(format!("packet profile spectral tail {:e}", res.spectral_tail)));
    }
    let g1 = spectral_derivative(&g, 1)?.field;
    let g2 = spectral_derivative(&g, 2)?.field;

    let slope = case.phi_slope();
    let k = -r * slope / 2.0;
    let i = Complex64::i();
    let dt = 2.0 * p.t_half / case.intervals as f64;
    let h = local.spacing();
    let mut min_abs_y = f64::INFINITY;
    let mut lhs = Vec::with_capacity(case.intervals + 1);
    let mut rhs = Vec::with_capacity(case.intervals + 1);
    for n in 0..=case.intervals {
        let t = p.t_center - p.t_half + n as f64 * dt;
        let s = (t - p.t_center) / p.t_half;
        let (e, de) = (p.amplitude * bump(s), p.amplitude * bump_prime(s) / p.t_half);
        let phi = case.phi(t);
        let xc = r * (p.y0 - phi);
        let dxc = -r * slope;
        let (mut sl, mut sr) = (0.0, 0.0);
        for (j, &z) in zeta.iter().enumerate() {
            let (gv, d1, d2) = (g.samples()[j], g1.samples()[j], g2.samples()[j]);
            let a = gv * e;
            if a.norm() == 0.0 && (d1 * e).norm() == 0.0 && gv * de == Complex64::new(0.0, 0.0) {
                continue;
            }
            let x = xc + z;
            let y = x / r + phi;
            if gv.norm() > 0.0 && e > 0.0 {
                if y.abs() < 1.0 {
                    return Err(Error::SupportViolation { x, t, value: y });
                }
                min_abs_y = min_abs_y.min(y.abs());
            }
            let wx = 2.0 * alpha * y / r;
            let wxx = 2.0 * alpha / (r * r);
            let wt = 2.0 * alpha * y * slope;
            let ax = d1 * e;
            let at = -dxc * d1 * e + gv * de;
            let pa = i * at + d2 * e + (2.0 * i * k - 2.0 * wx) * ax + (wx * wx - k * k - wxx) * a - i * (wt + 2.0 * wx * k) * a;
            sl += a.norm_sqr() * h;
            sr += pa.norm_sqr() * h;
        }
        lhs.push(sl);
        rhs.push(sr);
    }
    let (l, rr) = (simpson(&lhs, dt).sqrt(), simpson(&rhs, dt).sqrt());
    let constant = (l > 0.0).then(|| alpha.powf(1.5) / (r * r) * l / rr);
    Ok(L110Report { name: p.name.clone(), r, alpha, lhs_norm: l, rhs_norm: rr, constant, min_abs_y })
}

#[derive(Debug, Clone, Serialize)]
pub struct L110Stability {
    pub radii: Vec<f64>,
    pub rows: Vec<L110Report>,
    /// Per packet, `max_R |C_R / mean_R C − 1|`.
    pub spreads: Vec<(String, f64)>,
    pub max_spread: f64,
    pub stable: bool,
}

/// Relative band for the measured constant across radii.
pub const L110_STABILITY_BAND: f64 = 0.2;

/// Runs every packet at every radius with `n_points` local nodes and `intervals` time steps.
pub fn l110_stability(packets: &[WavePacket], radii: &[f64], n_points: usize, intervals: usize) -> Result<L110Stability> {
    let jobs: Vec<(usize, usize)> = (0..packets.len()).flat_map(|a| (0..radii.len()).map(move |b| (a, b))).collect();
    let rows: Vec<L110Report> = jobs
        .par_iter()
        .map(|&(a, b)| {
            let case = L110Case { n_points, intervals, ..L110Case::standard(packets[a].clone(), radii[b]) };
            schrodinger_carleman_l110(&case)
        })
        .collect::<Result<_>>()?;
    let mut spreads = Vec::new();
    for (a, p) in packets.iter().enumerate() {
        let cs: Vec<f64> = rows[a * radii.len()..(a + 1) * radii.len()].iter().filter_map(|r| r.constant).collect();
        if cs.is_empty() {
            continue;
        }
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        spreads.push((p.name.clone(), cs.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0, f64::max)));
    }
    let max_spread = spreads.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(L110Stability { radii: radii.to_vec(), rows, spreads, max_spread, stable: max_spread <= L110_STABILITY_BAND })
}
