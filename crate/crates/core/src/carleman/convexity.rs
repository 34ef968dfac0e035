//! The moving-centre Carleman inequality
//! `∫∫ [ψ″ − R⁴φ″²/(32μ)] e^{2ψ} e^{2μ(x/R+φ)²}|g|² ≤ ∫∫ e^{2ψ} e^{2μ(x/R+φ)²}|(i∂_t+∂²)g|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::grid::{laplacian, Grid1D, TimePoly, WaveField, BOUNDARY_TOLERANCE};
use crate::numerics::{bump, d1_central6_c, simpson, LogSum};
use crate::weyl::{Param, Poly, Sym};

/// Spatial profile of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Profile {
    /// `e^{−((x−c)/w)²}`.
    Gaussian,
    /// Compact bump on `|x − c| < w`.
    Bump,
}

/// `g(x,t) = P((x−c)/w) e^{ikx} E(t)` with `E` a compact bump on `(t_lo, t_hi)`.
#[derive(Debug, Clone, Serialize)]
pub struct TestFunction {
    pub name: String,
    pub profile: Profile,
    pub center: f64,
    pub width: f64,
    pub frequency: f64,
    pub t_window: (f64, f64),
    pub amplitude: f64,
}

impl TestFunction {
    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        let (lo, hi) = self.t_window;
        let env = bump((t - 0.5 * (lo + hi)) / (0.5 * (hi - lo)));
        if env == 0.0 || self.amplitude == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = (x - self.center) / self.width;
        let p = match self.profile {
            Profile::Gaussian => (-s * s).exp(),
            Profile::Bump => bump(s),
        };
        Complex64::from_polar(self.amplitude * p * env, self.frequency * x)
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            profile: Profile::Gaussian,
            center: 0.0,
            width: 1.0,
            frequency: 0.0,
            t_window: (0.25, 0.75),
            amplitude: 0.0,
        }
    }
}

fn tf(name: &str, profile: Profile, center: f64, width: f64, frequency: f64, t_window: (f64, f64)) -> TestFunction {
    TestFunction { name: name.into(), profile, center, width, frequency, t_window, amplitude: 1.0 }
}

/// The fixed five-member library.
pub fn test_library() -> Vec<TestFunction> {
    vec![
        tf("gauss-5", Profile::Gaussian, 5.0, 1.0, 0.0, (0.1, 0.9)),
        tf("bump-0", Profile::Bump, 0.0, 3.0, 0.0, (0.2, 0.8)),
        tf("bump-left", Profile::Bump, -4.0, 2.5, 0.0, (0.05, 0.6)),
        tf("packet", Profile::Bump, 2.0, 3.0, 2.0, (0.3, 0.95)),
        tf("late-narrow", Profile::Gaussian, -2.0, 0.7, -1.0, (0.55, 0.9)),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanCase {
    pub g: TestFunction,
    pub r: f64,
    pub mu: f64,
    pub eps: f64,
    /// Centre path `φ(t)`; the weight is `e^{2μ(x/R+φ)²}`.
    pub phi: TimePoly,
    pub psi: TimePoly,
    pub grid: Grid1D,
    pub intervals: usize,
}

impl CarlemanCase {
    /// `φ = t(1−t)`, `ψ = −(1+ε)R⁴/(16μ)·t(1−t)`, `μ = (1+ε)^{−3}γR²`.
    pub fn standard(g: TestFunction, r: f64, gamma: f64, eps: f64) -> Result<Self> {
        let mu = gamma * r * r / (1.0 + eps).powi(3);
        let c = -(1.0 + eps) * r.powi(4) / (16.0 * mu);
        Ok(Self {
            g,
            r,
            mu,
            eps,
            phi: TimePoly::parabola(),
            psi: TimePoly(vec![0.0, c, -c]),
            grid: Grid1D::new(2048, 20.0)?,
            intervals: 400,
        })
    }

    /// `ψ″(t) − R⁴φ″(t)²/(32μ)`.
    pub fn prefactor(&self, t: f64) -> f64 {
        let phi2 = self.phi.derivative().derivative().eval(t);
        self.psi.derivative().derivative().eval(t) - self.r.powi(4) * phi2 * phi2 / (32.0 * self.mu)
    }

    fn log_weight(&self, x: f64, t: f64) -> f64 {
        let q = x / self.r + self.phi.eval(t);
        2.0 * self.psi.eval(t) + 2.0 * self.mu * q * q
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanReport {
    pub name: String,
    pub r: f64,
    pub mu: f64,
    pub eps: f64,
    /// Both sides are reported divided by `e^{log_scale}`.
    pub lhs: f64,
    pub rhs: f64,
    pub log_scale: f64,
    pub ratio: f64,
    pub pass: bool,
    pub max_boundary_ratio: f64,
    pub max_spectral_tail: f64,
}

/// Relative slack in `lhs ≤ rhs(1 + slack)`.
pub const CARLEMAN_SLACK: f64 = 1e-8;

/// Time step for the sixth-order difference in `t`.
const FD_STEP: f64 = 1e-3;

pub fn convexity_carleman(case: &CarlemanCase) -> Result<CarlemanReport> {
    precondition(case.mu > 0.0, || format!("mu = {} must be positive", case.mu))?;
    precondition(case.r >= 4.0, || format!("R = {} below 4", case.r))?;
    precondition(case.intervals >= 16 && case.intervals.is_multiple_of(2), || "need an even interval count ≥ 16".into())?;
    let (lo, hi) = case.g.t_window;
    precondition(0.0 < lo && lo < hi && hi < 1.0, || format!("time window ({lo}, {hi}) must sit inside (0, 1)"))?;
    let grid = case.grid;
    let nodes = grid.nodes();
    let dt = 1.0 / case.intervals as f64;
    let h = grid.spacing();
    let mut max_boundary: f64 = 0.0;
    let mut max_tail: f64 = 0.0;
    // Per slice: log of Σ_x W|g|² h and Σ_x W|Lg|² h.
    let mut slices = Vec::with_capacity(case.intervals + 1);
    for k in 0..=case.intervals {
        let t = k as f64 * dt;
        let g = WaveField::from_fn(grid, t, |x| case.g.eval(x, t))?;
        if g.max_abs() == 0.0 {
            slices.push((f64::NEG_INFINITY, f64::NEG_INFINITY));
            continue;
        }
        let res = g.resolution();
        max_boundary = max_boundary.max(res.boundary_ratio);
        max_tail = max_tail.max(res.spectral_tail);
        let lap = laplacian(&g);
        let (mut sg, mut sl) = (LogSum::new(), LogSum::new());
        for (j, &x) in nodes.iter().enumerate() {
            let w: [Complex64; 7] = std::array::from_fn(|m| case.g.eval(x, t + (m as f64 - 3.0) * FD_STEP));
            let lg = Complex64::i() * d1_central6_c(w, FD_STEP) + lap.samples()[j];
            let lw = case.log_weight(x, t) + h.ln();
            sg.add(lw + g.samples()[j].norm_sqr().ln());
            sl.add(lw + lg.norm_sqr().ln());
        }
        slices.push((sg.ln(), sl.ln()));
    }
    if max_boundary > BOUNDARY_TOLERANCE {
        return Err(Error::UnderResolved(format!("test function reaches the box edge: ratio {max_boundary:e}")));
    }
    if max_tail > crate::grid::SPECTRAL_TAIL_TOLERANCE {
        return Err(Error::UnderResolved(format!("test function spectral tail {max_tail:e}")));
    }
    let scale = slices.iter().flat_map(|&(a, b)| [a, b]).fold(f64::NEG_INFINITY, f64::max);
    let (lhs, rhs) = if scale == f64::NEG_INFINITY {
        (0.0, 0.0)
    } else {
        let lv: Vec<f64> =
            slices.iter().enumerate().map(|(k, s)| case.prefactor(k as f64 * dt) * (s.0 - scale).exp()).collect();
        let rv: Vec<f64> = slices.iter().map(|s| (s.1 - scale).exp()).collect();
        (simpson(&lv, dt), simpson(&rv, dt))
    };
    let scale = if scale.is_finite() { scale } else { 0.0 };
    Ok(CarlemanReport {
        name: case.g.name.clone(),
        r: case.r,
        mu: case.mu,
        eps: case.eps,
        lhs,
        rhs,
        log_scale: scale,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        pass: lhs <= rhs * (1.0 + CARLEMAN_SLACK),
        max_boundary_ratio: max_boundary,
        max_spectral_tail: max_tail,
    })
}

/// Polynomial in `t` with symbolic coefficients.
#[derive(Debug, Clone, PartialEq)]
struct TPoly(Vec<Poly>);

impl TPoly {
    fn derivative(&self) -> TPoly {
        TPoly(self.0.iter().enumerate().skip(1).map(|(k, c)| c.mul(&Poly::int(k as i64))).collect())
    }

    fn mul(&self, o: &TPoly) -> TPoly {
        let mut out = vec![Poly::zero(); (self.0.len() + o.0.len()).saturating_sub(1)];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TPoly(out)
    }

    fn scale(&self, c: &Poly) -> TPoly {
        TPoly(self.0.iter().map(|p| p.mul(c)).collect())
    }

    fn sub(&self, o: &TPoly) -> TPoly {
        let n = self.0.len().max(o.0.len());
        TPoly((0..n).map(|k| self.0.get(k).cloned().unwrap_or_default().sub(&o.0.get(k).cloned().unwrap_or_default())).collect())
    }

    /// Coefficients with trailing zeros removed.
    fn trimmed(mut self) -> Vec<Poly> {
        while self.0.last().is_some_and(Poly::is_zero) {
            self.0.pop();
        }
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct PrefactorIdentity {
    /// `ψ″ − R⁴φ″²/(32μ)` as a polynomial in `t` (ascending coefficients).
    pub computed: Vec<Poly>,
    pub expected: Poly,
    pub exact: bool,
}

/// Symbolic check that `φ = t(1−t)`, `ψ = −(1+ε)R⁴/(16μ)·t(1−t)` give the constant `εR⁴/(8μ)`.
pub fn prefactor_identity() -> PrefactorIdentity {
    let (eps, r4) = (Poly::param(Param::Eps), Poly::param(Param::R).powi(4));
    let inv_mu = Poly::pow(Sym::Param(Param::Mu), -1);
    let phi = TPoly(vec![Poly::zero(), Poly::one(), Poly::int(-1)]);
    let c = Poly::one().add(&eps).mul(&r4).mul(&inv_mu).mul(&Poly::rat(-1, 16));
    let psi = phi.scale(&c);
    let phi2 = phi.derivative().derivative();
    let computed = psi
        .derivative()
        .derivative()
        .sub(&phi2.mul(&phi2).scale(&r4.mul(&inv_mu).mul(&Poly::rat(1, 32))))
        .trimmed();
    let expected = eps.mul(&r4).mul(&inv_mu).mul(&Poly::rat(1, 8));
    let exact = computed.len() == 1 && computed[0] == expected;
    PrefactorIdentity { computed, expected, exact }
}
