use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::numerics::{bump, trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    StaticReal,
    StaticComplex,
    TimeDependent,
}

type Evaluator = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// A potential `V(x, t)` with its declared sup bound `M₁ = ‖V‖_∞`.
///
/// Registered families carry a parseable id (`zero`, `sech2:A`, `bump:A:r`,
/// `const:re:im`) so trajectories can be restored from disk.
#[derive(Clone)]
pub struct PotentialSpec {
    id: String,
    kind: PotentialKind,
    evaluator: Evaluator,
    sup_bound: f64,
    gradient_bound: Option<f64>,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .field("sup_bound", &self.sup_bound)
            .field("gradient_bound", &self.gradient_bound)
            .finish()
    }
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self {
            id: "zero".into(),
            kind: PotentialKind::Zero,
            evaluator: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
            sup_bound: 0.0,
            gradient_bound: Some(0.0),
        }
    }

    /// `V = A sech²(x)`.
    pub fn sech2(amplitude: f64) -> Self {
        Self {
            id: format!("sech2:{amplitude}"),
            kind: PotentialKind::StaticReal,
            evaluator: Arc::new(move |x, _| {
                let s = 1.0 / x.cosh();
                Complex64::new(amplitude * s * s, 0.0)
            }),
            sup_bound: amplitude.abs(),
            // max |d/dx sech²| = 4/(3√3)
            gradient_bound: Some(amplitude.abs() * 4.0 / (3.0 * 3f64.sqrt())),
        }
    }

    /// `V = A · bump(x / r)`, compactly supported in `[-r, r]`.
    pub fn compact_bump(amplitude: f64, radius: f64) -> Self {
        Self {
            id: format!("bump:{amplitude}:{radius}"),
            kind: PotentialKind::StaticReal,
            evaluator: Arc::new(move |x, _| Complex64::new(amplitude * bump(x / radius), 0.0)),
            sup_bound: amplitude.abs(),
            gradient_bound: None,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            id: format!("const:{}:{}", c.re, c.im),
            kind: if c.im == 0.0 { PotentialKind::StaticReal } else { PotentialKind::StaticComplex },
            evaluator: Arc::new(move |_, _| c),
            sup_bound: c.norm(),
            gradient_bound: Some(0.0),
        }
    }

    /// Arbitrary evaluator; not restorable from its id.
    pub fn custom(
        id: impl Into<String>,
        kind: PotentialKind,
        sup_bound: f64,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), kind, evaluator: Arc::new(f), sup_bound, gradient_bound: None }
    }

    /// Rebuilds a registered family from its id.
    pub fn from_id(id: &str) -> Result<Self> {
        let parts: Vec<&str> = id.split(':').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad potential id `{id}`")));
        match parts.as_slice() {
            ["zero"] => Ok(Self::zero()),
            ["sech2", a] => Ok(Self::sech2(num(a)?)),
            ["bump", a, r] => Ok(Self::compact_bump(num(a)?, num(r)?)),
            ["const", re, im] => Ok(Self::constant(Complex64::new(num(re)?, num(im)?))),
            _ => Err(Error::Config(format!("potential `{id}` is not a registered family"))),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PotentialKind::Zero
    }

    pub fn is_real(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero | PotentialKind::StaticReal)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn gradient_bound(&self) -> Option<f64> {
        self.gradient_bound
    }

    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        (self.evaluator)(x, t)
    }

    /// Verifies `|V(x_j, t)| ≤ M₁` at every node and time.
    pub fn check_bound(&self, grid: &Grid1D, times: &[f64]) -> Result<()> {
        let slack = self.sup_bound * 1e-12 + 1e-300;
        for &t in times {
            for x in grid.nodes() {
                let v = self.eval(x, t).norm();
                if v > self.sup_bound + slack {
                    return Err(Error::Precondition(format!(
                        "|V({x}, {t})| = {v} exceeds declared bound {}",
                        self.sup_bound
                    )));
                }
            }
        }
        Ok(())
    }

    /// `‖V‖_{L¹_t L^∞(|x| > R)}` sampled on the grid for each radius (trapezoid in `t`).
    pub fn tail_profile(&self, grid: &Grid1D, times: &[f64], radii: &[f64]) -> Vec<f64> {
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        radii
            .iter()
            .map(|&r| {
                let sup: Vec<f64> = times
                    .iter()
                    .map(|&t| {
                        grid.nodes()
                            .into_iter()
                            .filter(|x| x.abs() > r)
                            .map(|x| self.eval(x, t).norm())
                            .fold(0.0, f64::max)
                    })
                    .collect();
                trapezoid(&sup, dt)
            })
            .collect()
    }
}
