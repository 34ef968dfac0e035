//! Differential operators `Σ c_{k,m} ∂_x^k ∂_t^m` with coefficients on the left.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;

use super::ring::{Coeff, Poly};
use crate::error::{Error, Result};

/// Largest total order `k + m` an operator may carry.
pub const MAX_ORDER: u32 = 6;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffOp(BTreeMap<(u32, u32), Poly>);

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

fn int_coeff(n: i64) -> Coeff {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

impl DiffOp {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Multiplication by `c`.
    pub fn mult(c: Poly) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn term(c: Poly, kx: u32, kt: u32) -> Self {
        let mut op = Self::zero();
        if !c.is_zero() {
            op.0.insert((kx, kt), c);
        }
        op
    }

    pub fn dx() -> Self {
        Self::term(Poly::one(), 1, 0)
    }

    pub fn dx2() -> Self {
        Self::term(Poly::one(), 2, 0)
    }

    pub fn dt() -> Self {
        Self::term(Poly::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.keys().map(|(k, m)| k + m).max().unwrap_or(0)
    }

    /// Coefficient of `∂_x^kx ∂_t^kt`.
    pub fn coefficient(&self, kx: u32, kt: u32) -> Poly {
        self.0.get(&(kx, kt)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Poly)> {
        self.0.iter()
    }

    /// Number of monomials across all coefficients.
    pub fn n_monomials(&self) -> usize {
        self.0.values().map(Poly::n_terms).sum()
    }

    fn add_at(&mut self, key: (u32, u32), c: Poly) {
        let v = self.0.remove(&key).unwrap_or_default().add(&c);
        if !v.is_zero() {
            self.0.insert(key, v);
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add_at(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp(self.0.iter().map(|(k, c)| (*k, c.neg())).collect())
    }

    /// Left multiplication of every coefficient by `p`.
    pub fn scale(&self, p: &Poly) -> DiffOp {
        let mut out = DiffOp::zero();
        for (k, c) in &self.0 {
            out.add_at(*k, p.mul(c));
        }
        out
    }

    /// Coefficientwise complex conjugation.
    pub fn conj(&self) -> DiffOp {
        DiffOp(self.0.iter().map(|(k, c)| (*k, c.conj())).collect())
    }

    /// Compose `self ∘ other`, moving derivatives to the right by Leibniz.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        let total = self.order() + other.order();
        if total > MAX_ORDER {
            return Err(Error::DegreeOverflow(total));
        }
        let mut out = DiffOp::zero();
        for (&(a, b), c) in &self.0 {
            for (&(p, q), d) in &other.0 {
                for j in 0..=a {
                    let dj = d.dx_n(j);
                    if dj.is_zero() {
                        break;
                    }
                    for l in 0..=b {
                        let djl = dj.dt_n(l);
                        if djl.is_zero() {
                            break;
                        }
                        let k = binomial(a, j) * binomial(b, l);
                        out.add_at((a - j + p, b - l + q), c.mul(&djl).scale(&int_coeff(k)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp> {
        Ok(self.compose(other)?.sub(&other.compose(self)?))
    }

    /// `∂_t` applied to the coefficients only.
    pub fn t_derivative(&self) -> DiffOp {
        let mut out = DiffOp::zero();
        for (k, c) in &self.0 {
            out.add_at(*k, c.dt());
        }
        out
    }

    /// Formal adjoint in `L²(dx dt)`: `(c ∂_x^k ∂_t^m)* = (−1)^{k+m} ∂_x^k ∂_t^m ∘ c̄`.
    pub fn adjoint(&self) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (&(k, m), c) in &self.0 {
            let sign = if (k + m) % 2 == 0 { 1 } else { -1 };
            let d = DiffOp::term(Poly::int(sign), k, m);
            out = out.add(&d.compose(&DiffOp::mult(c.conj()))?);
        }
        Ok(out)
    }

    /// `(S, A)` with `S = (P + P*)/2`, `A = (P − P*)/2`.
    pub fn sym_antisym_split(&self) -> Result<(DiffOp, DiffOp)> {
        let adj = self.adjoint()?;
        let half = Poly::rat(1, 2);
        Ok((self.add(&adj).scale(&half), self.sub(&adj).scale(&half)))
    }

    /// `e^{w} ∘ P ∘ e^{−w}`: every `∂` becomes `∂ − (∂w)`.
    pub fn conjugate_exp(&self, w: &Poly) -> Result<DiffOp> {
        let shifted_x = DiffOp::dx().sub(&DiffOp::mult(w.dx()));
        let shifted_t = DiffOp::dt().sub(&DiffOp::mult(w.dt()));
        let mut out = DiffOp::zero();
        for (&(k, m), c) in &self.0 {
            let mut op = DiffOp::mult(c.clone());
            for _ in 0..k {
                op = op.compose(&shifted_x)?;
            }
            for _ in 0..m {
                op = op.compose(&shifted_t)?;
            }
            out = out.add(&op);
        }
        Ok(out)
    }

    /// Apply a symbol substitution to every coefficient.
    pub fn substitute(&self, map: &[(super::ring::Sym, Poly)]) -> Result<DiffOp> {
        let mut out = DiffOp::zero();
        for (k, c) in &self.0 {
            out.add_at(*k, c.substitute(map)?);
        }
        Ok(out)
    }

    /// First differing `(∂-power, monomial)` between two operators, if any.
    pub fn first_difference(&self, other: &DiffOp) -> Option<String> {
        let diff = self.sub(other);
        let (&(k, m), c) = diff.0.iter().next()?;
        let (mono, v) = c.terms().next()?;
        Some(format!("∂x^{k}∂t^{m}: {mono} with coefficient {} + {}i", v.re, v.im))
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (&(k, m), c)) in self.0.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let d = match (k, m) {
                (0, 0) => String::new(),
                (1, 0) => "∂x".into(),
                (k, 0) => format!("∂x^{k}"),
                (0, 1) => "∂t".into(),
                (0, m) => format!("∂t^{m}"),
                (k, m) => format!("∂x^{k}∂t^{m}"),
            };
            if d.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})·{d}")?;
            }
        }
        Ok(())
    }
}
