//! Laurent polynomials over `Q(i)` in commuting symbols, with the derivations `∂_x` and `∂_t`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Coeff = Complex<BigRational>;

/// Constant scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Gamma,
    Mu,
    R,
    A,
    B,
    Alpha,
    Beta,
    Eps,
    Lambda,
}

/// Functions of `t` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeFn {
    Phi,
    Psi,
    /// The time-dependent weight coefficient `a(t)`.
    A,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    X,
    Param(Param),
    /// `order`-th `t`-derivative.
    Time(TimeFn, u8),
    /// `order`-th `x`-derivative of a `t`-independent weight `Φ(x)`.
    Space(u8),
    /// `∂_x^kx ∂_t^kt` of the real or imaginary part of the potential.
    Pot(Part, u8, u8),
}

impl Sym {
    fn dx(self) -> Option<Sym> {
        match self {
            Sym::Space(k) => Some(Sym::Space(k + 1)),
            Sym::Pot(p, kx, kt) => Some(Sym::Pot(p, kx + 1, kt)),
            _ => None,
        }
    }

    fn dt(self) -> Option<Sym> {
        match self {
            Sym::Time(f, k) => Some(Sym::Time(f, k + 1)),
            Sym::Pot(p, kx, kt) => Some(Sym::Pot(p, kx, kt + 1)),
            _ => None,
        }
    }
}

fn primes(k: u8) -> String {
    match k {
        0..=3 => "'".repeat(k as usize),
        _ => format!("^({k})"),
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::X => write!(f, "x"),
            Sym::Param(p) => write!(
                f,
                "{}",
                match p {
                    Param::Gamma => "γ",
                    Param::Mu => "μ",
                    Param::R => "R",
                    Param::A => "a",
                    Param::B => "b",
                    Param::Alpha => "α",
                    Param::Beta => "β",
                    Param::Eps => "ε",
                    Param::Lambda => "λ",
                }
            ),
            Sym::Time(g, k) => {
                let name = match g {
                    TimeFn::Phi => "φ",
                    TimeFn::Psi => "ψ",
                    TimeFn::A => "a",
                    TimeFn::H => "h",
                };
                write!(f, "{name}{}(t)", primes(*k))
            }
            Sym::Space(k) => write!(f, "Φ{}", primes(*k)),
            Sym::Pot(p, kx, kt) => {
                let name = if *p == Part::Re { "Vr" } else { "Vi" };
                match (kx, kt) {
                    (0, 0) => write!(f, "{name}"),
                    _ => write!(f, "∂x^{kx}∂t^{kt}{name}"),
                }
            }
        }
    }
}

/// A monomial: sorted symbols with nonzero integer exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Sym, i32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn power(s: Sym, e: i32) -> Self {
        let mut m = Self::default();
        if e != 0 {
            m.0.insert(s, e);
        }
        m
    }

    pub fn exponent(&self, s: Sym) -> i32 {
        self.0.get(&s).copied().unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Sym, i32)> + '_ {
        self.0.iter().map(|(&s, &e)| (s, e))
    }

    fn mul(&self, other: &Self) -> Self {
        let mut m = self.0.clone();
        for (&s, &e) in &other.0 {
            let v = m.entry(s).or_insert(0);
            *v += e;
            if *v == 0 {
                m.remove(&s);
            }
        }
        Monomial(m)
    }

    fn with_exponent(&self, s: Sym, e: i32) -> Self {
        let mut m = self.0.clone();
        if e == 0 {
            m.remove(&s);
        } else {
            m.insert(s, e);
        }
        Monomial(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, e) in self.symbols() {
            if !first {
                write!(f, "·")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn coeff(re: BigRational, im: BigRational) -> Coeff {
    Complex::new(re, im)
}

fn fmt_coeff(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        _ => format!("({} + {}i)", c.re, c.im),
    }
}

/// A Laurent polynomial in [`Sym`] with coefficients in `Q(i)`, kept in normal form
/// (no zero coefficients, monomials sorted).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly(BTreeMap<Monomial, Coeff>);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Self::rat(n, 1)
    }

    pub fn rat(n: i64, d: i64) -> Self {
        Self::constant(coeff(rational(n, d), BigRational::zero()))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::constant(coeff(BigRational::zero(), BigRational::one()))
    }

    pub fn term(c: Coeff, m: Monomial) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.0.insert(m, c);
        }
        p
    }

    pub fn sym(s: Sym) -> Self {
        Self::pow(s, 1)
    }

    pub fn pow(s: Sym, e: i32) -> Self {
        Self::term(Coeff::one(), Monomial::power(s, e))
    }

    pub fn x() -> Self {
        Self::sym(Sym::X)
    }

    pub fn param(p: Param) -> Self {
        Self::sym(Sym::Param(p))
    }

    pub fn time(f: TimeFn, order: u8) -> Self {
        Self::sym(Sym::Time(f, order))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.0.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.0.iter()
    }

    fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(v) => {
                *v = &*v + c;
                if v.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.0 {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn scale(&self, c: &Coeff) -> Poly {
        let mut p = Poly::zero();
        for (m, v) in &self.0 {
            p.add_term(m.clone(), v * c);
        }
        p
    }

    /// Nonnegative integer power.
    pub fn powi(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    /// Complex conjugation; every symbol is real.
    pub fn conj(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c.conj())).collect())
    }

    fn derive(&self, d: impl Fn(Sym) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            for (s, e) in m.symbols() {
                let Some(ds) = d(s) else { continue };
                let rest = m.with_exponent(s, e - 1);
                let k = coeff(BigRational::from_integer(BigInt::from(e)), BigRational::zero());
                out = out.add(&Poly::term(c * k, rest).mul(&ds));
            }
        }
        out
    }

    pub fn dx(&self) -> Poly {
        self.derive(|s| match s {
            Sym::X => Some(Poly::one()),
            _ => s.dx().map(Poly::sym),
        })
    }

    pub fn dt(&self) -> Poly {
        self.derive(|s| s.dt().map(Poly::sym))
    }

    pub fn dx_n(&self, n: u32) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.dx())
    }

    pub fn dt_n(&self, n: u32) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.dt())
    }

    /// Ring homomorphism sending each listed symbol to a polynomial.
    /// Substituted symbols must occur with nonnegative exponents.
    pub fn substitute(&self, map: &[(Sym, Poly)]) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut acc = Poly::constant(c.clone());
            for (s, e) in m.symbols() {
                match map.iter().find(|(t, _)| *t == s) {
                    Some((_, p)) => {
                        if e < 0 {
                            return Err(Error::Precondition(format!("cannot substitute {s} with exponent {e}")));
                        }
                        acc = acc.mul(&p.powi(e as u32));
                    }
                    None => acc = acc.mul(&Poly::pow(s, e)),
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Floating-point evaluation; symbols missing from `values` are an error.
    pub fn eval(&self, values: &dyn Fn(Sym) -> Option<f64>) -> Result<num_complex::Complex64> {
        use num_traits::ToPrimitive;
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (m, c) in &self.0 {
            let mut v = num_complex::Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN));
            for (s, e) in m.symbols() {
                let x = values(s).ok_or_else(|| Error::Precondition(format!("no value for {s}")))?;
                v *= x.powi(e);
            }
            acc += v;
        }
        Ok(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.0.iter().enumerate() {
            let neg_real = c.im.is_zero() && c.re.is_negative();
            let shown = if neg_real { fmt_coeff(&-c.clone()) } else { fmt_coeff(c) };
            match (k, neg_real) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit = shown == "1";
            match (unit, m == &Monomial::one()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{m}")?,
                (false, true) => write!(f, "{shown}")?,
                (false, false) => write!(f, "{shown}·{m}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_and_power_rule() {
        let phi = Poly::time(TimeFn::Phi, 0);
        let x = Poly::x();
        let p = x.powi(3).mul(&phi.powi(2));
        assert_eq!(p.dx(), Poly::int(3).mul(&x.powi(2)).mul(&phi.powi(2)));
        assert_eq!(p.dt(), Poly::int(2).mul(&x.powi(3)).mul(&phi).mul(&Poly::time(TimeFn::Phi, 1)));
        let inv = Poly::pow(Sym::Time(TimeFn::A, 0), -1);
        let want = Poly::pow(Sym::Time(TimeFn::A, 0), -2).mul(&Poly::time(TimeFn::A, 1)).neg();
        assert_eq!(inv.dt(), want);
    }

    #[test]
    fn laurent_cancellation() {
        let r = Poly::param(Param::R);
        assert_eq!(r.mul(&Poly::pow(Sym::Param(Param::R), -1)), Poly::one());
        assert!(r.sub(&r).is_zero());
    }

    #[test]
    fn conjugation_and_display() {
        let p = Poly::i().mul(&Poly::x()).add(&Poly::rat(-1, 2));
        assert_eq!(p.conj(), Poly::i().mul(&Poly::x()).neg().add(&Poly::rat(-1, 2)));
        assert_eq!(format!("{}", Poly::int(2).mul(&Poly::x().powi(2))), "2·x^2");
        assert_eq!(format!("{}", Poly::zero()), "0");
    }

    #[test]
    fn substitution() {
        let phi2 = Poly::sym(Sym::Space(2));
        let map = [(Sym::Space(2), Poly::int(2)), (Sym::Space(1), Poly::int(2).mul(&Poly::x()))];
        let p = phi2.mul(&Poly::sym(Sym::Space(1)).powi(2));
        assert_eq!(p.substitute(&map).unwrap(), Poly::int(8).mul(&Poly::x().powi(2)));
        assert!(Poly::pow(Sym::Space(2), -1).substitute(&map).is_err());
    }

    #[test]
    fn potential_derivatives() {
        let v = Poly::sym(Sym::Pot(Part::Re, 0, 0));
        assert_eq!(v.dx().dt(), Poly::sym(Sym::Pot(Part::Re, 1, 1)));
        assert!(Poly::param(Param::Gamma).dx().is_zero());
    }
}
