//! Named operator identities for weighted evolutions.

use serde::Serialize;

use super::op::DiffOp;
use super::ring::{Param, Part, Poly, Sym, TimeFn};
use crate::error::{Error, Result};

pub const IDENTITIES: [&str; 4] = ["I1", "I2", "I3", "I4"];

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub name: String,
    pub statement: String,
    pub lhs: DiffOp,
    pub rhs: DiffOp,
    pub residual: DiffOp,
    pub first_mismatch: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub name: String,
    pub statement: String,
    pub pass: bool,
    pub residual_monomials: usize,
    pub first_mismatch: Option<String>,
    pub lhs: String,
    pub rhs: String,
}

impl IdentityReport {
    fn new(name: &str, statement: &str, lhs: DiffOp, rhs: DiffOp) -> Self {
        let residual = lhs.sub(&rhs);
        let first_mismatch = lhs.first_difference(&rhs);
        Self { name: name.into(), statement: statement.into(), lhs, rhs, residual, first_mismatch }
    }

    pub fn pass(&self) -> bool {
        self.residual.is_zero()
    }

    pub fn summary(&self) -> IdentitySummary {
        IdentitySummary {
            name: self.name.clone(),
            statement: self.statement.clone(),
            pass: self.pass(),
            residual_monomials: self.residual.n_monomials(),
            first_mismatch: self.first_mismatch.clone(),
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
        }
    }
}

fn p(s: Param) -> Poly {
    Poly::param(s)
}

fn tf(f: TimeFn, k: u8) -> Poly {
    Poly::time(f, k)
}

fn mult(c: Poly) -> DiffOp {
    DiffOp::mult(c)
}

/// `z = a + ib` with scalar parameters.
pub fn z_symbol() -> Poly {
    p(Param::A).add(&Poly::i().mul(&p(Param::B)))
}

/// `V = Vr + i Vi`.
pub fn potential_symbol() -> Poly {
    Poly::sym(Sym::Pot(Part::Re, 0, 0)).add(&Poly::i().mul(&Poly::sym(Sym::Pot(Part::Im, 0, 0))))
}

/// Generator of `f = e^{w}u` when `∂_t u = z(∂² + V)u`: `e^{w} z(∂² + V) e^{−w} + ∂_t w`.
pub fn evolution_generator(z: &Poly, v: &Poly, w: &Poly) -> Result<DiffOp> {
    let base = DiffOp::dx2().add(&mult(v.clone())).scale(z);
    Ok(base.conjugate_exp(w)?.add(&mult(w.dt())))
}

/// The symmetric and antisymmetric parts as written for the energy estimate:
/// `S = a(∂² + w′²) − ib(2w′∂ + w″) + ∂_t w + a Vr − b Vi`,
/// `A = ib(∂² + w′²) − a(2w′∂ + w″) + i(b Vr + a Vi)`.
pub fn displayed_energy_split(w: &Poly) -> (DiffOp, DiffOp) {
    let (a, b, i) = (p(Param::A), p(Param::B), Poly::i());
    let vr = Poly::sym(Sym::Pot(Part::Re, 0, 0));
    let vi = Poly::sym(Sym::Pot(Part::Im, 0, 0));
    let w1 = w.dx();
    let lap = DiffOp::dx2().add(&mult(w1.mul(&w1)));
    let transport = DiffOp::term(Poly::int(2).mul(&w1), 1, 0).add(&mult(w.dx().dx()));
    let s = lap
        .scale(&a)
        .sub(&transport.scale(&i.mul(&b)))
        .add(&mult(w.dt().add(&a.mul(&vr)).sub(&b.mul(&vi))));
    let an = lap.scale(&i.mul(&b)).sub(&transport.scale(&a)).add(&mult(i.mul(&b.mul(&vr).add(&a.mul(&vi)))));
    (s, an)
}

fn s_t_plus_commutator(s: &DiffOp, a: &DiffOp) -> Result<DiffOp> {
    Ok(s.t_derivative().add(&s.commutator(a)?))
}

fn i1() -> Result<IdentityReport> {
    let g = p(Param::Gamma);
    let w = g.mul(&Poly::x().powi(2));
    let (s, a) = evolution_generator(&z_symbol(), &Poly::zero(), &w)?.sym_antisym_split()?;
    let lhs = s_t_plus_commutator(&s, &a)?;
    let modulus = p(Param::A).powi(2).add(&p(Param::B).powi(2));
    let bracket = DiffOp::term(Poly::int(8), 2, 0).sub(&mult(Poly::int(32).mul(&g.powi(2)).mul(&Poly::x().powi(2))));
    let rhs = bracket.scale(&g.mul(&modulus).neg());
    Ok(IdentityReport::new("I1", "S_t + [S,A] = -γ(a²+b²)[8∂² - 32γ²x²] for the weight γx²", lhs, rhs))
}

fn i2() -> Result<IdentityReport> {
    let g = p(Param::Gamma);
    let phi = |k| Poly::sym(Sym::Space(k));
    let w = g.mul(&phi(0));
    let (s, a) = evolution_generator(&z_symbol(), &Poly::zero(), &w)?.sym_antisym_split()?;
    let lhs = s_t_plus_commutator(&s, &a)?;
    let modulus = p(Param::A).powi(2).add(&p(Param::B).powi(2));
    let inner = DiffOp::dx().compose(&mult(phi(2)))?.compose(&DiffOp::dx())?.scale(&Poly::int(4));
    let bracket = inner
        .sub(&mult(Poly::int(4).mul(&g.powi(2)).mul(&phi(2)).mul(&phi(1).powi(2))))
        .add(&mult(phi(4)));
    let rhs = bracket.scale(&g.mul(&modulus).neg());
    Ok(IdentityReport::new(
        "I2",
        "S_t + [S,A] = -γ(a²+b²)[4∂Φ''∂ - 4γ²Φ''Φ'² + Φ''''] for a t-independent weight γΦ(x)",
        lhs,
        rhs,
    ))
}

/// `S = −4ia(x∂ + 1/2) + a′x²`, `A = i(∂² + 4a²x²)` for `f = e^{a(t)x²}u`, `∂_t u = i∂²u`.
pub fn misleading_split() -> (DiffOp, DiffOp) {
    let (a, a1, x, i) = (tf(TimeFn::A, 0), tf(TimeFn::A, 1), Poly::x(), Poly::i());
    let s = DiffOp::term(x.clone(), 1, 0)
        .add(&mult(Poly::rat(1, 2)))
        .scale(&Poly::int(-4).mul(&i).mul(&a))
        .add(&mult(a1.mul(&x.powi(2))));
    let an = DiffOp::dx2().add(&mult(Poly::int(4).mul(&a.powi(2)).mul(&x.powi(2)))).scale(&i);
    (s, an)
}

fn i3() -> Result<IdentityReport> {
    let (s, an) = misleading_split();
    let (a, a1, a2) = (tf(TimeFn::A, 0), tf(TimeFn::A, 1), tf(TimeFn::A, 2));
    let inv_a = Poly::pow(Sym::Time(TimeFn::A, 0), -1);
    let lhs = s_t_plus_commutator(&s, &an)?;
    let coef = Poly::int(32).mul(&a.powi(3)).add(&a2).sub(&Poly::int(2).mul(&a1.powi(2)).mul(&inv_a));
    let rhs = s
        .scale(&Poly::int(2).mul(&a1).mul(&inv_a))
        .sub(&DiffOp::term(Poly::int(8).mul(&a), 2, 0))
        .add(&mult(coef.mul(&Poly::x().powi(2))));
    // Compare a·lhs with a·rhs so that the check is polynomial.
    Ok(IdentityReport::new(
        "I3",
        "a(S_t + [S,A]) = a(2(a'/a)S - 8a∂² + (32a³ + a'' - 2a'²/a)x²)",
        lhs.scale(&a),
        rhs.scale(&a),
    ))
}

/// `q = x/R + φ(t)`.
fn shifted_position() -> Poly {
    Poly::x().mul(&Poly::pow(Sym::Param(Param::R), -1)).add(&tf(TimeFn::Phi, 0))
}

fn r_pow(e: i32) -> Poly {
    Poly::pow(Sym::Param(Param::R), e)
}

/// `S_μ = i∂_t + ∂² + (4μ²/R²)q²`,
/// `A_μ = −(4μ/R)q∂ − 2μ/R² − 2iμφ′q − iψ′`.
pub fn moving_weight_split() -> (DiffOp, DiffOp) {
    let (mu, i, q) = (p(Param::Mu), Poly::i(), shifted_position());
    let s = DiffOp::term(i.clone(), 0, 1)
        .add(&DiffOp::dx2())
        .add(&mult(Poly::int(4).mul(&mu.powi(2)).mul(&r_pow(-2)).mul(&q.powi(2))));
    let a = DiffOp::term(Poly::int(-4).mul(&mu).mul(&r_pow(-1)).mul(&q), 1, 0).add(&mult(
        Poly::int(-2)
            .mul(&mu)
            .mul(&r_pow(-2))
            .sub(&Poly::int(2).mul(&i).mul(&mu).mul(&tf(TimeFn::Phi, 1)).mul(&q))
            .sub(&i.mul(&tf(TimeFn::Psi, 1))),
    ));
    (s, a)
}

/// The weight exponent `μq² + ψ(t)`.
pub fn moving_weight() -> Poly {
    p(Param::Mu).mul(&shifted_position().powi(2)).add(&tf(TimeFn::Psi, 0))
}

fn i4() -> Result<IdentityReport> {
    let (s, a) = moving_weight_split();
    let (mu, i, q) = (p(Param::Mu), Poly::i(), shifted_position());
    let (f1, f2) = (tf(TimeFn::Phi, 1), tf(TimeFn::Phi, 2));
    let lhs = s.commutator(&a)?;
    let rhs = DiffOp::term(Poly::int(-8).mul(&mu).mul(&r_pow(-2)), 2, 0)
        .add(&DiffOp::term(Poly::int(-8).mul(&i).mul(&mu).mul(&f1).mul(&r_pow(-1)), 1, 0))
        .add(&mult(
            Poly::int(32)
                .mul(&mu.powi(3))
                .mul(&r_pow(-4))
                .mul(&q.powi(2))
                .add(&Poly::int(2).mul(&mu).mul(&q).mul(&f2))
                .add(&Poly::int(2).mul(&mu).mul(&f1.powi(2)))
                .add(&tf(TimeFn::Psi, 2)),
        ));
    Ok(IdentityReport::new(
        "I4",
        "[S_μ,A_μ] = -(8μ/R²)∂² + (32μ³/R⁴)q² + 2μqφ'' + 2μφ'² - (8iμφ'/R)∂ + ψ'', q = x/R + φ",
        lhs,
        rhs,
    ))
}

pub fn verify_identity(name: &str) -> Result<IdentityReport> {
    match name {
        "I1" => i1(),
        "I2" => i2(),
        "I3" => i3(),
        "I4" => i4(),
        other => Err(Error::UnknownIdentity(other.into())),
    }
}

/// The `Φ = x²` substitution `Φ′ → 2x`, `Φ″ → 2`, higher derivatives to zero.
pub fn quadratic_weight_substitution() -> Vec<(Sym, Poly)> {
    vec![
        (Sym::Space(0), Poly::x().powi(2)),
        (Sym::Space(1), Poly::int(2).mul(&Poly::x())),
        (Sym::Space(2), Poly::int(2)),
        (Sym::Space(3), Poly::zero()),
        (Sym::Space(4), Poly::zero()),
        (Sym::Space(5), Poly::zero()),
        (Sym::Space(6), Poly::zero()),
    ]
}

/// `(32μ³/R⁴)q² + 2μqφ″` against its completed square
/// `(32μ³/R⁴)(q + R⁴φ″/(32μ²))² − R⁴φ″²/(32μ)`; returns the difference.
pub fn completed_square_residual() -> Poly {
    let (mu, q, f2) = (p(Param::Mu), shifted_position(), tf(TimeFn::Phi, 2));
    let c = Poly::int(32).mul(&mu.powi(3)).mul(&r_pow(-4));
    let plain = c.mul(&q.powi(2)).add(&Poly::int(2).mul(&mu).mul(&q).mul(&f2));
    let shift = Poly::rat(1, 32).mul(&r_pow(4)).mul(&f2).mul(&Poly::pow(Sym::Param(Param::Mu), -2));
    let completed = c
        .mul(&q.add(&shift).powi(2))
        .sub(&Poly::rat(1, 32).mul(&r_pow(4)).mul(&f2.powi(2)).mul(&Poly::pow(Sym::Param(Param::Mu), -1)));
    plain.sub(&completed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_hold() {
        for name in IDENTITIES {
            let r = verify_identity(name).unwrap();
            assert!(r.pass(), "{name}: {:?}\nresidual {}", r.first_mismatch, r.residual);
            assert_eq!(r.summary().residual_monomials, 0);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(verify_identity("I9"), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn energy_generator_splits_as_displayed() {
        let w = Poly::param(Param::Gamma).mul(&Poly::sym(Sym::Space(0))).add(&tf(TimeFn::H, 0).mul(&Poly::x()));
        let (s, a) = evolution_generator(&z_symbol(), &potential_symbol(), &w).unwrap().sym_antisym_split().unwrap();
        let (ds, da) = displayed_energy_split(&w);
        assert_eq!(s, ds, "{:?}", s.first_difference(&ds));
        assert_eq!(a, da, "{:?}", a.first_difference(&da));
    }

    #[test]
    fn misleading_split_comes_from_generator() {
        let w = tf(TimeFn::A, 0).mul(&Poly::x().powi(2));
        let (s, a) = evolution_generator(&Poly::i(), &Poly::zero(), &w).unwrap().sym_antisym_split().unwrap();
        let (ds, da) = misleading_split();
        assert_eq!(s, ds);
        assert_eq!(a, da);
    }

    #[test]
    fn moving_weight_split_comes_from_conjugation() {
        let l = DiffOp::term(Poly::i(), 0, 1).add(&DiffOp::dx2());
        let conj = l.conjugate_exp(&moving_weight()).unwrap();
        let (s, a) = conj.sym_antisym_split().unwrap();
        let (ds, da) = moving_weight_split();
        assert_eq!(s, ds, "{:?}", s.first_difference(&ds));
        assert_eq!(a, da, "{:?}", a.first_difference(&da));
    }

    #[test]
    fn general_weight_specializes_to_quadratic() {
        let map = quadratic_weight_substitution();
        let (r1, r2) = (verify_identity("I1").unwrap(), verify_identity("I2").unwrap());
        assert_eq!(r2.lhs.substitute(&map).unwrap(), r1.lhs);
        assert_eq!(r2.rhs.substitute(&map).unwrap(), r1.rhs);
        assert!(r2.residual.substitute(&map).unwrap().is_zero());
    }

    #[test]
    fn completed_square_matches() {
        assert!(completed_square_residual().is_zero());
    }

    #[test]
    fn wrong_rhs_reports_mismatch() {
        let r = verify_identity("I1").unwrap();
        let bad = IdentityReport::new("bad", "", r.lhs.clone(), r.rhs.add(&DiffOp::mult(Poly::x())));
        assert!(!bad.pass());
        assert!(bad.first_mismatch.unwrap().contains('x'));
    }
}
