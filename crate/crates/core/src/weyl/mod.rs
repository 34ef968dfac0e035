//! Exact calculus of differential operators with Laurent-polynomial coefficients over `Q(i)`.
//!
//! Operators act on functions of `(x, t)` in one space dimension. Adjoints are taken in
//! `L²(dx dt)`, so `i∂_t` is symmetric.

mod identities;
mod op;
mod ring;

pub use identities::{
    completed_square_residual, displayed_energy_split, evolution_generator, misleading_split, moving_weight,
    moving_weight_split, potential_symbol, quadratic_weight_substitution, verify_identity, z_symbol,
    IdentityReport, IdentitySummary, IDENTITIES,
};
pub use op::{DiffOp, MAX_ORDER};
pub use ring::{coeff, rational, Coeff, Monomial, Param, Part, Poly, Sym, TimeFn};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom() -> impl Strategy<Value = Poly> {
        prop_oneof![
            Just(Poly::x()),
            Just(Poly::param(Param::Gamma)),
            Just(Poly::time(TimeFn::Phi, 0)),
            Just(Poly::sym(Sym::Space(0))),
            Just(Poly::sym(Sym::Pot(Part::Re, 0, 0))),
            Just(Poly::i()),
            Just(Poly::pow(Sym::Param(Param::R), -1)),
        ]
    }

    fn poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((-3i64..=3, 1i64..=3, prop::collection::vec(atom(), 0..3)), 1..3).prop_map(|terms| {
            terms.into_iter().fold(Poly::zero(), |acc, (n, d, atoms)| {
                acc.add(&atoms.iter().fold(Poly::rat(n, d), |m, a| m.mul(a)))
            })
        })
    }

    fn op(max_order: u32) -> impl Strategy<Value = DiffOp> {
        prop::collection::vec((0..=max_order, 0..=1u32, poly()), 1..4).prop_map(move |terms| {
            terms.into_iter().fold(DiffOp::zero(), |acc, (k, m, c)| {
                let (k, m) = if k + m > max_order { (k, 0) } else { (k, m) };
                acc.add(&DiffOp::term(c, k, m))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn adjoint_is_involution(p in op(4)) {
            prop_assert_eq!(p.adjoint().unwrap().adjoint().unwrap(), p);
        }

        #[test]
        fn split_parts(p in op(4)) {
            let (s, a) = p.sym_antisym_split().unwrap();
            prop_assert_eq!(s.add(&a), p);
            prop_assert_eq!(s.adjoint().unwrap(), s);
            prop_assert_eq!(a.adjoint().unwrap(), a.neg());
        }

        #[test]
        fn t_derivative_is_derivation(p in op(3), q in op(3)) {
            let lhs = p.compose(&q).unwrap().t_derivative();
            let rhs = p.t_derivative().compose(&q).unwrap().add(&p.compose(&q.t_derivative()).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn jacobi(p in op(2), q in op(2), r in op(2)) {
            let t1 = p.commutator(&q.commutator(&r).unwrap()).unwrap();
            let t2 = q.commutator(&r.commutator(&p).unwrap()).unwrap();
            let t3 = r.commutator(&p.commutator(&q).unwrap()).unwrap();
            prop_assert!(t1.add(&t2).add(&t3).is_zero());
        }

        #[test]
        fn composition_is_associative(p in op(2), q in op(2), r in op(2)) {
            let l = p.compose(&q).unwrap().compose(&r).unwrap();
            let rr = p.compose(&q.compose(&r).unwrap()).unwrap();
            prop_assert_eq!(l, rr);
        }
    }
}
