//! Property tests for the algebraic layers: derivations, wedge algebra,
//! conjugation and Laurent expansion.

use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use polydisc::exact::{rat, ExactValue, GaussianRational};
use polydisc::form::{ConjForm, IndexSet};
use polydisc::lambda::{LambdaPoly, LinearFactor, RationalFunctionLambda};
use polydisc::poly::ConjPolynomial;

fn gaussian() -> impl Strategy<Value = GaussianRational> {
    ((-4i64..=4), (-4i64..=4)).prop_map(|(re, im)| GaussianRational::from_parts(re, im))
}

fn exact_value() -> impl Strategy<Value = ExactValue> {
    vec(((0u32..4), gaussian()), 0..4).prop_map(|terms| {
        terms.into_iter().fold(ExactValue::zero(), |acc, (k, c)| {
            acc + ExactValue::pi_term(k, c)
        })
    })
}

fn poly(dim: usize) -> impl Strategy<Value = ConjPolynomial> {
    vec((vec(0u32..=4, dim), vec(0u32..=4, dim), gaussian()), 1..5).prop_map(move |terms| {
        let mut p = ConjPolynomial::zero(dim);
        for (a, b, c) in terms {
            p.insert_term(a, b, c);
        }
        p
    })
}

fn index_set(dim: usize) -> impl Strategy<Value = IndexSet> {
    vec(proptest::bool::ANY, dim).prop_map(|mask| {
        mask.into_iter()
            .enumerate()
            .filter_map(|(j, keep)| keep.then_some(j))
            .collect()
    })
}

fn form(dim: usize) -> impl Strategy<Value = ConjForm> {
    vec((index_set(dim), index_set(dim), poly(dim)), 1..4).prop_map(move |terms| {
        terms
            .into_iter()
            .fold(ConjForm::zero(dim), |acc, (a, b, p)| {
                acc.add(&ConjForm::from_term(dim, a, b, p))
            })
    })
}

fn dims() -> impl Strategy<Value = usize> {
    1usize..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_value_ring_laws(a in exact_value(), b in exact_value(), c in exact_value()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
    }

    #[test]
    fn differential_identities((_dim, f) in dims().prop_flat_map(|d| (Just(d), form(d)))) {
        prop_assert!(f.dbar().dbar().is_zero());
        prop_assert!(f.del().del().is_zero());
        prop_assert_eq!(f.del().dbar(), f.dbar().del().neg());
    }

    #[test]
    fn leibniz_rule((dim, p, q) in dims().prop_flat_map(|d| (Just(d), poly(d), poly(d)))) {
        for j in 0..dim {
            prop_assert_eq!(
                p.mul(&q).d_dz(j),
                p.d_dz(j).mul(&q).add(&p.mul(&q.d_dz(j)))
            );
            prop_assert_eq!(
                p.mul(&q).d_dzbar(j),
                p.d_dzbar(j).mul(&q).add(&p.mul(&q.d_dzbar(j)))
            );
        }
    }

    #[test]
    fn wedge_graded_commutativity(
        (dim, a_dz, a_dzbar, b_dz, b_dzbar, pa, pb) in dims().prop_flat_map(|d| (
            Just(d), index_set(d), index_set(d), index_set(d), index_set(d), poly(d), poly(d),
        ))
    ) {
        let a = ConjForm::from_term(dim, a_dz.clone(), a_dzbar.clone(), pa);
        let b = ConjForm::from_term(dim, b_dz.clone(), b_dzbar.clone(), pb);
        let deg_a = a_dz.len() + a_dzbar.len();
        let deg_b = b_dz.len() + b_dzbar.len();
        let sign = if (deg_a * deg_b) % 2 == 1 { -1 } else { 1 };
        prop_assert_eq!(
            a.wedge(&b),
            b.wedge(&a).scale(&GaussianRational::from_int(sign))
        );
    }

    #[test]
    fn conjugation_is_involution((_dim, f) in dims().prop_flat_map(|d| (Just(d), form(d)))) {
        prop_assert_eq!(f.conj().conj(), f);
    }

    #[test]
    fn restriction_commutes_with_surviving_derivatives(
        (dim, p) in (2usize..=3).prop_flat_map(|d| (Just(d), poly(d)))
    ) {
        let frozen: BTreeSet<usize> = [0].into_iter().collect();
        for j in 1..dim {
            prop_assert_eq!(
                p.d_dz(j).restrict_zero(&frozen),
                p.restrict_zero(&frozen).d_dz(j)
            );
            prop_assert_eq!(
                p.d_dzbar(j).restrict_zero(&frozen),
                p.restrict_zero(&frozen).d_dzbar(j)
            );
        }
    }

    #[test]
    fn laurent_commutes_with_conjugation(
        terms in vec(((0usize..=2), gaussian(), vec(((1i64..=2), (-2i64..=2)), 0..3)), 1..4)
    ) {
        let mut f = RationalFunctionLambda::zero();
        for (deg, c, dens) in terms {
            let den = dens
                .into_iter()
                .map(|(a, b)| LinearFactor::new(rat(a, 1), rat(b, 1)))
                .collect();
            f = f.add(&RationalFunctionLambda::from_term(
                LambdaPoly::monomial(deg, c),
                den,
            ));
        }
        let a = f.conj_coefficients().laurent_at_zero(2);
        let b = f.laurent_at_zero(2).map_coefficients(|c| c.conj());
        prop_assert_eq!(a, b);
    }
}
