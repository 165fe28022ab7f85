//! Closed-form integration of log-weighted monomials over the unit polydisc
//! and its coordinate sub-polydiscs.
//!
//! All formulas come from the radial substitution u = r² together with
//! ∫₀¹ u^a (log u)^m du = (-1)^m·m!/(a+1)^{m+1}, and the per-variable
//! convention dz_j∧dz̄_j = -2i·(area element). A full monomial integral is the
//! reordering sign (-1)^{n(n-1)/2} (n = number of non-frozen variables) times
//! the product of per-variable factors
//! (-2πi)·(-1)^{m_j}·m_j!/(a_j+1)^{m_j+1}, and vanishes unless a_j = b_j for
//! every integrated variable.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exact::{factorial, ExactValue, GaussianRational, Rational};
use crate::form::reorder_sign;
use crate::lambda::{LambdaPoly, LinearFactor, RationalFunctionLambda};
use crate::poly::{LogPolynomial, MultiIndex};

/// A single monomial-with-logs integration request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentRequest {
    pub holo: MultiIndex,
    pub anti: MultiIndex,
    pub logs: MultiIndex,
    pub frozen: BTreeSet<usize>,
}

impl MomentRequest {
    pub fn new(holo: MultiIndex, anti: MultiIndex, logs: MultiIndex) -> Self {
        MomentRequest {
            holo,
            anti,
            logs,
            frozen: BTreeSet::new(),
        }
    }

    pub fn with_frozen(mut self, frozen: BTreeSet<usize>) -> Self {
        self.frozen = frozen;
        self
    }
}

/// The rational part of the per-variable factor: (-1)^m·m!/(a+1)^{m+1}.
/// The remaining -2πi per variable is accounted for by the caller.
fn radial_factor(a: u32, m: u32) -> Rational {
    let mut denom = BigInt::one();
    for _ in 0..=m {
        denom *= BigInt::from(a + 1);
    }
    let mut numer = factorial(m);
    if m % 2 == 1 {
        numer = -numer;
    }
    Rational::new(numer, denom)
}

/// ∫ z^a z̄^b Π_j (log|z_j|²)^{m_j} dz∧dz̄ over the polydisc in the non-frozen
/// variables.
pub fn polydisc_moment(req: &MomentRequest) -> ExactValue {
    let dim = req.holo.len();
    assert_eq!(req.anti.len(), dim);
    assert_eq!(req.logs.len(), dim);
    for &j in &req.frozen {
        assert!(
            req.holo[j] == 0 && req.anti[j] == 0 && req.logs[j] == 0,
            "frozen variable {j} occurs in the integrand"
        );
    }
    let vars: Vec<usize> = (0..dim).filter(|j| !req.frozen.contains(j)).collect();
    let n = vars.len();
    let mut rational = Rational::one();
    for &j in &vars {
        if req.holo[j] != req.anti[j] {
            return ExactValue::zero();
        }
        rational *= radial_factor(req.holo[j], req.logs[j]);
    }
    let mut coeff = GaussianRational::from_parts(0, -2).pow(n as u32);
    if reorder_sign(n) < 0 {
        coeff = -&coeff;
    }
    ExactValue::pi_term(n as u32, coeff.scale(&rational))
}

/// Linear extension of `polydisc_moment` over the terms of a log-polynomial.
pub fn integrate_logpoly(q: &LogPolynomial, frozen: &BTreeSet<usize>) -> ExactValue {
    let dim = q.dim();
    let vars: Vec<usize> = (0..dim).filter(|j| !frozen.contains(j)).collect();
    let n = vars.len();
    let mut sum = GaussianRational::zero();
    for ((a, b, m), c) in q.terms() {
        for &j in frozen {
            assert!(
                a[j] == 0 && b[j] == 0 && m[j] == 0,
                "frozen variable {j} occurs in the integrand"
            );
        }
        if vars.iter().any(|&j| a[j] != b[j]) {
            continue;
        }
        let mut rational = Rational::one();
        for &j in &vars {
            rational *= radial_factor(a[j], m[j]);
        }
        sum = &sum + &c.scale(&rational);
    }
    if sum.is_zero() {
        return ExactValue::zero();
    }
    let mut coeff = GaussianRational::from_parts(0, -2).pow(n as u32);
    if reorder_sign(n) < 0 {
        coeff = -&coeff;
    }
    ExactValue::pi_term(n as u32, &coeff * &sum)
}

/// The single-variable λ-dependent moment
/// ∫_{|z|≤1} |z|^{2λi} z^s z̄^s (log|z|²)^m dz∧dz̄
/// = (-2πi)·(-1)^m·m!/(λ·i + s + 1)^{m+1},
/// continued analytically when s < 0. Returned as the rational-function part
/// together with its π-power (always 1).
pub fn lambda_moment(i: u32, s: i64, m: u32) -> (RationalFunctionLambda, u32) {
    let mut numer = factorial(m);
    if m % 2 == 1 {
        numer = -numer;
    }
    let scale = GaussianRational::new(Rational::zero(), Rational::from_integer(-2 * numer));
    if i == 0 {
        assert!(s >= 0, "constant-weight moment requires s >= 0");
        let mut denom = Rational::one();
        for _ in 0..=m {
            denom *= Rational::from_integer(BigInt::from(s + 1));
        }
        let c = scale.scale(&(Rational::one() / denom));
        return (RationalFunctionLambda::constant(c), 1);
    }
    let factor = LinearFactor::new(
        Rational::from_integer(BigInt::from(i)),
        Rational::from_integer(BigInt::from(s + 1)),
    );
    let den = vec![factor; (m + 1) as usize];
    (
        RationalFunctionLambda::from_term(LambdaPoly::constant(scale), den),
        1,
    )
}
