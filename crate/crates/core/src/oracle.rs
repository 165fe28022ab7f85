//! The independent pathway: the regularized integral as an exact rational
//! function of λ, built from angular orthogonality and the radial closed form
//! alone.
//!
//! No differentiation, no integration by parts, no h-function: each monomial
//! c·z^a z̄^b of ψ·φ^t contributes c·(-2λ)^t/t!·Π_j(-2πi)/(λI_j + s_j + 1)
//! whenever the residual exponents s_j = a_j - J_j = b_j - K_j agree in every
//! variable, and zero otherwise. This keeps the construction disjoint from the
//! continuation pathway it cross-checks.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::EngineError;
use crate::exact::{
    factorial_rat, rat_int, rational_string, ExactValue, GaussianRational, Rational,
};
use crate::form::reorder_sign;
use crate::lambda::{LambdaPoly, LaurentWindow, LinearFactor, RationalFunctionLambda};
use crate::pole::{order_factor, PoleData, QMIntegrand, Section};

/// The constructed F together with its per-truncation-order slices.
///
/// `f` carries the o(s) normalization; the π^d factor of the d moment
/// integrals is tracked separately in `pi_power` and re-applied when windows
/// are produced.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub f: RationalFunctionLambda,
    /// slice t collects the λ^t·φ^t terms of the exponential truncation.
    pub slices: Vec<RationalFunctionLambda>,
    pub pi_power: u32,
    pub o_s: u64,
    pub kappa: usize,
    pub truncation: u32,
}

/// F(λ) = o(s)·∫|z^I|^{2λ}·ψ/(z^J z̄^K)·e^{-2λφ}, with the exponential
/// truncated exactly at order `truncation`. Truncating at κ makes every
/// coefficient through λ^0 exact.
pub fn build_f(
    qm: &QMIntegrand,
    section: &Section,
    truncation: u32,
) -> Result<OracleResult, EngineError> {
    section.validate(qm.pole())?;
    let dim = qm.dim();
    let orders = section.orders();
    let o_s = order_factor(section, qm.pole())?;
    let mut overall = GaussianRational::from_parts(0, -2).pow(dim as u32);
    if reorder_sign(dim) < 0 {
        overall = -&overall;
    }
    overall = overall.scale(&rat_int(o_s as i64));

    let mut slices = Vec::with_capacity(truncation as usize + 1);
    let mut f = RationalFunctionLambda::zero();
    let mut metric_power = crate::poly::ConjPolynomial::one(dim);
    for t in 0..=truncation {
        if t > 0 {
            metric_power = metric_power.mul(qm.metric());
        }
        let poly_t = if t == 0 {
            qm.numerator().clone()
        } else {
            qm.numerator().mul(&metric_power)
        };
        let exp_scale = Rational::from_integer(BigInt::from(-2).pow(t)) / factorial_rat(t);
        let mut slice = RationalFunctionLambda::zero();
        for ((a, b), c) in poly_t.terms() {
            let mut den = Vec::new();
            let mut scalar = exp_scale.clone();
            let mut admitted = true;
            for j in 0..dim {
                let s_holo = a[j] as i64 - qm.pole().holo()[j] as i64;
                let s_anti = b[j] as i64 - qm.pole().anti()[j] as i64;
                if s_holo != s_anti {
                    admitted = false;
                    break;
                }
                if orders[j] == 0 {
                    scalar /= rat_int(s_holo + 1);
                } else {
                    den.push(LinearFactor::new(
                        rat_int(orders[j] as i64),
                        rat_int(s_holo + 1),
                    ));
                }
            }
            if !admitted {
                continue;
            }
            let coeff = (c * &overall).scale(&scalar);
            slice = slice.add(&RationalFunctionLambda::from_term(
                LambdaPoly::monomial(t as usize, coeff),
                den,
            ));
        }
        f = f.add(&slice);
        slices.push(slice);
    }
    Ok(OracleResult {
        f,
        slices,
        pi_power: dim as u32,
        o_s,
        kappa: qm.kappa(),
        truncation,
    })
}

impl OracleResult {
    /// Laurent window of F at the origin, anchored at -κ (or deeper if the
    /// pole-order bound is violated), exact through `truncation - κ`.
    pub fn laurent_window(&self) -> LaurentWindow {
        let validity = self.truncation as i64 - self.kappa as i64;
        let raw = self.f.laurent_raw(&Rational::zero(), validity);
        let floor = (-(self.kappa as i64)).min(raw.keys().next().copied().unwrap_or(0));
        let coeffs = (floor..=validity)
            .map(|k| {
                raw.get(&k)
                    .map(|c| ExactValue::pi_term(self.pi_power, c.clone()))
                    .unwrap_or_default()
            })
            .collect();
        LaurentWindow::new(floor, coeffs, validity)
    }

    /// The window of the bare integral F/o(s).
    pub fn bare_window(&self) -> LaurentWindow {
        let inv = Rational::one() / rat_int(self.o_s as i64);
        self.laurent_window()
            .map_coefficients(|c| c.scale_rat(&inv))
    }

    /// Order-of-pole bound at the origin: true iff F has no coefficient below
    /// λ^{-κ}.
    pub fn pole_order_ok(&self) -> bool {
        self.laurent_window().lowest_order() >= -(self.kappa as i64)
    }
}

/// One audited pole of F.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleAuditEntry {
    #[serde(serialize_with = "ser_rat")]
    pub location: Rational,
    pub order: u32,
    pub bound_satisfied: bool,
    /// exponential-truncation slice the pole was found in.
    pub slice: u32,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

/// max_j min((J_j-1)/I_j, (K_j-1)/I_j) over the section support; `None` when
/// the section is trivial (then F is constant in λ).
pub fn pole_bound(pole: &PoleData, section: &Section) -> Option<Rational> {
    (0..pole.dim())
        .filter(|&j| section.orders()[j] > 0)
        .map(|j| {
            let i = rat_int(section.orders()[j] as i64);
            let holo = rat_int(pole.holo()[j] as i64 - 1) / &i;
            let anti = rat_int(pole.anti()[j] as i64 - 1) / &i;
            holo.min(anti)
        })
        .max()
}

/// Audits every true pole of every truncation slice against the location
/// bound. The bound is stated for the un-truncated integrand, so with a
/// nonzero metric it is applied per t-slice.
pub fn pole_audit(
    oracle: &OracleResult,
    pole: &PoleData,
    section: &Section,
) -> Vec<PoleAuditEntry> {
    let bound = pole_bound(pole, section);
    let mut out = Vec::new();
    for (t, slice) in oracle.slices.iter().enumerate() {
        for (location, order) in slice.poles() {
            let bound_satisfied = match &bound {
                Some(b) => location <= *b,
                None => false,
            };
            out.push(PoleAuditEntry {
                location,
                order,
                bound_satisfied,
                slice: t as u32,
            });
        }
    }
    out
}
