//! The derivative-based continuation pathway: the multi-index differentiation
//! identity and its h-function, the g-derivatives, Laurent coefficients of
//! the regularized integral, canonical currents and principal values.
//!
//! For a validated integrand ψ/(z^J z̄^K) with section s = z^I and metric
//! weight φ, the regularized integral satisfies
//!   ∫|s|^{2λ}·ψ/(z^J z̄^K)·e^{-2λφ} = (-1)^{|J|+|K|}·h(λ)·g(λ)/λ^p
//! with h the inverted product of falling factorials in λI_j and
//!   g(λ) = ∫|z^I|^{2λ}·∂^{J+K}(e^{-2λφ}ψ)/∂z^J∂z̄^K.
//! Everything here reduces to exact moment integrals of log-polynomials.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::EngineError;
use crate::exact::{binomial_rat, factorial_rat, rat_int, ExactValue, GaussianRational, Rational};
use crate::form::{ConjForm, PoledForm};
use crate::lambda::{LambdaPoly, LinearFactor, RationalFunctionLambda};
use crate::moments::integrate_logpoly;
use crate::pole::{order_factor, PoleData, QMIntegrand, Section};
use crate::poly::{ConjPolynomial, LogPolynomial};

/// The function h of the differentiation identity, finite and nonzero at 0,
/// kept as an exact rational function, together with p.
#[derive(Clone, Debug)]
pub struct HFactor {
    pub h: RationalFunctionLambda,
    pub p: usize,
    /// Pole locations of h itself: v/I_j for 1 ≤ v ≤ J_j-1 (and K_j-1).
    pub pole_locations: BTreeSet<Rational>,
}

impl HFactor {
    /// h(0) read off the rational function.
    pub fn at_zero(&self) -> GaussianRational {
        self.h
            .eval(&Rational::zero())
            .expect("h is finite at the origin")
    }

    /// Derivatives h^{(n)}(0) for n = 0..=upto, via the Taylor expansion.
    pub fn derivatives_at_zero(&self, upto: usize) -> Vec<GaussianRational> {
        self.h
            .taylor_at_zero(upto as i64)
            .into_iter()
            .enumerate()
            .map(|(n, c)| c.scale(&factorial_rat(n as u32)))
            .collect()
    }
}

fn check_hypothesis(orders: &[u32], pole: &PoleData) -> Result<(), EngineError> {
    for j in 0..pole.dim() {
        if orders[j] == 0 && (pole.holo()[j] != 0 || pole.anti()[j] != 0) {
            return Err(EngineError::HypothesisViolated {
                var: j + 1,
                holo: pole.holo()[j],
                anti: pole.anti()[j],
            });
        }
    }
    Ok(())
}

/// Builds h for the identity
/// |z^I|^{2λ}/(z^J z̄^K) = (h(λ)/λ^p)·∂^{J+K}|z^I|^{2λ}/∂z^J∂z̄^K.
pub fn h_factor(section: &Section, pole: &PoleData) -> Result<HFactor, EngineError> {
    let orders = section.orders();
    if orders.len() != pole.dim() {
        return Err(EngineError::DimensionMismatch(
            "section and pole dimensions differ".into(),
        ));
    }
    check_hypothesis(orders, pole)?;
    let mut scalar = Rational::one();
    let mut den = Vec::new();
    let mut locations = BTreeSet::new();
    for j in 0..pole.dim() {
        for orders_side in [pole.holo()[j], pole.anti()[j]] {
            if orders_side == 0 {
                continue;
            }
            let i = orders[j];
            scalar *= rat_int(i as i64);
            for v in 1..orders_side {
                // factor (I_j·λ - v), root v/I_j
                den.push(LinearFactor::new(rat_int(i as i64), rat_int(-(v as i64))));
                locations.insert(Rational::new((v as i64).into(), (i as i64).into()));
            }
        }
    }
    let num = LambdaPoly::constant(GaussianRational::from_rational(Rational::one() / scalar));
    Ok(HFactor {
        h: RationalFunctionLambda::from_term(num, den),
        p: pole.p(),
        pole_locations: locations,
    })
}

/// Verifies the differentiation identity formally, in the calculus of symbols
/// c(λ)·z^a z̄^b·|z^I|^{2λ} where ∂/∂z_j multiplies by (a_j + λI_j) and lowers
/// a_j. Returns true iff h(λ)·Π(falling factors) = λ^p as polynomials (the
/// exponent bookkeeping is asserted along the way).
pub fn verify_differentiation_identity(
    section: &Section,
    pole: &PoleData,
) -> Result<bool, EngineError> {
    let orders = section.orders();
    check_hypothesis(orders, pole)?;
    let dim = pole.dim();
    // Differentiate the symbol 1·|z^I|^{2λ}: J_j holomorphic then K_j
    // anti-holomorphic derivatives per variable.
    let mut coeff = LambdaPoly::one();
    let mut z_exp: Vec<i64> = vec![0; dim];
    let mut zbar_exp: Vec<i64> = vec![0; dim];
    for j in 0..dim {
        let i = rat_int(orders[j] as i64);
        for _ in 0..pole.holo()[j] {
            coeff = coeff.mul(&LambdaPoly::linear(i.clone(), rat_int(z_exp[j])));
            z_exp[j] -= 1;
        }
        for _ in 0..pole.anti()[j] {
            coeff = coeff.mul(&LambdaPoly::linear(i.clone(), rat_int(zbar_exp[j])));
            zbar_exp[j] -= 1;
        }
    }
    for j in 0..dim {
        assert_eq!(z_exp[j], -(pole.holo()[j] as i64));
        assert_eq!(zbar_exp[j], -(pole.anti()[j] as i64));
    }
    // Inverse of h as an explicit polynomial.
    let mut h_inv = LambdaPoly::one();
    for j in 0..dim {
        for side in [pole.holo()[j], pole.anti()[j]] {
            if side == 0 {
                continue;
            }
            let i = rat_int(orders[j] as i64);
            h_inv = h_inv.mul(&LambdaPoly::constant(GaussianRational::from_rational(
                i.clone(),
            )));
            for v in 1..side {
                h_inv = h_inv.mul(&LambdaPoly::linear(i.clone(), rat_int(-(v as i64))));
            }
        }
    }
    let lambda_p = LambdaPoly::monomial(pole.p(), GaussianRational::one());
    Ok(coeff == lambda_p.mul(&h_inv))
}

/// Precomputed ingredients for the g-derivatives of one integrand.
struct GMachine {
    /// derivative_of_products[s] = ∂^{J+K}(ψ·φ^s).
    derivative_of_products: Vec<ConjPolynomial>,
    /// log_powers[l] = (Σ_j I_j·log|z_j|²)^l.
    log_powers: Vec<LogPolynomial>,
}

impl GMachine {
    fn new(qm: &QMIntegrand, section: &Section, max_order: usize) -> Self {
        let dim = qm.dim();
        let mut derivative_of_products = Vec::with_capacity(max_order + 1);
        let mut power = qm.numerator().clone();
        derivative_of_products.push(power.mixed_derivative(qm.pole().holo(), qm.pole().anti()));
        for _ in 1..=max_order {
            power = power.mul(qm.metric());
            derivative_of_products.push(power.mixed_derivative(qm.pole().holo(), qm.pole().anti()));
        }
        let base = LogPolynomial::log_linear(dim, section.orders());
        let mut log_powers = Vec::with_capacity(max_order + 1);
        log_powers.push(LogPolynomial::one(dim));
        for l in 1..=max_order {
            log_powers.push(log_powers[l - 1].mul(&base));
        }
        GMachine {
            derivative_of_products,
            log_powers,
        }
    }

    /// g^{(k)}(0) = Σ_{l=0}^{k} C(k,l)·(-2)^{k-l}·∫ (log|z^I|²)^l·∂^{J+K}(ψφ^{k-l}).
    fn g_derivative(&self, k: usize) -> ExactValue {
        let empty = BTreeSet::new();
        let mut acc = ExactValue::zero();
        for l in 0..=k {
            let integrand = self.log_powers[l].mul_poly(&self.derivative_of_products[k - l]);
            let integral = integrate_logpoly(&integrand, &empty);
            if integral.is_zero() {
                continue;
            }
            let mut scale = binomial_rat(k as u32, l as u32);
            let sign_pow = (k - l) as u32;
            scale *= Rational::from_integer(num_bigint::BigInt::from(-2).pow(sign_pow));
            acc = &acc + &integral.scale_rat(&scale);
        }
        acc
    }
}

/// g^{(k)}(0) for the integrand: exact value by multinomial expansion of the
/// log weight and closed-form moments.
pub fn g_derivative(qm: &QMIntegrand, section: &Section, k: usize) -> ExactValue {
    GMachine::new(qm, section, k).g_derivative(k)
}

/// Which pathway produced a coefficient report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pathway {
    Continuation,
    Oracle,
}

/// Laurent coefficients C_{-r}, r = 0..κ, of the bare regularized integral
/// ∫|s|^{2λ}·ψ/(z^J z̄^K)·e^{-2λφ}; the o(s) normalization is exposed
/// separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientReport {
    /// coefficient of λ^{-r}, keyed by r.
    pub coefficients: Vec<(usize, ExactValue)>,
    pub kappa: usize,
    pub p: usize,
    pub o_s: u64,
    pub pathway: Pathway,
}

impl CoefficientReport {
    pub fn coefficient(&self, r: usize) -> ExactValue {
        self.coefficients
            .iter()
            .find(|(s, _)| *s == r)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }
}

/// Laurent coefficients of the bare integral through λ^0 via the h·g/λ^p
/// representation:
/// C_{-r} = ((-1)^{|J|+|K|}/(p-r)!)·Σ_{k=p-κ}^{p-r} C(p-r,k)·h^{(p-r-k)}(0)·g^{(k)}(0).
pub fn laurent_coeffs(
    qm: &QMIntegrand,
    section: &Section,
) -> Result<CoefficientReport, EngineError> {
    section.validate(qm.pole())?;
    let kappa = qm.kappa();
    let p = qm.p();
    let o_s = order_factor(section, qm.pole())?;
    let hf = h_factor(section, qm.pole())?;
    let h_derivs = hf.derivatives_at_zero(p);
    let machine = GMachine::new(qm, section, p);
    let g_derivs: Vec<ExactValue> = (0..=p).map(|k| machine.g_derivative(k)).collect();
    let total_sign =
        if (qm.pole().holo().iter().sum::<u32>() + qm.pole().anti().iter().sum::<u32>()) % 2 == 1 {
            -Rational::one()
        } else {
            Rational::one()
        };
    let mut coefficients = Vec::with_capacity(kappa + 1);
    for r in (0..=kappa).rev() {
        let n = p - r;
        let mut acc = ExactValue::zero();
        for k in (p - kappa)..=n {
            let weight = binomial_rat(n as u32, k as u32);
            let h_part = h_derivs[n - k].scale(&weight);
            acc = &acc + &g_derivs[k].scale(&h_part);
        }
        let scale = &total_sign / factorial_rat(n as u32);
        coefficients.push((r, acc.scale_rat(&scale)));
    }
    Ok(CoefficientReport {
        coefficients,
        kappa,
        p,
        o_s,
        pathway: Pathway::Continuation,
    })
}

/// Canonical current value on the sub-polydisc with the given frozen
/// variables:
/// ((-1)^p/((J-1_J)!(K-1_K)!))·∫ (Π_{j polar} log|z_j|²)·∂^{J+K}ψ.
/// Section- and metric-free.
pub fn canonical_current_on(
    frozen: &BTreeSet<usize>,
    pole: &PoleData,
    psi: &ConjPolynomial,
) -> ExactValue {
    let dim = pole.dim();
    debug_assert!(pole.polar_support().iter().all(|j| !frozen.contains(j)));
    let derived = psi.mixed_derivative(pole.holo(), pole.anti());
    let polar: BTreeSet<usize> = pole.polar_support().into_iter().collect();
    let integrand = LogPolynomial::log_product(dim, &polar).mul_poly(&derived);
    let integral = integrate_logpoly(&integrand, frozen);
    let mut scale = Rational::one();
    for j in 0..dim {
        for side in [pole.holo()[j], pole.anti()[j]] {
            if side > 0 {
                scale /= factorial_rat(side - 1);
            }
        }
    }
    if pole.p() % 2 == 1 {
        scale = -scale;
    }
    integral.scale_rat(&scale)
}

/// ⟨{ω},ξ⟩ for the assembled integrand, by the direct log-moment formula.
pub fn canonical_current(qm: &QMIntegrand) -> ExactValue {
    canonical_current_on(&BTreeSet::new(), qm.pole(), qm.numerator())
}

/// The principal value (κ = 0 only): the λ = 0 value of the continuation.
pub fn principal_value(qm: &QMIntegrand, section: &Section) -> Result<ExactValue, EngineError> {
    if qm.kappa() != 0 {
        return Err(EngineError::NotPrincipalValue(qm.kappa()));
    }
    Ok(laurent_coeffs(qm, section)?.coefficient(0))
}

/// ⟨∂̄\[α\],ξ⟩ = (-1)^{p+q+1}·⟨\[α\],∂̄ξ⟩ for a semi-meromorphic α of bidegree
/// (p,q) and a test form ξ of bidegree (d-p, d-q-1).
pub fn pairing_dbar_pv(alpha: &PoledForm, xi: &ConjForm) -> Result<ExactValue, EngineError> {
    let dim = alpha.dim();
    if xi.dim() != dim {
        return Err(EngineError::DimensionMismatch(
            "test form dimension differs from alpha".into(),
        ));
    }
    if xi.is_zero() || alpha.numerator.is_zero() {
        return Ok(ExactValue::zero());
    }
    let (p, q) = alpha
        .numerator
        .bidegree()
        .ok_or_else(|| EngineError::DegreeMismatch("alpha is not homogeneous".into()))?;
    let (xp, xq) = xi
        .bidegree()
        .ok_or_else(|| EngineError::DegreeMismatch("xi is not homogeneous".into()))?;
    if xp != dim - p || xq != dim - q - 1 {
        return Err(EngineError::DegreeMismatch(format!(
            "xi has bidegree ({xp},{xq}), expected ({},{})",
            dim - p,
            dim - q - 1
        )));
    }
    let product = alpha.numerator.wedge(&xi.dbar());
    let psi = product.top_coefficient(&BTreeSet::new());
    let mut holo = vec![0; dim];
    holo[alpha.var] = alpha.order;
    let pole = PoleData::new(holo, vec![0; dim])?;
    let section = minimal_section(&pole);
    let qm = QMIntegrand::from_expanded(pole, psi, ConjPolynomial::zero(dim))?;
    let value = principal_value(&qm, &section)?;
    Ok(if (p + q + 1) % 2 == 1 { -&value } else { value })
}

/// The section with order 1 on every polar coordinate.
pub fn minimal_section(pole: &PoleData) -> Section {
    let orders = (0..pole.dim())
        .map(|j| u32::from(pole.holo()[j] + pole.anti()[j] > 0))
        .collect();
    Section::new(orders)
}

/// The regularized integral built through the N-shifted representation
/// |z^I|^{2λ}/(z^J z̄^K) = |z^I|^{2(λ+N)}/(z^{J+NI} z̄^{K+NI}): exact rational
/// function of λ, φ = 0 only. Carries the same implicit π^d factor as the
/// closed-form construction it is checked against.
pub fn build_f_shifted(
    qm: &QMIntegrand,
    section: &Section,
    shift: u32,
) -> Result<RationalFunctionLambda, EngineError> {
    if qm.has_metric() {
        return Err(EngineError::Invalid(
            "shifted representation requires a zero metric weight".into(),
        ));
    }
    section.validate(qm.pole())?;
    let dim = qm.dim();
    let orders = section.orders();
    let shifted_holo: Vec<u32> = (0..dim)
        .map(|j| qm.pole().holo()[j] + shift * orders[j])
        .collect();
    let shifted_anti: Vec<u32> = (0..dim)
        .map(|j| qm.pole().anti()[j] + shift * orders[j])
        .collect();
    for j in 0..dim {
        let need = shifted_holo[j] + shifted_anti[j];
        if !qm.numerator().divisible_by_bump(j, need) {
            return Err(EngineError::BumpNotDivisible { var: j + 1, need });
        }
    }
    // 1/c_N(λ): inverted falling factors (λ+N)I_j - v for v = 0..shifted-1.
    let mut inv_den = Vec::new();
    for j in 0..dim {
        for side in [shifted_holo[j], shifted_anti[j]] {
            if side == 0 {
                continue;
            }
            for v in 0..side {
                inv_den.push(LinearFactor::new(
                    rat_int(orders[j] as i64),
                    rat_int(shift as i64 * orders[j] as i64 - v as i64),
                ));
            }
        }
    }
    let sign_parity: u32 = shifted_holo.iter().chain(shifted_anti.iter()).sum();
    let o_s = order_factor(section, qm.pole())?;
    let mut overall = GaussianRational::from_parts(0, -2).pow(dim as u32);
    if crate::form::reorder_sign(dim) < 0 {
        overall = -&overall;
    }
    if sign_parity % 2 == 1 {
        overall = -&overall;
    }
    overall = overall.scale(&rat_int(o_s as i64));

    let derived = qm
        .numerator()
        .mixed_derivative(&shifted_holo, &shifted_anti);
    let mut f = RationalFunctionLambda::zero();
    for ((a, b), c) in derived.terms() {
        if a != b {
            continue;
        }
        let mut den = inv_den.clone();
        let mut scalar = Rational::one();
        for j in 0..dim {
            if orders[j] == 0 {
                scalar /= rat_int(a[j] as i64 + 1);
            } else {
                den.push(LinearFactor::new(
                    rat_int(orders[j] as i64),
                    rat_int(shift as i64 * orders[j] as i64 + a[j] as i64 + 1),
                ));
            }
        }
        let coeff = (c * &overall).scale(&scalar);
        f = f.add(&RationalFunctionLambda::from_term(
            LambdaPoly::constant(coeff),
            den,
        ));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::pole::bump_factor;

    fn ev(pi: u32, re: i64, im: i64) -> ExactValue {
        ExactValue::pi_term(pi, GaussianRational::from_parts(re, im))
    }

    fn pole(holo: Vec<u32>, anti: Vec<u32>) -> PoleData {
        PoleData::new(holo, anti).unwrap()
    }

    /// d=1, I=J=K=(1), ψ=(1-zz̄)², φ=0: the fully worked instance.
    fn golden() -> (QMIntegrand, Section) {
        let qm = QMIntegrand::assemble(
            pole(vec![1], vec![1]),
            &ConjPolynomial::one(1),
            &[2],
            ConjPolynomial::zero(1),
        )
        .unwrap();
        (qm, Section::new(vec![1]))
    }

    #[test]
    fn h_factor_values() {
        // I=(2), J=(3), K=(1): h(0) = 1/8
        let s = Section::new(vec![2]);
        let p = pole(vec![3], vec![1]);
        let hf = h_factor(&s, &p).unwrap();
        assert_eq!(hf.p, 2);
        assert_eq!(hf.at_zero(), GaussianRational::from_rational(rat(1, 8)));
        // poles of h at 1/2 and 1 (from the J-side falling factorial)
        let expected: BTreeSet<Rational> = [rat(1, 2), rat(1, 1)].into_iter().collect();
        assert_eq!(hf.pole_locations, expected);
        let true_poles: BTreeSet<Rational> = hf.h.poles().into_iter().map(|(loc, _)| loc).collect();
        assert_eq!(true_poles, expected);

        // I=J=K=(1): h ≡ 1
        let hf = h_factor(&Section::new(vec![1]), &pole(vec![1], vec![1])).unwrap();
        assert_eq!(hf.at_zero(), GaussianRational::one());
        assert!(hf.h.poles().is_empty());
    }

    #[test]
    fn h_at_zero_closed_form() {
        // h(0) = (-1)^{|J|+|K|-p}/((J-1_J)!(K-1_K)!)·Π I_j^{-1} (J side)·Π I_j^{-1} (K side)
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let dim = rng.gen_range(1..=3);
            let holo: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=3)).collect();
            let anti: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=3)).collect();
            let orders: Vec<u32> = (0..dim)
                .map(|j| {
                    if holo[j] + anti[j] > 0 {
                        rng.gen_range(1..=3)
                    } else {
                        0
                    }
                })
                .collect();
            let p = pole(holo.clone(), anti.clone());
            let hf = h_factor(&Section::new(orders.clone()), &p).unwrap();
            let mut expected = Rational::one();
            for j in 0..dim {
                for side in [holo[j], anti[j]] {
                    if side == 0 {
                        continue;
                    }
                    expected /= factorial_rat(side - 1);
                    expected /= rat_int(orders[j] as i64);
                }
            }
            let total: u32 = holo.iter().sum::<u32>() + anti.iter().sum::<u32>();
            if (total as usize + p.p()) % 2 == 1 {
                expected = -expected;
            }
            assert_eq!(hf.at_zero(), GaussianRational::from_rational(expected));
        }
    }

    #[test]
    fn differentiation_identity_small_cases() {
        assert!(
            verify_differentiation_identity(&Section::new(vec![1]), &pole(vec![1], vec![1]))
                .unwrap()
        );
        assert!(
            verify_differentiation_identity(&Section::new(vec![1]), &pole(vec![2], vec![0]))
                .unwrap()
        );
        let err = verify_differentiation_identity(&Section::new(vec![0]), &pole(vec![1], vec![0]));
        assert!(err.is_err());
    }

    #[test]
    fn g_derivatives_of_golden_instance() {
        let (qm, s) = golden();
        assert!(g_derivative(&qm, &s, 0).is_zero());
        assert_eq!(g_derivative(&qm, &s, 1), ev(1, 0, -2));
        assert_eq!(g_derivative(&qm, &s, 2), ev(1, 0, 6));
    }

    #[test]
    fn laurent_coeffs_of_golden_instance() {
        let (qm, s) = golden();
        let report = laurent_coeffs(&qm, &s).unwrap();
        assert_eq!(report.kappa, 1);
        assert_eq!(report.p, 2);
        assert_eq!(report.o_s, 1);
        assert_eq!(report.coefficient(1), ev(1, 0, -2)); // C_{-1} = -2πi
        assert_eq!(report.coefficient(0), ev(1, 0, 3)); // C_0 = 3πi
    }

    #[test]
    fn canonical_current_of_golden_instance() {
        let (qm, _) = golden();
        assert_eq!(canonical_current(&qm), ev(1, 0, -2));
    }

    #[test]
    fn canonical_current_matches_point_formula() {
        // d=1, J=(m), K=(n): value = -2πi/((m-1)!(n-1)!)·∂^{m+n-2}ψ|₀
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..30 {
            let m = rng.gen_range(1..=3u32);
            let n = rng.gen_range(1..=3u32);
            let mut base = ConjPolynomial::zero(1);
            for _ in 0..rng.gen_range(1..=3) {
                base.insert_term(
                    vec![rng.gen_range(0..=2)],
                    vec![rng.gen_range(0..=2)],
                    GaussianRational::from_parts(rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
                );
            }
            let qm = QMIntegrand::assemble(
                pole(vec![m], vec![n]),
                &base,
                &[m + n + 1],
                ConjPolynomial::zero(1),
            )
            .unwrap();
            let mut wanted = qm.numerator().clone();
            for _ in 0..m - 1 {
                wanted = wanted.d_dz(0);
            }
            for _ in 0..n - 1 {
                wanted = wanted.d_dzbar(0);
            }
            let scale = Rational::one() / (factorial_rat(m - 1) * factorial_rat(n - 1));
            let expected = ExactValue::pi_term(
                1,
                GaussianRational::from_parts(0, -2).scale(&scale) * wanted.constant_term(),
            );
            assert_eq!(canonical_current(&qm), expected, "m={m} n={n}");
        }
    }

    #[test]
    fn principal_value_examples() {
        // J=(1), K=(0), ψ = (1-zz̄)²·z → -2πi/3
        let qm = QMIntegrand::assemble(
            pole(vec![1], vec![0]),
            &ConjPolynomial::var(1, 0),
            &[2],
            ConjPolynomial::zero(1),
        )
        .unwrap();
        let s = Section::new(vec![1]);
        let pv = principal_value(&qm, &s).unwrap();
        assert_eq!(
            pv,
            ExactValue::pi_term(1, GaussianRational::new(rat(0, 1), rat(-2, 3)))
        );
        // the same computation through the canonical current (κ = 0 case)
        assert_eq!(canonical_current(&qm), pv);

        // κ > 0 is rejected
        let (qm, s) = golden();
        assert!(matches!(
            principal_value(&qm, &s),
            Err(EngineError::NotPrincipalValue(1))
        ));
    }

    #[test]
    fn principal_value_of_cancelling_pole() {
        // ψ divisible by z^J z̄^K: the value is the plain integral of the
        // quotient. ψ = z z̄·(1-zz̄)², J = K = (1).
        let base = ConjPolynomial::monomial(1, vec![1], vec![1], GaussianRational::one());
        let qm =
            QMIntegrand::assemble(pole(vec![1], vec![1]), &base, &[3], ConjPolynomial::zero(1))
                .unwrap();
        // κ = 1 formally, but the instance is smooth: C_{-1} must vanish and
        // C_0 must equal ∫(1-zz̄)³... note the assembled bump is (1-zz̄)³.
        let s = Section::new(vec![1]);
        let report = laurent_coeffs(&qm, &s).unwrap();
        assert!(report.coefficient(1).is_zero());
        // ∫(1-zz̄)³ = -2πi(1 - 3/2 + 1 - 1/4) = -2πi·1/4
        assert_eq!(
            report.coefficient(0),
            ExactValue::pi_term(1, GaussianRational::new(rat(0, 1), rat(-1, 2)))
        );

        // J=K=0: the integral of ψ itself, whatever the (empty) section
        let qm = QMIntegrand::assemble(
            pole(vec![0], vec![0]),
            &ConjPolynomial::one(1),
            &[1],
            ConjPolynomial::zero(1),
        )
        .unwrap();
        let pv = principal_value(&qm, &Section::new(vec![0])).unwrap();
        // ∫(1-zz̄) = -2πi·(1 - 1/2) = -πi
        assert_eq!(
            pv,
            ExactValue::pi_term(1, GaussianRational::from_parts(0, -1))
        );
    }

    #[test]
    fn vanishing_order_of_g() {
        // g^{(k)}(0) = 0 for k < p-κ on random instances
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..15 {
            let dim = rng.gen_range(1..=2);
            let holo: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2)).collect();
            let anti: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2)).collect();
            let p = pole(holo.clone(), anti.clone());
            let orders: Vec<u32> = (0..dim)
                .map(|j| {
                    if holo[j] + anti[j] > 0 {
                        rng.gen_range(1..=2)
                    } else {
                        0
                    }
                })
                .collect();
            let bump: Vec<u32> = (0..dim).map(|j| holo[j] + anti[j] + 1).collect();
            let mut base = ConjPolynomial::zero(dim);
            for _ in 0..2 {
                base.insert_term(
                    (0..dim).map(|_| rng.gen_range(0..=2)).collect(),
                    (0..dim).map(|_| rng.gen_range(0..=2)).collect(),
                    GaussianRational::from_parts(rng.gen_range(-2..=2), rng.gen_range(-2..=2)),
                );
            }
            let qm =
                QMIntegrand::assemble(p.clone(), &base, &bump, ConjPolynomial::zero(dim)).unwrap();
            let s = Section::new(orders);
            for k in 0..p.p().saturating_sub(p.kappa()) {
                assert!(
                    g_derivative(&qm, &s, k).is_zero(),
                    "g^({k})(0) != 0 for J={holo:?} K={anti:?}"
                );
            }
        }
    }

    #[test]
    fn multinomial_expansion_matches_m_sum() {
        // (Σ I_j log|z_j|²)^l expanded directly equals the explicit sum over
        // multi-indices M with |M| = l of (l choose M)·Π(I_j log|z_j|²)^{M_j}.
        fn m_sum(dim: usize, orders: &[u32], l: u32) -> LogPolynomial {
            fn enumerate(
                dim: usize,
                orders: &[u32],
                j: usize,
                left: u32,
                current: &mut Vec<u32>,
                out: &mut Vec<Vec<u32>>,
            ) {
                if j == dim {
                    if left == 0 {
                        out.push(current.clone());
                    }
                    return;
                }
                let max = if orders[j] == 0 { 0 } else { left };
                for v in 0..=max {
                    current.push(v);
                    enumerate(dim, orders, j + 1, left - v, current, out);
                    current.pop();
                }
            }
            let mut indices = Vec::new();
            enumerate(dim, orders, 0, l, &mut Vec::new(), &mut indices);
            let mut acc = LogPolynomial::zero(dim);
            for m in indices {
                let mut coeff = factorial_rat(l);
                let mut weight = Rational::one();
                for j in 0..dim {
                    coeff /= factorial_rat(m[j]);
                    for _ in 0..m[j] {
                        weight *= rat_int(orders[j] as i64);
                    }
                }
                let mut term = LogPolynomial::zero(dim);
                term.insert_term(
                    vec![0; dim],
                    vec![0; dim],
                    m,
                    GaussianRational::from_rational(coeff * weight),
                );
                acc = acc.add(&term);
            }
            acc
        }
        for (dim, orders) in [(1usize, vec![2u32]), (2, vec![1, 3]), (3, vec![2, 0, 1])] {
            let base = LogPolynomial::log_linear(dim, &orders);
            for l in 0..=4u32 {
                assert_eq!(base.pow(l), m_sum(dim, &orders, l), "dim={dim} l={l}");
            }
        }
    }

    #[test]
    fn shifted_representation_matches_direct_form() {
        // N = 1 on the golden pole shape with a big enough bump.
        let qm = QMIntegrand::assemble(
            pole(vec![1], vec![1]),
            &ConjPolynomial::one(1),
            &[5],
            ConjPolynomial::zero(1),
        )
        .unwrap();
        let s = Section::new(vec![1]);
        let direct = crate::oracle::build_f(&qm, &s, 0).unwrap();
        let shifted = build_f_shifted(&qm, &s, 1).unwrap();
        assert!(direct.f.equal_as_function(&shifted));
        // N = 0 degenerates to the direct construction
        let zero_shift = build_f_shifted(&qm, &s, 0).unwrap();
        assert!(direct.f.equal_as_function(&zero_shift));
    }

    #[test]
    fn shifted_representation_random_instances() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..12 {
            let dim = rng.gen_range(1..=2);
            let holo: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2)).collect();
            let anti: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2)).collect();
            let orders: Vec<u32> = (0..dim)
                .map(|j| {
                    if holo[j] + anti[j] > 0 {
                        rng.gen_range(1..=2)
                    } else {
                        0
                    }
                })
                .collect();
            // the shifted route differentiates J+K+2NI times per variable
            let bump: Vec<u32> = (0..dim)
                .map(|j| holo[j] + anti[j] + 2 * orders[j])
                .collect();
            let mut base = ConjPolynomial::zero(dim);
            for _ in 0..rng.gen_range(1..=2) {
                base.insert_term(
                    (0..dim).map(|_| rng.gen_range(0..=2)).collect(),
                    (0..dim).map(|_| rng.gen_range(0..=2)).collect(),
                    GaussianRational::from_parts(rng.gen_range(-2..=2), rng.gen_range(-2..=2)),
                );
            }
            let qm =
                QMIntegrand::assemble(pole(holo, anti), &base, &bump, ConjPolynomial::zero(dim))
                    .unwrap();
            let s = Section::new(orders);
            let direct = crate::oracle::build_f(&qm, &s, 0).unwrap();
            let shifted = build_f_shifted(&qm, &s, 1).unwrap();
            assert!(
                direct.f.equal_as_function(&shifted),
                "N-shift mismatch for J={:?} K={:?} I={:?}",
                qm.pole().holo(),
                qm.pole().anti(),
                s.orders()
            );
        }
    }

    #[test]
    fn d3_mixed_pole_agrees_with_oracle() {
        // J=(1,1,0), K=(1,0,1): one two-sided, one holomorphic-only, one
        // anti-holomorphic-only variable; κ=1, p=4.
        // the z_2·z̄_3 term survives the one-sided ∂_2 and ∂̄_3 derivatives
        let base = ConjPolynomial::one(3)
            .add(&ConjPolynomial::monomial(
                3,
                vec![0, 1, 0],
                vec![0, 0, 1],
                GaussianRational::from_parts(3, 0),
            ))
            .add(&ConjPolynomial::monomial(
                3,
                vec![1, 0, 0],
                vec![1, 0, 0],
                GaussianRational::from_parts(2, -1),
            ));
        let qm = QMIntegrand::assemble(
            pole(vec![1, 1, 0], vec![1, 0, 1]),
            &base,
            &[2, 1, 1],
            ConjPolynomial::zero(3),
        )
        .unwrap();
        let s = Section::new(vec![1, 1, 1]);
        assert_eq!(qm.kappa(), 1);
        assert_eq!(qm.p(), 4);
        let cont = laurent_coeffs(&qm, &s).unwrap();
        let bare = crate::oracle::build_f(&qm, &s, 1).unwrap().bare_window();
        assert_eq!(cont.coefficient(1), bare.coefficient(-1));
        assert_eq!(cont.coefficient(0), bare.coefficient(0));
        assert!(!cont.coefficient(1).is_zero());
    }

    #[test]
    fn pairing_dbar_pv_degenerate_cases() {
        // smooth closed α: Stokes kills the pairing; take α = dz (d=1, p=1, q=0)
        // paired against scalar bumps ξ.
        let alpha = PoledForm::new(ConjForm::dz(1, 0), 0, 0);
        let xi = ConjForm::scalar(bump_factor(1, 0).pow(2));
        let v = pairing_dbar_pv(&alpha, &xi).unwrap();
        assert!(v.is_zero());
        // ξ = 0 → 0
        let v = pairing_dbar_pv(&alpha, &ConjForm::zero(1)).unwrap();
        assert!(v.is_zero());
    }
}
