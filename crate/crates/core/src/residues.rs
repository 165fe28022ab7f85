//! Local residue representatives (Poincaré, conjugate Dolbeault, Aeppli,
//! iterated Aeppli) and exact verification of the identities relating them to
//! canonical currents and principal values.
//!
//! Sign conventions. A (d,d) integrand ψ/(z^J z̄^K)·dz_S∧dz̄_S factors as
//!   (dz_v∧dz̄_v/(z_v^m z̄_v^n)) ∧ (-1)^{|S|-1}·(ψ/…)·dz_{S∖v}∧dz̄_{S∖v},
//! so each Aeppli resolution step carries the sign (-1)^{|S|-1}, |S| = number
//! of active variables (verified against the wedge algebra in form.rs tests).
//! With this convention every identity below holds with exact zero difference
//! under the global orientation used by the moment integrals.

use std::collections::BTreeSet;

use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::continuation::{
    canonical_current, canonical_current_on, laurent_coeffs, pairing_dbar_pv, principal_value,
};
use crate::error::EngineError;
use crate::exact::{factorial_rat, rat_int, ExactValue, GaussianRational, Rational};
use crate::form::{ConjForm, IndexSet, PoledForm};
use crate::pole::{order_factor, PoleData, QMIntegrand, Section};
use crate::poly::ConjPolynomial;

/// A form on the coordinate subvariety {z_j = 0 : j ∈ base}, kept in ambient
/// indexing, together with the monomial poles it still carries in the
/// surviving variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueRepresentative {
    pub base: BTreeSet<usize>,
    pub form: ConjForm,
    pub residual_pole: PoleData,
}

impl ResidueRepresentative {
    pub fn is_zero(&self) -> bool {
        self.form.is_zero()
    }

    /// Active (non-frozen) variables.
    pub fn active(&self) -> Vec<usize> {
        (0..self.form.dim())
            .filter(|j| !self.base.contains(j))
            .collect()
    }
}

impl Serialize for ResidueRepresentative {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct FormTerm {
            z: Vec<u32>,
            zbar: Vec<u32>,
            re: String,
            im: String,
            dz: Vec<usize>,
            dzbar: Vec<usize>,
        }
        let mut terms = Vec::new();
        for ((dz, dzbar), poly) in self.form.terms() {
            for ((a, b), c) in poly.terms() {
                terms.push(FormTerm {
                    z: a.clone(),
                    zbar: b.clone(),
                    re: crate::exact::rational_string(&c.re),
                    im: crate::exact::rational_string(&c.im),
                    dz: dz.iter().map(|j| j + 1).collect(),
                    dzbar: dzbar.iter().map(|j| j + 1).collect(),
                });
            }
        }
        let mut s = serializer.serialize_struct("ResidueRepresentative", 4)?;
        s.serialize_field("base", &self.base.iter().map(|j| j + 1).collect::<Vec<_>>())?;
        s.serialize_field("residual_holo", &self.residual_pole.holo())?;
        s.serialize_field("residual_anti", &self.residual_pole.anti())?;
        s.serialize_field("form", &terms)?;
        s.end()
    }
}

/// Conjugate Dolbeault residue of a (d,q) form dz_v∧α̃/z_v^m:
/// (1/(m-1)!)·∂^{m-1}α̃/∂z_v^{m-1} restricted to {z_v = 0}.
pub fn res_dolbeault(alpha: &PoledForm) -> Result<ResidueRepresentative, EngineError> {
    let dim = alpha.dim();
    let base: BTreeSet<usize> = [alpha.var].into_iter().collect();
    if alpha.order == 0 {
        return Ok(ResidueRepresentative {
            base,
            form: ConjForm::zero(dim),
            residual_pole: PoleData::smooth(dim),
        });
    }
    if alpha
        .numerator
        .terms()
        .any(|((a, _), _)| !a.contains(&alpha.var))
    {
        return Err(EngineError::DegreeMismatch(format!(
            "form is not of the shape dz_{}∧(…): a term misses the polar generator",
            alpha.var + 1
        )));
    }
    let tilde = alpha.numerator.factor_out_dz(alpha.var);
    let mut derived = tilde;
    for _ in 0..alpha.order - 1 {
        derived = derived.map_coefficients(|p| p.d_dz(alpha.var));
    }
    let scale = Rational::one() / factorial_rat(alpha.order - 1);
    let form = derived
        .restrict_zero(&base)
        .scale(&GaussianRational::from_rational(scale));
    Ok(ResidueRepresentative {
        base,
        form,
        residual_pole: PoleData::smooth(dim),
    })
}

/// Poincaré residue of a meromorphic (d,0) form (b/z_v)·dz: b|_{z_v=0}·dz'.
pub fn poincare_res(beta: &PoledForm) -> Result<ResidueRepresentative, EngineError> {
    let dim = beta.dim();
    if beta.order != 1 {
        return Err(EngineError::WrongPoleOrder {
            expected: 1,
            got: beta.order,
        });
    }
    if beta.numerator.is_zero() {
        return Ok(ResidueRepresentative {
            base: [beta.var].into_iter().collect(),
            form: ConjForm::zero(dim),
            residual_pole: PoleData::smooth(dim),
        });
    }
    match beta.numerator.bidegree() {
        Some((p, 0)) if p == dim => {}
        _ => {
            return Err(EngineError::DegreeMismatch(
                "Poincaré residue needs a (d,0) form".into(),
            ))
        }
    }
    let coeff = beta
        .numerator
        .coefficient(&(0..dim).collect::<IndexSet>(), &IndexSet::new());
    if coeff.terms().any(|((_, b), _)| b.iter().any(|&e| e != 0)) {
        return Err(EngineError::NotHolomorphic);
    }
    let base: BTreeSet<usize> = [beta.var].into_iter().collect();
    let tilde = beta.numerator.factor_out_dz(beta.var);
    Ok(ResidueRepresentative {
        base: base.clone(),
        form: tilde.restrict_zero(&base),
        residual_pole: PoleData::smooth(dim),
    })
}

/// One Aeppli resolution step in variable `var` on a top-degree
/// representative. Missing pole orders are padded (numerator multiplied by
/// z_v or z̄_v, order set to 1) before the mixed derivative, which makes the
/// semi-meromorphic residue vanish identically.
pub fn res_aeppli_step(rep: &ResidueRepresentative, var: usize) -> ResidueRepresentative {
    assert!(!rep.base.contains(&var), "variable already resolved");
    let dim = rep.form.dim();
    let active = rep.active();
    let mut coeff = rep.form.top_coefficient(&rep.base);
    let mut m = rep.residual_pole.holo()[var];
    let mut n = rep.residual_pole.anti()[var];
    if m == 0 {
        coeff = coeff.mul_z(var, 1);
        m = 1;
    }
    if n == 0 {
        coeff = coeff.mul_zbar(var, 1);
        n = 1;
    }
    for _ in 0..m - 1 {
        coeff = coeff.d_dz(var);
    }
    for _ in 0..n - 1 {
        coeff = coeff.d_dzbar(var);
    }
    let mut scale = Rational::one() / (factorial_rat(m - 1) * factorial_rat(n - 1));
    if (active.len() - 1) % 2 == 1 {
        scale = -scale;
    }
    let mut base = rep.base.clone();
    base.insert(var);
    let var_set: BTreeSet<usize> = [var].into_iter().collect();
    let coeff = coeff.restrict_zero(&var_set).scale_rat(&scale);
    let remaining: IndexSet = active.into_iter().filter(|&j| j != var).collect();
    let form = if coeff.is_zero() {
        ConjForm::zero(dim)
    } else {
        ConjForm::from_term(dim, remaining.clone(), remaining, coeff)
    };
    ResidueRepresentative {
        base,
        form,
        residual_pole: rep.residual_pole.without_vars(&var_set),
    }
}

/// The initial representative of an assembled (d,d) integrand: its numerator
/// on the full volume form, all poles still unresolved.
pub fn initial_representative(qm: &QMIntegrand) -> ResidueRepresentative {
    let dim = qm.dim();
    let form = if qm.numerator().is_zero() {
        ConjForm::zero(dim)
    } else {
        ConjForm::from_term(
            dim,
            (0..dim).collect(),
            (0..dim).collect(),
            qm.numerator().clone(),
        )
    };
    ResidueRepresentative {
        base: BTreeSet::new(),
        form,
        residual_pole: qm.pole().clone(),
    }
}

/// Single Aeppli residue of the integrand with respect to {z_var = 0}.
pub fn res_aeppli(qm: &QMIntegrand, var: usize) -> ResidueRepresentative {
    res_aeppli_step(&initial_representative(qm), var)
}

/// Iterated Aeppli residue down to the stratum {z_j = 0 : j ∈ stratum},
/// resolving variables in ascending index order; the empty stratum returns
/// the integrand unchanged.
pub fn res_aeppli_iter(qm: &QMIntegrand, stratum: &BTreeSet<usize>) -> ResidueRepresentative {
    let mut rep = initial_representative(qm);
    for &var in stratum {
        rep = res_aeppli_step(&rep, var);
    }
    rep
}

/// ⟨{rep},1⟩ on the sub-polydisc: the canonical-current formula applied to
/// the residual poles, which degrades to the plain integral when the
/// representative is smooth.
pub fn pair_with_one(rep: &ResidueRepresentative) -> ExactValue {
    if rep.form.is_zero() {
        return ExactValue::zero();
    }
    let coeff = rep.form.top_coefficient(&rep.base);
    canonical_current_on(&rep.base, &rep.residual_pole, &coeff)
}

/// Exact comparison record for one identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub check: String,
    pub lhs: ExactValue,
    pub rhs: ExactValue,
    pub difference: ExactValue,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(check: &str, lhs: ExactValue, rhs: ExactValue) -> Self {
        let difference = &lhs - &rhs;
        let pass = difference.is_zero();
        IdentityReport {
            check: check.to_string(),
            lhs,
            rhs,
            difference,
            pass,
        }
    }
}

/// ⟨∂̄\[α\],ξ⟩ = ⟨\[∂̄α\],ξ⟩ + 2πi·∫_D Res_∂(α∧ξ), all three terms computed
/// exactly; α has a z_var-pole only and ξ carries enough bump for every
/// principal value involved.
pub fn check_residue_pairing(
    alpha: &PoledForm,
    xi: &ConjForm,
) -> Result<IdentityReport, EngineError> {
    let dim = alpha.dim();
    let lhs = pairing_dbar_pv(alpha, xi)?;

    let mut holo = vec![0; dim];
    holo[alpha.var] = alpha.order;
    let pole = PoleData::new(holo, vec![0; dim])?;
    let section = crate::continuation::minimal_section(&pole);

    let middle_form = alpha.numerator.dbar().wedge(xi);
    let middle_qm = QMIntegrand::from_expanded(
        pole,
        middle_form.top_coefficient(&BTreeSet::new()),
        ConjPolynomial::zero(dim),
    )?;
    let middle = principal_value(&middle_qm, &section)?;

    let residue_input = PoledForm::new(alpha.numerator.wedge(xi), alpha.var, alpha.order);
    let rep = res_dolbeault(&residue_input)?;
    let coeff = rep.form.top_coefficient(&rep.base);
    let integral = canonical_current_on(&rep.base, &PoleData::smooth(dim), &coeff);
    let two_pi_i = ExactValue::pi_term(1, GaussianRational::from_parts(0, 2));

    let rhs = &middle + &(&two_pi_i * &integral);
    Ok(IdentityReport::new("residue-pairing", lhs, rhs))
}

/// ⟨{ω},ξ⟩ = -2πi·∫_D Res_A(ω∧ξ) for a single two-sided polar variable.
pub fn check_aeppli_smooth(qm: &QMIntegrand) -> Result<IdentityReport, EngineError> {
    let polar = qm.pole().polar_support();
    let two_sided = qm.pole().two_sided_support();
    if polar.len() != 1 || two_sided != polar {
        return Err(EngineError::Invalid(
            "smooth-hypersurface identity needs exactly one polar variable with a two-sided pole"
                .into(),
        ));
    }
    let lhs = canonical_current(qm);
    let rep = res_aeppli(qm, polar[0]);
    let minus_two_pi_i = ExactValue::minus_two_pi_i_pow(1);
    let rhs = &minus_two_pi_i * &pair_with_one(&rep);
    Ok(IdentityReport::new("aeppli-smooth", lhs, rhs))
}

/// ⟨{ω},ξ⟩ = (-2πi)^κ·⟨{Res_A^{E}(ω∧ξ)},1⟩ for general normal crossings.
pub fn check_aeppli_crossings(qm: &QMIntegrand) -> Result<IdentityReport, EngineError> {
    let stratum: BTreeSet<usize> = qm.pole().two_sided_support().into_iter().collect();
    let kappa = stratum.len() as u32;
    let lhs = canonical_current(qm);
    let rep = res_aeppli_iter(qm, &stratum);
    let rhs = &ExactValue::minus_two_pi_i_pow(kappa) * &pair_with_one(&rep);
    Ok(IdentityReport::new("aeppli-crossings", lhs, rhs))
}

/// The equal-supports case: the iterated residue is smooth on the stratum and
/// the pairing is a plain integral.
pub fn check_aeppli_equal_supports(qm: &QMIntegrand) -> Result<IdentityReport, EngineError> {
    let holo_support: Vec<usize> = (0..qm.dim()).filter(|&j| qm.pole().holo()[j] > 0).collect();
    let anti_support: Vec<usize> = (0..qm.dim()).filter(|&j| qm.pole().anti()[j] > 0).collect();
    if holo_support != anti_support {
        return Err(EngineError::Invalid(
            "equal-supports identity needs matching holomorphic and anti-holomorphic supports"
                .into(),
        ));
    }
    let stratum: BTreeSet<usize> = qm.pole().two_sided_support().into_iter().collect();
    let kappa = stratum.len() as u32;
    let rep = res_aeppli_iter(qm, &stratum);
    debug_assert!(rep.residual_pole.is_smooth());
    let lhs = canonical_current(qm);
    let rhs = &ExactValue::minus_two_pi_i_pow(kappa) * &pair_with_one(&rep);
    Ok(IdentityReport::new("aeppli-equal-supports", lhs, rhs))
}

/// Res_A(α∧β̄) = (-1)^{d-1}·[Res_∂α ∧ conj(Res β)] for α with a z_v-pole of
/// order m and β with a simple holomorphic pole; compares both the stratum
/// integrals and (in the single chart) the representatives themselves.
pub fn check_aeppli_poincare(
    alpha: &PoledForm,
    beta: &PoledForm,
) -> Result<IdentityReport, EngineError> {
    let dim = alpha.dim();
    if beta.dim() != dim || beta.var != alpha.var {
        return Err(EngineError::DimensionMismatch(
            "the two forms must share one polar variable".into(),
        ));
    }
    match alpha.numerator.bidegree() {
        Some((p, 0)) if p == dim => {}
        None => {}
        _ => {
            return Err(EngineError::DegreeMismatch(
                "first form must be a (d,0) form".into(),
            ))
        }
    }
    // α and β stay meromorphic: both sides are derivative/restriction algebra
    // and plain stratum integrals, so no bump hypothesis is needed and the
    // initial representative is built directly.
    let product = alpha.numerator.wedge(&beta.numerator.conj());
    let psi = product.top_coefficient(&BTreeSet::new());
    let mut holo = vec![0; dim];
    let mut anti = vec![0; dim];
    holo[alpha.var] = alpha.order;
    anti[alpha.var] = beta.order;
    let pole = PoleData::new(holo, anti)?;
    let rep0 = ResidueRepresentative {
        base: BTreeSet::new(),
        form: if psi.is_zero() {
            ConjForm::zero(dim)
        } else {
            ConjForm::from_term(dim, (0..dim).collect(), (0..dim).collect(), psi)
        },
        residual_pole: pole,
    };
    let lhs_rep = res_aeppli_step(&rep0, alpha.var);
    let lhs = pair_with_one(&lhs_rep);

    let dol = res_dolbeault(alpha)?;
    let poi = poincare_res(beta)?;
    let mut rhs_form = dol.form.wedge(&poi.form.conj());
    if (dim - 1) % 2 == 1 {
        rhs_form = rhs_form.neg();
    }
    let rhs_rep = ResidueRepresentative {
        base: lhs_rep.base.clone(),
        form: rhs_form,
        residual_pole: PoleData::smooth(dim),
    };
    let rhs = pair_with_one(&rhs_rep);
    let mut report = IdentityReport::new("aeppli-poincare", lhs, rhs);
    // in one chart the representatives agree on the nose, not only after
    // integration
    report.pass = report.pass && lhs_rep.form == rhs_rep.form;
    Ok(report)
}

/// Per-coefficient record of the metric-dependence checks.
#[derive(Clone, Debug, Serialize)]
pub struct MetricEntry {
    pub r: usize,
    pub finite_difference_zero: bool,
    pub top_coefficient: ExactValue,
    pub formula_value: ExactValue,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub kappa: usize,
    pub o_s: u64,
    pub entries: Vec<MetricEntry>,
    pub pass: bool,
}

/// Verifies that C_{-r}(t·φ) is a polynomial of degree ≤ κ-r in t (vanishing
/// (κ-r+1)-th finite difference) and that its top homogeneous part equals
/// (-2πi)^κ·(-2)^{κ-r}/(o(s)·(κ-r)!) · ⟨{Res_A^{E}(φ^{κ-r}·ω∧ξ)},1⟩,
/// all exactly. For κ = 1 the r = 1 row is the leading-coefficient residue
/// formula and the r = 0 row is the metric slope of C_0.
pub fn check_metric_dependence(
    qm: &QMIntegrand,
    section: &Section,
) -> Result<MetricReport, EngineError> {
    let kappa = qm.kappa();
    let o_s = order_factor(section, qm.pole())?;
    let stratum: BTreeSet<usize> = qm.pole().two_sided_support().into_iter().collect();
    // C_{-r}(t·φ) for t = 0..=κ+1, one continuation run per t.
    let reports: Vec<_> = (0..=(kappa as i64 + 1))
        .map(|t| laurent_coeffs(&qm.with_metric_scaled(t), section))
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::with_capacity(kappa + 1);
    let mut pass = true;
    for r in 0..=kappa {
        let deg = kappa - r;
        let value = |t: usize| reports[t].coefficient(r);
        let fin_diff = |order: usize| {
            let mut acc = ExactValue::zero();
            for i in 0..=order {
                let sign = if i % 2 == 1 {
                    -Rational::one()
                } else {
                    Rational::one()
                };
                let w = sign * crate::exact::binomial_rat(order as u32, i as u32);
                acc = &acc + &value(order - i).scale_rat(&w);
            }
            acc
        };
        let finite_difference_zero = fin_diff(deg + 1).is_zero();
        let top_coefficient =
            fin_diff(deg).scale_rat(&(Rational::one() / factorial_rat(deg as u32)));

        let powered = qm.with_numerator(qm.numerator().mul(&qm.metric().pow(deg as u32)))?;
        let rep = res_aeppli_iter(&powered, &stratum);
        let mut scale = Rational::from_integer(num_bigint::BigInt::from(-2).pow(deg as u32));
        scale /= factorial_rat(deg as u32) * rat_int(o_s as i64);
        let formula_value =
            ExactValue::minus_two_pi_i_pow(kappa as u32).scale_rat(&scale) * pair_with_one(&rep);
        let matches = top_coefficient == formula_value;
        pass = pass && finite_difference_zero && matches;
        entries.push(MetricEntry {
            r,
            finite_difference_zero,
            top_coefficient,
            formula_value,
            matches,
        });
    }
    Ok(MetricReport {
        kappa,
        o_s,
        entries,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::pole::bump_factor;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn ev(pi: u32, re: i64, im: i64) -> ExactValue {
        ExactValue::pi_term(pi, GaussianRational::from_parts(re, im))
    }

    fn pole(holo: Vec<u32>, anti: Vec<u32>) -> PoleData {
        PoleData::new(holo, anti).unwrap()
    }

    #[test]
    fn dolbeault_residue_simple_restriction() {
        // α = (1/z_1)·dz_1∧dz̄_2·z̄_2 in d=2: residue is z̄_2·dz̄_2 on {z_1=0}
        let num = ConjForm::from_term(2, vec![0], vec![1], ConjPolynomial::var_bar(2, 1));
        let alpha = PoledForm::new(num, 0, 1);
        let rep = res_dolbeault(&alpha).unwrap();
        assert_eq!(
            rep.form,
            ConjForm::from_term(2, vec![], vec![1], ConjPolynomial::var_bar(2, 1))
        );
    }

    #[test]
    fn dolbeault_residue_leibniz_case() {
        // α = (z²·b/z³)·dz with constant b: representative is b
        let b = 5i64;
        let num = ConjForm::from_term(
            1,
            vec![0],
            vec![],
            ConjPolynomial::monomial(1, vec![2], vec![0], g(b)),
        );
        let alpha = PoledForm::new(num, 0, 3);
        let rep = res_dolbeault(&alpha).unwrap();
        assert_eq!(
            rep.form,
            ConjForm::from_term(1, vec![], vec![], ConjPolynomial::constant(1, g(b)))
        );
        // smooth input → zero representative
        let smooth = PoledForm::new(ConjForm::dz(1, 0), 0, 0);
        assert!(res_dolbeault(&smooth).unwrap().is_zero());
    }

    #[test]
    fn poincare_residue_values() {
        // (1/z_1)·dz_1∧dz_2 → dz_2
        let num = ConjForm::dz(2, 0).wedge(&ConjForm::dz(2, 1));
        let rep = poincare_res(&PoledForm::new(num.clone(), 0, 1)).unwrap();
        assert_eq!(rep.form, ConjForm::dz(2, 1));
        // (z_2/z_1)·dz_1∧dz_2 → z_2·dz_2
        let scaled = num.scale_poly(&ConjPolynomial::var(2, 1));
        let rep = poincare_res(&PoledForm::new(scaled, 0, 1)).unwrap();
        assert_eq!(
            rep.form,
            ConjForm::from_term(2, vec![1], vec![], ConjPolynomial::var(2, 1))
        );
        // order-2 pole is rejected
        let bad = PoledForm::new(ConjForm::dz(1, 0), 0, 2);
        assert!(matches!(
            poincare_res(&bad),
            Err(EngineError::WrongPoleOrder {
                expected: 1,
                got: 2
            })
        ));
        // anti-holomorphic numerator rejected
        let nh = PoledForm::new(
            ConjForm::from_term(1, vec![0], vec![], ConjPolynomial::var_bar(1, 0)),
            0,
            1,
        );
        assert!(matches!(
            poincare_res(&nh),
            Err(EngineError::NotHolomorphic)
        ));
    }

    fn qm(holo: Vec<u32>, anti: Vec<u32>, base: &ConjPolynomial, bump: &[u32]) -> QMIntegrand {
        QMIntegrand::assemble(
            pole(holo, anti),
            base,
            bump,
            ConjPolynomial::zero(base.dim()),
        )
        .unwrap()
    }

    #[test]
    fn aeppli_step_simple_restriction() {
        // m=n=1, d=1: representative is ψ(0) with sign (+1) for |S|=1
        let data = qm(vec![1], vec![1], &ConjPolynomial::one(1), &[3]);
        let rep = res_aeppli(&data, 0);
        assert_eq!(rep.form.top_coefficient(&rep.base).constant_term(), g(1));
        // m=2, n=1: single z-derivative
        let base = ConjPolynomial::var(1, 0).scale(&g(3));
        let data = qm(vec![2], vec![1], &base, &[4]);
        let rep = res_aeppli(&data, 0);
        // ∂(3z·bump⁴)/∂z at 0 = 3
        assert_eq!(rep.form.top_coefficient(&rep.base).constant_term(), g(3));
    }

    #[test]
    fn semi_meromorphic_residue_vanishes() {
        let data = qm(vec![2], vec![0], &ConjPolynomial::one(1), &[3]);
        assert!(res_aeppli(&data, 0).is_zero());
        let data = qm(vec![0], vec![1], &ConjPolynomial::one(1), &[2]);
        assert!(res_aeppli(&data, 0).is_zero());
    }

    #[test]
    fn iterated_residue_identity_on_empty_stratum() {
        let data = qm(vec![1], vec![1], &ConjPolynomial::one(1), &[3]);
        let rep = res_aeppli_iter(&data, &BTreeSet::new());
        assert_eq!(rep, initial_representative(&data));
    }

    #[test]
    fn iterated_residue_is_order_independent() {
        // resolve {0,1} in both orders on a d=2 two-sided instance
        let base = ConjPolynomial::var(2, 0)
            .add(&ConjPolynomial::one(2))
            .mul(&ConjPolynomial::var_bar(2, 1).add(&ConjPolynomial::one(2)));
        let data = qm(vec![2, 1], vec![1, 2], &base, &[4, 4]);
        let stratum: BTreeSet<usize> = [0, 1].into_iter().collect();
        let asc = res_aeppli_iter(&data, &stratum);
        let manual = res_aeppli_step(&res_aeppli_step(&initial_representative(&data), 1), 0);
        assert_eq!(asc, manual);
    }

    #[test]
    fn golden_aeppli_identity() {
        let data = qm(vec![1], vec![1], &ConjPolynomial::one(1), &[2]);
        let report = check_aeppli_smooth(&data).unwrap();
        assert!(report.pass, "difference {}", report.difference);
        assert_eq!(report.lhs, ev(1, 0, -2));
    }

    #[test]
    fn aeppli2_with_one_sided_residual() {
        // d=2, J=(1,2), K=(1,0): E = {0}, residual one-sided pole in z_2
        let data = qm(vec![1, 2], vec![1, 0], &ConjPolynomial::one(2), &[3, 3]);
        let report = check_aeppli_crossings(&data).unwrap();
        assert!(report.pass, "difference {}", report.difference);
    }

    #[test]
    fn equal_supports_two_sided_d2() {
        let data = qm(vec![1, 1], vec![1, 1], &ConjPolynomial::one(2), &[3, 3]);
        let report = check_aeppli_equal_supports(&data).unwrap();
        assert!(report.pass, "difference {}", report.difference);
        // value: canonical current of the d=2 all-two-sided instance
        assert_eq!(report.lhs, report.rhs);
    }

    #[test]
    fn residue_pairing_d1_cauchy_pompeiu() {
        // α = (1/z)·dz, ξ = (1-zz̄)²: LHS = 2πi·(ab)(0) with middle term 0
        let alpha = PoledForm::new(ConjForm::dz(1, 0), 0, 1);
        let xi = ConjForm::scalar(bump_factor(1, 0).pow(2));
        let report = check_residue_pairing(&alpha, &xi).unwrap();
        assert!(report.pass, "difference {}", report.difference);
        assert_eq!(report.lhs, ev(1, 0, 2));
    }

    #[test]
    fn residue_pairing_with_nontrivial_numerator() {
        // d=2, p=1, q=1, m=2: α = (a/z_1²)·dz_1∧dz̄_2, ξ = bump·dz_2 (wait:
        // ξ must be (d-p, d-q-1) = (1, 0))
        let a = ConjPolynomial::var(2, 0).add(&ConjPolynomial::monomial(
            2,
            vec![0, 1],
            vec![0, 0],
            g(2),
        ));
        let alpha = PoledForm::new(ConjForm::from_term(2, vec![0], vec![1], a), 0, 2);
        let bumps = bump_factor(2, 0).pow(4).mul(&bump_factor(2, 1).pow(2));
        let xi = ConjForm::from_term(2, vec![1], vec![], bumps);
        let report = check_residue_pairing(&alpha, &xi).unwrap();
        assert!(report.pass, "difference {}", report.difference);
    }

    #[test]
    fn aeppli_poincare_d1_and_d2() {
        // d=1: α = ((z+2)/z²)dz, β = ((1+z)/z)dz
        let a = ConjPolynomial::var(1, 0).add(&ConjPolynomial::constant(1, g(2)));
        let alpha = PoledForm::new(ConjForm::from_term(1, vec![0], vec![], a), 0, 2);
        let b = ConjPolynomial::one(1).add(&ConjPolynomial::var(1, 0));
        let beta = PoledForm::new(ConjForm::from_term(1, vec![0], vec![], b), 0, 1);
        let report = check_aeppli_poincare(&alpha, &beta).unwrap();
        assert!(report.pass, "difference {}", report.difference);

        // d=2, m=1
        let a2 = ConjPolynomial::one(2).add(&ConjPolynomial::var(2, 1));
        let alpha2 = PoledForm::new(
            ConjForm::dz(2, 0)
                .wedge(&ConjForm::dz(2, 1))
                .scale_poly(&a2),
            0,
            1,
        );
        let b2 = ConjPolynomial::var(2, 1);
        let beta2 = PoledForm::new(
            ConjForm::dz(2, 0)
                .wedge(&ConjForm::dz(2, 1))
                .scale_poly(&b2),
            0,
            1,
        );
        let report = check_aeppli_poincare(&alpha2, &beta2).unwrap();
        assert!(report.pass, "difference {}", report.difference);

        // β ≡ 0: both sides vanish
        let beta0 = PoledForm::new(ConjForm::zero(1), 0, 1);
        let report = check_aeppli_poincare(&alpha, &beta0).unwrap();
        assert!(report.pass);
        assert!(report.lhs.is_zero() && report.rhs.is_zero());
    }

    #[test]
    fn metric_dependence_golden() {
        // d=1, I=J=K=(1), φ = zz̄: C_{-1} metric-free, C_0 affine with slope
        // 4πi·⟨Res_A(φ·ω∧ξ)⟩.
        let metric = ConjPolynomial::monomial(1, vec![1], vec![1], g(1));
        let data = QMIntegrand::assemble(
            pole(vec![1], vec![1]),
            &ConjPolynomial::one(1),
            &[2],
            metric,
        )
        .unwrap();
        let report = check_metric_dependence(&data, &Section::new(vec![1])).unwrap();
        assert!(report.pass);
        assert_eq!(report.entries.len(), 2);
        // r=1 row: the C_{-1} residue formula, value -2πi
        let r1 = report.entries.iter().find(|e| e.r == 1).unwrap();
        assert_eq!(r1.top_coefficient, ev(1, 0, -2));
        assert!(r1.matches);
        // φ = 0 degenerates to all-columns-equal
        let plain = QMIntegrand::assemble(
            pole(vec![1], vec![1]),
            &ConjPolynomial::one(1),
            &[2],
            ConjPolynomial::zero(1),
        )
        .unwrap();
        let report = check_metric_dependence(&plain, &Section::new(vec![1])).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn iterated_residue_matches_point_formula() {
        // J=(2,3), K=(1,1): the full resolution leaves the normalized mixed
        // derivative of ψ at the origin, times the accumulated step signs
        // (-1)^{d-1}·(-1)^{d-2} = -1 for d=2.
        let base = ConjPolynomial::var(2, 0)
            .add(&ConjPolynomial::constant(2, g(2)))
            .mul(&ConjPolynomial::var(2, 1).add(&ConjPolynomial::one(2)));
        let data = qm(vec![2, 3], vec![1, 1], &base, &[3, 4]);
        let stratum: BTreeSet<usize> = [0, 1].into_iter().collect();
        let rep = res_aeppli_iter(&data, &stratum);
        assert_eq!(rep.base, stratum);
        assert!(rep.residual_pole.is_smooth());
        let mut wanted = data.numerator().d_dz(0);
        for _ in 0..2 {
            wanted = wanted.d_dz(1);
        }
        let expected = wanted
            .restrict_zero(&rep.base)
            .scale_rat(&(-(Rational::one() / factorial_rat(2))));
        assert_eq!(rep.form.top_coefficient(&rep.base), expected);
    }

    #[test]
    fn rescale_covariance_over_all_units() {
        // z_j -> c·z_j for c ∈ {1, -1, i, -i} leaves every residue integral
        // unchanged (polydisc-preserving rescalings).
        let base = ConjPolynomial::var(2, 0).add(&ConjPolynomial::constant(
            2,
            GaussianRational::from_parts(1, 1),
        ));
        let data = qm(vec![2, 1], vec![1, 1], &base, &[3, 2]);
        let reference = canonical_current(&data);
        let aeppli_ref = pair_with_one(&res_aeppli_iter(&data, &[0usize, 1].into_iter().collect()));
        for unit in [
            GaussianRational::one(),
            -&GaussianRational::one(),
            GaussianRational::i(),
            -&GaussianRational::i(),
        ] {
            let inverse = unit.conj();
            let mut numerator = data.numerator().clone();
            for j in 0..2 {
                numerator = numerator.substitute_unit_scale(j, &inverse);
            }
            let mut factor = GaussianRational::one();
            for j in 0..2 {
                factor = &factor * &unit.pow(data.pole().holo()[j]);
                factor = &factor * &inverse.pow(data.pole().anti()[j]);
            }
            let rescaled = QMIntegrand::from_expanded(
                data.pole().clone(),
                numerator.scale(&factor),
                ConjPolynomial::zero(2),
            )
            .unwrap();
            assert_eq!(canonical_current(&rescaled), reference, "unit {unit}");
            assert_eq!(
                pair_with_one(&res_aeppli_iter(
                    &rescaled,
                    &[0usize, 1].into_iter().collect()
                )),
                aeppli_ref,
                "unit {unit}"
            );
        }
    }

    #[test]
    fn representative_serialization_shape() {
        let data = qm(vec![1], vec![1], &ConjPolynomial::one(1), &[3]);
        let rep = res_aeppli(&data, 0);
        let json = serde_json::to_value(&rep).unwrap();
        assert_eq!(json["base"], serde_json::json!([1]));
        assert!(json["form"].is_array());
    }
}
