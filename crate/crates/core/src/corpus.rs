//! Deterministic random instance generation and the per-instance verification
//! battery used by the fuzz command and the acceptance suite.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::continuation::{
    canonical_current, g_derivative, laurent_coeffs, verify_differentiation_identity,
};
use crate::exact::{rat_int, ExactValue, GaussianRational};
use crate::form::{ConjForm, PoledForm};
use crate::oracle::{build_f, pole_audit};
use crate::pole::{bump_factor, order_factor, PoleData, QMIntegrand, Section};
use crate::poly::ConjPolynomial;
use crate::problem::{poly_to_terms, ProblemFile, Task};
use crate::residues::{
    check_aeppli_crossings, check_aeppli_equal_supports, check_aeppli_poincare,
    check_aeppli_smooth, check_metric_dependence, check_residue_pairing, initial_representative,
    res_aeppli, res_aeppli_iter, res_aeppli_step,
};

/// Bounds for the random corpus.
#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub max_dim: usize,
    pub max_exp: u32,
    pub max_deg: u32,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_dim: 3,
            max_exp: 3,
            max_deg: 3,
        }
    }
}

/// One generated instance: the problem description plus derived test shapes
/// for the identity checks that need α/ξ or α/β pairs.
#[derive(Clone, Debug)]
pub struct FuzzInstance {
    pub problem: ProblemFile,
    pub qm: QMIntegrand,
    pub section: Section,
    pub residue_pair: Option<(PoledForm, ConjForm)>,
    pub poincare_pair: Option<(PoledForm, PoledForm)>,
}

fn random_coeff(rng: &mut ChaCha8Rng) -> GaussianRational {
    loop {
        let c = GaussianRational::from_parts(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random polynomial with monomials of total degree ≤ max_deg.
fn random_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32, terms: usize) -> ConjPolynomial {
    let mut p = ConjPolynomial::zero(dim);
    for _ in 0..terms {
        let degree = rng.gen_range(0..=max_deg);
        let mut a = vec![0u32; dim];
        let mut b = vec![0u32; dim];
        for _ in 0..degree {
            let slot = rng.gen_range(0..2 * dim);
            if slot < dim {
                a[slot] += 1;
            } else {
                b[slot - dim] += 1;
            }
        }
        p.insert_term(a, b, random_coeff(rng));
    }
    if p.is_zero() {
        ConjPolynomial::one(dim)
    } else {
        p
    }
}

/// Random real metric weight of total degree ≤ 2 (h + conj(h)).
fn random_metric(rng: &mut ChaCha8Rng, dim: usize) -> ConjPolynomial {
    let terms = rng.gen_range(1..=2);
    let h = random_poly(rng, dim, 2, terms);
    h.add(&h.conj())
}

pub fn gen_instance(
    rng: &mut ChaCha8Rng,
    params: &CorpusParams,
    with_metric: bool,
) -> FuzzInstance {
    let dim = rng.gen_range(1..=params.max_dim);
    let holo: Vec<u32> = (0..dim)
        .map(|_| rng.gen_range(0..=params.max_exp))
        .collect();
    let anti: Vec<u32> = (0..dim)
        .map(|_| rng.gen_range(0..=params.max_exp))
        .collect();
    let section: Vec<u32> = (0..dim)
        .map(|j| {
            if holo[j] + anti[j] > 0 {
                rng.gen_range(1..=params.max_exp)
            } else {
                0
            }
        })
        .collect();
    let bump: Vec<u32> = (0..dim).map(|j| holo[j] + anti[j]).collect();
    let base_terms = rng.gen_range(1..=3);
    let base = random_poly(rng, dim, params.max_deg, base_terms);
    let metric = if with_metric {
        random_metric(rng, dim)
    } else {
        ConjPolynomial::zero(dim)
    };
    let problem = ProblemFile {
        dimension: dim,
        section_exponents: section,
        holo_pole: holo,
        anti_pole: anti,
        numerator: poly_to_terms(&base),
        bump_exponents: bump,
        metric_weight: poly_to_terms(&metric),
        tasks: vec![Task::VerifyAll],
    };
    let (qm, section) = problem.instantiate().expect("generated instance is valid");
    let residue_pair = Some(gen_residue_pair(rng, dim, params));
    let poincare_pair = Some(gen_poincare_pair(rng, dim, params));
    FuzzInstance {
        problem,
        qm,
        section,
        residue_pair,
        poincare_pair,
    }
}

/// α of bidegree (p,q) with a z_1-pole and a complementary test form with
/// enough bump for every principal value in the residue-theorem check.
fn gen_residue_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
    params: &CorpusParams,
) -> (PoledForm, ConjForm) {
    let order = rng.gen_range(1..=params.max_exp);
    let dz_a: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.5)).collect();
    let q_max = dim - 1;
    let dzbar_a: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.4)).take(q_max).collect();
    let coeff_terms = rng.gen_range(1..=2);
    let coeff = random_poly(rng, dim, params.max_deg, coeff_terms);
    let alpha = PoledForm::new(
        ConjForm::from_term(dim, dz_a.clone(), dzbar_a.clone(), coeff),
        0,
        order,
    );
    // complementary sets: dz on the complement of A, dz̄ omitting one index of
    // the complement of B
    let dz_x: Vec<usize> = (0..dim).filter(|j| !dz_a.contains(j)).collect();
    let bbar_complement: Vec<usize> = (0..dim).filter(|j| !dzbar_a.contains(j)).collect();
    let omit = bbar_complement[rng.gen_range(0..bbar_complement.len())];
    let dzbar_x: Vec<usize> = bbar_complement.into_iter().filter(|&j| j != omit).collect();
    let mut bumps = ConjPolynomial::one(dim);
    for j in 0..dim {
        let exponent = if j == 0 { order + 1 } else { 2 };
        bumps = bumps.mul(&bump_factor(dim, j).pow(exponent));
    }
    let poly = random_poly(rng, dim, 1, 1).mul(&bumps);
    let xi = ConjForm::from_term(dim, dz_x, dzbar_x, poly);
    (alpha, xi)
}

/// Meromorphic (d,0) forms α (pole order m) and β (simple pole, holomorphic
/// numerator) in the shared polar variable z_1.
fn gen_poincare_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
    params: &CorpusParams,
) -> (PoledForm, PoledForm) {
    let full: Vec<usize> = (0..dim).collect();
    let order = rng.gen_range(1..=params.max_exp);
    let a_terms = rng.gen_range(1..=2);
    let a = random_poly(rng, dim, params.max_deg, a_terms);
    let alpha = PoledForm::new(ConjForm::from_term(dim, full.clone(), vec![], a), 0, order);
    // holomorphic numerator: strip z̄ exponents
    let mut b = ConjPolynomial::zero(dim);
    let raw_terms = rng.gen_range(1..=2);
    let raw = random_poly(rng, dim, params.max_deg, raw_terms);
    for ((z, _), c) in raw.terms() {
        b.insert_term(z.clone(), vec![0; dim], c.clone());
    }
    let beta = PoledForm::new(ConjForm::from_term(dim, full, vec![], b), 0, 1);
    (alpha, beta)
}

/// Outcome of one named check on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn ok(name: &str) -> Self {
        CheckOutcome {
            name: name.into(),
            pass: true,
            detail: String::new(),
        }
    }

    fn of(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn rescaled_instance(qm: &QMIntegrand, unit: &GaussianRational) -> QMIntegrand {
    let dim = qm.dim();
    let inverse = unit.conj(); // |unit| = 1
    let mut numerator = qm.numerator().clone();
    let mut metric = qm.metric().clone();
    for j in 0..dim {
        numerator = numerator.substitute_unit_scale(j, &inverse);
        metric = metric.substitute_unit_scale(j, &inverse);
    }
    // the pole monomials contribute unit^{J_j - K_j} per variable
    let mut factor = GaussianRational::one();
    for j in 0..dim {
        factor = &factor * &unit.pow(qm.pole().holo()[j]);
        factor = &factor * &inverse.pow(qm.pole().anti()[j]);
    }
    let numerator = numerator.scale(&factor);
    QMIntegrand::from_expanded(qm.pole().clone(), numerator, metric)
        .expect("rescaling preserves validity")
}

fn conjugated_instance(qm: &QMIntegrand) -> QMIntegrand {
    let pole = PoleData::new(qm.pole().anti().to_vec(), qm.pole().holo().to_vec()).unwrap();
    QMIntegrand::from_expanded(pole, qm.numerator().conj(), qm.metric().clone())
        .expect("conjugation preserves validity")
}

/// Runs the full identity battery on one instance. `deep` additionally runs
/// the κ+2 continuation passes of the metric-dependence check.
pub fn battery(instance: &FuzzInstance, deep: bool) -> Vec<CheckOutcome> {
    let qm = &instance.qm;
    let section = &instance.section;
    let kappa = qm.kappa();
    let p = qm.p();
    let mut out = Vec::new();

    let cont = match laurent_coeffs(qm, section) {
        Ok(c) => c,
        Err(e) => {
            out.push(CheckOutcome::of("continuation", false, e.to_string()));
            return out;
        }
    };
    let oracle = match build_f(qm, section, kappa as u32) {
        Ok(o) => o,
        Err(e) => {
            out.push(CheckOutcome::of("oracle", false, e.to_string()));
            return out;
        }
    };

    // exact agreement of every window coefficient
    let bare = oracle.bare_window();
    let mut agree = true;
    let mut detail = String::new();
    for r in 0..=kappa {
        let a = cont.coefficient(r);
        let b = bare.coefficient(-(r as i64));
        if a != b {
            agree = false;
            detail = format!("order -{r}: continuation {a} vs oracle {b}");
            break;
        }
    }
    out.push(CheckOutcome::of("pathway-agreement", agree, detail));

    out.push(CheckOutcome::of(
        "pole-order-at-origin",
        oracle.pole_order_ok(),
        format!(
            "window starts at {}",
            oracle.laurent_window().lowest_order()
        ),
    ));

    let mut vanish = true;
    for k in 0..p.saturating_sub(kappa) {
        if !g_derivative(qm, section, k).is_zero() {
            vanish = false;
            break;
        }
    }
    out.push(CheckOutcome::of(
        "g-vanishing-order",
        vanish,
        format!("orders below {}", p - kappa),
    ));

    let audit = pole_audit(&oracle, qm.pole(), section);
    out.push(CheckOutcome::of(
        "pole-location-bound",
        audit.iter().all(|e| e.bound_satisfied),
        format!("{} poles audited", audit.len()),
    ));

    match verify_differentiation_identity(section, qm.pole()) {
        Ok(true) => out.push(CheckOutcome::ok("differentiation-identity")),
        Ok(false) => out.push(CheckOutcome::of("differentiation-identity", false, "")),
        Err(e) => out.push(CheckOutcome::of(
            "differentiation-identity",
            false,
            e.to_string(),
        )),
    }

    // canonical current bookkeeping: C_{-κ}·o(s) is the canonical current
    let canonical = canonical_current(qm);
    let o_s = order_factor(section, qm.pole()).unwrap();
    let normalized = cont.coefficient(kappa).scale_rat(&rat_int(o_s as i64));
    out.push(CheckOutcome::of(
        "leading-coefficient-normalization",
        normalized == canonical,
        String::new(),
    ));

    // section independence of the leading coefficient
    if !qm.pole().is_smooth() {
        let alt = Section::new(
            (0..qm.dim())
                .map(|j| {
                    let o = section.orders()[j];
                    if o > 0 {
                        o + 1
                    } else {
                        0
                    }
                })
                .collect(),
        );
        let alt_oracle = build_f(qm, &alt, kappa as u32).unwrap();
        let leading = alt_oracle.laurent_window().coefficient(-(kappa as i64));
        let pass = leading == canonical;
        out.push(CheckOutcome::of(
            "section-independence",
            pass,
            if pass {
                String::new()
            } else {
                format!("sections give {canonical} vs {leading}")
            },
        ));
    }

    // conjugation symmetry: swapped/conjugated instance has the coefficient-
    // conjugated window times (-1)^d (conjugating dz∧dz̄ flips by (-1)^d).
    {
        let conj_qm = conjugated_instance(qm);
        let conj_oracle = build_f(&conj_qm, section, kappa as u32).unwrap();
        let w = oracle.laurent_window();
        let cw = conj_oracle.laurent_window();
        let sign = if qm.dim() % 2 == 1 { -1i64 } else { 1 };
        let mut pass = cw.lowest_order() == w.lowest_order();
        if pass {
            for order in w.lowest_order()..=w.validity_order() {
                let expected = w
                    .coefficient(order)
                    .conj()
                    .scale(&GaussianRational::from_int(sign));
                if cw.coefficient(order) != expected {
                    pass = false;
                    break;
                }
            }
        }
        out.push(CheckOutcome::of(
            "conjugation-symmetry",
            pass,
            String::new(),
        ));
    }

    // rescale covariance under z_j -> i·z_j for all j
    {
        let rescaled = rescaled_instance(qm, &GaussianRational::i());
        let pass = canonical_current(&rescaled) == canonical
            && laurent_coeffs(&rescaled, section)
                .map(|r| (0..=kappa).all(|r_ord| r.coefficient(r_ord) == cont.coefficient(r_ord)))
                .unwrap_or(false);
        out.push(CheckOutcome::of("rescale-covariance", pass, String::new()));
    }

    // residue identities on the instance itself
    match check_aeppli_crossings(qm) {
        Ok(r) => out.push(CheckOutcome::of(
            "aeppli-crossings",
            r.pass,
            format!("difference {}", r.difference),
        )),
        Err(e) => out.push(CheckOutcome::of("aeppli-crossings", false, e.to_string())),
    }
    let holo_support: Vec<usize> = (0..qm.dim()).filter(|&j| qm.pole().holo()[j] > 0).collect();
    let anti_support: Vec<usize> = (0..qm.dim()).filter(|&j| qm.pole().anti()[j] > 0).collect();
    if holo_support == anti_support && !holo_support.is_empty() {
        match check_aeppli_equal_supports(qm) {
            Ok(r) => out.push(CheckOutcome::of(
                "aeppli-equal-supports",
                r.pass,
                format!("difference {}", r.difference),
            )),
            Err(e) => out.push(CheckOutcome::of(
                "aeppli-equal-supports",
                false,
                e.to_string(),
            )),
        }
    }
    let polar = qm.pole().polar_support();
    if polar.len() == 1 && qm.pole().two_sided_support() == polar {
        match check_aeppli_smooth(qm) {
            Ok(r) => out.push(CheckOutcome::of(
                "aeppli-smooth",
                r.pass,
                format!("difference {}", r.difference),
            )),
            Err(e) => out.push(CheckOutcome::of("aeppli-smooth", false, e.to_string())),
        }
    }
    if qm.pole().is_semi_meromorphic() && !polar.is_empty() {
        let vanished = polar.iter().all(|&v| res_aeppli(qm, v).is_zero());
        out.push(CheckOutcome::of(
            "semi-meromorphic-residue-vanishes",
            vanished,
            String::new(),
        ));
    }
    if kappa >= 2 {
        let stratum: BTreeSet<usize> = qm.pole().two_sided_support().into_iter().collect();
        let asc = res_aeppli_iter(qm, &stratum);
        let mut desc = initial_representative(qm);
        for &v in stratum.iter().rev() {
            desc = res_aeppli_step(&desc, v);
        }
        out.push(CheckOutcome::of(
            "residue-order-independence",
            asc == desc,
            String::new(),
        ));
    }

    if let Some((alpha, xi)) = &instance.residue_pair {
        match check_residue_pairing(alpha, xi) {
            Ok(r) => out.push(CheckOutcome::of(
                "residue-pairing",
                r.pass,
                format!("difference {}", r.difference),
            )),
            Err(e) => out.push(CheckOutcome::of("residue-pairing", false, e.to_string())),
        }
    }
    if let Some((alpha, beta)) = &instance.poincare_pair {
        match check_aeppli_poincare(alpha, beta) {
            Ok(r) => out.push(CheckOutcome::of(
                "aeppli-poincare",
                r.pass,
                format!("difference {}", r.difference),
            )),
            Err(e) => out.push(CheckOutcome::of("aeppli-poincare", false, e.to_string())),
        }
    }

    if deep && kappa >= 1 && qm.has_metric() {
        match check_metric_dependence(qm, section) {
            Ok(r) => out.push(CheckOutcome::of("metric-dependence", r.pass, String::new())),
            Err(e) => out.push(CheckOutcome::of("metric-dependence", false, e.to_string())),
        }
    }

    out
}

/// Result of one fuzz instance, serialized deterministically.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<ProblemFile>,
}

/// Deterministic corpus run; instances are generated from `seed` and executed
/// in parallel with order-stable reporting. The first failing instance is
/// shrunk greedily and emitted verbatim.
pub fn run_corpus(
    params: &CorpusParams,
    count: usize,
    seed: u64,
    deep: bool,
) -> Vec<InstanceResult> {
    let mut results: Vec<InstanceResult> = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E3779B97F4A7C15));
            let with_metric = index % 2 == 1;
            let instance = gen_instance(&mut rng, params, with_metric);
            let checks = battery(&instance, deep);
            let pass = checks.iter().all(|c| c.pass);
            InstanceResult {
                index,
                pass,
                checks,
                counterexample: None,
            }
        })
        .collect();
    results.sort_by_key(|r| r.index);
    if let Some(first_fail) = results.iter().position(|r| !r.pass) {
        let index = results[first_fail].index;
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let instance = gen_instance(&mut rng, params, index % 2 == 1);
        results[first_fail].counterexample = Some(shrink(instance).problem);
    }
    results
}

fn instance_fails(problem: &ProblemFile) -> bool {
    match problem.instantiate() {
        Ok((qm, section)) => {
            let instance = FuzzInstance {
                problem: problem.clone(),
                qm,
                section,
                residue_pair: None,
                poincare_pair: None,
            };
            battery(&instance, false).iter().any(|c| !c.pass)
        }
        Err(_) => false,
    }
}

/// Greedy shrink: drop the metric, drop numerator terms, lower exponents,
/// keeping every reduction that still fails the battery.
pub fn shrink(instance: FuzzInstance) -> FuzzInstance {
    let mut problem = instance.problem.clone();
    if !instance_fails(&problem) {
        // failure lives in the derived α/ξ shapes; nothing to shrink on the
        // problem itself
        return instance;
    }
    let mut changed = true;
    while changed {
        changed = false;
        let mut candidates: Vec<ProblemFile> = Vec::new();
        if !problem.metric_weight.is_empty() {
            let mut c = problem.clone();
            c.metric_weight.clear();
            candidates.push(c);
        }
        if problem.numerator.len() > 1 {
            for i in 0..problem.numerator.len() {
                let mut c = problem.clone();
                c.numerator.remove(i);
                candidates.push(c);
            }
        }
        for j in 0..problem.dimension {
            for side in [0usize, 1] {
                let mut c = problem.clone();
                let orders = if side == 0 {
                    &mut c.holo_pole
                } else {
                    &mut c.anti_pole
                };
                if orders[j] == 0 {
                    continue;
                }
                orders[j] -= 1;
                if c.holo_pole[j] + c.anti_pole[j] == 0 {
                    c.section_exponents[j] = 0;
                }
                c.bump_exponents[j] = c.holo_pole[j] + c.anti_pole[j];
                candidates.push(c);
            }
            if problem.section_exponents[j] > 1 {
                let mut c = problem.clone();
                c.section_exponents[j] -= 1;
                candidates.push(c);
            }
        }
        for candidate in candidates {
            if instance_fails(&candidate) {
                problem = candidate;
                changed = true;
                break;
            }
        }
    }
    let (qm, section) = problem.instantiate().expect("shrunk instance is valid");
    FuzzInstance {
        problem,
        qm,
        section,
        residue_pair: None,
        poincare_pair: None,
    }
}

/// Second admissible section for independence tests (orders bumped by one on
/// the support); `None` for smooth instances.
pub fn alternate_section(qm: &QMIntegrand, section: &Section) -> Option<Section> {
    if qm.pole().is_smooth() {
        return None;
    }
    Some(Section::new(
        section
            .orders()
            .iter()
            .map(|&o| if o > 0 { o + 1 } else { 0 })
            .collect(),
    ))
}

/// Canonical current via the oracle's leading coefficient, for cross-checks.
pub fn canonical_via_oracle(qm: &QMIntegrand, section: &Section) -> ExactValue {
    let oracle = build_f(qm, section, qm.kappa() as u32).unwrap();
    oracle.laurent_window().coefficient(-(qm.kappa() as i64))
}
