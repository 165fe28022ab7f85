//! Local model of quasi-meromorphic data on the unit polydisc: monomial pole
//! exponents, section exponents, metric weight and bump, with the derived
//! combinatorial quantities.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::EngineError;
use crate::exact::GaussianRational;
use crate::poly::{ConjPolynomial, MultiIndex};

/// Monomial pole orders: z^J (holomorphic) and z̄^K (anti-holomorphic).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleData {
    dim: usize,
    holo: MultiIndex,
    anti: MultiIndex,
}

impl PoleData {
    pub fn new(holo: MultiIndex, anti: MultiIndex) -> Result<Self, EngineError> {
        if holo.len() != anti.len() {
            return Err(EngineError::DimensionMismatch(format!(
                "holo_pole has length {}, anti_pole {}",
                holo.len(),
                anti.len()
            )));
        }
        Ok(PoleData {
            dim: holo.len(),
            holo,
            anti,
        })
    }

    pub fn smooth(dim: usize) -> Self {
        PoleData {
            dim,
            holo: vec![0; dim],
            anti: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn holo(&self) -> &[u32] {
        &self.holo
    }

    pub fn anti(&self) -> &[u32] {
        &self.anti
    }

    /// Number of coordinates carrying both pole types.
    pub fn kappa(&self) -> usize {
        self.two_sided_support().len()
    }

    /// p = #{j : J_j ≠ 0} + #{j : K_j ≠ 0}.
    pub fn p(&self) -> usize {
        let p = self.holo.iter().filter(|&&x| x != 0).count()
            + self.anti.iter().filter(|&&x| x != 0).count();
        debug_assert_eq!(p - self.kappa(), self.polar_support().len());
        p
    }

    /// Indices with J_j ≠ 0 and K_j ≠ 0.
    pub fn two_sided_support(&self) -> Vec<usize> {
        (0..self.dim)
            .filter(|&j| self.holo[j] != 0 && self.anti[j] != 0)
            .collect()
    }

    /// Indices with J_j ≠ 0 or K_j ≠ 0.
    pub fn polar_support(&self) -> Vec<usize> {
        (0..self.dim)
            .filter(|&j| self.holo[j] != 0 || self.anti[j] != 0)
            .collect()
    }

    pub fn is_semi_meromorphic(&self) -> bool {
        self.anti.iter().all(|&x| x == 0)
    }

    pub fn is_smooth(&self) -> bool {
        self.holo.iter().all(|&x| x == 0) && self.anti.iter().all(|&x| x == 0)
    }

    /// Zeroes the orders at `vars` (used when passing to a subvariety).
    pub fn without_vars(&self, vars: &BTreeSet<usize>) -> Self {
        let mut out = self.clone();
        for &j in vars {
            out.holo[j] = 0;
            out.anti[j] = 0;
        }
        out
    }

    /// The stratification of the two-sided polar locus by codimension.
    pub fn stratification(&self) -> Stratification {
        let two_sided = self.two_sided_support();
        let kappa = two_sided.len();
        let mut strata = Vec::with_capacity(kappa + 1);
        for k in 0..=kappa {
            strata.push(subsets_of_size(&two_sided, k));
        }
        Stratification {
            strata,
            kappa,
            deepest: two_sided,
        }
    }
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if k > items.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let head = items[0];
    for mut s in subsets_of_size(&items[1..], k - 1) {
        s.insert(0, head);
        out.push(s);
    }
    out.extend(subsets_of_size(&items[1..], k));
    out
}

/// Strata H_0 ⊇ H_1 ⊇ … of the two-sided polar locus; `strata[k]` lists the
/// codimension-k coordinate subspaces (each as its set of frozen variables,
/// 0-based in memory, 1-based when serialized).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub strata: Vec<Vec<Vec<usize>>>,
    pub kappa: usize,
    pub deepest: Vec<usize>,
}

impl Serialize for Stratification {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let strata: Vec<Vec<Vec<usize>>> = self
            .strata
            .iter()
            .map(|h| {
                h.iter()
                    .map(|s| s.iter().map(|j| j + 1).collect())
                    .collect()
            })
            .collect();
        let deepest: Vec<usize> = self.deepest.iter().map(|j| j + 1).collect();
        let mut s = serializer.serialize_struct("Stratification", 3)?;
        s.serialize_field("strata", &strata)?;
        s.serialize_field("kappa", &self.kappa)?;
        s.serialize_field("deepest", &deepest)?;
        s.end()
    }
}

/// Vanishing orders of the section s = z^I.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    orders: MultiIndex,
}

impl Section {
    pub fn new(orders: MultiIndex) -> Self {
        Section { orders }
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// The divisor of s must be exactly the polar hypersurface.
    pub fn validate(&self, pole: &PoleData) -> Result<(), EngineError> {
        if self.orders.len() != pole.dim() {
            return Err(EngineError::DimensionMismatch(format!(
                "section_exponents has length {}, dimension is {}",
                self.orders.len(),
                pole.dim()
            )));
        }
        for j in 0..pole.dim() {
            let polar = pole.holo()[j] + pole.anti()[j] > 0;
            if polar && self.orders[j] == 0 || !polar && self.orders[j] != 0 {
                return Err(EngineError::SectionSupportMismatch {
                    var: j + 1,
                    order: self.orders[j],
                    holo: pole.holo()[j],
                    anti: pole.anti()[j],
                });
            }
        }
        Ok(())
    }
}

/// o_ω(s) = Π I_j over the two-sided coordinates; 1 when that set is empty.
pub fn order_factor(section: &Section, pole: &PoleData) -> Result<u64, EngineError> {
    section.validate(pole)?;
    Ok(pole
        .two_sided_support()
        .iter()
        .map(|&j| section.orders()[j] as u64)
        .product())
}

/// The assembled local integrand ψ/(z^J z̄^K)·dz∧dz̄ together with the metric
/// weight φ; ψ is stored fully expanded and is divisible by
/// Π_j (1 - z_j z̄_j)^{q_j}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMIntegrand {
    pole: PoleData,
    numerator: ConjPolynomial,
    bump: MultiIndex,
    metric: ConjPolynomial,
}

impl QMIntegrand {
    /// Expands P·Π(1-z_j z̄_j)^{q_j} and validates all invariants.
    pub fn assemble(
        pole: PoleData,
        base: &ConjPolynomial,
        bump: &[u32],
        metric: ConjPolynomial,
    ) -> Result<Self, EngineError> {
        let dim = pole.dim();
        if base.dim() != dim || metric.dim() != dim {
            return Err(EngineError::DimensionMismatch(
                "numerator/metric dimension differs from pole dimension".into(),
            ));
        }
        if bump.len() != dim {
            return Err(EngineError::LengthMismatch {
                field: "bump_exponents".into(),
                expected: dim,
                got: bump.len(),
            });
        }
        for j in 0..dim {
            let need = pole.holo()[j] + pole.anti()[j];
            if bump[j] < need {
                return Err(EngineError::BumpTooSmall {
                    var: j + 1,
                    got: bump[j],
                    need,
                });
            }
        }
        check_metric(&metric)?;
        let mut numerator = base.clone();
        for j in 0..dim {
            numerator = numerator.mul(&bump_factor(dim, j).pow(bump[j]));
        }
        Ok(QMIntegrand {
            pole,
            numerator,
            bump: bump.to_vec(),
            metric,
        })
    }

    /// Wraps an already-expanded numerator, verifying it vanishes to the
    /// minimal admissible order q_j = J_j + K_j at each |z_j| = 1 (one order
    /// per integration by parts the continuation performs).
    pub fn from_expanded(
        pole: PoleData,
        numerator: ConjPolynomial,
        metric: ConjPolynomial,
    ) -> Result<Self, EngineError> {
        let dim = pole.dim();
        if numerator.dim() != dim || metric.dim() != dim {
            return Err(EngineError::DimensionMismatch(
                "numerator/metric dimension differs from pole dimension".into(),
            ));
        }
        check_metric(&metric)?;
        let mut bump = Vec::with_capacity(dim);
        for j in 0..dim {
            let need = pole.holo()[j] + pole.anti()[j];
            if !numerator.is_zero() && !numerator.divisible_by_bump(j, need) {
                return Err(EngineError::BumpNotDivisible { var: j + 1, need });
            }
            bump.push(need);
        }
        Ok(QMIntegrand {
            pole,
            numerator,
            bump,
            metric,
        })
    }

    pub fn dim(&self) -> usize {
        self.pole.dim()
    }

    pub fn pole(&self) -> &PoleData {
        &self.pole
    }

    pub fn numerator(&self) -> &ConjPolynomial {
        &self.numerator
    }

    pub fn bump(&self) -> &[u32] {
        &self.bump
    }

    pub fn metric(&self) -> &ConjPolynomial {
        &self.metric
    }

    pub fn kappa(&self) -> usize {
        self.pole.kappa()
    }

    pub fn p(&self) -> usize {
        self.pole.p()
    }

    pub fn has_metric(&self) -> bool {
        !self.metric.is_zero()
    }

    /// Same data with the metric weight scaled by an integer t.
    pub fn with_metric_scaled(&self, t: i64) -> Self {
        QMIntegrand {
            pole: self.pole.clone(),
            numerator: self.numerator.clone(),
            bump: self.bump.clone(),
            metric: self.metric.scale(&GaussianRational::from_int(t)),
        }
    }

    /// Same pole/bump with a replacement numerator (revalidated).
    pub fn with_numerator(&self, numerator: ConjPolynomial) -> Result<Self, EngineError> {
        Self::from_expanded(self.pole.clone(), numerator, self.metric.clone())
    }
}

fn check_metric(metric: &ConjPolynomial) -> Result<(), EngineError> {
    if metric.is_conj_symmetric() {
        return Ok(());
    }
    let ((a, b), _) = metric
        .terms()
        .find(|((a, b), c)| {
            metric
                .terms()
                .find(|((a2, b2), _)| a2 == b && b2 == a)
                .is_none_or(|(_, d)| **c != d.conj())
        })
        .expect("asymmetric metric must expose a witness term");
    Err(EngineError::MetricNotReal {
        z: a.clone(),
        zbar: b.clone(),
    })
}

/// (1 - z_j z̄_j).
pub fn bump_factor(dim: usize, j: usize) -> ConjPolynomial {
    let mut a = vec![0; dim];
    let mut b = vec![0; dim];
    a[j] = 1;
    b[j] = 1;
    ConjPolynomial::constant(dim, GaussianRational::one()).add(&ConjPolynomial::monomial(
        dim,
        a,
        b,
        GaussianRational::from_int(-1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pole(holo: Vec<u32>, anti: Vec<u32>) -> PoleData {
        PoleData::new(holo, anti).unwrap()
    }

    #[test]
    fn kappa_counts_two_sided_coordinates() {
        assert_eq!(pole(vec![1, 1, 0], vec![1, 0, 1]).kappa(), 1);
        assert_eq!(pole(vec![2, 0], vec![0, 3]).kappa(), 0);
        assert_eq!(pole(vec![1, 2], vec![1, 1]).kappa(), 2);
    }

    #[test]
    fn p_counts_pole_components() {
        assert_eq!(pole(vec![3, 0], vec![1, 0]).p(), 2);
        assert_eq!(pole(vec![1, 1, 0], vec![1, 0, 1]).p(), 4);
        assert_eq!(pole(vec![0], vec![0]).p(), 0);
    }

    #[test]
    fn kappa_p_bounds() {
        for holo in [[0, 0], [1, 0], [2, 3]] {
            for anti in [[0, 0], [0, 1], [3, 1]] {
                let p = pole(holo.to_vec(), anti.to_vec());
                assert!(p.kappa() <= p.p());
                assert!(p.p() <= 2 * p.dim());
                assert_eq!(p.p() - p.kappa(), p.polar_support().len());
            }
        }
    }

    #[test]
    fn order_factor_examples() {
        let s = Section::new(vec![2, 1, 3]);
        let p = pole(vec![1, 2, 0], vec![1, 0, 1]);
        assert_eq!(order_factor(&s, &p).unwrap(), 2);

        // semi-meromorphic: empty product
        let s = Section::new(vec![1, 0]);
        let p = pole(vec![2, 0], vec![0, 0]);
        assert_eq!(order_factor(&s, &p).unwrap(), 1);

        let s = Section::new(vec![2, 3]);
        let p = pole(vec![1, 1], vec![1, 2]);
        assert_eq!(order_factor(&s, &p).unwrap(), 6);
    }

    #[test]
    fn order_factor_multiplicative_over_blocks() {
        // concatenating independent variable blocks multiplies the factors
        let s1 = Section::new(vec![2]);
        let p1 = pole(vec![1], vec![1]);
        let s2 = Section::new(vec![3, 0]);
        let p2 = pole(vec![2, 0], vec![1, 0]);
        let s = Section::new(vec![2, 3, 0]);
        let p = pole(vec![1, 2, 0], vec![1, 1, 0]);
        assert_eq!(
            order_factor(&s, &p).unwrap(),
            order_factor(&s1, &p1).unwrap() * order_factor(&s2, &p2).unwrap()
        );
    }

    #[test]
    fn section_support_must_match() {
        let p = pole(vec![1, 0], vec![0, 0]);
        assert!(Section::new(vec![1, 0]).validate(&p).is_ok());
        assert!(Section::new(vec![0, 0]).validate(&p).is_err());
        assert!(Section::new(vec![1, 1]).validate(&p).is_err());
    }

    #[test]
    fn assemble_expands_bump() {
        let p = pole(vec![0], vec![0]);
        let qm = QMIntegrand::assemble(p, &ConjPolynomial::one(1), &[2], ConjPolynomial::zero(1))
            .unwrap();
        // 1 - 2 z z̄ + z² z̄²
        let mut expected = ConjPolynomial::one(1);
        expected.insert_term(vec![1], vec![1], GaussianRational::from_int(-2));
        expected.insert_term(vec![2], vec![2], GaussianRational::one());
        assert_eq!(qm.numerator(), &expected);
    }

    #[test]
    fn assemble_rejects_small_bump() {
        let p = pole(vec![1], vec![1]);
        let err = QMIntegrand::assemble(p, &ConjPolynomial::one(1), &[1], ConjPolynomial::zero(1))
            .unwrap_err();
        assert_eq!(err.to_string(), "bump exponent 1 < J+K = 2 in variable 1");
    }

    #[test]
    fn assemble_rejects_complex_metric() {
        let p = pole(vec![0, 0], vec![0, 0]);
        let metric = ConjPolynomial::var(2, 0).scale(&GaussianRational::i());
        let err = QMIntegrand::assemble(p, &ConjPolynomial::one(2), &[1, 1], metric).unwrap_err();
        assert!(matches!(err, EngineError::MetricNotReal { .. }));
    }

    #[test]
    fn assembled_numerator_divisible_by_declared_bump() {
        let p = pole(vec![1], vec![0]);
        let base = ConjPolynomial::var(1, 0);
        let qm = QMIntegrand::assemble(p, &base, &[3], ConjPolynomial::zero(1)).unwrap();
        assert!(qm.numerator().divisible_by_bump(0, 3));
        assert!(!qm.numerator().divisible_by_bump(0, 4));
    }

    #[test]
    fn stratification_shape() {
        let p = pole(vec![1, 1, 2], vec![1, 0, 1]);
        let s = p.stratification();
        assert_eq!(s.kappa, 2);
        assert_eq!(s.deepest, vec![0, 2]);
        assert_eq!(s.strata[0], vec![Vec::<usize>::new()]);
        assert_eq!(s.strata[1], vec![vec![0], vec![2]]);
        assert_eq!(s.strata[2], vec![vec![0, 2]]);
        // H_k nonempty iff k <= kappa
        assert!(s.strata.iter().all(|h| !h.is_empty()));
        assert_eq!(s.strata.len(), s.kappa + 1);
    }
}
