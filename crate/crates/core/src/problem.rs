//! Problem files: the JSON description of one integrand plus the tasks to run
//! on it.

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::exact::{parse_rational, rational_string, GaussianRational};
use crate::pole::{PoleData, QMIntegrand, Section};
use crate::poly::ConjPolynomial;

/// One polynomial term c·z^a·z̄^b with the coefficient as rational strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
    pub re: String,
    pub im: String,
}

impl PolyTerm {
    pub fn new(z: Vec<u32>, zbar: Vec<u32>, c: &GaussianRational) -> Self {
        PolyTerm {
            z,
            zbar,
            re: rational_string(&c.re),
            im: rational_string(&c.im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Laurent,
    Canonical,
    Pv,
    Aeppli,
    Dolbeault,
    VerifyAll,
    PoleAudit,
    MetricDependence,
}

/// The on-disk problem description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub section_exponents: Vec<u32>,
    pub holo_pole: Vec<u32>,
    pub anti_pole: Vec<u32>,
    pub numerator: Vec<PolyTerm>,
    pub bump_exponents: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metric_weight: Vec<PolyTerm>,
    pub tasks: Vec<Task>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Invalid(format!("parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    fn check_len(&self, field: &str, got: usize) -> Result<(), EngineError> {
        if got != self.dimension {
            return Err(EngineError::LengthMismatch {
                field: field.to_string(),
                expected: self.dimension,
                got,
            });
        }
        Ok(())
    }

    fn poly_from_terms(
        &self,
        field: &str,
        terms: &[PolyTerm],
    ) -> Result<ConjPolynomial, EngineError> {
        let mut poly = ConjPolynomial::zero(self.dimension);
        for (i, t) in terms.iter().enumerate() {
            self.check_len(&format!("{field}[{i}].z"), t.z.len())?;
            self.check_len(&format!("{field}[{i}].zbar"), t.zbar.len())?;
            let re = parse_rational(&t.re).map_err(|_| {
                EngineError::Invalid(format!("{field}[{i}].re: bad rational {:?}", t.re))
            })?;
            let im = parse_rational(&t.im).map_err(|_| {
                EngineError::Invalid(format!("{field}[{i}].im: bad rational {:?}", t.im))
            })?;
            poly.insert_term(t.z.clone(), t.zbar.clone(), GaussianRational::new(re, im));
        }
        Ok(poly)
    }

    /// The raw numerator polynomial P (before the bump is multiplied in).
    pub fn base_numerator(&self) -> Result<ConjPolynomial, EngineError> {
        self.poly_from_terms("numerator", &self.numerator)
    }

    pub fn metric(&self) -> Result<ConjPolynomial, EngineError> {
        self.poly_from_terms("metric_weight", &self.metric_weight)
    }

    /// Validates everything and assembles the integrand and section.
    pub fn instantiate(&self) -> Result<(QMIntegrand, Section), EngineError> {
        if self.dimension == 0 {
            return Err(EngineError::Invalid("dimension must be positive".into()));
        }
        self.check_len("section_exponents", self.section_exponents.len())?;
        self.check_len("holo_pole", self.holo_pole.len())?;
        self.check_len("anti_pole", self.anti_pole.len())?;
        self.check_len("bump_exponents", self.bump_exponents.len())?;
        let pole = PoleData::new(self.holo_pole.clone(), self.anti_pole.clone())?;
        let section = Section::new(self.section_exponents.clone());
        section.validate(&pole)?;
        let base = self.base_numerator()?;
        let metric = self.metric()?;
        let qm = QMIntegrand::assemble(pole, &base, &self.bump_exponents, metric)?;
        Ok((qm, section))
    }
}

/// Terms of a polynomial in the external format.
pub fn poly_to_terms(p: &ConjPolynomial) -> Vec<PolyTerm> {
    p.terms()
        .map(|((a, b), c)| PolyTerm::new(a.clone(), b.clone(), c))
        .collect()
}
