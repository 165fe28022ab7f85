//! Rational functions of the continuation parameter λ and truncated Laurent
//! expansions at rational points.
//!
//! A `RationalFunctionLambda` is kept as a sum of simple terms
//! `numerator(λ) / Π(a_j·λ + b_j)` and is never forced onto a common
//! denominator; cancellation is detected only when expanding (`laurent_at_zero`)
//! or listing poles (`poles`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{rational_string, ExactValue, GaussianRational, Rational};

/// Dense polynomial in λ with Gaussian-rational coefficients.
///
/// Index k holds the coefficient of λ^k; no trailing zeros are stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LambdaPoly {
    coeffs: Vec<GaussianRational>,
}

impl LambdaPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        let mut p = LambdaPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    /// c·λ^k.
    pub fn monomial(k: usize, c: GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![GaussianRational::zero(); k + 1];
        coeffs[k] = c;
        LambdaPoly { coeffs }
    }

    /// a·λ + b as a polynomial.
    pub fn linear(a: Rational, b: Rational) -> Self {
        let mut p = LambdaPoly {
            coeffs: vec![
                GaussianRational::from_rational(b),
                GaussianRational::from_rational(a),
            ],
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn add(&self, rhs: &LambdaPoly) -> LambdaPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(&self.coeff(k) + &rhs.coeff(k));
        }
        let mut p = LambdaPoly { coeffs };
        p.trim();
        p
    }

    pub fn mul(&self, rhs: &LambdaPoly) -> LambdaPoly {
        if self.is_zero() || rhs.is_zero() {
            return LambdaPoly::zero();
        }
        let mut coeffs = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        let mut p = LambdaPoly { coeffs };
        p.trim();
        p
    }

    pub fn scale(&self, c: &GaussianRational) -> LambdaPoly {
        let mut p = LambdaPoly {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        };
        p.trim();
        p
    }

    pub fn conj(&self) -> LambdaPoly {
        LambdaPoly {
            coeffs: self.coeffs.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn eval(&self, x: &Rational) -> GaussianRational {
        let xg = GaussianRational::from_rational(x.clone());
        let mut acc = GaussianRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &xg) + c;
        }
        acc
    }

    /// Taylor shift: returns q(μ) = p(center + μ).
    pub fn shift(&self, center: &Rational) -> LambdaPoly {
        let mut out = LambdaPoly::zero();
        let lin = LambdaPoly::linear(Rational::one(), center.clone());
        for c in self.coeffs.iter().rev() {
            out = out.mul(&lin).add(&LambdaPoly::constant(c.clone()));
        }
        out
    }

    /// Multiplicity of the root at `center` (0 when not a root; degree+1 for 0).
    pub fn valuation_at(&self, center: &Rational) -> usize {
        let shifted = self.shift(center);
        shifted
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(shifted.coeffs.len())
    }
}

/// Linear denominator factor a·λ + b with a > 0; the root is -b/a.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearFactor {
    #[serde(serialize_with = "ser_rat")]
    pub a: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub b: Rational,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

impl LinearFactor {
    pub fn new(a: Rational, b: Rational) -> Self {
        assert!(a.is_positive(), "linear factor must have a > 0");
        LinearFactor { a, b }
    }

    pub fn root(&self) -> Rational {
        -(&self.b / &self.a)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.a * x + &self.b
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct RatTerm {
    num: LambdaPoly,
    den: Vec<LinearFactor>,
}

/// Sum of simple rational terms of λ.
#[derive(Clone, Debug, Default)]
pub struct RationalFunctionLambda {
    terms: Vec<RatTerm>,
}

impl RationalFunctionLambda {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::from_term(LambdaPoly::constant(c), Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn from_term(num: LambdaPoly, den: Vec<LinearFactor>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        RationalFunctionLambda {
            terms: vec![RatTerm { num, den }],
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        RationalFunctionLambda { terms }
    }

    pub fn neg(&self) -> Self {
        RationalFunctionLambda {
            terms: self
                .terms
                .iter()
                .map(|t| RatTerm {
                    num: t.num.scale(&GaussianRational::from_int(-1)),
                    den: t.den.clone(),
                })
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut den = a.den.clone();
                den.extend(b.den.iter().cloned());
                terms.push(RatTerm {
                    num: a.num.mul(&b.num),
                    den,
                });
            }
        }
        RationalFunctionLambda { terms }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunctionLambda {
            terms: self
                .terms
                .iter()
                .map(|t| RatTerm {
                    num: t.num.scale(c),
                    den: t.den.clone(),
                })
                .collect(),
        }
    }

    pub fn scale_rat(&self, r: &Rational) -> Self {
        self.scale(&GaussianRational::from_rational(r.clone()))
    }

    /// Conjugates every coefficient (λ is treated as a real parameter).
    pub fn conj_coefficients(&self) -> Self {
        RationalFunctionLambda {
            terms: self
                .terms
                .iter()
                .map(|t| RatTerm {
                    num: t.num.conj(),
                    den: t.den.clone(),
                })
                .collect(),
        }
    }

    /// Exact evaluation; `None` when `x` is a root of a denominator factor of
    /// a term that does not cancel structurally.
    pub fn eval(&self, x: &Rational) -> Option<GaussianRational> {
        let mut acc = GaussianRational::zero();
        for t in &self.terms {
            let mut den = Rational::one();
            for f in &t.den {
                let v = f.eval(x);
                if v.is_zero() {
                    return None;
                }
                den *= v;
            }
            let inv = Rational::one() / den;
            acc = &acc + &t.num.eval(x).scale(&inv);
        }
        Some(acc)
    }

    /// Raw Laurent coefficients of the sum at `center`, exact through order
    /// `upto` (orders below the deepest structural pole are implicitly zero).
    pub fn laurent_raw(&self, center: &Rational, upto: i64) -> BTreeMap<i64, GaussianRational> {
        let mut out: BTreeMap<i64, GaussianRational> = BTreeMap::new();
        for t in &self.terms {
            // Split the denominator at μ = λ - center into pure μ factors and
            // factors with nonzero constant part.
            let mut zero_count: i64 = 0;
            let mut scalar = Rational::one();
            let mut regular: Vec<(Rational, Rational)> = Vec::new();
            for f in &t.den {
                let c = f.eval(center);
                if c.is_zero() {
                    zero_count += 1;
                    scalar /= &f.a;
                } else {
                    regular.push((f.a.clone(), c));
                }
            }
            let len = upto + zero_count + 1;
            if len <= 0 {
                continue;
            }
            let len = len as usize;
            // Series of num(center + μ) / Π(a·μ + c) in μ up to μ^(len-1).
            let shifted = t.num.shift(center);
            let mut series: Vec<GaussianRational> = (0..len).map(|k| shifted.coeff(k)).collect();
            for (a, c) in &regular {
                // 1/(aμ + c) = (1/c)·Σ (-a/c)^k μ^k
                let c_inv = Rational::one() / c;
                let ratio = -(a * &c_inv);
                let mut geom = Vec::with_capacity(len);
                let mut cur = c_inv.clone();
                for _ in 0..len {
                    geom.push(cur.clone());
                    cur *= &ratio;
                }
                let mut conv = vec![GaussianRational::zero(); len];
                for (i, s) in series.iter().enumerate() {
                    if s.is_zero() {
                        continue;
                    }
                    for (j, g) in geom.iter().take(len - i).enumerate() {
                        conv[i + j] = &conv[i + j] + &s.scale(g);
                    }
                }
                series = conv;
            }
            for (k, c) in series.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let order = k as i64 - zero_count;
                let entry = out.entry(order).or_default();
                *entry = &*entry + &c.scale(&scalar);
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Laurent window at the origin: coefficients from the true lowest order
    /// through `upto` (`upto ≥ 0`).
    pub fn laurent_at_zero(&self, upto: i64) -> LaurentWindow {
        assert!(upto >= 0);
        let raw = self.laurent_raw(&Rational::zero(), upto);
        let lowest = raw.keys().next().copied().unwrap_or(0).min(0);
        let coeffs = (lowest..=upto)
            .map(|k| {
                raw.get(&k)
                    .map(|c| ExactValue::from_gaussian(c.clone()))
                    .unwrap_or_default()
            })
            .collect();
        LaurentWindow::new(lowest, coeffs, upto)
    }

    /// Taylor coefficients at 0 through order `upto`; panics on a pole at 0.
    pub fn taylor_at_zero(&self, upto: i64) -> Vec<GaussianRational> {
        let raw = self.laurent_raw(&Rational::zero(), upto);
        assert!(
            raw.keys().next().is_none_or(|k| *k >= 0),
            "taylor_at_zero called on a function with a pole at 0"
        );
        (0..=upto)
            .map(|k| raw.get(&k).cloned().unwrap_or_default())
            .collect()
    }

    /// All candidate pole locations (roots of stored denominator factors).
    pub fn candidate_roots(&self) -> BTreeSet<Rational> {
        self.terms
            .iter()
            .flat_map(|t| t.den.iter().map(|f| f.root()))
            .collect()
    }

    /// Exact equality as functions, decided by evaluating both sides at more
    /// rational sample points than the degree of any common-denominator
    /// numerator of the difference.
    pub fn equal_as_function(&self, other: &Self) -> bool {
        let den_count: usize = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|t| t.den.len())
            .sum();
        let num_degree: usize = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|t| t.num.degree())
            .max()
            .unwrap_or(0);
        let needed = den_count + num_degree + 2;
        let mut roots = self.candidate_roots();
        roots.extend(other.candidate_roots());
        let mut sampled = 0usize;
        let mut x = Rational::one();
        while sampled < needed {
            if !roots.contains(&x) {
                let a = self.eval(&x).expect("non-root sample");
                let b = other.eval(&x).expect("non-root sample");
                if a != b {
                    return false;
                }
                sampled += 1;
            }
            x += Rational::one();
        }
        true
    }

    /// Genuine poles after cancellation, sorted by location, with true orders.
    pub fn poles(&self) -> Vec<(Rational, u32)> {
        let mut out = Vec::new();
        for root in self.candidate_roots() {
            let raw = self.laurent_raw(&root, -1);
            if let Some(lowest) = raw.keys().next() {
                if *lowest < 0 {
                    out.push((root, (-lowest) as u32));
                }
            }
        }
        out
    }
}

/// Truncated Laurent expansion at the origin.
///
/// Coefficients run from `lowest_order` through `validity_order`, inclusive;
/// the expansion is exact on that range. The leading stored coefficient may be
/// zero only when `lowest_order` is a declared bound rather than the true pole
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaurentWindow {
    lowest_order: i64,
    coefficients: Vec<ExactValue>,
    validity_order: i64,
}

impl LaurentWindow {
    pub fn new(lowest_order: i64, coefficients: Vec<ExactValue>, validity_order: i64) -> Self {
        assert_eq!(
            coefficients.len() as i64,
            validity_order - lowest_order + 1,
            "window length must match its declared range"
        );
        LaurentWindow {
            lowest_order,
            coefficients,
            validity_order,
        }
    }

    pub fn lowest_order(&self) -> i64 {
        self.lowest_order
    }

    pub fn validity_order(&self) -> i64 {
        self.validity_order
    }

    /// Coefficient of λ^order; zero below the stored range, panics above the
    /// validity order where nothing is known.
    pub fn coefficient(&self, order: i64) -> ExactValue {
        assert!(
            order <= self.validity_order,
            "order {} beyond validity {}",
            order,
            self.validity_order
        );
        if order < self.lowest_order {
            ExactValue::zero()
        } else {
            self.coefficients[(order - self.lowest_order) as usize].clone()
        }
    }

    /// True lowest order with a nonzero coefficient, if any.
    pub fn true_lowest(&self) -> Option<i64> {
        self.coefficients
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.lowest_order + i as i64)
    }

    /// Re-anchors the window at a lower declared bound, padding with zeros.
    pub fn pad_to(&self, lowest: i64) -> LaurentWindow {
        assert!(lowest <= self.lowest_order);
        let mut coefficients = vec![ExactValue::zero(); (self.lowest_order - lowest) as usize];
        coefficients.extend(self.coefficients.iter().cloned());
        LaurentWindow::new(lowest, coefficients, self.validity_order)
    }

    /// Drops coefficients above `upto`.
    pub fn truncated(&self, upto: i64) -> LaurentWindow {
        assert!(upto >= self.lowest_order && upto <= self.validity_order);
        LaurentWindow::new(
            self.lowest_order,
            self.coefficients[..=(upto - self.lowest_order) as usize].to_vec(),
            upto,
        )
    }

    pub fn map_coefficients(&self, f: impl Fn(&ExactValue) -> ExactValue) -> LaurentWindow {
        LaurentWindow::new(
            self.lowest_order,
            self.coefficients.iter().map(&f).collect(),
            self.validity_order,
        )
    }
}

impl fmt::Display for LaurentWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate() {
            let order = self.lowest_order + i as i64;
            if c.is_zero() && !(first && i + 1 == self.coefficients.len()) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match order {
                0 => write!(f, "({c})")?,
                _ => write!(f, "({c})*lambda^{order}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(lambda^{})", self.validity_order + 1)
    }
}
