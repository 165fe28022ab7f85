//! Exact scalar arithmetic: arbitrary-precision rationals, Gaussian rationals
//! and π-graded values.
//!
//! Every integral this crate computes lands in the ring of finite sums
//! `Σ_k c_k·π^k` with Gaussian-rational coefficients `c_k`. π is a formal
//! grading symbol and is never evaluated numerically; equality is
//! coefficient-wise.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::EngineError;

/// Reduced fraction with positive denominator (guaranteed by `BigRational`).
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or "p".
pub fn parse_rational(s: &str) -> Result<Rational, EngineError> {
    Rational::from_str(s.trim()).map_err(|_| EngineError::BadRational(s.to_string()))
}

/// Renders as "p/q", or "p" when the denominator is 1.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    acc
}

pub fn factorial_rat(n: u32) -> Rational {
    Rational::from_integer(factorial(n))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

pub fn binomial_rat(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// Element of Q(i).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        GaussianRational::new(Rational::one(), Rational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussianRational::new(Rational::zero(), Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(rat_int(n), Rational::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        GaussianRational::new(r, Rational::zero())
    }

    /// re + im·i from integer parts.
    pub fn from_parts(re: i64, im: i64) -> Self {
        GaussianRational::new(rat_int(re), rat_int(im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussianRational::new(&self.re * r, &self.im * r)
    }

    /// Exact inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(GaussianRational::new(&self.re / &norm, -(&self.im / &norm)))
    }

    /// Exact integer power (non-negative).
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = GaussianRational::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: GaussianRational) -> GaussianRational {
        &self + &rhs
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: GaussianRational) -> GaussianRational {
        &self - &rhs
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: GaussianRational) -> GaussianRational {
        &self * &rhs
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.im.is_zero() {
            return write!(f, "{}", rational_string(&self.re));
        }
        let im_part = |im: &Rational| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", rational_string(im))
            }
        };
        if self.re.is_zero() {
            return write!(f, "{}", im_part(&self.im));
        }
        if self.im.is_negative() {
            let pos = -self.im.clone();
            write!(
                f,
                "{} - {}",
                rational_string(&self.re),
                im_part(&pos).trim_start_matches('-')
            )
        } else {
            write!(f, "{} + {}", rational_string(&self.re), im_part(&self.im))
        }
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("GaussianRational", 2)?;
        s.serialize_field("re", &rational_string(&self.re))?;
        s.serialize_field("im", &rational_string(&self.im))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            re: String,
            im: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let re = parse_rational(&raw.re).map_err(D::Error::custom)?;
        let im = parse_rational(&raw.im).map_err(D::Error::custom)?;
        Ok(GaussianRational::new(re, im))
    }
}

/// Finite sum `Σ_k c_k·π^k` with Gaussian-rational `c_k`, `k ≥ 0`.
///
/// No zero coefficients are stored, so derived equality is coefficient-wise
/// equality of the formal sums.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactValue {
    terms: BTreeMap<u32, GaussianRational>,
}

impl ExactValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_gaussian(GaussianRational::one())
    }

    pub fn from_gaussian(c: GaussianRational) -> Self {
        Self::pi_term(0, c)
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::from_gaussian(GaussianRational::from_rational(r))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_gaussian(GaussianRational::from_int(n))
    }

    /// The single term c·π^k.
    pub fn pi_term(k: u32, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        ExactValue { terms }
    }

    /// (-2πi)^k.
    pub fn minus_two_pi_i_pow(k: u32) -> Self {
        Self::pi_term(k, GaussianRational::from_parts(0, -2).pow(k))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &GaussianRational)> {
        self.terms.iter()
    }

    /// Coefficient of π^k.
    pub fn gaussian_part(&self, k: u32) -> GaussianRational {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    fn insert(&mut self, k: u32, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = ExactValue::zero();
        for (k, v) in &self.terms {
            out.insert(*k, v * c);
        }
        out
    }

    pub fn scale_rat(&self, r: &Rational) -> Self {
        self.scale(&GaussianRational::from_rational(r.clone()))
    }

    /// Multiply by π^k (shift the grading).
    pub fn mul_pi(&self, k: u32) -> Self {
        ExactValue {
            terms: self.terms.iter().map(|(p, c)| (p + k, c.clone())).collect(),
        }
    }

    /// Conjugation; π is real so only coefficients are conjugated.
    pub fn conj(&self) -> Self {
        ExactValue {
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }
}

impl Add for &ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: &ExactValue) -> ExactValue {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(*k, c.clone());
        }
        out
    }
}

impl Sub for &ExactValue {
    type Output = ExactValue;
    fn sub(self, rhs: &ExactValue) -> ExactValue {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(*k, -c);
        }
        out
    }
}

impl Mul for &ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: &ExactValue) -> ExactValue {
        let mut out = ExactValue::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert(ka + kb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Add for ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: ExactValue) -> ExactValue {
        &self + &rhs
    }
}

impl Sub for ExactValue {
    type Output = ExactValue;
    fn sub(self, rhs: ExactValue) -> ExactValue {
        &self - &rhs
    }
}

impl Mul for ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: ExactValue) -> ExactValue {
        &self * &rhs
    }
}

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        -&self
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = if c.re.is_zero() || c.im.is_zero() {
                format!("{c}")
            } else {
                format!("({c})")
            };
            match k {
                0 => write!(f, "{coeff}")?,
                1 => write!(f, "{coeff}*pi")?,
                _ => write!(f, "{coeff}*pi^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        #[derive(Serialize)]
        struct Term<'a> {
            pi_power: u32,
            re: &'a str,
            im: &'a str,
        }
        for (k, c) in &self.terms {
            seq.serialize_element(&Term {
                pi_power: *k,
                re: &rational_string(&c.re),
                im: &rational_string(&c.im),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            pi_power: u32,
            re: String,
            im: String,
        }
        let raw: Vec<Term> = Vec::deserialize(deserializer)?;
        let mut out = ExactValue::zero();
        for t in raw {
            let re = parse_rational(&t.re).map_err(D::Error::custom)?;
            let im = parse_rational(&t.im).map_err(D::Error::custom)?;
            out.insert(t.pi_power, GaussianRational::new(re, im));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pi_i() -> ExactValue {
        ExactValue::pi_term(1, GaussianRational::from_parts(0, 2))
    }

    #[test]
    fn additive_inverse_cancels() {
        let v = &two_pi_i() + &(-&two_pi_i());
        assert!(v.is_zero());
    }

    #[test]
    fn pi_i_squared_is_minus_pi_squared() {
        let pii = ExactValue::pi_term(1, GaussianRational::i());
        let sq = &pii * &pii;
        assert_eq!(sq, ExactValue::pi_term(2, GaussianRational::from_int(-1)));
    }

    #[test]
    fn rational_scalar_multiple() {
        let v = two_pi_i().scale_rat(&rat(3, 2));
        assert_eq!(
            v,
            ExactValue::pi_term(1, GaussianRational::from_parts(0, 3))
        );
    }

    #[test]
    fn minus_two_pi_i_powers() {
        assert_eq!(ExactValue::minus_two_pi_i_pow(0), ExactValue::one());
        assert_eq!(
            ExactValue::minus_two_pi_i_pow(1),
            ExactValue::pi_term(1, GaussianRational::from_parts(0, -2))
        );
        // (-2πi)^2 = -4π²
        assert_eq!(
            ExactValue::minus_two_pi_i_pow(2),
            ExactValue::pi_term(2, GaussianRational::from_int(-4))
        );
    }

    #[test]
    fn rational_round_trip() {
        for s in ["3/2", "-7/3", "5", "0", "-1"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(rational_string(&r), s);
        }
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn conjugation_is_ring_map() {
        let a = ExactValue::pi_term(1, GaussianRational::from_parts(1, 2));
        let b = ExactValue::pi_term(2, GaussianRational::from_parts(-3, 5));
        assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
    }

    #[test]
    fn serde_shapes() {
        let v = ExactValue::pi_term(1, GaussianRational::from_parts(0, -2));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"[{"pi_power":1,"re":"0","im":"-2"}]"#);
        let back: ExactValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
