//! Polynomials in z_1..z_d and their conjugates, with exact coefficients,
//! plus the log-monomial-weighted variant used by the integration routines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::exact::{GaussianRational, Rational};

pub type MultiIndex = Vec<u32>;

/// Sparse polynomial Σ c·z^a·z̄^b in a fixed dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjPolynomial {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), GaussianRational>,
}

impl ConjPolynomial {
    pub fn zero(dim: usize) -> Self {
        ConjPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, GaussianRational::one())
    }

    pub fn constant(dim: usize, c: GaussianRational) -> Self {
        let mut p = Self::zero(dim);
        p.insert_term(vec![0; dim], vec![0; dim], c);
        p
    }

    /// c·z^a·z̄^b.
    pub fn monomial(dim: usize, a: MultiIndex, b: MultiIndex, c: GaussianRational) -> Self {
        assert_eq!(a.len(), dim);
        assert_eq!(b.len(), dim);
        let mut p = Self::zero(dim);
        p.insert_term(a, b, c);
        p
    }

    /// The variable z_j (0-based).
    pub fn var(dim: usize, j: usize) -> Self {
        let mut a = vec![0; dim];
        a[j] = 1;
        Self::monomial(dim, a, vec![0; dim], GaussianRational::one())
    }

    /// The variable z̄_j (0-based).
    pub fn var_bar(dim: usize, j: usize) -> Self {
        let mut b = vec![0; dim];
        b[j] = 1;
        Self::monomial(dim, vec![0; dim], b, GaussianRational::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &GaussianRational)> {
        self.terms.iter()
    }

    pub fn insert_term(&mut self, a: MultiIndex, b: MultiIndex, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
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

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.insert_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        ConjPolynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Self::zero(self.dim);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                let a: MultiIndex = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
                let b: MultiIndex = b1.iter().zip(b2).map(|(x, y)| x + y).collect();
                out.insert_term(a, b, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        ConjPolynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn scale_rat(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.dim);
        }
        self.scale(&GaussianRational::from_rational(r.clone()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal ∂/∂z_j (0-based).
    pub fn d_dz(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            if a[j] == 0 {
                continue;
            }
            let mut a2 = a.clone();
            a2[j] -= 1;
            out.insert_term(a2, b.clone(), c.scale(&Rational::from_integer(a[j].into())));
        }
        out
    }

    /// Formal ∂/∂z̄_j (0-based).
    pub fn d_dzbar(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            if b[j] == 0 {
                continue;
            }
            let mut b2 = b.clone();
            b2[j] -= 1;
            out.insert_term(a.clone(), b2, c.scale(&Rational::from_integer(b[j].into())));
        }
        out
    }

    /// Iterated mixed derivative ∂^{|J|+|K|}/∂z^J ∂z̄^K.
    pub fn mixed_derivative(&self, holo: &[u32], anti: &[u32]) -> Self {
        assert_eq!(holo.len(), self.dim);
        assert_eq!(anti.len(), self.dim);
        let mut out = self.clone();
        for j in 0..self.dim {
            for _ in 0..holo[j] {
                out = out.d_dz(j);
            }
            for _ in 0..anti[j] {
                out = out.d_dzbar(j);
            }
        }
        out
    }

    /// Keeps the terms with a_j = b_j = 0 for all j in `frozen`.
    pub fn restrict_zero(&self, frozen: &BTreeSet<usize>) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            if frozen.iter().all(|&j| a[j] == 0 && b[j] == 0) {
                out.insert_term(a.clone(), b.clone(), c.clone());
            }
        }
        out
    }

    /// Swaps z and z̄ exponents and conjugates coefficients.
    pub fn conj(&self) -> Self {
        ConjPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| ((b.clone(), a.clone()), c.conj()))
                .collect(),
        }
    }

    /// True when the polynomial is real-valued: coeff(a,b) = conj(coeff(b,a)).
    pub fn is_conj_symmetric(&self) -> bool {
        self.terms.iter().all(|((a, b), c)| {
            self.terms
                .get(&(b.clone(), a.clone()))
                .is_some_and(|d| *c == d.conj())
        })
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.terms
            .get(&(vec![0; self.dim], vec![0; self.dim]))
            .cloned()
            .unwrap_or_default()
    }

    /// Multiply by z_j^k.
    pub fn mul_z(&self, j: usize, k: u32) -> Self {
        ConjPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| {
                    let mut a2 = a.clone();
                    a2[j] += k;
                    ((a2, b.clone()), c.clone())
                })
                .collect(),
        }
    }

    /// Multiply by z̄_j^k.
    pub fn mul_zbar(&self, j: usize, k: u32) -> Self {
        ConjPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| {
                    let mut b2 = b.clone();
                    b2[j] += k;
                    ((a.clone(), b2), c.clone())
                })
                .collect(),
        }
    }

    /// Substitution z_j → c·z_j for a unit c (so z̄_j → conj(c)·z̄_j).
    pub fn substitute_unit_scale(&self, j: usize, c: &GaussianRational) -> Self {
        let cc = c.conj();
        let mut out = Self::zero(self.dim);
        for ((a, b), v) in &self.terms {
            let factor = &c.pow(a[j]) * &cc.pow(b[j]);
            out.insert_term(a.clone(), b.clone(), v * &factor);
        }
        out
    }

    /// Exact division by (1 - z_j·z̄_j); `None` when not divisible.
    pub fn divide_by_bump_once(&self, j: usize) -> Option<Self> {
        // Slice the terms by everything except the u = z_j z̄_j power: within a
        // slice the polynomial is Σ c_t u^t and (1-u) | Σ c_t u^t iff Σ c_t = 0,
        // with quotient coefficients q_t = Σ_{s≤t} c_s.
        let mut slices: BTreeMap<(MultiIndex, MultiIndex), BTreeMap<u32, GaussianRational>> =
            BTreeMap::new();
        for ((a, b), c) in &self.terms {
            let t = a[j].min(b[j]);
            let mut a2 = a.clone();
            let mut b2 = b.clone();
            a2[j] -= t;
            b2[j] -= t;
            slices.entry((a2, b2)).or_default().insert(t, c.clone());
        }
        let mut out = Self::zero(self.dim);
        for ((a0, b0), coeffs) in slices {
            let top = *coeffs.keys().next_back().unwrap();
            let mut running = GaussianRational::zero();
            for t in 0..=top {
                running = &running + &coeffs.get(&t).cloned().unwrap_or_default();
                if t == top {
                    if !running.is_zero() {
                        return None;
                    }
                } else {
                    let mut a = a0.clone();
                    let mut b = b0.clone();
                    a[j] += t;
                    b[j] += t;
                    out.insert_term(a, b, running.clone());
                }
            }
        }
        Some(out)
    }

    /// Whether (1 - z_j z̄_j)^r divides the polynomial.
    pub fn divisible_by_bump(&self, j: usize, r: u32) -> bool {
        let mut cur = self.clone();
        for _ in 0..r {
            match cur.divide_by_bump_once(j) {
                Some(q) => cur = q,
                None => return false,
            }
        }
        true
    }

    /// Total degree (in all of z and z̄), or 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(a, b)| a.iter().sum::<u32>() + b.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for ConjPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (j, e) in a.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", j + 1)?,
                    _ => write!(f, "*z{}^{}", j + 1, e)?,
                }
            }
            for (j, e) in b.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*zb{}", j + 1)?,
                    _ => write!(f, "*zb{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Polynomial with additional formal weights Π_j (log|z_j|²)^{m_j}.
///
/// Log weights are introduced only after all differentiation, so this type
/// supports multiplication but no derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPolynomial {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex, MultiIndex), GaussianRational>,
}

impl LogPolynomial {
    pub fn zero(dim: usize) -> Self {
        LogPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        p.insert_term(
            vec![0; dim],
            vec![0; dim],
            vec![0; dim],
            GaussianRational::one(),
        );
        p
    }

    pub fn from_poly(p: &ConjPolynomial) -> Self {
        let mut out = Self::zero(p.dim());
        for ((a, b), c) in p.terms() {
            out.insert_term(a.clone(), b.clone(), vec![0; p.dim()], c.clone());
        }
        out
    }

    /// Σ_j w_j·log|z_j|² as a log-polynomial.
    pub fn log_linear(dim: usize, weights: &[u32]) -> Self {
        assert_eq!(weights.len(), dim);
        let mut out = Self::zero(dim);
        for (j, w) in weights.iter().enumerate() {
            if *w == 0 {
                continue;
            }
            let mut m = vec![0; dim];
            m[j] = 1;
            out.insert_term(
                vec![0; dim],
                vec![0; dim],
                m,
                GaussianRational::from_int(*w as i64),
            );
        }
        out
    }

    /// Π over `vars` of log|z_j|².
    pub fn log_product(dim: usize, vars: &BTreeSet<usize>) -> Self {
        let mut m = vec![0; dim];
        for &j in vars {
            m[j] = 1;
        }
        let mut out = Self::zero(dim);
        out.insert_term(vec![0; dim], vec![0; dim], m, GaussianRational::one());
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(
        &self,
    ) -> impl Iterator<Item = (&(MultiIndex, MultiIndex, MultiIndex), &GaussianRational)> {
        self.terms.iter()
    }

    pub fn insert_term(
        &mut self,
        a: MultiIndex,
        b: MultiIndex,
        m: MultiIndex,
        c: GaussianRational,
    ) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b, m)) {
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

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for ((a, b, m), c) in &rhs.terms {
            out.insert_term(a.clone(), b.clone(), m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Self::zero(self.dim);
        for ((a1, b1, m1), c1) in &self.terms {
            for ((a2, b2, m2), c2) in &rhs.terms {
                let a = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
                let b = b1.iter().zip(b2).map(|(x, y)| x + y).collect();
                let m = m1.iter().zip(m2).map(|(x, y)| x + y).collect();
                out.insert_term(a, b, m, c1 * c2);
            }
        }
        out
    }

    pub fn mul_poly(&self, rhs: &ConjPolynomial) -> Self {
        self.mul(&Self::from_poly(rhs))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale_rat(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.dim);
        }
        let c = GaussianRational::from_rational(r.clone());
        LogPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * &c))
                .collect(),
        }
    }
}
