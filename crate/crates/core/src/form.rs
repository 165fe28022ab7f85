//! Exterior (p,q)-forms with polynomial coefficients.
//!
//! A form is a sum of terms P·dz_A∧dz̄_B with strictly increasing index sets.
//! The global orientation convention is
//! dz∧dz̄ = (-1)^{d(d-1)/2}·Π_j(dz_j∧dz̄_j) with dz = dz_1∧…∧dz_d; the
//! transposition count behind that sign is verified by a test below and every
//! integral routine relies on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::exact::GaussianRational;
use crate::poly::ConjPolynomial;

/// Strictly increasing set of 0-based variable indices.
pub type IndexSet = Vec<usize>;

/// Sign of sorting the concatenation x·y of two sorted disjoint sets; `None`
/// when they intersect.
fn merge_sign(x: &[usize], y: &[usize]) -> Option<(IndexSet, i8)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let mut sign = 1i8;
    let mut i = 0;
    let mut j = 0;
    while i < x.len() && j < y.len() {
        if x[i] == y[j] {
            return None;
        }
        if x[i] < y[j] {
            out.push(x[i]);
            i += 1;
        } else {
            // y[j] moves left past the remaining x entries
            if (x.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(y[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    Some((out, sign))
}

/// Sign of inserting index v into the sorted set s; `None` when v ∈ s.
fn insert_sign(v: usize, s: &[usize]) -> Option<(IndexSet, i8)> {
    merge_sign(&[v], s)
}

/// The reordering sign (-1)^{n(n-1)/2} relating dz_S∧dz̄_S to Π(dz_j∧dz̄_j).
pub fn reorder_sign(n: usize) -> i8 {
    if (n * n.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjForm {
    dim: usize,
    terms: BTreeMap<(IndexSet, IndexSet), ConjPolynomial>,
}

impl ConjForm {
    pub fn zero(dim: usize) -> Self {
        ConjForm {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-(0,0) form from a polynomial.
    pub fn scalar(p: ConjPolynomial) -> Self {
        let dim = p.dim();
        let mut f = Self::zero(dim);
        f.insert_term(Vec::new(), Vec::new(), p);
        f
    }

    pub fn from_term(dim: usize, dz: IndexSet, dzbar: IndexSet, coeff: ConjPolynomial) -> Self {
        assert_eq!(coeff.dim(), dim);
        assert!(dz.windows(2).all(|w| w[0] < w[1]) && dz.iter().all(|&j| j < dim));
        assert!(dzbar.windows(2).all(|w| w[0] < w[1]) && dzbar.iter().all(|&j| j < dim));
        let mut f = Self::zero(dim);
        f.insert_term(dz, dzbar, coeff);
        f
    }

    /// The generator dz_j (0-based j).
    pub fn dz(dim: usize, j: usize) -> Self {
        Self::from_term(dim, vec![j], Vec::new(), ConjPolynomial::one(dim))
    }

    /// The generator dz̄_j (0-based j).
    pub fn dzbar(dim: usize, j: usize) -> Self {
        Self::from_term(dim, Vec::new(), vec![j], ConjPolynomial::one(dim))
    }

    /// dz_1∧…∧dz_d ∧ dz̄_1∧…∧dz̄_d restricted to the complement of `frozen`.
    pub fn volume(dim: usize, frozen: &BTreeSet<usize>) -> Self {
        let all: IndexSet = (0..dim).filter(|j| !frozen.contains(j)).collect();
        Self::from_term(dim, all.clone(), all, ConjPolynomial::one(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(IndexSet, IndexSet), &ConjPolynomial)> {
        self.terms.iter()
    }

    fn insert_term(&mut self, dz: IndexSet, dzbar: IndexSet, coeff: ConjPolynomial) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry((dz, dzbar)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Bidegree (p,q) when homogeneous; `None` for 0 or mixed sums.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let deg = (first.0.len(), first.1.len());
        if it.all(|k| (k.0.len(), k.1.len()) == deg) {
            Some(deg)
        } else {
            None
        }
    }

    pub fn coefficient(&self, dz: &IndexSet, dzbar: &IndexSet) -> ConjPolynomial {
        self.terms
            .get(&(dz.clone(), dzbar.clone()))
            .cloned()
            .unwrap_or_else(|| ConjPolynomial::zero(self.dim))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.insert_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ConjForm {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale_poly(&self, p: &ConjPolynomial) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            out.insert_term(a.clone(), b.clone(), c.mul(p));
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            out.insert_term(a.clone(), b.clone(), p.scale(c));
        }
        out
    }

    /// Wedge product with the Koszul sign from reordering generators.
    pub fn wedge(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Self::zero(self.dim);
        for ((a1, b1), p1) in &self.terms {
            for ((a2, b2), p2) in &rhs.terms {
                let Some((a, sa)) = merge_sign(a1, a2) else {
                    continue;
                };
                let Some((b, sb)) = merge_sign(b1, b2) else {
                    continue;
                };
                // moving dz_{A2} left past dz̄_{B1}
                let cross = if (b1.len() * a2.len()) % 2 == 1 {
                    -1
                } else {
                    1
                };
                let sign = (sa as i64) * (sb as i64) * cross;
                let coeff = p1.mul(p2).scale(&GaussianRational::from_int(sign));
                out.insert_term(a, b, coeff);
            }
        }
        out
    }

    /// ∂̄: each new dz̄_j is wedged from the left of the dz̄ block, which costs
    /// the sign (-1)^p past the dz block.
    pub fn dbar(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            let front = if a.len() % 2 == 1 { -1i64 } else { 1 };
            for j in 0..self.dim {
                let dp = p.d_dzbar(j);
                if dp.is_zero() {
                    continue;
                }
                let Some((b2, s)) = insert_sign(j, b) else {
                    continue;
                };
                out.insert_term(
                    a.clone(),
                    b2,
                    dp.scale(&GaussianRational::from_int(front * s as i64)),
                );
            }
        }
        out
    }

    /// ∂: the new dz_j is wedged from the absolute left.
    pub fn del(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            for j in 0..self.dim {
                let dp = p.d_dz(j);
                if dp.is_zero() {
                    continue;
                }
                let Some((a2, s)) = insert_sign(j, a) else {
                    continue;
                };
                out.insert_term(
                    a2,
                    b.clone(),
                    dp.scale(&GaussianRational::from_int(s as i64)),
                );
            }
        }
        out
    }

    /// Conjugation: swaps index sets and exponents with the sign (-1)^{pq}.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            let sign = if (a.len() * b.len()) % 2 == 1 { -1 } else { 1 };
            out.insert_term(
                b.clone(),
                a.clone(),
                p.conj().scale(&GaussianRational::from_int(sign)),
            );
        }
        out
    }

    /// Pullback to {z_j = 0 : j ∈ frozen}: drops terms whose index sets touch
    /// the frozen variables and restricts the coefficients.
    pub fn restrict_zero(&self, frozen: &BTreeSet<usize>) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            if a.iter().chain(b.iter()).any(|j| frozen.contains(j)) {
                continue;
            }
            out.insert_term(a.clone(), b.clone(), p.restrict_zero(frozen));
        }
        out
    }

    /// Writes the form as dz_j∧(result), i.e. keeps the terms containing dz_j
    /// with the sign from pulling dz_j to the front; terms without dz_j are
    /// dropped.
    pub fn factor_out_dz(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            let Some(pos) = a.iter().position(|&x| x == j) else {
                continue;
            };
            let mut a2 = a.clone();
            a2.remove(pos);
            let sign = if pos % 2 == 1 { -1 } else { 1 };
            out.insert_term(a2, b.clone(), p.scale(&GaussianRational::from_int(sign)));
        }
        out
    }

    /// Coefficient of the top term dz_S∧dz̄_S on the complement of `frozen`.
    pub fn top_coefficient(&self, frozen: &BTreeSet<usize>) -> ConjPolynomial {
        let all: IndexSet = (0..self.dim).filter(|j| !frozen.contains(j)).collect();
        self.coefficient(&all, &all)
    }

    /// Applies `f` to every coefficient polynomial, keeping the index sets.
    pub fn map_coefficients(&self, f: impl Fn(&ConjPolynomial) -> ConjPolynomial) -> Self {
        let mut out = Self::zero(self.dim);
        for ((a, b), p) in &self.terms {
            out.insert_term(a.clone(), b.clone(), f(p));
        }
        out
    }
}

/// A smooth form divided by z_var^order (semi-meromorphic, single-variable
/// monomial pole).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoledForm {
    pub numerator: ConjForm,
    /// 0-based polar variable.
    pub var: usize,
    pub order: u32,
}

impl PoledForm {
    pub fn new(numerator: ConjForm, var: usize, order: u32) -> Self {
        assert!(var < numerator.dim());
        PoledForm {
            numerator,
            var,
            order,
        }
    }

    pub fn dim(&self) -> usize {
        self.numerator.dim()
    }
}

impl fmt::Display for ConjForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), p) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p})")?;
            for j in a {
                write!(f, " dz{}", j + 1)?;
            }
            for j in b {
                write!(f, " dzb{}", j + 1)?;
            }
        }
        Ok(())
    }
}
