//! Exact regularization of divergent integrals on the closed unit polydisc.
//!
//! The engine takes a quasi-meromorphic local model ψ/(z^J z̄^K)·dz∧dz̄ with a
//! monomial section s = z^I and a polynomial metric weight, and produces the
//! full Laurent window of λ ↦ ∫|s|^{2λ}·ψ/(z^J z̄^K)·e^{-2λφ} dz∧dz̄ at λ = 0
//! through two independent pathways: a derivative-based analytic continuation
//! and a closed-form rational-function construction. On top of that it
//! computes canonical currents, principal values, conjugate Dolbeault
//! residues, Aeppli residues (plain and iterated), and verifies the exact
//! identities relating all of these.
//!
//! All arithmetic is exact: values live in the ring of finite sums Σ c_k·π^k
//! with Gaussian-rational coefficients.

#![allow(clippy::needless_range_loop)]

pub mod continuation;
pub mod corpus;
pub mod error;
pub mod exact;
pub mod form;
pub mod lambda;
pub mod moments;
pub mod oracle;
pub mod pole;
pub mod poly;
pub mod problem;
pub mod report;
pub mod residues;

pub use error::EngineError;
pub use exact::{ExactValue, GaussianRational, Rational};
pub use form::ConjForm;
pub use lambda::{LaurentWindow, RationalFunctionLambda};
pub use pole::{PoleData, QMIntegrand, Section};
pub use poly::{ConjPolynomial, LogPolynomial};
