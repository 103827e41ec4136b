//! Reverse-valued Goedel logics with truth constants and the Baaz projection.
//!
//! `0` is absolute truth and `1` absolute falsity throughout. The crate
//! provides exact truth-value arithmetic over Goedel sets ([`values`]),
//! syntax and parsing ([`syntax`], [`parser`]), finite-structure semantics
//! ([`semantics`]), a sound-and-complete propositional decision procedure
//! with an independent brute-force oracle ([`decide`]), machine-checked
//! compactness counterexamples ([`lab`]), a Hilbert-style proof checker
//! ([`proofs`]), Goedel algebras with Lindenbaum quotients and embeddings
//! into the unit interval ([`algebra`]), the pair-stage completion and
//! canonical-model pipeline ([`henkin`]), ultrametric and Lipschitz
//! structures ([`metric`]), and D-limits with principal ultraproducts
//! ([`ultraproduct`]).

#![allow(clippy::result_large_err)] // error values carry formulas; all error paths are cold

pub mod algebra;
pub mod decide;
pub mod enumerate;
pub mod henkin;
pub mod lab;
pub mod metric;
pub mod parser;
pub mod proofs;
pub mod semantics;
pub mod syntax;
pub mod ultraproduct;
pub mod values;

pub use parser::{parse_formula, parse_sentence, parse_theory};
pub use syntax::{Formula, Signature, SyntaxError, Term, Theory};
pub use values::{
    Capacity, ClosedForm, ConstantFamily, Connective, GoedelSet, LimitPoints, Value, ValueError,
};
