//! Incorrectness separation logic over a memory model with arrays, block
//! bounds and pointer arithmetic.
//!
//! The crate provides the assertion and command language ([`syntax`]), a
//! bounded concrete semantics ([`semantics`]), a pure entailment engine
//! ([`entailment`]), canonicalisation by case analysis ([`canonical`]),
//! weakest-postcondition computation ([`wpo`]) and validity checkers built on
//! top of them ([`checker`]).

pub mod canonical;
pub mod checker;
pub mod corpus;
pub mod entailment;
pub mod error;
pub mod gen;
pub mod par;
pub mod semantics;
pub mod syntax;
pub mod wpo;

pub use error::{IslError, ParseError, Result};
