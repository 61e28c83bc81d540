//! Floating-point semantics: compiling a typed transform instance into
//! a single satisfiability query whose models are counterexamples.
//!
//! The query asserts `precondition ∧ source ≠ target`. Fresh variables
//! standing for undefined results on the source side are universally
//! quantified inside the assertion (the source may produce *any* value,
//! so a counterexample must disagree with all of them); target-side
//! fresh variables stay free (the solver may pick the most adversarial
//! value). Inputs and symbolic constants are always free.

pub mod encode;
pub mod term;

pub use encode::{apply_fastmath, build_query, encode_binop, encode_fcmp, encode_frem, EncodeCtx, EncodeError, QueryScript};
