//! Verification of precise floating-point peephole optimizations.
//!
//! An optimization is written as a source template, a target template
//! and an optional precondition. For every concrete assignment of types
//! to its registers, the transform is compiled to an SMT query over the
//! theory of IEEE 754 arithmetic whose models are counterexamples; an
//! independent softfloat oracle replays counterexamples and can verify
//! small instances exhaustively without a solver.
//!
//! - [`dsl`]: the specification language (parse, validate, print)
//! - [`typer`]: type inference and enumeration of typed instances
//! - [`fpsem`]: compilation of an instance to a solver query
//! - [`precond`]: precondition predicates and condition-code enumeration
//! - [`smt`]: script emission, solver subprocess, model parsing
//! - [`oracle`]: exact arithmetic, interpreter, brute force, replay
//! - [`driver`]: the verification pipeline and report rendering
//! - [`differential`]: oracle-vs-solver agreement harness

pub mod differential;
pub mod driver;
pub mod dsl;
pub mod fpsem;
pub mod oracle;
pub mod precond;
pub mod smt;
pub mod typer;
