//! SMT-LIB script emission, solver subprocess management, and model
//! parsing.

pub mod emit;
pub mod model;
pub mod solver;

pub use emit::{emit, render_term};
pub use model::{parse_model, ModelError};
pub use solver::{solve, SolverConfig, SolverError, SolverResult, SolverStatus, DEFAULT_TIMEOUT};
