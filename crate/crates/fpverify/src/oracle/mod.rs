//! The independent oracle: exact softfloat arithmetic, a reference
//! interpreter for templates, brute-force verification over tiny
//! domains, and counterexample replay.

pub mod brute;
pub mod interp;
pub mod minifloat;

pub use brute::{brute_force_verify, replay_counterexample, BruteError, BruteVerdict, ReplayStatus, DEFAULT_BUDGET};
pub use interp::{values_agree, Env, Interp, InterpError, Value};
pub use minifloat::MiniFloat;
