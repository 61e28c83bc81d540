//! Differential testing of the SMT encoding against the oracle: for a
//! batch of concrete operand pairs, assert that the encoded operation
//! differs from the oracle's result and expect `unsat` for every pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{CondCode, Opcode};
use crate::fpsem::term::{self, Term};
use crate::fpsem::{encode_binop, encode_fcmp};
use crate::oracle::minifloat::{self, MiniFloat};
use crate::smt::solver::{solve, SolverConfig, SolverError};
use crate::typer::FPFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Binop(Opcode),
    Fabs,
    Fcmp(CondCode),
}

impl DiffOp {
    pub fn label(self) -> String {
        match self {
            DiffOp::Binop(op) => op.name().to_string(),
            DiffOp::Fabs => "fabs".to_string(),
            DiffOp::Fcmp(cc) => format!("fcmp {}", cc.name()),
        }
    }

    pub fn unary(self) -> bool {
        matches!(self, DiffOp::Fabs)
    }
}

/// The oracle's result, as an SMT literal term.
fn oracle_term(op: DiffOp, a: &MiniFloat, b: &MiniFloat) -> Term {
    match op {
        DiffOp::Binop(o) => {
            let v = match o {
                Opcode::Fadd => minifloat::mf_add(a, b),
                Opcode::Fsub => minifloat::mf_sub(a, b),
                Opcode::Fmul => minifloat::mf_mul(a, b),
                Opcode::Fdiv => minifloat::mf_div(a, b),
                Opcode::Frem => minifloat::mf_rem(a, b),
                _ => panic!("not a floating-point binop: {o:?}"),
            };
            Term::fp_lit(v)
        }
        DiffOp::Fabs => Term::fp_lit(a.abs()),
        DiffOp::Fcmp(cc) => Term::bv_lit(1, minifloat::mf_cmp(cc, a, b) as u64),
    }
}

/// The encoded operation applied to the same operands as literals.
fn encoded_term(op: DiffOp, a: &MiniFloat, b: &MiniFloat) -> Term {
    let ta = Term::fp_lit(*a);
    let tb = Term::fp_lit(*b);
    match op {
        DiffOp::Binop(o) => encode_binop(o, ta, tb),
        DiffOp::Fabs => term::fp_abs(ta),
        DiffOp::Fcmp(cc) => term::ite(encode_fcmp(cc, ta, tb), Term::bv_lit(1, 1), Term::bv_lit(1, 0)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub a: MiniFloat,
    pub b: MiniFloat,
    /// What the solver said for the disagreement check: anything except
    /// `unsat` is a mismatch or an infrastructure problem.
    pub answer: String,
}

const CHUNK: usize = 8192;

/// Check that solver and oracle agree on `op` for each operand pair.
/// Returns the mismatching pairs (empty = full agreement).
pub fn check_pairs(
    cfg: &SolverConfig,
    op: DiffOp,
    pairs: &[(MiniFloat, MiniFloat)],
) -> Result<Vec<Mismatch>, SolverError> {
    let mut mismatches = Vec::new();
    for chunk in pairs.chunks(CHUNK) {
        let mut script = String::from("(set-logic QF_BVFP)\n");
        for (a, b) in chunk {
            let check = term::distinct(encoded_term(op, a, b), oracle_term(op, a, b));
            script.push_str("(push 1)\n");
            script.push_str(&format!("(assert {})\n", crate::smt::render_term(&check)));
            script.push_str("(check-sat)\n(pop 1)\n");
        }
        let result = solve(cfg, &script)?;
        let answers: Vec<&str> = result
            .transcript
            .split_whitespace()
            .filter(|w| matches!(*w, "sat" | "unsat" | "unknown"))
            .collect();
        if answers.len() != chunk.len() {
            return Err(SolverError::Io(std::io::Error::other(format!(
                "expected {} answers, got {} (transcript: {})",
                chunk.len(),
                answers.len(),
                &result.transcript[..result.transcript.len().min(200)]
            ))));
        }
        for ((a, b), ans) in chunk.iter().zip(answers) {
            if ans != "unsat" {
                mismatches.push(Mismatch { a: *a, b: *b, answer: ans.to_string() });
            }
        }
    }
    Ok(mismatches)
}

/// Every operand pair of a format: 2^(2n) pairs (for fp8, 65536).
pub fn exhaustive_pairs(format: FPFormat) -> Vec<(MiniFloat, MiniFloat)> {
    let mut out = Vec::new();
    for a in minifloat::all_values(format) {
        for b in minifloat::all_values(format) {
            out.push((a, b));
        }
    }
    out
}

/// Reproducible random operand pairs, seasoned with special values.
pub fn sampled_pairs(format: FPFormat, n: usize, seed: u64) -> Vec<(MiniFloat, MiniFloat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 1u64 << format.total_bits();
    let specials = [
        MiniFloat::pos_zero(format),
        MiniFloat::neg_zero(format),
        MiniFloat::nan(format),
        MiniFloat::infinity(format, false),
        MiniFloat::infinity(format, true),
        MiniFloat::max_finite(format, false),
        MiniFloat::from_bits(format, 1),
    ];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i % 7 == 0 {
            specials[rng.gen_range(0..specials.len())]
        } else {
            MiniFloat::from_bits(format, rng.gen_range(0..total))
        };
        let b = MiniFloat::from_bits(format, rng.gen_range(0..total));
        out.push((a, b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsem::term::Sort;

    #[test]
    fn exhaustive_pair_count() {
        assert_eq!(exhaustive_pairs(FPFormat::FP8).len(), 65536);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sampled_pairs(FPFormat::HALF, 100, 42);
        let b = sampled_pairs(FPFormat::HALF, 100, 42);
        assert_eq!(a, b);
        assert_ne!(a, sampled_pairs(FPFormat::HALF, 100, 43));
    }

    #[test]
    fn oracle_and_encoded_terms_have_matching_sorts() {
        let one = MiniFloat::one(FPFormat::FP8);
        let nan = MiniFloat::nan(FPFormat::FP8);
        for op in [
            DiffOp::Binop(Opcode::Fadd),
            DiffOp::Binop(Opcode::Frem),
            DiffOp::Fabs,
            DiffOp::Fcmp(CondCode::Olt),
        ] {
            assert_eq!(encoded_term(op, &one, &nan).sort(), oracle_term(op, &one, &nan).sort());
        }
    }

    #[test]
    fn fcmp_oracle_term_is_bit() {
        let one = MiniFloat::one(FPFormat::FP8);
        let t = oracle_term(DiffOp::Fcmp(CondCode::Oeq), &one, &one);
        assert_eq!(t.sort(), Sort::BitVec(1));
    }
}
