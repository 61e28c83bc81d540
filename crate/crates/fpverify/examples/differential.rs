//! Differential-test the SMT encoding against the softfloat oracle on
//! sampled fp8 operand pairs for every operation.

use fpverify::differential::{check_pairs, sampled_pairs, DiffOp};
use fpverify::dsl::{CondCode, Opcode};
use fpverify::smt::SolverConfig;
use fpverify::typer::FPFormat;

fn main() {
    let solver = SolverConfig::resolve(None).expect("no solver found");
    let pairs = sampled_pairs(FPFormat::FP8, 500, 42);

    let mut ops = vec![
        DiffOp::Binop(Opcode::Fadd),
        DiffOp::Binop(Opcode::Fsub),
        DiffOp::Binop(Opcode::Fmul),
        DiffOp::Binop(Opcode::Fdiv),
        DiffOp::Binop(Opcode::Frem),
        DiffOp::Fabs,
    ];
    ops.extend(CondCode::ALL.map(DiffOp::Fcmp));

    let mut bad = 0;
    for op in ops {
        let mismatches = check_pairs(&solver, op, &pairs).expect("solver runs");
        println!("{:12} {} pairs, {} mismatches", op.label(), pairs.len(), mismatches.len());
        for m in mismatches.iter().take(3) {
            println!("  {} vs {}: solver said {}", m.a.to_decimal_string(), m.b.to_decimal_string(), m.answer);
        }
        bad += mismatches.len();
    }
    std::process::exit(if bad == 0 { 0 } else { 1 });
}
