//! Deterministic rendering of a query into SMT-LIB 2 text.

use std::fmt::Write;

use crate::fpsem::term::{Op, Sort, Term, TermKind};
use crate::fpsem::QueryScript;

/// All variable names we generate are legal SMT-LIB simple symbols
/// (`%`, `.`, `!` and `_` are all simple-symbol characters), so no
/// quoting is required; this is checked in debug builds.
fn symbol(name: &str) -> &str {
    debug_assert!(
        !name.is_empty()
            && !name.chars().next().unwrap().is_ascii_digit()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)),
        "not a simple symbol: {name}"
    );
    name
}

fn bv_binary(width: u32, bits: u64) -> String {
    let mut s = String::with_capacity(width as usize + 2);
    s.push_str("#b");
    for i in (0..width).rev() {
        s.push(if bits >> i & 1 == 1 { '1' } else { '0' });
    }
    s
}

pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

fn write_term(out: &mut String, t: &Term) {
    match t.kind() {
        TermKind::Var(name) => out.push_str(symbol(name)),
        TermKind::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        TermKind::BvLit { width, bits } => out.push_str(&bv_binary(*width, *bits)),
        TermKind::FpLit(v) => {
            let f = v.format;
            let sign = (v.bits >> (f.total_bits() - 1)) & 1;
            let exp = v.biased_exp();
            let t_ = v.trailing();
            write!(
                out,
                "(fp {} {} {})",
                bv_binary(1, sign),
                bv_binary(f.ebits, exp),
                bv_binary(f.trailing_bits(), t_)
            )
            .unwrap();
        }
        TermKind::App { op, args } => {
            let head: String = match op {
                Op::FpAdd => "fp.add RNE".into(),
                Op::FpSub => "fp.sub RNE".into(),
                Op::FpMul => "fp.mul RNE".into(),
                Op::FpDiv => "fp.div RNE".into(),
                Op::FpRem => "fp.rem".into(),
                Op::FpAbs => "fp.abs".into(),
                Op::FpNeg => "fp.neg".into(),
                Op::FpIeeeEq => "fp.eq".into(),
                Op::FpLt => "fp.lt".into(),
                Op::FpLeq => "fp.leq".into(),
                Op::FpGt => "fp.gt".into(),
                Op::FpGeq => "fp.geq".into(),
                Op::FpIsNan => "fp.isNaN".into(),
                Op::FpIsInf => "fp.isInfinite".into(),
                Op::FpIsZero => "fp.isZero".into(),
                Op::FpIsNeg => "fp.isNegative".into(),
                Op::FpIsNormal => "fp.isNormal".into(),
                Op::FpIsSubnormal => "fp.isSubnormal".into(),
                Op::FpToFp(f) => format!("(_ to_fp {} {}) RNE", f.ebits, f.sbits),
                Op::SbvToFp(f) => format!("(_ to_fp {} {}) RNE", f.ebits, f.sbits),
                Op::UbvToFp(f) => format!("(_ to_fp_unsigned {} {}) RNE", f.ebits, f.sbits),
                Op::FpToSbv(w) => format!("(_ fp.to_sbv {w}) RTZ"),
                Op::FpToUbv(w) => format!("(_ fp.to_ubv {w}) RTZ"),
                Op::BvAdd => "bvadd".into(),
                Op::BvSub => "bvsub".into(),
                Op::SignExtend(k) => format!("(_ sign_extend {k})"),
                Op::Extract(hi, lo) => format!("(_ extract {hi} {lo})"),
                Op::Eq => "=".into(),
                Op::Distinct => "distinct".into(),
                Op::Not => "not".into(),
                Op::And => "and".into(),
                Op::Or => "or".into(),
                Op::Xor => "xor".into(),
                Op::Ite => "ite".into(),
            };
            out.push('(');
            out.push_str(&head);
            for a in args {
                out.push(' ');
                write_term(out, a);
            }
            out.push(')');
        }
        TermKind::Forall { vars, body } => {
            out.push_str("(forall (");
            for (i, (name, sort)) in vars.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "({} {sort})", symbol(name)).unwrap();
            }
            out.push_str(") ");
            write_term(out, body);
            out.push(')');
        }
    }
}

/// Render a complete solver script for one query.
pub fn emit(q: &QueryScript) -> String {
    let mut out = String::new();
    let logic = if q.quantified { "BVFP" } else { "QF_BVFP" };
    writeln!(out, "; {}", q.name).unwrap();
    writeln!(out, "(set-logic {logic})").unwrap();
    for (name, sort) in &q.free {
        writeln!(out, "(declare-const {} {sort})", symbol(name)).unwrap();
    }
    writeln!(out, "(assert {})", render_term(&q.assertion)).unwrap();
    writeln!(out, "(check-sat)").unwrap();
    writeln!(out, "(get-model)").unwrap();
    out
}

/// Declarations for a set of variables, for hand-built scripts.
pub fn declarations(vars: &[(String, Sort)]) -> String {
    let mut out = String::new();
    for (name, sort) in vars {
        writeln!(out, "(declare-const {} {sort})", symbol(name)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpsem::term;
    use crate::oracle::minifloat::literal_value;
    use crate::typer::FPFormat;

    #[test]
    fn renders_fp_literal() {
        let one_half = literal_value(
            FPFormat::FP8,
            &crate::dsl::Literal::Fp {
                neg: false,
                mag: num_rational::BigRational::new(1.into(), 2.into()),
                text: "0.5".into(),
            },
        );
        let t = Term::fp_lit(one_half);
        // 0.5 at e=4,s=4: biased exp 6 (bias 7), trailing 000
        assert_eq!(render_term(&t), "(fp #b0 #b0110 #b000)");
    }

    #[test]
    fn renders_nested_application() {
        let f = FPFormat::HALF;
        let x = Term::var("%x", term::Sort::Fp(f));
        let y = Term::var("%y", term::Sort::Fp(f));
        let t = term::is_nan(term::fp_add(x, y));
        assert_eq!(render_term(&t), "(fp.isNaN (fp.add RNE %x %y))");
    }

    #[test]
    fn renders_conversion() {
        let x = Term::var("%i", term::Sort::BitVec(8));
        let t = term::sbv_to_fp(FPFormat::HALF, x);
        assert_eq!(render_term(&t), "((_ to_fp 5 11) RNE %i)");
    }

    #[test]
    fn script_shape() {
        use crate::dsl::parse_corpus;
        use crate::typer::{enumerate_assignments, gen_constraints, WidthConfig};
        let t = parse_corpus("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n").unwrap().remove(0);
        let c = gen_constraints(&t).unwrap();
        let ta = enumerate_assignments(&c, &WidthConfig::tiny()).remove(0);
        let q = crate::fpsem::build_query(&t, &ta, &Default::default()).unwrap();
        let s = emit(&q);
        assert!(s.contains("(set-logic QF_BVFP)"));
        assert!(s.contains("(declare-const %x (_ FloatingPoint 4 4))"));
        assert!(s.ends_with("(check-sat)\n(get-model)\n"));
    }
}
