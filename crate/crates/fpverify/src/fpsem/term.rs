//! A small typed term language that mirrors the SMT-LIB theory of
//! floating-point arithmetic plus fixed-width bitvectors and booleans.
//!
//! Terms are immutable reference-counted trees; every constructor checks
//! the sorts of its arguments so that malformed queries are caught at
//! build time rather than by the solver.

use std::fmt;
use std::rc::Rc;

use crate::oracle::minifloat::MiniFloat;
use crate::typer::FPFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Fp(FPFormat),
    BitVec(u32),
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Fp(fmt_) => write!(f, "(_ FloatingPoint {} {})", fmt_.ebits, fmt_.sbits),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
            Sort::Bool => write!(f, "Bool"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    // Floating point, all rounding at RNE.
    FpAdd,
    FpSub,
    FpMul,
    FpDiv,
    /// IEEE 754 remainder (`fp.rem`), not the C `fmod`.
    FpRem,
    FpAbs,
    FpNeg,
    /// IEEE equality: `fp.eq` (±0 equal, NaN unequal to everything).
    FpIeeeEq,
    FpLt,
    FpLeq,
    FpGt,
    FpGeq,
    FpIsNan,
    FpIsInf,
    FpIsZero,
    FpIsNeg,
    FpIsNormal,
    FpIsSubnormal,
    /// Format-to-format conversion at RNE.
    FpToFp(FPFormat),
    /// Signed bitvector to floating point at RNE.
    SbvToFp(FPFormat),
    /// Unsigned bitvector to floating point at RNE.
    UbvToFp(FPFormat),
    /// Floating point to signed bitvector, truncating toward zero.
    FpToSbv(u32),
    /// Floating point to unsigned bitvector, truncating toward zero.
    FpToUbv(u32),
    // Bitvectors.
    BvAdd,
    BvSub,
    SignExtend(u32),
    /// `(_ extract hi lo)`.
    Extract(u32, u32),
    // Booleans / polymorphic.
    Eq,
    Distinct,
    Not,
    And,
    Or,
    Xor,
    Ite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind {
    Var(String),
    FpLit(MiniFloat),
    BvLit { width: u32, bits: u64 },
    BoolLit(bool),
    App { op: Op, args: Vec<Term> },
    Forall { vars: Vec<(String, Sort)>, body: Term },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term(Rc<TermNode>);

#[derive(Debug, PartialEq, Eq)]
pub struct TermNode {
    pub sort: Sort,
    pub kind: TermKind,
}

impl Term {
    fn new(sort: Sort, kind: TermKind) -> Term {
        Term(Rc::new(TermNode { sort, kind }))
    }

    pub fn sort(&self) -> Sort {
        self.0.sort
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::new(sort, TermKind::Var(name.into()))
    }

    pub fn fp_lit(v: MiniFloat) -> Term {
        Term::new(Sort::Fp(v.format), TermKind::FpLit(v))
    }

    pub fn bv_lit(width: u32, bits: u64) -> Term {
        assert!(width >= 1 && width <= 64);
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Term::new(Sort::BitVec(width), TermKind::BvLit { width, bits: bits & mask })
    }

    pub fn bool_lit(b: bool) -> Term {
        Term::new(Sort::Bool, TermKind::BoolLit(b))
    }

    fn fp_format(&self) -> FPFormat {
        match self.sort() {
            Sort::Fp(f) => f,
            s => panic!("expected floating-point term, got {s}"),
        }
    }

    fn bv_width(&self) -> u32 {
        match self.sort() {
            Sort::BitVec(w) => w,
            s => panic!("expected bitvector term, got {s}"),
        }
    }
}

fn app(sort: Sort, op: Op, args: Vec<Term>) -> Term {
    Term::new(sort, TermKind::App { op, args })
}

fn fp_binop(op: Op, a: Term, b: Term) -> Term {
    let f = a.fp_format();
    assert_eq!(f, b.fp_format(), "mixed formats in {op:?}");
    app(Sort::Fp(f), op, vec![a, b])
}

fn fp_rel(op: Op, a: Term, b: Term) -> Term {
    let f = a.fp_format();
    assert_eq!(f, b.fp_format(), "mixed formats in {op:?}");
    app(Sort::Bool, op, vec![a, b])
}

fn fp_test(op: Op, a: Term) -> Term {
    a.fp_format();
    app(Sort::Bool, op, vec![a])
}

pub fn fp_add(a: Term, b: Term) -> Term {
    fp_binop(Op::FpAdd, a, b)
}
pub fn fp_sub(a: Term, b: Term) -> Term {
    fp_binop(Op::FpSub, a, b)
}
pub fn fp_mul(a: Term, b: Term) -> Term {
    fp_binop(Op::FpMul, a, b)
}
pub fn fp_div(a: Term, b: Term) -> Term {
    fp_binop(Op::FpDiv, a, b)
}
pub fn fp_rem_ieee(a: Term, b: Term) -> Term {
    fp_binop(Op::FpRem, a, b)
}
pub fn fp_abs(a: Term) -> Term {
    let f = a.fp_format();
    app(Sort::Fp(f), Op::FpAbs, vec![a])
}
pub fn fp_neg(a: Term) -> Term {
    let f = a.fp_format();
    app(Sort::Fp(f), Op::FpNeg, vec![a])
}

pub fn fp_ieee_eq(a: Term, b: Term) -> Term {
    fp_rel(Op::FpIeeeEq, a, b)
}
pub fn fp_lt(a: Term, b: Term) -> Term {
    fp_rel(Op::FpLt, a, b)
}
pub fn fp_leq(a: Term, b: Term) -> Term {
    fp_rel(Op::FpLeq, a, b)
}
pub fn fp_gt(a: Term, b: Term) -> Term {
    fp_rel(Op::FpGt, a, b)
}
pub fn fp_geq(a: Term, b: Term) -> Term {
    fp_rel(Op::FpGeq, a, b)
}

pub fn is_nan(a: Term) -> Term {
    fp_test(Op::FpIsNan, a)
}
pub fn is_inf(a: Term) -> Term {
    fp_test(Op::FpIsInf, a)
}
pub fn is_zero(a: Term) -> Term {
    fp_test(Op::FpIsZero, a)
}
pub fn is_neg(a: Term) -> Term {
    fp_test(Op::FpIsNeg, a)
}
pub fn is_normal(a: Term) -> Term {
    fp_test(Op::FpIsNormal, a)
}
pub fn is_subnormal(a: Term) -> Term {
    fp_test(Op::FpIsSubnormal, a)
}

pub fn fp_to_fp(dst: FPFormat, a: Term) -> Term {
    a.fp_format();
    app(Sort::Fp(dst), Op::FpToFp(dst), vec![a])
}
pub fn sbv_to_fp(dst: FPFormat, a: Term) -> Term {
    a.bv_width();
    app(Sort::Fp(dst), Op::SbvToFp(dst), vec![a])
}
pub fn ubv_to_fp(dst: FPFormat, a: Term) -> Term {
    a.bv_width();
    app(Sort::Fp(dst), Op::UbvToFp(dst), vec![a])
}
pub fn fp_to_sbv(width: u32, a: Term) -> Term {
    a.fp_format();
    app(Sort::BitVec(width), Op::FpToSbv(width), vec![a])
}
pub fn fp_to_ubv(width: u32, a: Term) -> Term {
    a.fp_format();
    app(Sort::BitVec(width), Op::FpToUbv(width), vec![a])
}

pub fn bv_add(a: Term, b: Term) -> Term {
    let w = a.bv_width();
    assert_eq!(w, b.bv_width());
    app(Sort::BitVec(w), Op::BvAdd, vec![a, b])
}
pub fn bv_sub(a: Term, b: Term) -> Term {
    let w = a.bv_width();
    assert_eq!(w, b.bv_width());
    app(Sort::BitVec(w), Op::BvSub, vec![a, b])
}
pub fn sign_extend(extra: u32, a: Term) -> Term {
    let w = a.bv_width();
    app(Sort::BitVec(w + extra), Op::SignExtend(extra), vec![a])
}
pub fn extract(hi: u32, lo: u32, a: Term) -> Term {
    let w = a.bv_width();
    assert!(hi < w && lo <= hi);
    app(Sort::BitVec(hi - lo + 1), Op::Extract(hi, lo), vec![a])
}

pub fn eq(a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), b.sort(), "eq over mismatched sorts");
    app(Sort::Bool, Op::Eq, vec![a, b])
}
pub fn distinct(a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), b.sort(), "distinct over mismatched sorts");
    app(Sort::Bool, Op::Distinct, vec![a, b])
}
pub fn not(a: Term) -> Term {
    assert_eq!(a.sort(), Sort::Bool);
    if let TermKind::BoolLit(b) = a.kind() {
        return Term::bool_lit(!b);
    }
    app(Sort::Bool, Op::Not, vec![a])
}
pub fn and(args: Vec<Term>) -> Term {
    let args: Vec<Term> = args
        .into_iter()
        .filter(|t| t.kind() != &TermKind::BoolLit(true))
        .collect();
    match args.len() {
        0 => Term::bool_lit(true),
        1 => args.into_iter().next().unwrap(),
        _ => {
            assert!(args.iter().all(|t| t.sort() == Sort::Bool));
            app(Sort::Bool, Op::And, args)
        }
    }
}
pub fn or(args: Vec<Term>) -> Term {
    let args: Vec<Term> = args
        .into_iter()
        .filter(|t| t.kind() != &TermKind::BoolLit(false))
        .collect();
    match args.len() {
        0 => Term::bool_lit(false),
        1 => args.into_iter().next().unwrap(),
        _ => {
            assert!(args.iter().all(|t| t.sort() == Sort::Bool));
            app(Sort::Bool, Op::Or, args)
        }
    }
}
pub fn xor(a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), Sort::Bool);
    assert_eq!(b.sort(), Sort::Bool);
    app(Sort::Bool, Op::Xor, vec![a, b])
}
pub fn ite(c: Term, t: Term, e: Term) -> Term {
    assert_eq!(c.sort(), Sort::Bool);
    assert_eq!(t.sort(), e.sort(), "ite arms of different sorts");
    let sort = t.sort();
    app(sort, Op::Ite, vec![c, t, e])
}

pub fn forall(vars: Vec<(String, Sort)>, body: Term) -> Term {
    assert_eq!(body.sort(), Sort::Bool);
    if vars.is_empty() {
        return body;
    }
    Term::new(Sort::Bool, TermKind::Forall { vars, body })
}

/// Collect the free variables of a term (bound names are skipped).
pub fn free_vars(t: &Term, out: &mut std::collections::BTreeMap<String, Sort>) {
    fn walk(t: &Term, bound: &mut Vec<String>, out: &mut std::collections::BTreeMap<String, Sort>) {
        match t.kind() {
            TermKind::Var(name) => {
                if !bound.iter().any(|b| b == name) {
                    out.insert(name.clone(), t.sort());
                }
            }
            TermKind::App { args, .. } => {
                for a in args {
                    walk(a, bound, out);
                }
            }
            TermKind::Forall { vars, body } => {
                let n = bound.len();
                bound.extend(vars.iter().map(|(v, _)| v.clone()));
                walk(body, bound, out);
                bound.truncate(n);
            }
            _ => {}
        }
    }
    walk(t, &mut Vec::new(), out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typer::FPFormat;

    #[test]
    fn sorts_propagate() {
        let f = FPFormat::HALF;
        let x = Term::var("%x", Sort::Fp(f));
        let y = Term::var("%y", Sort::Fp(f));
        let s = fp_add(x.clone(), y);
        assert_eq!(s.sort(), Sort::Fp(f));
        assert_eq!(is_nan(s).sort(), Sort::Bool);
        assert_eq!(fp_to_sbv(16, x).sort(), Sort::BitVec(16));
    }

    #[test]
    #[should_panic]
    fn mixed_formats_rejected() {
        let x = Term::var("%x", Sort::Fp(FPFormat::HALF));
        let y = Term::var("%y", Sort::Fp(FPFormat::SINGLE));
        fp_add(x, y);
    }

    #[test]
    fn and_simplifies() {
        let t = Term::bool_lit(true);
        let p = Term::var("p", Sort::Bool);
        assert_eq!(and(vec![t.clone(), p.clone()]), p);
        assert_eq!(and(vec![t.clone(), t]), Term::bool_lit(true));
    }

    #[test]
    fn free_vars_skip_bound() {
        let f = FPFormat::FP8;
        let x = Term::var("%x", Sort::Fp(f));
        let u = Term::var("!u", Sort::Fp(f));
        let body = distinct(fp_add(x, u.clone()), u);
        let q = forall(vec![("!u".into(), Sort::Fp(f))], body);
        let mut fv = std::collections::BTreeMap::new();
        free_vars(&q, &mut fv);
        assert_eq!(fv.len(), 1);
        assert!(fv.contains_key("%x"));
    }

    #[test]
    fn bv_lit_masks() {
        let t = Term::bv_lit(8, 0x1ff);
        assert_eq!(t.kind(), &TermKind::BvLit { width: 8, bits: 0xff });
    }
}
