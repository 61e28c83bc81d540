use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::dsl::{CcRef, CondCode, ExprNode, FastMath, Literal, Opcode, Operand, Side, Transform};
use crate::oracle::minifloat::{self, encode_twos_complement, literal_value};
use crate::typer::{lit_slot_name, Ty, TypeAssignment};

use super::term::{self, Sort, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("no type for `{0}` in this assignment")]
    MissingType(String),
    #[error("condition code `{0}` is not resolved by this assignment")]
    UnresolvedCc(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// A complete solver query for one typed instance of a transform.
#[derive(Debug, Clone)]
pub struct QueryScript {
    pub name: String,
    /// Free variables, sorted by name: inputs, symbolic constants, and
    /// target-side fresh variables.
    pub free: Vec<(String, Sort)>,
    /// Source-side fresh variables, universally quantified in the assertion.
    pub universal: Vec<(String, Sort)>,
    pub assertion: Term,
    pub quantified: bool,
}

/// Encoding state for one (transform, type assignment, cc assignment)
/// instance. Also used by the oracle to discover fresh-variable names.
pub struct EncodeCtx<'a> {
    pub t: &'a Transform,
    pub ta: &'a TypeAssignment,
    pub cca: &'a BTreeMap<String, CondCode>,
    src_env: BTreeMap<String, Term>,
    tgt_env: BTreeMap<String, Term>,
    /// Source-side fresh variables, in creation order.
    pub universal: Vec<(String, Sort)>,
    /// Target-side fresh variables, in creation order.
    pub existential: Vec<(String, Sort)>,
}

pub fn sort_of_ty(ty: Ty) -> Sort {
    match ty {
        Ty::Fp(f) => Sort::Fp(f),
        Ty::Int(w) => Sort::BitVec(w),
    }
}

impl<'a> EncodeCtx<'a> {
    pub fn new(t: &'a Transform, ta: &'a TypeAssignment, cca: &'a BTreeMap<String, CondCode>) -> EncodeCtx<'a> {
        EncodeCtx {
            t,
            ta,
            cca,
            src_env: BTreeMap::new(),
            tgt_env: BTreeMap::new(),
            universal: Vec::new(),
            existential: Vec::new(),
        }
    }

    fn sort_of(&self, name: &str) -> Result<Sort, EncodeError> {
        self.ta
            .get(name)
            .map(sort_of_ty)
            .ok_or_else(|| EncodeError::MissingType(name.to_string()))
    }

    /// Register a fresh variable standing for an undefined result.
    fn fresh(&mut self, side: Side, reg: &str, tag: &str, sort: Sort) -> Term {
        let name = format!("!{}.{}.{}", side.tag(), reg, tag);
        match side {
            Side::Source => self.universal.push((name.clone(), sort)),
            Side::Target => self.existential.push((name.clone(), sort)),
        }
        Term::var(name, sort)
    }

    fn literal_term(&self, lit: &Literal, sort: Sort) -> Result<Term, EncodeError> {
        match sort {
            Sort::Fp(f) => Ok(Term::fp_lit(literal_value(f, lit))),
            Sort::BitVec(w) => match lit {
                Literal::Int(n) => Ok(Term::bv_lit(w, encode_twos_complement(n, w))),
                _ => Err(EncodeError::Unsupported("floating-point literal in integer position".into())),
            },
            Sort::Bool => Err(EncodeError::Unsupported("literal in boolean position".into())),
        }
    }

    fn operand_term(&self, side: Side, reg: &str, idx: usize, op: &Operand) -> Result<Term, EncodeError> {
        match op {
            Operand::Reg(r) => self.reg_term(side, r),
            Operand::Sym(s) => Ok(Term::var(s.clone(), self.sort_of(s)?)),
            Operand::Lit(lit) => {
                let slot = lit_slot_name(side.tag(), reg, idx);
                self.literal_term(lit, self.sort_of(&slot)?)
            }
        }
    }

    /// The term of a register reference: a previously encoded binding on
    /// this side (target references fall back to source values), or an
    /// input variable.
    fn reg_term(&self, side: Side, r: &str) -> Result<Term, EncodeError> {
        let own = match side {
            Side::Source => &self.src_env,
            Side::Target => &self.tgt_env,
        };
        if let Some(t) = own.get(r) {
            return Ok(t.clone());
        }
        if side == Side::Target {
            if let Some(t) = self.src_env.get(r) {
                return Ok(t.clone());
            }
        }
        Ok(Term::var(r.to_string(), self.sort_of(r)?))
    }

    /// Encode one template in binding order; returns the root term.
    pub fn encode_side(&mut self, side: Side) -> Result<Term, EncodeError> {
        let bindings = match side {
            Side::Source => &self.t.source,
            Side::Target => &self.t.target,
        };
        let mut last = None;
        for b in bindings.clone() {
            let t = self.encode_node(side, &b.reg, &b.node)?;
            match side {
                Side::Source => self.src_env.insert(b.reg.clone(), t.clone()),
                Side::Target => self.tgt_env.insert(b.reg.clone(), t.clone()),
            };
            last = Some(t);
        }
        last.ok_or_else(|| EncodeError::Unsupported("empty template".into()))
    }

    fn encode_node(&mut self, side: Side, reg: &str, node: &ExprNode) -> Result<Term, EncodeError> {
        match node {
            ExprNode::Input { name } => Ok(Term::var(name.clone(), self.sort_of(name)?)),
            ExprNode::Literal(lit) => self.literal_term(lit, self.sort_of(reg)?),
            ExprNode::Copy(op) => self.operand_term(side, reg, 0, op),
            ExprNode::ConstExpr(ce) => {
                let sort = self.sort_of(reg)?;
                self.const_expr_term(ce, Some(sort))
            }
            ExprNode::Undef => {
                let sort = self.sort_of(reg)?;
                Ok(self.fresh(side, reg, "undef", sort))
            }
            ExprNode::Instr { opcode, flags, cc, operands, .. } => {
                let ops: Vec<Term> = operands
                    .iter()
                    .enumerate()
                    .map(|(i, op)| self.operand_term(side, reg, i, op))
                    .collect::<Result<_, _>>()?;
                use Opcode::*;
                match opcode {
                    Fadd | Fsub | Fmul | Fdiv => {
                        let raw = encode_binop(*opcode, ops[0].clone(), ops[1].clone());
                        Ok(apply_fastmath(self, side, reg, *flags, &ops, raw))
                    }
                    Frem => {
                        let raw = encode_frem(ops[0].clone(), ops[1].clone());
                        Ok(apply_fastmath(self, side, reg, *flags, &ops, raw))
                    }
                    Fabs => Ok(term::fp_abs(ops[0].clone())),
                    Fcmp => {
                        let code = match cc {
                            Some(CcRef::Code(c)) => *c,
                            Some(CcRef::Sym(s)) => *self
                                .cca
                                .get(s)
                                .ok_or_else(|| EncodeError::UnresolvedCc(s.clone()))?,
                            None => return Err(EncodeError::Unsupported("fcmp without condition code".into())),
                        };
                        let b = encode_fcmp(code, ops[0].clone(), ops[1].clone());
                        let raw = term::ite(b, Term::bv_lit(1, 1), Term::bv_lit(1, 0));
                        Ok(apply_fastmath(self, side, reg, *flags, &ops, raw))
                    }
                    Select => {
                        let cond = term::eq(ops[0].clone(), Term::bv_lit(1, 1));
                        Ok(term::ite(cond, ops[1].clone(), ops[2].clone()))
                    }
                    Fptrunc | Fpext => {
                        let dst = match self.sort_of(reg)? {
                            Sort::Fp(f) => f,
                            _ => return Err(EncodeError::Unsupported("conversion to non-fp".into())),
                        };
                        Ok(term::fp_to_fp(dst, ops[0].clone()))
                    }
                    Fptosi | Fptoui => {
                        let w = match self.sort_of(reg)? {
                            Sort::BitVec(w) => w,
                            _ => return Err(EncodeError::Unsupported("fp-to-int to non-integer".into())),
                        };
                        let signed = *opcode == Fptosi;
                        Ok(self.encode_fp_to_int(side, reg, ops[0].clone(), w, signed))
                    }
                    Sitofp | Uitofp => {
                        let dst = match self.sort_of(reg)? {
                            Sort::Fp(f) => f,
                            _ => return Err(EncodeError::Unsupported("int-to-fp to non-fp".into())),
                        };
                        let conv = if *opcode == Sitofp {
                            term::sbv_to_fp(dst, ops[0].clone())
                        } else {
                            term::ubv_to_fp(dst, ops[0].clone())
                        };
                        // The conversion is undefined when the rounded
                        // result does not fit in the destination format.
                        let u = self.fresh(side, reg, "cvt", Sort::Fp(dst));
                        Ok(term::ite(term::is_inf(conv.clone()), u, conv))
                    }
                    Add => Ok(term::bv_add(ops[0].clone(), ops[1].clone())),
                    Sub => Ok(term::bv_sub(ops[0].clone(), ops[1].clone())),
                }
            }
        }
    }

    /// fptosi/fptoui: truncation toward zero, undefined on NaN, infinities
    /// and values whose truncation falls outside the integer range. The
    /// range check compares against the tightest representable bounds of
    /// the open real interval of valid inputs.
    fn encode_fp_to_int(&mut self, side: Side, reg: &str, x: Term, w: u32, signed: bool) -> Term {
        let fmt = match x.sort() {
            Sort::Fp(f) => f,
            _ => unreachable!(),
        };
        let (lo_q, hi_q) = int_range_bounds(w, signed);
        let lo = minifloat::smallest_above(fmt, &lo_q);
        let hi = minifloat::largest_below(fmt, &hi_q);
        let invalid = term::or(vec![
            term::is_nan(x.clone()),
            term::is_inf(x.clone()),
            term::fp_lt(x.clone(), Term::fp_lit(lo)),
            term::fp_gt(x.clone(), Term::fp_lit(hi)),
        ]);
        let raw = if signed { term::fp_to_sbv(w, x) } else { term::fp_to_ubv(w, x) };
        let u = self.fresh(side, reg, "cvt", Sort::BitVec(w));
        term::ite(invalid, u, raw)
    }

    /// Encode a constant expression from a precondition or a target
    /// binding. Literals and constant-function results take their sort
    /// from the surrounding context.
    pub fn const_expr_term(
        &mut self,
        ce: &crate::dsl::ConstExpr,
        expected: Option<Sort>,
    ) -> Result<Term, EncodeError> {
        use crate::dsl::ConstExpr;
        match ce {
            ConstExpr::Sym(s) => Ok(Term::var(s.clone(), self.sort_of(s)?)),
            ConstExpr::Reg(r) => self.reg_term(Side::Target, r),
            ConstExpr::Num(lit) => {
                let sort = expected
                    .ok_or_else(|| EncodeError::Unsupported("literal of undetermined type in constant expression".into()))?;
                self.literal_term(lit, sort)
            }
            ConstExpr::Apply { func, arg } => {
                let a = self.const_expr_term(arg, None)?;
                let sort = expected
                    .ok_or_else(|| EncodeError::Unsupported(format!("result type of `{func}(..)` is undetermined")))?;
                const_function_term(func, a, sort)
            }
        }
    }

    /// The sort of a constant expression when it is determined by a name.
    pub fn const_expr_sort(&self, ce: &crate::dsl::ConstExpr) -> Option<Sort> {
        use crate::dsl::ConstExpr;
        match ce {
            ConstExpr::Sym(s) | ConstExpr::Reg(s) => self.sort_of(s).ok(),
            _ => None,
        }
    }
}

/// Constant functions in preconditions fold at compile time; they carry
/// no undefined-behavior guards.
fn const_function_term(func: &str, arg: Term, result: Sort) -> Result<Term, EncodeError> {
    match (func, result) {
        ("fptosi", Sort::BitVec(w)) => Ok(term::fp_to_sbv(w, arg)),
        ("fptoui", Sort::BitVec(w)) => Ok(term::fp_to_ubv(w, arg)),
        ("sitofp", Sort::Fp(f)) => Ok(term::sbv_to_fp(f, arg)),
        ("uitofp", Sort::Fp(f)) => Ok(term::ubv_to_fp(f, arg)),
        ("fpext", Sort::Fp(f)) | ("fptrunc", Sort::Fp(f)) => Ok(term::fp_to_fp(f, arg)),
        _ => Err(EncodeError::Unsupported(format!("constant function `{func}`"))),
    }
}

/// Open real interval of inputs for which fp-to-int is defined.
fn int_range_bounds(w: u32, signed: bool) -> (BigRational, BigRational) {
    if signed {
        let hi = BigInt::one() << (w - 1);
        let lo = -(BigInt::one() << (w - 1)) - BigInt::one();
        (BigRational::from_integer(lo), BigRational::from_integer(hi))
    } else {
        (
            BigRational::from_integer(BigInt::from(-1)),
            BigRational::from_integer(BigInt::one() << w),
        )
    }
}

pub fn encode_binop(op: Opcode, a: Term, b: Term) -> Term {
    match op {
        Opcode::Fadd => term::fp_add(a, b),
        Opcode::Fsub => term::fp_sub(a, b),
        Opcode::Fmul => term::fp_mul(a, b),
        Opcode::Fdiv => term::fp_div(a, b),
        Opcode::Frem => encode_frem(a, b),
        _ => panic!("not a floating-point binop: {op:?}"),
    }
}

/// frem follows C fmod: the result has the sign of the dividend and a
/// magnitude below |y|. Composed from the IEEE remainder:
///   r  = remainder(|x|, |y|)
///   r' = r < 0 ? r + |y| : r      (round to nearest even)
///   fmod = sign(x) ⊕ sign(r') ? -r' : r'
pub fn encode_frem(x: Term, y: Term) -> Term {
    let abs_x = term::fp_abs(x.clone());
    let abs_y = term::fp_abs(y);
    let r = term::fp_rem_ieee(abs_x, abs_y.clone());
    let r2 = term::ite(term::is_neg(r.clone()), term::fp_add(r.clone(), abs_y), r);
    term::ite(
        term::xor(term::is_neg(x), term::is_neg(r2.clone())),
        term::fp_neg(r2.clone()),
        r2,
    )
}

/// The fcmp comparison: ordered codes require both operands non-NaN,
/// unordered codes hold whenever either operand is NaN.
pub fn encode_fcmp(cc: CondCode, a: Term, b: Term) -> Term {
    use CondCode::*;
    let nan = term::or(vec![term::is_nan(a.clone()), term::is_nan(b.clone())]);
    let rel = |cc: CondCode| -> Term {
        match cc {
            Oeq | Ueq => term::fp_ieee_eq(a.clone(), b.clone()),
            Ogt | Ugt => term::fp_gt(a.clone(), b.clone()),
            Oge | Uge => term::fp_geq(a.clone(), b.clone()),
            Olt | Ult => term::fp_lt(a.clone(), b.clone()),
            Ole | Ule => term::fp_leq(a.clone(), b.clone()),
            One | Une => term::not(term::fp_ieee_eq(a.clone(), b.clone())),
            Ord | Uno => unreachable!(),
        }
    };
    match cc {
        Ord => term::not(nan),
        Uno => nan,
        c if c.is_ordered() => term::and(vec![term::not(nan), rel(c)]),
        c => term::or(vec![nan, rel(c)]),
    }
}

/// Wrap a raw result according to the instruction's fast-math flags.
/// `nnan`: if an operand or the result is NaN the result is undefined;
/// `ninf`: likewise for infinities. `nsz` does not change the value
/// semantics; it only relaxes the equivalence check at the root.
pub fn apply_fastmath(
    ctx: &mut EncodeCtx,
    side: Side,
    reg: &str,
    flags: FastMath,
    fp_operands: &[Term],
    raw: Term,
) -> Term {
    let mut r = raw;
    let fp_ops: Vec<&Term> = fp_operands.iter().filter(|t| matches!(t.sort(), Sort::Fp(_))).collect();
    if flags.nnan {
        let mut cases: Vec<Term> = fp_ops.iter().map(|t| term::is_nan((*t).clone())).collect();
        if matches!(r.sort(), Sort::Fp(_)) {
            cases.push(term::is_nan(r.clone()));
        }
        let u = ctx.fresh(side, reg, "nnan", r.sort());
        r = term::ite(term::or(cases), u, r);
    }
    if flags.ninf {
        let mut cases: Vec<Term> = fp_ops.iter().map(|t| term::is_inf((*t).clone())).collect();
        if matches!(r.sort(), Sort::Fp(_)) {
            cases.push(term::is_inf(r.clone()));
        }
        let u = ctx.fresh(side, reg, "ninf", r.sort());
        r = term::ite(term::or(cases), u, r);
    }
    r
}

/// Build the counterexample query for one instance: the assertion is
/// satisfiable exactly when the precondition admits an input on which
/// source and target must disagree.
pub fn build_query(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &BTreeMap<String, CondCode>,
) -> Result<QueryScript, EncodeError> {
    let mut ctx = EncodeCtx::new(t, ta, cca);
    let src = ctx.encode_side(Side::Source)?;
    let tgt = ctx.encode_side(Side::Target)?;
    if src.sort() != tgt.sort() {
        return Err(EncodeError::Unsupported("source and target roots differ in type".into()));
    }
    let pre = crate::precond::encode_predicate(&mut ctx, &t.precondition)?;

    let mut disagree = term::distinct(src.clone(), tgt.clone());
    if t.root_has_nsz() && matches!(src.sort(), Sort::Fp(_)) {
        // Under nsz a zero result of either sign is acceptable, so a
        // counterexample must not rest on the sign of zero alone.
        let both_zero = term::and(vec![term::is_zero(src), term::is_zero(tgt)]);
        disagree = term::and(vec![disagree, term::not(both_zero)]);
    }

    let body = term::and(vec![pre, disagree]);
    let quantified = !ctx.universal.is_empty();
    let assertion = term::forall(ctx.universal.clone(), body);

    let mut fv = BTreeMap::new();
    term::free_vars(&assertion, &mut fv);
    Ok(QueryScript {
        name: t.name.clone(),
        free: fv.into_iter().collect(),
        universal: ctx.universal,
        assertion,
        quantified,
    })
}

/// The fresh-variable inventory of an instance without building the
/// whole query; used by the oracle's interpreter and brute-force search.
pub fn fresh_inventory(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &BTreeMap<String, CondCode>,
) -> Result<(Vec<(String, Sort)>, Vec<(String, Sort)>), EncodeError> {
    let mut ctx = EncodeCtx::new(t, ta, cca);
    ctx.encode_side(Side::Source)?;
    ctx.encode_side(Side::Target)?;
    Ok((ctx.universal, ctx.existential))
}

#[allow(unused_imports)]
pub(crate) use super::term::free_vars;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_corpus;
    use crate::typer::{enumerate_assignments, gen_constraints, FPFormat, WidthConfig};

    fn single_instance(text: &str) -> (Transform, TypeAssignment) {
        let t = parse_corpus(text).unwrap().remove(0);
        let c = gen_constraints(&t).unwrap();
        let mut asn = enumerate_assignments(&c, &WidthConfig::tiny());
        assert!(!asn.is_empty(), "untypeable: {text}");
        (t, asn.remove(0))
    }

    #[test]
    fn simple_binop_query() {
        let (t, ta) = single_instance("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n");
        let q = build_query(&t, &ta, &BTreeMap::new()).unwrap();
        assert!(!q.quantified);
        let names: Vec<&str> = q.free.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, vec!["%x", "%y"]);
    }

    #[test]
    fn undef_source_is_universal() {
        let (t, ta) = single_instance("%r = fadd %x, undef\n=>\n%r = %x\n");
        let q = build_query(&t, &ta, &BTreeMap::new()).unwrap();
        assert!(q.quantified);
        assert_eq!(q.universal.len(), 1);
        assert!(q.universal[0].0.starts_with("!src."));
    }

    #[test]
    fn undef_target_stays_free() {
        let (t, ta) = single_instance("%r = fadd %x, %x\n=>\n%r = undef\n");
        let q = build_query(&t, &ta, &BTreeMap::new()).unwrap();
        assert!(!q.quantified);
        assert!(q.free.iter().any(|(n, _)| n == "!tgt.%r.undef"));
    }

    #[test]
    fn fastmath_introduces_fresh_vars() {
        let (t, ta) = single_instance("%r = fadd nnan ninf %x, %y\n=>\n%r = fadd %x, %y\n");
        let q = build_query(&t, &ta, &BTreeMap::new()).unwrap();
        assert_eq!(q.universal.len(), 2);
        let tags: Vec<&str> = q.universal.iter().map(|(n, _)| n.rsplit('.').next().unwrap()).collect();
        assert_eq!(tags, vec!["nnan", "ninf"]);
    }

    #[test]
    fn fcmp_resolves_symbolic_code() {
        let (t, ta) = single_instance("Pre: ordered(C1)\n%r = fcmp C1 %x, %y\n=>\n%r = fcmp C1 %x, %y\n");
        let mut cca = BTreeMap::new();
        cca.insert("C1".to_string(), CondCode::Olt);
        let q = build_query(&t, &ta, &cca).unwrap();
        assert_eq!(q.assertion.sort(), Sort::Bool);
        assert!(build_query(&t, &ta, &BTreeMap::new()).is_err());
    }

    #[test]
    fn fptosi_guard_bounds_are_representable() {
        // At fp8 with i8: valid reals are (-129, 128); the widest valid
        // fp8 values are -128..=120 (fp8 max finite is 240).
        let lo = minifloat::smallest_above(FPFormat::FP8, &int_range_bounds(8, true).0);
        let hi = minifloat::largest_below(FPFormat::FP8, &int_range_bounds(8, true).1);
        assert_eq!(lo.to_decimal_string(), "-128.0");
        assert_eq!(hi.to_decimal_string(), "120.0");
    }

    #[test]
    fn nsz_relaxes_root_check() {
        let (t, ta) = single_instance("%r = fadd nsz %x, %y\n=>\n%r = fadd %y, %x\n");
        let q = build_query(&t, &ta, &BTreeMap::new()).unwrap();
        // the relaxation appears as a conjunction at the top level
        match q.assertion.kind() {
            term::TermKind::App { op: crate::fpsem::term::Op::And, args } => assert_eq!(args.len(), 2),
            k => panic!("expected top-level conjunction, got {k:?}"),
        }
    }
}
