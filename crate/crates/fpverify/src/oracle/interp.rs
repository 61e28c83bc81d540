//! A reference interpreter for transform templates over exact
//! arbitrary-precision arithmetic. Completely independent of the SMT
//! encoding, except that both sides agree on the names of fresh
//! variables standing for undefined results.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::dsl::{CcRef, CondCode, ConstExpr, ExprNode, FastMath, Literal, Opcode, Operand, PredExpr, Side, Transform};
use crate::oracle::minifloat::{self, decode_signed, encode_twos_complement, literal_value, MiniFloat};
use crate::typer::{lit_slot_name, Ty, TypeAssignment};

/// A runtime value: a floating-point encoding or a two's-complement
/// bitvector. Equality is bitwise, matching the solver's `=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Fp(MiniFloat),
    Int { width: u32, bits: u64 },
}

impl Value {
    pub fn ty(&self) -> Ty {
        match self {
            Value::Fp(v) => Ty::Fp(v.format),
            Value::Int { width, .. } => Ty::Int(*width),
        }
    }

    pub fn as_fp(&self) -> Result<&MiniFloat, InterpError> {
        match self {
            Value::Fp(v) => Ok(v),
            _ => Err(InterpError::Kind("expected a floating-point value".into())),
        }
    }

    pub fn as_int(&self) -> Result<(u32, u64), InterpError> {
        match self {
            Value::Int { width, bits } => Ok((*width, *bits)),
            _ => Err(InterpError::Kind("expected an integer value".into())),
        }
    }

    /// Human-readable rendering: exact decimal plus the bit pattern.
    pub fn describe(&self) -> String {
        match self {
            Value::Fp(v) => format!("{} ({})", v.to_decimal_string(), v.to_bits_string()),
            Value::Int { width, bits } => {
                let signed = decode_signed(*bits, *width);
                format!("{signed} (i{width} 0x{bits:x})")
            }
        }
    }
}

pub type Env = BTreeMap<String, Value>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("no value bound for `{0}`")]
    Missing(String),
    #[error("no type for `{0}`")]
    MissingType(String),
    #[error("{0}")]
    Kind(String),
    #[error("condition code `{0}` is unresolved")]
    UnresolvedCc(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// Evaluation of one instance on one environment. The environment binds
/// inputs, symbolic constants, and every fresh variable of the instance
/// (`!side.reg.tag` names).
pub struct Interp<'a> {
    t: &'a Transform,
    ta: &'a TypeAssignment,
    cca: &'a BTreeMap<String, CondCode>,
    env: &'a Env,
    src_vals: BTreeMap<String, Value>,
    tgt_vals: BTreeMap<String, Value>,
}

impl<'a> Interp<'a> {
    pub fn new(
        t: &'a Transform,
        ta: &'a TypeAssignment,
        cca: &'a BTreeMap<String, CondCode>,
        env: &'a Env,
    ) -> Interp<'a> {
        Interp { t, ta, cca, env, src_vals: BTreeMap::new(), tgt_vals: BTreeMap::new() }
    }

    /// Evaluate both templates; returns (source root, target root).
    pub fn run(&mut self) -> Result<(Value, Value), InterpError> {
        let s = self.run_side(Side::Source)?;
        let t = self.run_side(Side::Target)?;
        Ok((s, t))
    }

    fn run_side(&mut self, side: Side) -> Result<Value, InterpError> {
        let bindings = match side {
            Side::Source => self.t.source.clone(),
            Side::Target => self.t.target.clone(),
        };
        let mut last = None;
        for b in &bindings {
            let v = self.eval_node(side, &b.reg, &b.node)?;
            match side {
                Side::Source => self.src_vals.insert(b.reg.clone(), v),
                Side::Target => self.tgt_vals.insert(b.reg.clone(), v),
            };
            last = Some(v);
        }
        last.ok_or_else(|| InterpError::Unsupported("empty template".into()))
    }

    fn ty_of(&self, name: &str) -> Result<Ty, InterpError> {
        self.ta.get(name).ok_or_else(|| InterpError::MissingType(name.to_string()))
    }

    fn env_get(&self, name: &str) -> Result<Value, InterpError> {
        self.env.get(name).copied().ok_or_else(|| InterpError::Missing(name.to_string()))
    }

    fn fresh(&self, side: Side, reg: &str, tag: &str) -> Result<Value, InterpError> {
        self.env_get(&format!("!{}.{}.{}", side.tag(), reg, tag))
    }

    fn literal(&self, lit: &Literal, ty: Ty) -> Result<Value, InterpError> {
        match ty {
            Ty::Fp(f) => Ok(Value::Fp(literal_value(f, lit))),
            Ty::Int(w) => match lit {
                Literal::Int(n) => Ok(Value::Int { width: w, bits: encode_twos_complement(n, w) }),
                _ => Err(InterpError::Kind("floating-point literal in integer position".into())),
            },
        }
    }

    fn reg_value(&self, side: Side, r: &str) -> Result<Value, InterpError> {
        let own = match side {
            Side::Source => &self.src_vals,
            Side::Target => &self.tgt_vals,
        };
        if let Some(v) = own.get(r) {
            return Ok(*v);
        }
        if side == Side::Target {
            if let Some(v) = self.src_vals.get(r) {
                return Ok(*v);
            }
        }
        self.env_get(r)
    }

    fn operand(&self, side: Side, reg: &str, idx: usize, op: &Operand) -> Result<Value, InterpError> {
        match op {
            Operand::Reg(r) => self.reg_value(side, r),
            Operand::Sym(s) => self.env_get(s),
            Operand::Lit(lit) => {
                let slot = lit_slot_name(side.tag(), reg, idx);
                self.literal(lit, self.ty_of(&slot)?)
            }
        }
    }

    fn eval_node(&mut self, side: Side, reg: &str, node: &ExprNode) -> Result<Value, InterpError> {
        match node {
            ExprNode::Input { name } => self.env_get(name),
            ExprNode::Literal(lit) => {
                let ty = self.ty_of(reg)?;
                self.literal(lit, ty)
            }
            ExprNode::Copy(op) => self.operand(side, reg, 0, op),
            ExprNode::ConstExpr(ce) => {
                let ty = self.ty_of(reg)?;
                self.const_expr(ce, Some(ty))?
                    .ok_or_else(|| InterpError::Kind("undefined constant expression".into()))
            }
            ExprNode::Undef => self.fresh(side, reg, "undef"),
            ExprNode::Instr { opcode, flags, cc, operands, .. } => {
                let ops: Vec<Value> = operands
                    .iter()
                    .enumerate()
                    .map(|(i, op)| self.operand(side, reg, i, op))
                    .collect::<Result<_, _>>()?;
                self.eval_instr(side, reg, *opcode, *flags, cc.as_ref(), &ops)
            }
        }
    }

    fn eval_instr(
        &mut self,
        side: Side,
        reg: &str,
        opcode: Opcode,
        flags: FastMath,
        cc: Option<&CcRef>,
        ops: &[Value],
    ) -> Result<Value, InterpError> {
        use Opcode::*;
        let raw = match opcode {
            Fadd | Fsub | Fmul | Fdiv | Frem => {
                let a = ops[0].as_fp()?;
                let b = ops[1].as_fp()?;
                Value::Fp(match opcode {
                    Fadd => minifloat::mf_add(a, b),
                    Fsub => minifloat::mf_sub(a, b),
                    Fmul => minifloat::mf_mul(a, b),
                    Fdiv => minifloat::mf_div(a, b),
                    Frem => minifloat::mf_rem(a, b),
                    _ => unreachable!(),
                })
            }
            Fabs => Value::Fp(ops[0].as_fp()?.abs()),
            Fcmp => {
                let code = match cc {
                    Some(CcRef::Code(c)) => *c,
                    Some(CcRef::Sym(s)) => *self
                        .cca
                        .get(s)
                        .ok_or_else(|| InterpError::UnresolvedCc(s.clone()))?,
                    None => return Err(InterpError::Unsupported("fcmp without condition code".into())),
                };
                let b = minifloat::mf_cmp(code, ops[0].as_fp()?, ops[1].as_fp()?);
                Value::Int { width: 1, bits: b as u64 }
            }
            Select => {
                let (_, c) = ops[0].as_int()?;
                if c & 1 == 1 {
                    ops[1]
                } else {
                    ops[2]
                }
            }
            Fptrunc | Fpext => {
                let dst = match self.ty_of(reg)? {
                    Ty::Fp(f) => f,
                    _ => return Err(InterpError::Kind("conversion to non-fp".into())),
                };
                Value::Fp(minifloat::mf_convert_format(ops[0].as_fp()?, dst))
            }
            Fptosi | Fptoui => {
                let w = match self.ty_of(reg)? {
                    Ty::Int(w) => w,
                    _ => return Err(InterpError::Kind("fp-to-int to non-integer".into())),
                };
                let x = ops[0].as_fp()?;
                let converted = if opcode == Fptosi {
                    minifloat::mf_to_signed(x, w)
                } else {
                    minifloat::mf_to_unsigned(x, w)
                };
                match converted {
                    Some(bits) => Value::Int { width: w, bits },
                    None => self.fresh(side, reg, "cvt")?,
                }
            }
            Sitofp | Uitofp => {
                let dst = match self.ty_of(reg)? {
                    Ty::Fp(f) => f,
                    _ => return Err(InterpError::Kind("int-to-fp to non-fp".into())),
                };
                let (w, bits) = ops[0].as_int()?;
                let converted = if opcode == Sitofp {
                    minifloat::mf_from_signed(dst, bits, w)
                } else {
                    minifloat::mf_from_unsigned(dst, bits, w)
                };
                match converted {
                    Some(v) => Value::Fp(v),
                    None => self.fresh(side, reg, "cvt")?,
                }
            }
            Add | Sub => {
                let (w, a) = ops[0].as_int()?;
                let (_, b) = ops[1].as_int()?;
                let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
                let bits = if opcode == Add { a.wrapping_add(b) } else { a.wrapping_sub(b) } & mask;
                Value::Int { width: w, bits }
            }
        };
        self.apply_fastmath(side, reg, flags, ops, raw)
    }

    /// Mirror of the SMT fast-math wrapping: `nnan`/`ninf` replace the
    /// result with the environment's fresh value when an operand or the
    /// result is a NaN / an infinity.
    fn apply_fastmath(
        &self,
        side: Side,
        reg: &str,
        flags: FastMath,
        ops: &[Value],
        raw: Value,
    ) -> Result<Value, InterpError> {
        let mut r = raw;
        let fp_ops: Vec<&MiniFloat> = ops
            .iter()
            .filter_map(|v| match v {
                Value::Fp(m) => Some(m),
                _ => None,
            })
            .collect();
        if flags.nnan {
            let mut hit = fp_ops.iter().any(|m| m.is_nan());
            if let Value::Fp(m) = r {
                hit |= m.is_nan();
            }
            if hit {
                r = self.fresh(side, reg, "nnan")?;
            }
        }
        if flags.ninf {
            let mut hit = fp_ops.iter().any(|m| m.is_infinite());
            if let Value::Fp(m) = r {
                hit |= m.is_infinite();
            }
            if hit {
                r = self.fresh(side, reg, "ninf")?;
            }
        }
        Ok(r)
    }

    /// Evaluate a constant expression; `None` means the constant fold is
    /// undefined (e.g. fptosi of an out-of-range constant), which makes
    /// any enclosing predicate false.
    fn const_expr(&mut self, ce: &ConstExpr, expected: Option<Ty>) -> Result<Option<Value>, InterpError> {
        match ce {
            ConstExpr::Sym(s) => self.env_get(s).map(Some),
            ConstExpr::Reg(r) => self.value_of_reg(r).map(Some),
            ConstExpr::Num(lit) => {
                let ty = expected.ok_or_else(|| {
                    InterpError::Unsupported("literal of undetermined type in constant expression".into())
                })?;
                self.literal(lit, ty).map(Some)
            }
            ConstExpr::Apply { func, arg } => {
                let Some(a) = self.const_expr(arg, None)? else {
                    return Ok(None);
                };
                let ty = expected.ok_or_else(|| {
                    InterpError::Unsupported(format!("result type of `{func}(..)` is undetermined"))
                })?;
                Ok(match (func.as_str(), ty) {
                    ("fptosi", Ty::Int(w)) => {
                        minifloat::mf_to_signed(a.as_fp()?, w).map(|bits| Value::Int { width: w, bits })
                    }
                    ("fptoui", Ty::Int(w)) => {
                        minifloat::mf_to_unsigned(a.as_fp()?, w).map(|bits| Value::Int { width: w, bits })
                    }
                    ("sitofp", Ty::Fp(f)) => {
                        let (w, bits) = a.as_int()?;
                        minifloat::mf_from_signed(f, bits, w).map(Value::Fp)
                    }
                    ("uitofp", Ty::Fp(f)) => {
                        let (w, bits) = a.as_int()?;
                        minifloat::mf_from_unsigned(f, bits, w).map(Value::Fp)
                    }
                    ("fpext", Ty::Fp(f)) | ("fptrunc", Ty::Fp(f)) => {
                        Some(Value::Fp(minifloat::mf_convert_format(a.as_fp()?, f)))
                    }
                    _ => return Err(InterpError::Unsupported(format!("constant function `{func}`"))),
                })
            }
        }
    }

    fn const_expr_ty(&self, ce: &ConstExpr) -> Option<Ty> {
        match ce {
            ConstExpr::Sym(s) | ConstExpr::Reg(s) => self.ta.get(s),
            _ => None,
        }
    }

    /// Value of a register referenced from a constant expression, computing
    /// its defining prefix on demand so that preconditions can be evaluated
    /// without running the full templates.
    fn value_of_reg(&mut self, r: &str) -> Result<Value, InterpError> {
        if let Some(v) = self.tgt_vals.get(r).or_else(|| self.src_vals.get(r)) {
            return Ok(*v);
        }
        if let Some(v) = self.env.get(r) {
            return Ok(*v);
        }
        for side in [Side::Source, Side::Target] {
            let bindings = match side {
                Side::Source => self.t.source.clone(),
                Side::Target => self.t.target.clone(),
            };
            if !bindings.iter().any(|b| b.reg == r) {
                continue;
            }
            for b in &bindings {
                let v = self.eval_node(side, &b.reg, &b.node)?;
                match side {
                    Side::Source => self.src_vals.insert(b.reg.clone(), v),
                    Side::Target => self.tgt_vals.insert(b.reg.clone(), v),
                };
                if b.reg == r {
                    return Ok(v);
                }
            }
        }
        Err(InterpError::Missing(r.to_string()))
    }

    /// Evaluate the precondition on this environment.
    pub fn precondition(&mut self) -> Result<bool, InterpError> {
        for p in self.t.precondition.conjuncts() {
            if !self.conjunct(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn conjunct(&mut self, p: &PredExpr) -> Result<bool, InterpError> {
        match p {
            PredExpr::True | PredExpr::And(_) => Ok(true),
            PredExpr::Pred { name, args } => match name.as_str() {
                "hasOneUse" => Ok(true),
                "ordered" | "unordered" | "swap" => {
                    let codes: Vec<CondCode> = args
                        .iter()
                        .map(|a| match a {
                            ConstExpr::Sym(s) => self
                                .cca
                                .get(s)
                                .copied()
                                .ok_or_else(|| InterpError::UnresolvedCc(s.clone())),
                            _ => Err(InterpError::Unsupported(format!("`{name}` expects a condition code"))),
                        })
                        .collect::<Result<_, _>>()?;
                    Ok(crate::precond::cc_predicate_holds(name, &codes))
                }
                "isNormal" => match self.const_expr(&args[0], None)? {
                    Some(v) => Ok(v.as_fp()?.is_normal()),
                    None => Ok(false),
                },
                "AnyZero" => match self.const_expr(&args[0], None)? {
                    Some(v) => Ok(v.as_fp()?.is_zero()),
                    None => Ok(false),
                },
                "WillNotOverflowSignedAdd" => {
                    let a = self.const_expr(&args[0], None)?;
                    let b = self.const_expr(&args[1], None)?;
                    let (Some(a), Some(b)) = (a, b) else { return Ok(false) };
                    let (w, ab) = a.as_int()?;
                    let (_, bb) = b.as_int()?;
                    let sum = decode_signed(ab, w) + decode_signed(bb, w);
                    let lo = -(BigInt::from(1) << (w - 1));
                    let hi = (BigInt::from(1) << (w - 1)) - 1;
                    Ok(sum >= lo && sum <= hi)
                }
                other => Err(InterpError::Unsupported(format!("predicate `{other}`"))),
            },
            PredExpr::Eq(a, b) => {
                let ta_ = self.const_expr_ty(a);
                let tb_ = self.const_expr_ty(b);
                let va = self.const_expr(a, tb_.or(ta_))?;
                let vb = self.const_expr(b, ta_.or(tb_))?;
                match (va, vb) {
                    (Some(x), Some(y)) => Ok(x == y),
                    _ => Ok(false),
                }
            }
        }
    }
}

/// Whether a source/target value pair counts as agreement, honoring the
/// nsz relaxation at the root.
pub fn values_agree(src: &Value, tgt: &Value, nsz: bool) -> bool {
    if let (Value::Fp(a), Value::Fp(b)) = (src, tgt) {
        // every NaN payload denotes the same value
        if a.is_nan() && b.is_nan() {
            return true;
        }
        if nsz && a.is_zero() && b.is_zero() {
            return true;
        }
    }
    src == tgt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_corpus;
    use crate::typer::{enumerate_assignments, gen_constraints, FPFormat, WidthConfig};

    fn instance(text: &str) -> (Transform, TypeAssignment) {
        let t = parse_corpus(text).unwrap().remove(0);
        let c = gen_constraints(&t).unwrap();
        let mut asn = enumerate_assignments(&c, &WidthConfig::tiny());
        (t, asn.remove(0))
    }

    fn fp8(v: f64) -> Value {
        let q = num_rational::BigRational::from_float(v).unwrap();
        Value::Fp(minifloat::from_rational(FPFormat::FP8, &q, v.is_sign_negative()))
    }

    #[test]
    fn evaluates_both_sides() {
        let (t, ta) = instance("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n");
        let cca = BTreeMap::new();
        let mut env = Env::new();
        env.insert("%x".into(), fp8(1.5));
        env.insert("%y".into(), fp8(2.0));
        let (s, g) = Interp::new(&t, &ta, &cca, &env).run().unwrap();
        assert_eq!(s, g);
        assert_eq!(s, fp8(3.5));
    }

    #[test]
    fn fresh_values_come_from_env() {
        let (t, ta) = instance("%r = fadd nnan %x, %y\n=>\n%r = fadd %x, %y\n");
        let cca = BTreeMap::new();
        let mut env = Env::new();
        env.insert("%x".into(), Value::Fp(MiniFloat::nan(FPFormat::FP8)));
        env.insert("%y".into(), fp8(1.0));
        env.insert("!src.%r.nnan".into(), fp8(7.0));
        let (s, g) = Interp::new(&t, &ta, &cca, &env).run().unwrap();
        assert_eq!(s, fp8(7.0));
        assert!(g.as_fp().unwrap().is_nan());
    }

    #[test]
    fn precondition_eval() {
        let (t, ta) = instance("Pre: AnyZero(C0)\n%y = fsub C0, %x\n%r = fadd %y, %x\n=>\n%r = fsub C0, 0.0\n");
        let cca = BTreeMap::new();
        let mut env = Env::new();
        env.insert("%x".into(), fp8(1.0));
        env.insert("C0".into(), fp8(0.0));
        assert!(Interp::new(&t, &ta, &cca, &env).precondition().unwrap());
        env.insert("C0".into(), fp8(1.0));
        assert!(!Interp::new(&t, &ta, &cca, &env).precondition().unwrap());
    }

    #[test]
    fn nsz_agreement() {
        let pz = fp8(0.0);
        let nz = fp8(-0.0);
        assert!(!values_agree(&pz, &nz, false));
        assert!(values_agree(&pz, &nz, true));
        assert!(!values_agree(&pz, &fp8(1.0), true));
    }
}
