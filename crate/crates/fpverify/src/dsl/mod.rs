//! The optimization specification language: parsing, validation, and
//! canonical printing of transforms.
//!
//! A transform is a named rewrite with an optional precondition, a source
//! template, and a target template, separated by `=>`. Instructions form
//! a DAG through register references; the last binding of each template
//! is the root value being rewritten.

mod parse;
mod print;

pub use parse::{parse_corpus, parse_corpus_blocks, ParseError};
pub use print::pretty_print;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::typer::Ty;

/// The fcmp condition codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CondCode {
    Oeq,
    Ogt,
    Oge,
    Olt,
    Ole,
    One,
    Ord,
    Ueq,
    Ugt,
    Uge,
    Ult,
    Ule,
    Une,
    Uno,
}

impl CondCode {
    pub const ALL: [CondCode; 14] = [
        CondCode::Oeq,
        CondCode::Ogt,
        CondCode::Oge,
        CondCode::Olt,
        CondCode::Ole,
        CondCode::One,
        CondCode::Ord,
        CondCode::Ueq,
        CondCode::Ugt,
        CondCode::Uge,
        CondCode::Ult,
        CondCode::Ule,
        CondCode::Une,
        CondCode::Uno,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CondCode::Oeq => "oeq",
            CondCode::Ogt => "ogt",
            CondCode::Oge => "oge",
            CondCode::Olt => "olt",
            CondCode::Ole => "ole",
            CondCode::One => "one",
            CondCode::Ord => "ord",
            CondCode::Ueq => "ueq",
            CondCode::Ugt => "ugt",
            CondCode::Uge => "uge",
            CondCode::Ult => "ult",
            CondCode::Ule => "ule",
            CondCode::Une => "une",
            CondCode::Uno => "uno",
        }
    }

    pub fn from_name(s: &str) -> Option<CondCode> {
        CondCode::ALL.iter().copied().find(|c| c.name() == s)
    }

    /// True for the codes that require both operands to be non-NaN.
    pub fn is_ordered(self) -> bool {
        matches!(
            self,
            CondCode::Oeq
                | CondCode::Ogt
                | CondCode::Oge
                | CondCode::Olt
                | CondCode::Ole
                | CondCode::One
                | CondCode::Ord
        )
    }

    /// The code computing the same result with the operands reversed.
    pub fn swapped(self) -> CondCode {
        match self {
            CondCode::Ogt => CondCode::Olt,
            CondCode::Olt => CondCode::Ogt,
            CondCode::Oge => CondCode::Ole,
            CondCode::Ole => CondCode::Oge,
            CondCode::Ugt => CondCode::Ult,
            CondCode::Ult => CondCode::Ugt,
            CondCode::Uge => CondCode::Ule,
            CondCode::Ule => CondCode::Uge,
            other => other,
        }
    }
}

impl fmt::Display for CondCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A condition code position: concrete, or a symbolic name resolved by
/// enumeration over the precondition's cc predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CcRef {
    Code(CondCode),
    Sym(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Fadd,
    Fsub,
    Fmul,
    Fdiv,
    Frem,
    Fabs,
    Fcmp,
    Select,
    Fptrunc,
    Fpext,
    Fptosi,
    Fptoui,
    Sitofp,
    Uitofp,
    Add,
    Sub,
}

impl Opcode {
    pub fn name(self) -> &'static str {
        match self {
            Opcode::Fadd => "fadd",
            Opcode::Fsub => "fsub",
            Opcode::Fmul => "fmul",
            Opcode::Fdiv => "fdiv",
            Opcode::Frem => "frem",
            Opcode::Fabs => "fabs",
            Opcode::Fcmp => "fcmp",
            Opcode::Select => "select",
            Opcode::Fptrunc => "fptrunc",
            Opcode::Fpext => "fpext",
            Opcode::Fptosi => "fptosi",
            Opcode::Fptoui => "fptoui",
            Opcode::Sitofp => "sitofp",
            Opcode::Uitofp => "uitofp",
            Opcode::Add => "add",
            Opcode::Sub => "sub",
        }
    }

    pub fn from_name(s: &str) -> Option<Opcode> {
        use Opcode::*;
        Some(match s {
            "fadd" => Fadd,
            "fsub" => Fsub,
            "fmul" => Fmul,
            "fdiv" => Fdiv,
            "frem" => Frem,
            "fabs" => Fabs,
            "fcmp" => Fcmp,
            "select" => Select,
            "fptrunc" => Fptrunc,
            "fpext" => Fpext,
            "fptosi" => Fptosi,
            "fptoui" => Fptoui,
            "sitofp" => Sitofp,
            "uitofp" => Uitofp,
            "add" => Add,
            "sub" => Sub,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        use Opcode::*;
        match self {
            Fabs | Fptrunc | Fpext | Fptosi | Fptoui | Sitofp | Uitofp => 1,
            Select => 3,
            _ => 2,
        }
    }

    /// Opcodes on which fast-math flags are legal.
    pub fn allows_fast_math(self) -> bool {
        use Opcode::*;
        matches!(self, Fadd | Fsub | Fmul | Fdiv | Frem | Fcmp)
    }
}

/// Per-instruction fast-math flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FastMath {
    pub nnan: bool,
    pub ninf: bool,
    pub nsz: bool,
}

impl FastMath {
    pub fn is_empty(&self) -> bool {
        !(self.nnan || self.ninf || self.nsz)
    }
}

/// An immediate value. Finite decimals keep both the token text (for
/// printing) and the exact rational magnitude; equality is semantic.
#[derive(Debug, Clone)]
pub enum Literal {
    Fp { neg: bool, mag: BigRational, text: String },
    Nan,
    Inf,
    NegInf,
    Int(BigInt),
}

impl Literal {
    pub fn is_fp(&self) -> bool {
        !matches!(self, Literal::Int(_))
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Fp { neg: n1, mag: m1, .. }, Literal::Fp { neg: n2, mag: m2, .. }) => {
                n1 == n2 && m1 == m2
            }
            (Literal::Nan, Literal::Nan) => true,
            (Literal::Inf, Literal::Inf) => true,
            (Literal::NegInf, Literal::NegInf) => true,
            (Literal::Int(a), Literal::Int(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Literal {}

/// An instruction argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Reg(String),
    Sym(String),
    Lit(Literal),
}

/// A compile-time constant expression: a symbolic constant, a reference
/// to a target register holding one, a number, or a constant-function
/// application such as `sitofp(%c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstExpr {
    Sym(String),
    Reg(String),
    Num(Literal),
    Apply { func: String, arg: Box<ConstExpr> },
}

/// A precondition: a conjunction of predicate applications and
/// constant-expression equalities. `True` is the absent precondition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredExpr {
    True,
    And(Vec<PredExpr>),
    Pred { name: String, args: Vec<ConstExpr> },
    Eq(ConstExpr, ConstExpr),
}

impl PredExpr {
    /// Flattened conjunct list ('True' yields the empty list).
    pub fn conjuncts(&self) -> Vec<&PredExpr> {
        match self {
            PredExpr::True => vec![],
            PredExpr::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            other => vec![other],
        }
    }
}

/// One value definition in a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprNode {
    /// An unconstrained input register. Parsed templates never bind this
    /// directly; inputs are the registers used without a definition.
    Input { name: String },
    Literal(Literal),
    Copy(Operand),
    ConstExpr(ConstExpr),
    Undef,
    Instr {
        opcode: Opcode,
        flags: FastMath,
        cc: Option<CcRef>,
        operands: Vec<Operand>,
        annot: Option<Ty>,
        result_annot: Option<Ty>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub reg: String,
    pub node: ExprNode,
}

/// A named peephole optimization: precondition, source and target DAGs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub name: String,
    pub precondition: PredExpr,
    pub source: Vec<Binding>,
    pub target: Vec<Binding>,
    /// The register both templates rewrite; last binding of each side.
    pub root: String,
}

impl Transform {
    /// Registers referenced by the source template but never defined:
    /// the universally-ranging inputs, in first-use order.
    pub fn inputs(&self) -> Vec<String> {
        let defined: BTreeSet<&str> = self.source.iter().map(|b| b.reg.as_str()).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let visit = |ops: &[Operand], out: &mut Vec<String>, seen: &mut BTreeSet<String>| {
            for op in ops {
                if let Operand::Reg(r) = op {
                    if !defined.contains(r.as_str()) && seen.insert(r.clone()) {
                        out.push(r.clone());
                    }
                }
            }
        };
        for b in &self.source {
            match &b.node {
                ExprNode::Instr { operands, .. } => visit(operands, &mut out, &mut seen),
                ExprNode::Copy(op) => visit(std::slice::from_ref(op), &mut out, &mut seen),
                _ => {}
            }
        }
        out
    }

    /// Symbolic constants (C, C0, ...) used as values, in sorted order.
    /// Names used as condition codes are excluded.
    pub fn const_symbols(&self) -> Vec<String> {
        let ccs: BTreeSet<String> = self.symbolic_ccs().into_iter().collect();
        let mut syms = BTreeSet::new();
        let from_ce = |ce: &ConstExpr, syms: &mut BTreeSet<String>| {
            collect_ce_syms(ce, syms);
        };
        for b in self.source.iter().chain(&self.target) {
            match &b.node {
                ExprNode::Instr { operands, .. } => {
                    for op in operands {
                        if let Operand::Sym(s) = op {
                            syms.insert(s.clone());
                        }
                    }
                }
                ExprNode::Copy(Operand::Sym(s)) => {
                    syms.insert(s.clone());
                }
                ExprNode::ConstExpr(ce) => from_ce(ce, &mut syms),
                _ => {}
            }
        }
        for p in self.precondition.conjuncts() {
            match p {
                PredExpr::Eq(a, b) => {
                    from_ce(a, &mut syms);
                    from_ce(b, &mut syms);
                }
                PredExpr::Pred { name, args } if !crate::precond::is_cc_predicate(name) => {
                    for a in args {
                        from_ce(a, &mut syms);
                    }
                }
                _ => {}
            }
        }
        syms.into_iter().filter(|s| !ccs.contains(s)).collect()
    }

    /// Symbolic condition-code names, in first-use order.
    pub fn symbolic_ccs(&self) -> Vec<String> {
        let mut out = Vec::new();
        for b in self.source.iter().chain(&self.target) {
            if let ExprNode::Instr { cc: Some(CcRef::Sym(s)), .. } = &b.node {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
        }
        for p in self.precondition.conjuncts() {
            if let PredExpr::Pred { name, args } = p {
                if crate::precond::is_cc_predicate(name) {
                    for a in args {
                        if let ConstExpr::Sym(s) = a {
                            if !out.contains(s) {
                                out.push(s.clone());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Look up the defining binding of a register on the given side,
    /// falling back to the source for target-side references.
    pub fn lookup<'a>(&'a self, side: Side, reg: &str) -> Option<&'a Binding> {
        let own = match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        };
        own.iter()
            .find(|b| b.reg == reg)
            .or_else(|| match side {
                Side::Target => self.source.iter().find(|b| b.reg == reg),
                Side::Source => None,
            })
    }

    /// The root carries nsz when the last binding of either template is
    /// an instruction with the flag.
    pub fn root_has_nsz(&self) -> bool {
        [self.source.last(), self.target.last()]
            .into_iter()
            .flatten()
            .any(|b| matches!(&b.node, ExprNode::Instr { flags, .. } if flags.nsz))
    }
}

fn collect_ce_syms(ce: &ConstExpr, out: &mut BTreeSet<String>) {
    match ce {
        ConstExpr::Sym(s) => {
            out.insert(s.clone());
        }
        ConstExpr::Apply { arg, .. } => collect_ce_syms(arg, out),
        _ => {}
    }
}

/// Which template a value lives in. Determines quantifier polarity for
/// undef and fast-math fresh variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn tag(self) -> &'static str {
        match self {
            Side::Source => "src",
            Side::Target => "tgt",
        }
    }
}
