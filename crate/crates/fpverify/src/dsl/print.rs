//! Canonical text form of a transform; `parse(pretty_print(t))` is
//! structurally equal to `t`.

use std::fmt::Write;

use super::{Binding, CcRef, ConstExpr, ExprNode, Literal, Operand, PredExpr, Transform};

pub fn pretty_print(t: &Transform) -> String {
    let mut out = String::new();
    if !t.name.is_empty() {
        writeln!(out, "Name: {}", t.name).unwrap();
    }
    if t.precondition != PredExpr::True {
        writeln!(out, "Pre: {}", fmt_pred(&t.precondition)).unwrap();
    }
    for b in &t.source {
        writeln!(out, "{}", fmt_binding(b)).unwrap();
    }
    writeln!(out, "=>").unwrap();
    for b in &t.target {
        writeln!(out, "{}", fmt_binding(b)).unwrap();
    }
    out
}

fn fmt_binding(b: &Binding) -> String {
    let mut s = format!("{} = ", b.reg);
    match &b.node {
        ExprNode::Input { name } => s.push_str(name),
        ExprNode::Literal(lit) => s.push_str(&fmt_literal(lit)),
        ExprNode::Copy(op) => s.push_str(&fmt_operand(op)),
        ExprNode::ConstExpr(ce) => s.push_str(&fmt_ce(ce)),
        ExprNode::Undef => s.push_str("undef"),
        ExprNode::Instr { opcode, flags, cc, operands, annot, result_annot } => {
            s.push_str(opcode.name());
            // canonical flag order: nnan ninf nsz
            if flags.nnan {
                s.push_str(" nnan");
            }
            if flags.ninf {
                s.push_str(" ninf");
            }
            if flags.nsz {
                s.push_str(" nsz");
            }
            if let Some(ty) = annot {
                write!(s, " {ty}").unwrap();
            }
            match cc {
                Some(CcRef::Code(c)) => write!(s, " {c}").unwrap(),
                Some(CcRef::Sym(name)) => write!(s, " {name}").unwrap(),
                None => {}
            }
            let ops: Vec<String> = operands.iter().map(fmt_operand).collect();
            write!(s, " {}", ops.join(", ")).unwrap();
            if let Some(ty) = result_annot {
                write!(s, " to {ty}").unwrap();
            }
        }
    }
    s
}

fn fmt_operand(op: &Operand) -> String {
    match op {
        Operand::Reg(r) => r.clone(),
        Operand::Sym(s) => s.clone(),
        Operand::Lit(l) => fmt_literal(l),
    }
}

fn fmt_literal(l: &Literal) -> String {
    match l {
        Literal::Fp { text, .. } => text.clone(),
        Literal::Nan => "nan".into(),
        Literal::Inf => "inf".into(),
        Literal::NegInf => "-inf".into(),
        Literal::Int(n) => n.to_string(),
    }
}

fn fmt_ce(ce: &ConstExpr) -> String {
    match ce {
        ConstExpr::Sym(s) => s.clone(),
        ConstExpr::Reg(r) => r.clone(),
        ConstExpr::Num(l) => fmt_literal(l),
        ConstExpr::Apply { func, arg } => format!("{func}({})", fmt_ce(arg)),
    }
}

fn fmt_pred(p: &PredExpr) -> String {
    match p {
        PredExpr::True => "".into(),
        PredExpr::And(ps) => ps.iter().map(fmt_pred).collect::<Vec<_>>().join(" && "),
        PredExpr::Pred { name, args } => {
            format!("{name}({})", args.iter().map(fmt_ce).collect::<Vec<_>>().join(", "))
        }
        PredExpr::Eq(a, b) => format!("{} == {}", fmt_ce(a), fmt_ce(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_corpus;
    use super::*;

    #[test]
    fn round_trips_structurally() {
        let texts = [
            "Name: PR26746\n%a = fsub -0.0, %x\n%r = fsub 0.0, %a\n=>\n%r = %x\n",
            "Pre: AnyZero(C) && isNormal(%x)\n%r = fadd nnan ninf nsz %x, C\n=>\n%r = %x\n",
            "Pre: swap(C1, C2)\n%c = fcmp C1 %x, %y\n=>\n%c = fcmp C2 %y, %x\n",
            "Pre: sitofp(%c) == C\n%r = fptosi %x to i32\n=>\n%c = fptosi(C)\n%r = %c\n",
            "%s = select %c, 0.0, C\n%r = frem %x, %s\n=>\n%r = frem %x, C\n",
        ];
        for text in texts {
            let t = &parse_corpus(text).unwrap()[0];
            let printed = pretty_print(t);
            let t2 = &parse_corpus(&printed).unwrap()[0];
            assert_eq!(t, t2, "round trip failed for:\n{text}\nprinted:\n{printed}");
        }
    }

    #[test]
    fn flags_print_in_canonical_order() {
        let t = &parse_corpus("%r = fadd nsz ninf nnan %x, %y\n=>\n%r = %x\n").unwrap()[0];
        let printed = pretty_print(t);
        assert!(printed.contains("fadd nnan ninf nsz %x, %y"), "{printed}");
    }

    #[test]
    fn symbolic_cc_prints_by_name() {
        let t = &parse_corpus("%c = fcmp C1 %x, %y\n=>\n%c = fcmp C1 %x, %y\n").unwrap()[0];
        assert!(pretty_print(t).contains("fcmp C1 %x, %y"));
    }
}
