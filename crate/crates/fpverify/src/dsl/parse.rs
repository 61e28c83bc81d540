//! Line-oriented parser for `.opt` corpus files.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use thiserror::Error;

use super::{
    Binding, CcRef, CondCode, ConstExpr, ExprNode, FastMath, Literal, Opcode, Operand, PredExpr,
    Transform,
};
use crate::precond;
use crate::typer::{FPFormat, Ty};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("semantic error at line {line}: {msg}")]
    Semantic { line: usize, msg: String },
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

fn semantic(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Semantic { line, msg: msg.into() }
}

/// Parse a corpus file: transforms separated by blank lines.
pub fn parse_corpus(text: &str) -> Result<Vec<Transform>, ParseError> {
    parse_corpus_blocks(text).into_iter().collect()
}

/// Like [`parse_corpus`], but each block parses independently so a bad
/// transform does not abort the rest of the file.
pub fn parse_corpus_blocks(text: &str) -> Vec<Result<Transform, ParseError>> {
    let mut blocks: Vec<Vec<(usize, String)>> = Vec::new();
    let mut current: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(';') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((i + 1, line.to_string()));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks.into_iter().map(|b| parse_block(&b)).collect()
}

// ---------------------------------------------------------------- tokens

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Reg(String),
    Ident(String),
    Num(String),
    Punct(&'static str),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Reg(r) => r.clone(),
            Tok::Ident(s) => s.clone(),
            Tok::Num(s) => s.clone(),
            Tok::Punct(p) => (*p).to_string(),
        }
    }
}

struct Tokens {
    line: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Punct(q)) if q == p => Ok(()),
            other => Err(syntax(
                self.line,
                self.col(),
                format!("expected `{p}`, found {}", other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())),
            )),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn tokenize(lineno: usize, s: &str) -> Result<Tokens, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '%' {
            let start = i;
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            if i == start + 1 {
                return Err(syntax(lineno, col, "empty register name".to_string()));
            }
            toks.push((col, Tok::Reg(chars[start..i].iter().collect())));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            toks.push((col, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        if c.is_ascii_digit()
            || ((c == '-' || c == '+') && i + 1 < chars.len() && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '.' || chars[i + 1] == 'i'))
        {
            // `-inf` and `+inf` scan as one token
            if (c == '-' || c == '+') && chars.get(i + 1) == Some(&'i') {
                if chars.get(i + 1..i + 4).map(|w| w.iter().collect::<String>()) == Some("inf".into()) {
                    toks.push((col, Tok::Num(format!("{c}inf"))));
                    i += 4;
                    continue;
                }
                return Err(syntax(lineno, col, "malformed literal".to_string()));
            }
            let start = i;
            if c == '-' || c == '+' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            toks.push((col, Tok::Num(chars[start..i].iter().collect())));
            continue;
        }
        match c {
            ',' => {
                toks.push((col, Tok::Punct(",")));
                i += 1;
            }
            '(' => {
                toks.push((col, Tok::Punct("(")));
                i += 1;
            }
            ')' => {
                toks.push((col, Tok::Punct(")")));
                i += 1;
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                toks.push((col, Tok::Punct("&&")));
                i += 2;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                toks.push((col, Tok::Punct("=>")));
                i += 2;
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                toks.push((col, Tok::Punct("==")));
                i += 2;
            }
            '=' => {
                toks.push((col, Tok::Punct("=")));
                i += 1;
            }
            other => {
                return Err(syntax(lineno, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(Tokens { line: lineno, toks, pos: 0 })
}

// -------------------------------------------------------------- literals

fn parse_literal_text(s: &str) -> Option<Literal> {
    match s {
        "nan" => return Some(Literal::Nan),
        "inf" | "+inf" => return Some(Literal::Inf),
        "-inf" => return Some(Literal::NegInf),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let is_fp = body.contains('.') || body.contains('e') || body.contains('E');
    if !is_fp {
        let n: BigInt = body.parse().ok()?;
        return Some(Literal::Int(if neg { -n } else { n }));
    }
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mag = if scale >= 0 {
        BigRational::from_integer(n * ten.pow(scale as u64))
    } else {
        BigRational::new(n, ten.pow((-scale) as u64))
    };
    Some(Literal::Fp { neg, mag, text: s.to_string() })
}

fn parse_type_token(s: &str) -> Option<Ty> {
    if let Some(f) = FPFormat::from_name(s) {
        return Some(Ty::Fp(f));
    }
    if let Some(w) = s.strip_prefix('i').and_then(|w| w.parse::<u32>().ok()) {
        if (1..=64).contains(&w) {
            return Some(Ty::Int(w));
        }
    }
    None
}

fn is_cc_sym(s: &str) -> bool {
    s.starts_with('C') && s.len() > 1 && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn is_const_sym(s: &str) -> bool {
    s.starts_with('C') && s[1..].chars().all(|c| c.is_ascii_digit())
}

// ------------------------------------------------------------ constexpr

fn parse_const_expr(t: &mut Tokens) -> Result<ConstExpr, ParseError> {
    match t.next() {
        Some(Tok::Reg(r)) => Ok(ConstExpr::Reg(r)),
        Some(Tok::Num(n)) => parse_literal_text(&n)
            .map(ConstExpr::Num)
            .ok_or_else(|| syntax(t.line, t.col(), format!("malformed literal `{n}`"))),
        Some(Tok::Ident(id)) => {
            if matches!(id.as_str(), "nan" | "inf" | "undef") {
                return parse_literal_text(&id)
                    .map(ConstExpr::Num)
                    .ok_or_else(|| syntax(t.line, t.col(), "undef is not a constant".to_string()));
            }
            if t.peek() == Some(&Tok::Punct("(")) {
                t.next();
                let arg = parse_const_expr(t)?;
                t.expect_punct(")")?;
                return Ok(ConstExpr::Apply { func: id, arg: Box::new(arg) });
            }
            if is_const_sym(&id) {
                Ok(ConstExpr::Sym(id))
            } else {
                Err(syntax(t.line, t.col(), format!("expected constant expression, found `{id}`")))
            }
        }
        other => Err(syntax(
            t.line,
            t.col(),
            format!(
                "expected constant expression, found {}",
                other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
            ),
        )),
    }
}

// --------------------------------------------------------- precondition

fn parse_pred_line(lineno: usize, text: &str) -> Result<PredExpr, ParseError> {
    let mut t = tokenize(lineno, text)?;
    if t.at_end() {
        return Ok(PredExpr::True);
    }
    let p = parse_conj(&mut t)?;
    if !t.at_end() {
        return Err(syntax(lineno, t.col(), "trailing tokens after precondition".to_string()));
    }
    Ok(p)
}

fn parse_conj(t: &mut Tokens) -> Result<PredExpr, ParseError> {
    let mut parts = vec![parse_atom(t)?];
    while t.peek() == Some(&Tok::Punct("&&")) {
        t.next();
        parts.push(parse_atom(t)?);
    }
    Ok(if parts.len() == 1 { parts.remove(0) } else { PredExpr::And(parts) })
}

fn parse_atom(t: &mut Tokens) -> Result<PredExpr, ParseError> {
    if t.peek() == Some(&Tok::Punct("(")) {
        t.next();
        let p = parse_conj(t)?;
        t.expect_punct(")")?;
        return Ok(p);
    }
    // A call with several arguments can only be a predicate; a term
    // followed by `==` is a constant-expression equality.
    if let Some(Tok::Ident(name)) = t.peek().cloned() {
        let mark = t.pos;
        t.next();
        if t.peek() == Some(&Tok::Punct("(")) {
            t.next();
            let mut args = vec![parse_const_expr(t)?];
            while t.peek() == Some(&Tok::Punct(",")) {
                t.next();
                args.push(parse_const_expr(t)?);
            }
            t.expect_punct(")")?;
            if t.peek() == Some(&Tok::Punct("==")) {
                // single-argument constant function compared for equality
                t.next();
                if args.len() != 1 {
                    return Err(syntax(t.line, t.col(), "constant function takes one argument".to_string()));
                }
                let lhs = ConstExpr::Apply { func: name, arg: Box::new(args.remove(0)) };
                let rhs = parse_const_expr(t)?;
                return Ok(PredExpr::Eq(lhs, rhs));
            }
            let arity = precond::predicate_arity(&name).ok_or_else(|| {
                syntax(t.line, t.col(), format!("unknown predicate `{name}`"))
            })?;
            if args.len() != arity {
                return Err(syntax(
                    t.line,
                    t.col(),
                    format!("predicate `{name}` expects {arity} argument(s), got {}", args.len()),
                ));
            }
            return Ok(PredExpr::Pred { name, args });
        }
        t.pos = mark;
    }
    let lhs = parse_const_expr(t)?;
    t.expect_punct("==")?;
    let rhs = parse_const_expr(t)?;
    Ok(PredExpr::Eq(lhs, rhs))
}

// --------------------------------------------------------- instructions

struct LineResult {
    binding: Binding,
    /// Synthetic `undef` bindings introduced for inline undef operands.
    desugared: Vec<Binding>,
}

fn parse_instr_line(lineno: usize, text: &str, undef_counter: &mut usize) -> Result<LineResult, ParseError> {
    let mut t = tokenize(lineno, text)?;
    let reg = match t.next() {
        Some(Tok::Reg(r)) => r,
        other => {
            return Err(syntax(
                lineno,
                t.col(),
                format!(
                    "expected register definition, found {}",
                    other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
                ),
            ))
        }
    };
    t.expect_punct("=")?;
    let mut desugared = Vec::new();

    let mut operand = |t: &mut Tokens, desugared: &mut Vec<Binding>| -> Result<Operand, ParseError> {
        match t.next() {
            Some(Tok::Reg(r)) => Ok(Operand::Reg(r)),
            Some(Tok::Num(n)) => parse_literal_text(&n)
                .map(Operand::Lit)
                .ok_or_else(|| syntax(lineno, t.col(), format!("malformed literal `{n}`"))),
            Some(Tok::Ident(id)) => match id.as_str() {
                "nan" | "inf" => Ok(Operand::Lit(parse_literal_text(&id).unwrap())),
                "undef" => {
                    *undef_counter += 1;
                    let name = format!("%__undef{}", *undef_counter);
                    desugared.push(Binding { reg: name.clone(), node: ExprNode::Undef });
                    Ok(Operand::Reg(name))
                }
                _ if is_const_sym(&id) => Ok(Operand::Sym(id)),
                _ => Err(syntax(lineno, t.col(), format!("unexpected operand `{id}`"))),
            },
            other => Err(syntax(
                lineno,
                t.col(),
                format!(
                    "expected operand, found {}",
                    other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
                ),
            )),
        }
    };

    // Single-token right-hand sides: copies, literals, undef, constants.
    let node = match t.peek().cloned() {
        Some(Tok::Ident(id)) if Opcode::from_name(&id).is_some() => {
            let opcode = Opcode::from_name(&id).unwrap();
            t.next();
            // `%c = fptosi(C)` is a constant-function application, not
            // an instruction: the parenthesis distinguishes the two.
            if t.peek() == Some(&Tok::Punct("(")) {
                t.next();
                let arg = parse_const_expr(&mut t)?;
                t.expect_punct(")")?;
                let node = ExprNode::ConstExpr(ConstExpr::Apply { func: id, arg: Box::new(arg) });
                if !t.at_end() {
                    return Err(syntax(lineno, t.col(), "trailing tokens after definition".to_string()));
                }
                return Ok(LineResult { binding: Binding { reg, node }, desugared });
            }
            let mut flags = FastMath::default();
            while let Some(Tok::Ident(f)) = t.peek() {
                match f.as_str() {
                    "nnan" => flags.nnan = true,
                    "ninf" => flags.ninf = true,
                    "nsz" => flags.nsz = true,
                    _ => break,
                }
                t.next();
            }
            if !flags.is_empty() && !opcode.allows_fast_math() {
                return Err(semantic(
                    lineno,
                    format!("fast-math flags are not allowed on `{}`", opcode.name()),
                ));
            }
            let mut annot = None;
            if let Some(Tok::Ident(ty)) = t.peek() {
                if let Some(ty) = parse_type_token(ty) {
                    annot = Some(ty);
                    t.next();
                }
            }
            let mut cc = None;
            if opcode == Opcode::Fcmp {
                match t.next() {
                    Some(Tok::Ident(id)) if CondCode::from_name(&id).is_some() => {
                        cc = Some(CcRef::Code(CondCode::from_name(&id).unwrap()));
                    }
                    Some(Tok::Ident(id)) if is_cc_sym(&id) => cc = Some(CcRef::Sym(id)),
                    other => {
                        return Err(syntax(
                            lineno,
                            t.col(),
                            format!(
                                "fcmp requires a condition code, found {}",
                                other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
                            ),
                        ))
                    }
                }
            }
            let mut operands = vec![operand(&mut t, &mut desugared)?];
            while t.peek() == Some(&Tok::Punct(",")) {
                t.next();
                operands.push(operand(&mut t, &mut desugared)?);
            }
            if operands.len() != opcode.arity() {
                return Err(semantic(
                    lineno,
                    format!(
                        "`{}` expects {} operand(s), got {}",
                        opcode.name(),
                        opcode.arity(),
                        operands.len()
                    ),
                ));
            }
            let mut result_annot = None;
            if let Some(Tok::Ident(to)) = t.peek() {
                if to == "to" {
                    t.next();
                    match t.next() {
                        Some(Tok::Ident(ty)) if parse_type_token(&ty).is_some() => {
                            result_annot = parse_type_token(&ty);
                        }
                        other => {
                            return Err(syntax(
                                lineno,
                                t.col(),
                                format!(
                                    "expected type after `to`, found {}",
                                    other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
                                ),
                            ))
                        }
                    }
                }
            }
            ExprNode::Instr { opcode, flags, cc, operands, annot, result_annot }
        }
        Some(Tok::Ident(id)) if id == "undef" => {
            t.next();
            ExprNode::Undef
        }
        Some(Tok::Ident(_)) => {
            // constant symbol or constant-function expression
            let ce = parse_const_expr(&mut t)?;
            match ce {
                ConstExpr::Num(lit) => ExprNode::Literal(lit),
                other => ExprNode::ConstExpr(other),
            }
        }
        Some(Tok::Reg(_)) => {
            let Some(Tok::Reg(r)) = t.next() else { unreachable!() };
            ExprNode::Copy(Operand::Reg(r))
        }
        Some(Tok::Num(_)) => {
            let Some(Tok::Num(n)) = t.next() else { unreachable!() };
            let lit = parse_literal_text(&n)
                .ok_or_else(|| syntax(lineno, t.col(), format!("malformed literal `{n}`")))?;
            ExprNode::Literal(lit)
        }
        other => {
            return Err(syntax(
                lineno,
                t.col(),
                format!(
                    "expected instruction or value, found {}",
                    other.map(|t| t.describe()).unwrap_or_else(|| "end of line".into())
                ),
            ))
        }
    };
    if !t.at_end() {
        return Err(syntax(lineno, t.col(), "trailing tokens after instruction".to_string()));
    }
    Ok(LineResult { binding: Binding { reg, node }, desugared })
}

// -------------------------------------------------------------- blocks

fn parse_block(lines: &[(usize, String)]) -> Result<Transform, ParseError> {
    let mut idx = 0;
    let mut name = String::new();
    let mut precondition = PredExpr::True;

    if let Some((_, l)) = lines.get(idx) {
        if let Some(rest) = l.trim().strip_prefix("Name:") {
            name = rest.trim().to_string();
            idx += 1;
        }
    }
    if let Some((n, l)) = lines.get(idx) {
        let trimmed = l.trim();
        let rest = trimmed
            .strip_prefix("Pre:")
            .or_else(|| trimmed.strip_prefix("Precondition:"));
        if let Some(rest) = rest {
            precondition = parse_pred_line(*n, rest)?;
            idx += 1;
        }
    }

    let mut source = Vec::new();
    let mut target = Vec::new();
    let mut in_target = false;
    let mut undef_counter = 0usize;
    let first_line = lines.first().map(|(n, _)| *n).unwrap_or(0);
    let mut last_line = first_line;
    for (n, l) in &lines[idx..] {
        last_line = *n;
        if l.trim() == "=>" {
            if in_target {
                return Err(syntax(*n, 1, "duplicate `=>` delimiter".to_string()));
            }
            in_target = true;
            continue;
        }
        let res = parse_instr_line(*n, l, &mut undef_counter)?;
        let dst = if in_target { &mut target } else { &mut source };
        dst.extend(res.desugared);
        dst.push(res.binding);
    }
    if !in_target {
        return Err(semantic(last_line, "transform has no `=>` delimiter".to_string()));
    }
    if source.is_empty() || target.is_empty() {
        return Err(semantic(last_line, "source and target templates must be non-empty".to_string()));
    }

    let root = source.last().unwrap().reg.clone();
    let t = Transform { name, precondition, source, target, root };
    validate(&t, first_line)?;
    Ok(t)
}

fn validate(t: &Transform, line: usize) -> Result<(), ParseError> {
    // unique register names per template
    for (side_name, bindings) in [("source", &t.source), ("target", &t.target)] {
        let mut seen = std::collections::BTreeSet::new();
        for b in bindings.iter() {
            if !seen.insert(&b.reg) {
                return Err(semantic(line, format!("duplicate register `{}` in {side_name}", b.reg)));
            }
        }
    }
    if t.target.last().map(|b| b.reg.as_str()) != Some(t.root.as_str()) {
        return Err(semantic(
            line,
            format!(
                "root mismatch: source rewrites `{}` but target ends with `{}`",
                t.root,
                t.target.last().map(|b| b.reg.as_str()).unwrap_or("")
            ),
        ));
    }
    // target must not redefine non-root source registers
    let src_defined: std::collections::BTreeSet<&str> =
        t.source.iter().map(|b| b.reg.as_str()).collect();
    for b in &t.target {
        if b.reg != t.root && src_defined.contains(b.reg.as_str()) {
            return Err(semantic(line, format!("target redefines source register `{}`", b.reg)));
        }
    }
    // use-before-def; target may also reference source registers and inputs
    let inputs: std::collections::BTreeSet<String> = t.inputs().into_iter().collect();
    for (side, bindings) in [
        (super::Side::Source, &t.source),
        (super::Side::Target, &t.target),
    ] {
        let mut defined: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
        for b in bindings.iter() {
            let mut check = |r: &str| -> Result<(), ParseError> {
                let ok = defined.contains(r)
                    || inputs.contains(r)
                    || (side == super::Side::Target && src_defined.contains(r) && r != t.root);
                if ok {
                    Ok(())
                } else {
                    Err(semantic(line, format!("register `{r}` used before definition")))
                }
            };
            match &b.node {
                ExprNode::Instr { operands, .. } => {
                    for op in operands {
                        if let Operand::Reg(r) = op {
                            check(r)?;
                        }
                    }
                }
                ExprNode::Copy(Operand::Reg(r)) => check(r)?,
                ExprNode::ConstExpr(ce) => check_ce_regs(ce, &mut check)?,
                _ => {}
            }
            defined.insert(&b.reg);
        }
    }
    // precondition registers must exist somewhere
    let all_regs: std::collections::BTreeSet<&str> = t
        .source
        .iter()
        .chain(&t.target)
        .map(|b| b.reg.as_str())
        .chain(inputs.iter().map(|s| s.as_str()))
        .collect();
    for p in t.precondition.conjuncts() {
        let ces: Vec<&ConstExpr> = match p {
            PredExpr::Pred { args, .. } => args.iter().collect(),
            PredExpr::Eq(a, b) => vec![a, b],
            _ => vec![],
        };
        for ce in ces {
            let mut check = |r: &str| -> Result<(), ParseError> {
                if all_regs.contains(r) {
                    Ok(())
                } else {
                    Err(semantic(line, format!("precondition references unknown register `{r}`")))
                }
            };
            check_ce_regs(ce, &mut check)?;
        }
    }
    // a name cannot be both a constant symbol and a condition code
    let ccs = t.symbolic_ccs();
    for s in t.const_symbols() {
        if ccs.contains(&s) {
            return Err(semantic(
                line,
                format!("`{s}` is used both as a constant symbol and as a condition code"),
            ));
        }
    }
    Ok(())
}

fn check_ce_regs(
    ce: &ConstExpr,
    check: &mut impl FnMut(&str) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    match ce {
        ConstExpr::Reg(r) => check(r),
        ConstExpr::Apply { arg, .. } => check_ce_regs(arg, check),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Side;

    const PR26746: &str = "Name: PR26746\n%a = fsub -0.0, %x\n%r = fsub 0.0, %a\n=>\n%r = %x\n";

    #[test]
    fn parses_pr26746() {
        let ts = parse_corpus(PR26746).unwrap();
        assert_eq!(ts.len(), 1);
        let t = &ts[0];
        assert_eq!(t.name, "PR26746");
        assert_eq!(t.root, "%r");
        assert_eq!(t.precondition, PredExpr::True);
        assert_eq!(t.inputs(), vec!["%x".to_string()]);
        assert_eq!(t.source.len(), 2);
        let ExprNode::Instr { opcode, operands, .. } = &t.source[0].node else {
            panic!("expected instruction")
        };
        assert_eq!(*opcode, Opcode::Fsub);
        assert!(matches!(&operands[0], Operand::Lit(Literal::Fp { neg: true, .. })));
    }

    #[test]
    fn absent_precondition_is_true() {
        let t = &parse_corpus("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n").unwrap()[0];
        assert_eq!(t.precondition, PredExpr::True);
    }

    #[test]
    fn use_before_def_rejected() {
        let err = parse_corpus("%r = fadd %x, %y\n=>\n%r = fadd %x, %z\n").unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }), "{err}");
        assert!(err.to_string().contains("%z"));
    }

    #[test]
    fn duplicate_register_rejected() {
        let err = parse_corpus("%a = fadd %x, %y\n%a = fadd %x, %x\n%r = fadd %a, %a\n=>\n%r = %x\n")
            .unwrap_err();
        assert!(err.to_string().contains("duplicate register"));
    }

    #[test]
    fn root_mismatch_rejected() {
        let err = parse_corpus("%r = fadd %x, %y\n=>\n%s = fadd %y, %x\n").unwrap_err();
        assert!(err.to_string().contains("root mismatch"));
    }

    #[test]
    fn unknown_opcode_is_error() {
        let err = parse_corpus("%r = bogus %x, %y\n=>\n%r = %x\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn fcmp_requires_condition_code() {
        assert!(parse_corpus("%r = fcmp %x, %y\n=>\n%r = %x\n").is_err());
        let t = &parse_corpus("%r = fcmp C1 %x, %y\n=>\n%r = fcmp C1 %y, %x\n").unwrap()[0];
        assert_eq!(t.symbolic_ccs(), vec!["C1".to_string()]);
    }

    #[test]
    fn precondition_predicates_parse() {
        let text = "Pre: AnyZero(C) && isNormal(%x)\n%r = fadd nsz %x, C\n=>\n%r = %x\n";
        let t = &parse_corpus(text).unwrap()[0];
        assert_eq!(t.precondition.conjuncts().len(), 2);
        assert_eq!(t.const_symbols(), vec!["C".to_string()]);
        assert!(t.root_has_nsz());
    }

    #[test]
    fn constexpr_equality_parses() {
        let text = "Pre: sitofp(%c) == C\n%r = fptosi %x\n=>\n%c = fptosi(C)\n%r = %c\n";
        let t = &parse_corpus(text).unwrap()[0];
        let PredExpr::Eq(ConstExpr::Apply { func, .. }, ConstExpr::Sym(s)) = &t.precondition else {
            panic!("expected equality, got {:?}", t.precondition)
        };
        assert_eq!(func, "sitofp");
        assert_eq!(s, "C");
    }

    #[test]
    fn unknown_predicate_rejected() {
        let err =
            parse_corpus("Pre: isMagic(%x)\n%r = fadd %x, %x\n=>\n%r = %x\n").unwrap_err();
        assert!(err.to_string().contains("unknown predicate"));
    }

    #[test]
    fn inline_undef_desugars() {
        let t = &parse_corpus("%r = select %c, undef, %x\n=>\n%r = %x\n").unwrap()[0];
        assert_eq!(t.source.len(), 2);
        assert!(matches!(t.source[0].node, ExprNode::Undef));
        assert!(t.lookup(Side::Source, "%__undef1").is_some());
    }

    #[test]
    fn arbitrary_bytes_never_panic() {
        // parser totality smoke test; proptest covers this more broadly
        for garbage in ["\0\0", "%%%%", "=>", "Name:", "%r = ", "%r = fadd %x", "((((", "1e999"] {
            let _ = parse_corpus_blocks(garbage);
        }
    }
}
