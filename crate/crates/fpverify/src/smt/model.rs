//! Parsing of solver models: a minimal s-expression reader plus the
//! value forms solvers print for floating-point and bitvector constants.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::oracle::{Env, MiniFloat, Value};
use crate::typer::FPFormat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed s-expression in model: {0}")]
    Syntax(String),
    #[error("unrecognized value form: {0}")]
    Value(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            _ => None,
        }
    }
}

/// Parse every top-level s-expression of `text`, skipping bare atoms
/// such as the `sat` status line.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, ModelError> {
    let mut tokens = tokenize(text);
    tokens.reverse(); // pop from the back
    let mut out = Vec::new();
    while let Some(tok) = tokens.pop() {
        out.push(parse_one(tok, &mut tokens)?);
    }
    Ok(out)
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' => out.push(c.to_string()),
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '|' => {
                let mut s = String::new();
                for c in chars.by_ref() {
                    if c == '|' {
                        break;
                    }
                    s.push(c);
                }
                out.push(s);
            }
            '"' => {
                let mut s = String::from("\"");
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '"' {
                        break;
                    }
                }
                out.push(s);
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::new();
                s.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                out.push(s);
            }
        }
    }
    out
}

fn parse_one(tok: String, rest: &mut Vec<String>) -> Result<SExpr, ModelError> {
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match rest.pop() {
                    Some(t) if t == ")" => return Ok(SExpr::List(items)),
                    Some(t) => items.push(parse_one(t, rest)?),
                    None => return Err(ModelError::Syntax("unbalanced parentheses".into())),
                }
            }
        }
        ")" => Err(ModelError::Syntax("unexpected `)`".into())),
        _ => Ok(SExpr::Atom(tok)),
    }
}

fn render(e: &SExpr) -> String {
    match e {
        SExpr::Atom(a) => a.clone(),
        SExpr::List(items) => {
            let inner: Vec<String> = items.iter().map(render).collect();
            format!("({})", inner.join(" "))
        }
    }
}

fn parse_binary(s: &str) -> Option<(u32, u64)> {
    let bits = s.strip_prefix("#b")?;
    let w = bits.len() as u32;
    let mut v = 0u64;
    for c in bits.chars() {
        v = (v << 1) | (c == '1') as u64;
    }
    Some((w, v))
}

fn parse_hex(s: &str) -> Option<(u32, u64)> {
    let digits = s.strip_prefix("#x")?;
    let w = 4 * digits.len() as u32;
    u64::from_str_radix(digits, 16).ok().map(|v| (w, v))
}

fn parse_bv_atom(s: &str) -> Option<(u32, u64)> {
    parse_binary(s).or_else(|| parse_hex(s))
}

/// Parse a model value term of floating-point or bitvector sort.
pub fn parse_value(e: &SExpr) -> Result<Value, ModelError> {
    match e {
        SExpr::Atom(a) => {
            if let Some((w, bits)) = parse_bv_atom(a) {
                return Ok(Value::Int { width: w, bits });
            }
            match a.as_str() {
                "true" => Ok(Value::Int { width: 1, bits: 1 }),
                "false" => Ok(Value::Int { width: 1, bits: 0 }),
                other => Err(ModelError::Value(other.into())),
            }
        }
        SExpr::List(items) => {
            let heads: Vec<Option<&str>> = items.iter().map(|i| i.atom()).collect();
            match heads.as_slice() {
                // (fp #b0 #b10101 #b0000000001)
                [Some("fp"), Some(s), Some(e_), Some(t)] => {
                    let (_, sign) = parse_bv_atom(s).ok_or_else(|| ModelError::Value(render(e)))?;
                    let (ew, exp) = parse_bv_atom(e_).ok_or_else(|| ModelError::Value(render(e)))?;
                    let (tw, tr) = parse_bv_atom(t).ok_or_else(|| ModelError::Value(render(e)))?;
                    let format = FPFormat { ebits: ew, sbits: tw + 1 };
                    let bits = (sign << (ew + tw)) | (exp << tw) | tr;
                    Ok(Value::Fp(MiniFloat::from_bits(format, bits)))
                }
                // (_ +zero 5 11), (_ -oo 8 24), (_ NaN 5 11), (_ bv42 8)
                [Some("_"), Some(kind), Some(a), rest @ ..] => {
                    if let Some(n) = kind.strip_prefix("bv") {
                        let width: u32 = a.parse().map_err(|_| ModelError::Value(render(e)))?;
                        let bits: u64 = n.parse().map_err(|_| ModelError::Value(render(e)))?;
                        return Ok(Value::Int { width, bits });
                    }
                    let ebits: u32 = a.parse().map_err(|_| ModelError::Value(render(e)))?;
                    let sbits: u32 = rest
                        .first()
                        .copied()
                        .flatten()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| ModelError::Value(render(e)))?;
                    let f = FPFormat { ebits, sbits };
                    let v = match *kind {
                        "+zero" => MiniFloat::pos_zero(f),
                        "-zero" => MiniFloat::neg_zero(f),
                        "+oo" => MiniFloat::infinity(f, false),
                        "-oo" => MiniFloat::infinity(f, true),
                        "NaN" => MiniFloat::nan(f),
                        _ => return Err(ModelError::Value(render(e))),
                    };
                    Ok(Value::Fp(v))
                }
                _ => Err(ModelError::Value(render(e))),
            }
        }
    }
}

/// Extract variable values from the `(define-fun name () sort value)`
/// entries of a `get-model` answer. Only zero-arity definitions are
/// considered; anything unparseable is skipped so that auxiliary model
/// content never aborts a verdict.
pub fn parse_model(text: &str) -> Result<Env, ModelError> {
    let mut env: Env = BTreeMap::new();
    for top in parse_sexprs(text)? {
        let SExpr::List(items) = top else { continue };
        // a model prints either as (model (define-fun ..) ..), as a bare
        // list of definitions, or we may see a lone (define-fun ..)
        match items.first().and_then(|i| i.atom()) {
            Some("model") => {
                for def in &items[1..] {
                    collect_def(def, &mut env);
                }
            }
            Some("define-fun") => collect_def(&SExpr::List(items.clone()), &mut env),
            _ => {
                for def in &items {
                    collect_def(def, &mut env);
                }
            }
        }
    }
    Ok(env)
}

fn collect_def(def: &SExpr, env: &mut Env) {
    let SExpr::List(parts) = def else { return };
    if parts.len() != 5 || parts[0].atom() != Some("define-fun") {
        return;
    }
    let Some(name) = parts[1].atom() else { return };
    if parts[2] != SExpr::List(vec![]) {
        return; // not zero-arity
    }
    if let Ok(v) = parse_value(&parts[4]) {
        env.insert(name.to_string(), v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fp_triple() {
        let es = parse_sexprs("(fp #b1 #b01111 #b0000000000)").unwrap();
        let v = parse_value(&es[0]).unwrap();
        match v {
            Value::Fp(m) => {
                assert_eq!(m.format, FPFormat::HALF);
                assert_eq!(m.to_decimal_string(), "-1.0");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn parses_specials() {
        for (text, check) in [
            ("(_ -zero 5 11)", "-0.0"),
            ("(_ +oo 5 11)", "inf"),
            ("(_ NaN 5 11)", "nan"),
        ] {
            let es = parse_sexprs(text).unwrap();
            let Value::Fp(m) = parse_value(&es[0]).unwrap() else { panic!() };
            assert_eq!(m.to_decimal_string(), check);
        }
    }

    #[test]
    fn parses_bitvectors() {
        let es = parse_sexprs("#x2a (_ bv42 8) #b00101010").unwrap();
        for e in &es {
            assert_eq!(parse_value(e).unwrap(), Value::Int { width: 8, bits: 42 });
        }
    }

    #[test]
    fn parses_full_model() {
        let text = "sat\n(\n  (define-fun %x () (_ FloatingPoint 5 11) (_ -zero 5 11))\n  (define-fun C () (_ BitVec 8) #x10)\n)\n";
        let env = parse_model(text).unwrap();
        assert_eq!(env.len(), 2);
        assert_eq!(env["C"], Value::Int { width: 8, bits: 16 });
        assert!(matches!(env["%x"], Value::Fp(m) if m.is_zero() && m.is_negative()));
    }

    #[test]
    fn quoted_symbols_unquote() {
        let text = "((define-fun |%x.y| () Bool true))";
        let env = parse_model(text).unwrap();
        assert_eq!(env["%x.y"], Value::Int { width: 1, bits: 1 });
    }
}
