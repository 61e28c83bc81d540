//! Precondition predicates: the registry, SMT encoding, and enumeration
//! of symbolic condition codes.
//!
//! Predicates over condition codes (`ordered`, `unordered`, `swap`) are
//! resolved by enumeration before encoding, so they contribute nothing
//! to the query itself. `hasOneUse` is a profitability hint with no
//! semantic content and encodes as true.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dsl::{CondCode, ConstExpr, PredExpr, Transform};
use crate::fpsem::encode::{EncodeCtx, EncodeError};
use crate::fpsem::term::{self, Sort, Term};

/// Names usable as predicates, with their arity.
pub fn predicate_arity(name: &str) -> Option<usize> {
    match name {
        "isNormal" | "AnyZero" | "hasOneUse" | "ordered" | "unordered" => Some(1),
        "WillNotOverflowSignedAdd" | "swap" => Some(2),
        _ => None,
    }
}

/// Predicates that constrain symbolic condition codes rather than values.
pub fn is_cc_predicate(name: &str) -> bool {
    matches!(name, "ordered" | "unordered" | "swap")
}

/// Constant functions usable inside precondition expressions.
pub fn is_const_function(name: &str) -> bool {
    matches!(name, "fptosi" | "fptoui" | "sitofp" | "uitofp" | "fpext" | "fptrunc")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrecondError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{0}` expects a condition-code name")]
    ExpectsCc(String),
}

/// Encode a precondition as a boolean term over the instance's values.
pub fn encode_predicate(ctx: &mut EncodeCtx, p: &PredExpr) -> Result<Term, EncodeError> {
    let mut parts = Vec::new();
    for c in p.conjuncts() {
        parts.push(encode_conjunct(ctx, c)?);
    }
    Ok(term::and(parts))
}

fn encode_conjunct(ctx: &mut EncodeCtx, p: &PredExpr) -> Result<Term, EncodeError> {
    match p {
        PredExpr::True | PredExpr::And(_) => unreachable!("conjuncts() flattens"),
        PredExpr::Pred { name, args } => match name.as_str() {
            // resolved during condition-code enumeration
            "ordered" | "unordered" | "swap" => Ok(Term::bool_lit(true)),
            // profitability hint, not a semantic constraint
            "hasOneUse" => Ok(Term::bool_lit(true)),
            "isNormal" => {
                let a = ctx.const_expr_term(&args[0], None)?;
                Ok(term::is_normal(a))
            }
            "AnyZero" => {
                let a = ctx.const_expr_term(&args[0], None)?;
                Ok(term::is_zero(a))
            }
            "WillNotOverflowSignedAdd" => {
                let a = ctx.const_expr_term(&args[0], None)?;
                let b = ctx.const_expr_term(&args[1], None)?;
                let w = match a.sort() {
                    Sort::BitVec(w) => w,
                    s => return Err(EncodeError::Unsupported(format!("WillNotOverflowSignedAdd over {s}"))),
                };
                // sign-extend one bit; the sum overflows w bits exactly
                // when its top two bits differ
                let sum = term::bv_add(term::sign_extend(1, a), term::sign_extend(1, b));
                Ok(term::eq(
                    term::extract(w, w, sum.clone()),
                    term::extract(w - 1, w - 1, sum),
                ))
            }
            other => Err(EncodeError::Unsupported(format!("predicate `{other}`"))),
        },
        PredExpr::Eq(a, b) => {
            let sa = ctx.const_expr_sort(a);
            let sb = ctx.const_expr_sort(b);
            if sa.is_none() && sb.is_none() {
                return Err(EncodeError::Unsupported(
                    "equality between two expressions of undetermined type".into(),
                ));
            }
            let ta = ctx.const_expr_term(a, sb)?;
            let tb = ctx.const_expr_term(b, Some(ta.sort()))?;
            Ok(term::eq(ta, tb))
        }
    }
}

/// One resolution of the symbolic condition codes of a transform.
pub type CcAssignment = BTreeMap<String, CondCode>;

/// Enumerate assignments of concrete codes to the symbolic condition
/// codes, filtered by the cc predicates in the precondition. A transform
/// without symbolic codes yields the single empty assignment.
pub fn enumerate_cc(t: &Transform) -> Result<Vec<CcAssignment>, PrecondError> {
    let syms = t.symbolic_ccs();
    if syms.is_empty() {
        return Ok(vec![CcAssignment::new()]);
    }

    // collect the constraints mentioning each symbol
    let mut constraints: Vec<(String, Vec<String>)> = Vec::new();
    for p in t.precondition.conjuncts() {
        if let PredExpr::Pred { name, args } = p {
            if is_cc_predicate(name) {
                let mut arg_names = Vec::new();
                for a in args {
                    match a {
                        ConstExpr::Sym(s) => arg_names.push(s.clone()),
                        _ => return Err(PrecondError::ExpectsCc(name.clone())),
                    }
                }
                constraints.push((name.clone(), arg_names));
            }
        }
    }

    let mut out = Vec::new();
    let mut choice = vec![0usize; syms.len()];
    'outer: loop {
        let asn: CcAssignment = syms
            .iter()
            .zip(&choice)
            .map(|(s, &i)| (s.clone(), CondCode::ALL[i]))
            .collect();
        let ok = constraints.iter().all(|(name, args)| {
            let get = |i: usize| asn.get(&args[i]).copied();
            match (name.as_str(), args.len()) {
                ("ordered", 1) => get(0).map_or(true, |c| c.is_ordered()),
                ("unordered", 1) => get(0).map_or(true, |c| !c.is_ordered()),
                ("swap", 2) => match (get(0), get(1)) {
                    (Some(a), Some(b)) => a.swapped() == b,
                    _ => true,
                },
                _ => false,
            }
        });
        if ok {
            out.push(asn);
        }
        for pos in (0..choice.len()).rev() {
            choice[pos] += 1;
            if choice[pos] < CondCode::ALL.len() {
                continue 'outer;
            }
            choice[pos] = 0;
            if pos == 0 {
                break 'outer;
            }
        }
    }
    Ok(out)
}

/// Evaluate a cc predicate on concrete codes; used by the oracle.
pub fn cc_predicate_holds(name: &str, codes: &[CondCode]) -> bool {
    match (name, codes.len()) {
        ("ordered", 1) => codes[0].is_ordered(),
        ("unordered", 1) => !codes[0].is_ordered(),
        ("swap", 2) => codes[0].swapped() == codes[1],
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_corpus;

    fn transform(text: &str) -> Transform {
        parse_corpus(text).unwrap().remove(0)
    }

    #[test]
    fn no_symbolic_codes_single_empty() {
        let t = transform("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n");
        assert_eq!(enumerate_cc(&t).unwrap(), vec![CcAssignment::new()]);
    }

    #[test]
    fn unconstrained_symbol_gets_all_codes() {
        let t = transform("%r = fcmp C1 %x, %y\n=>\n%r = fcmp C1 %x, %y\n");
        assert_eq!(enumerate_cc(&t).unwrap().len(), 14);
    }

    #[test]
    fn ordered_filter() {
        let t = transform("Pre: ordered(C1)\n%r = fcmp C1 %x, %y\n=>\n%r = fcmp C1 %x, %y\n");
        let asns = enumerate_cc(&t).unwrap();
        assert_eq!(asns.len(), 7);
        assert!(asns.iter().all(|a| a["C1"].is_ordered()));
    }

    #[test]
    fn swap_pairs() {
        let t = transform(
            "Pre: swap(C1, C2)\n%r = fcmp C1 %x, %y\n=>\n%r = fcmp C2 %y, %x\n",
        );
        let asns = enumerate_cc(&t).unwrap();
        // every code has exactly one swap partner
        assert_eq!(asns.len(), 14);
        assert!(asns.iter().all(|a| a["C1"].swapped() == a["C2"]));
    }

    #[test]
    fn registry() {
        assert_eq!(predicate_arity("isNormal"), Some(1));
        assert_eq!(predicate_arity("WillNotOverflowSignedAdd"), Some(2));
        assert_eq!(predicate_arity("nope"), None);
        assert!(is_cc_predicate("swap"));
        assert!(!is_cc_predicate("AnyZero"));
        assert!(is_const_function("sitofp"));
    }
}
