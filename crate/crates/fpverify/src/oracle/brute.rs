//! Brute-force verification over tiny domains, and replay of solver
//! counterexamples. Both walk every relevant environment with the
//! reference interpreter; no solver involved.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dsl::{CondCode, Transform};
use crate::fpsem::encode::{fresh_inventory, EncodeError};
use crate::fpsem::term::Sort;
use crate::oracle::interp::{values_agree, Env, Interp, InterpError, Value};
use crate::oracle::minifloat::MiniFloat;
use crate::typer::{Ty, TypeAssignment};

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum BruteError {
    #[error("search space of {0} environments exceeds the budget")]
    BudgetExceeded(u128),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteVerdict {
    Valid,
    /// Values for the inputs and constants on which no choice of
    /// source-side fresh values matches the target.
    Invalid { witness: Env },
}

fn sort_to_ty(s: Sort) -> Ty {
    match s {
        Sort::Fp(f) => Ty::Fp(f),
        Sort::BitVec(w) => Ty::Int(w),
        Sort::Bool => Ty::Int(1),
    }
}

fn domain_size(ty: Ty) -> u128 {
    match ty {
        Ty::Fp(f) => 1u128 << f.total_bits(),
        Ty::Int(w) => 1u128 << w,
    }
}

fn value_at(ty: Ty, index: u64) -> Value {
    match ty {
        Ty::Fp(f) => Value::Fp(MiniFloat::from_bits(f, index)),
        Ty::Int(w) => Value::Int { width: w, bits: index },
    }
}

/// Iterate all assignments of the given typed variables, calling `f`
/// until it returns `Some`.
fn search<R>(
    vars: &[(String, Ty)],
    env: &mut Env,
    mut f: impl FnMut(&mut Env) -> Result<Option<R>, BruteError>,
) -> Result<Option<R>, BruteError> {
    let sizes: Vec<u64> = vars.iter().map(|(_, ty)| domain_size(*ty) as u64).collect();
    let mut idx = vec![0u64; vars.len()];
    loop {
        for (i, (name, ty)) in vars.iter().enumerate() {
            env.insert(name.clone(), value_at(*ty, idx[i]));
        }
        if let Some(r) = f(env)? {
            return Ok(Some(r));
        }
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sizes[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The typed free and universal variables of an instance: inputs and
/// constants (free), target-side fresh values (free), source-side fresh
/// values (universal).
pub fn variable_inventory(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &BTreeMap<String, CondCode>,
) -> Result<(Vec<(String, Ty)>, Vec<(String, Ty)>), BruteError> {
    let mut free: Vec<(String, Ty)> = Vec::new();
    for name in t.inputs().into_iter().chain(t.const_symbols()) {
        let ty = ta
            .get(&name)
            .ok_or_else(|| InterpError::MissingType(name.clone()))?;
        free.push((name, ty));
    }
    let (universal, existential) = fresh_inventory(t, ta, cca)?;
    for (name, sort) in existential {
        free.push((name, sort_to_ty(sort)));
    }
    let universal = universal
        .into_iter()
        .map(|(n, s)| (n, sort_to_ty(s)))
        .collect();
    Ok((free, universal))
}

/// Exhaustively verify one typed instance. `Valid` means: for every
/// assignment of inputs, constants and target-side fresh values that
/// satisfies the precondition, some assignment of source-side fresh
/// values makes source and target agree.
pub fn brute_force_verify(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &BTreeMap<String, CondCode>,
    budget: u64,
) -> Result<BruteVerdict, BruteError> {
    let (free, universal) = variable_inventory(t, ta, cca)?;
    let free_total: u128 = free.iter().map(|(_, ty)| domain_size(*ty)).product();
    let uni_total: u128 = universal.iter().map(|(_, ty)| domain_size(*ty)).product();
    let cost = free_total.saturating_mul(uni_total.max(1));
    if cost > budget as u128 {
        return Err(BruteError::BudgetExceeded(cost));
    }
    let nsz = t.root_has_nsz();

    let mut env = Env::new();
    let found = search(&free, &mut env, |env| {
        if !Interp::new(t, ta, cca, env).precondition()? {
            return Ok(None);
        }
        let agreeing = search(&universal.clone(), env, |env| {
            let (s, g) = Interp::new(t, ta, cca, env).run()?;
            Ok(values_agree(&s, &g, nsz).then_some(()))
        })?;
        if agreeing.is_some() {
            return Ok(None);
        }
        // strip universal names from the reported witness
        let mut witness = env.clone();
        for (n, _) in &universal {
            witness.remove(n);
        }
        Ok(Some(witness))
    })?;
    Ok(match found {
        Some(witness) => BruteVerdict::Invalid { witness },
        None => BruteVerdict::Valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayStatus {
    /// The oracle agrees this environment is a counterexample.
    Confirmed,
    /// Like `Confirmed`, but universally quantified values were only
    /// sampled, not searched exhaustively.
    ConfirmedSampled,
    /// The oracle disagrees: the precondition fails, or some choice of
    /// source-side fresh values reconciles the two sides.
    Refuted,
}

impl ReplayStatus {
    pub fn confirmed(self) -> bool {
        matches!(self, ReplayStatus::Confirmed | ReplayStatus::ConfirmedSampled)
    }

    pub fn label(self) -> &'static str {
        match self {
            ReplayStatus::Confirmed => "confirmed",
            ReplayStatus::ConfirmedSampled => "confirmed (sampled)",
            ReplayStatus::Refuted => "refuted",
        }
    }
}

/// Distinguished values to probe when a universal domain is too large
/// to walk: zeros, ones, extremes, specials.
fn special_values(ty: Ty) -> Vec<Value> {
    match ty {
        Ty::Fp(f) => {
            let mut out = vec![
                MiniFloat::pos_zero(f),
                MiniFloat::neg_zero(f),
                MiniFloat::nan(f),
                MiniFloat::infinity(f, false),
                MiniFloat::infinity(f, true),
                MiniFloat::max_finite(f, false),
                MiniFloat::max_finite(f, true),
                MiniFloat::from_bits(f, 1), // smallest subnormal
            ];
            for v in [1.0f64, -1.0, 2.0, -2.0, 0.5, -0.5, 1.5, -1.5] {
                let q = num_rational::BigRational::from_float(v).unwrap();
                out.push(crate::oracle::minifloat::from_rational(f, &q, v < 0.0));
            }
            out.into_iter().map(Value::Fp).collect()
        }
        Ty::Int(w) => {
            let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
            let mut bits = vec![0u64, 1, mask, 1u64 << (w - 1), (1u64 << (w - 1)) - 1, 2 & mask];
            bits.dedup();
            bits.into_iter().map(|b| Value::Int { width: w, bits: b & mask }).collect()
        }
    }
}

/// Check a solver counterexample against the oracle. `model` binds the
/// query's free variables; missing irrelevant variables default to zero.
pub fn replay_counterexample(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &BTreeMap<String, CondCode>,
    model: &Env,
    budget: u64,
) -> Result<ReplayStatus, BruteError> {
    let (free, universal) = variable_inventory(t, ta, cca)?;
    let mut env = Env::new();
    for (name, ty) in &free {
        let v = model.get(name).copied().unwrap_or_else(|| value_at(*ty, 0));
        env.insert(name.clone(), v);
    }
    // fill universal slots so the precondition can evaluate if it
    // (unusually) depends on them
    for (name, ty) in &universal {
        env.insert(name.clone(), value_at(*ty, 0));
    }
    if !Interp::new(t, ta, cca, &env).precondition()? {
        return Ok(ReplayStatus::Refuted);
    }
    let nsz = t.root_has_nsz();
    let uni_total: u128 = universal.iter().map(|(_, ty)| domain_size(*ty)).product();

    if universal.is_empty() || uni_total <= budget as u128 {
        let agree = search(&universal, &mut env, |env| {
            let (s, g) = Interp::new(t, ta, cca, env).run()?;
            Ok(values_agree(&s, &g, nsz).then_some(()))
        })?;
        Ok(if agree.is_some() { ReplayStatus::Refuted } else { ReplayStatus::Confirmed })
    } else {
        // sample the cross product of special values
        let samples: Vec<Vec<Value>> = universal.iter().map(|(_, ty)| special_values(*ty)).collect();
        let mut idx = vec![0usize; universal.len()];
        loop {
            for (i, (name, _)) in universal.iter().enumerate() {
                env.insert(name.clone(), samples[i][idx[i]]);
            }
            let (s, g) = Interp::new(t, ta, cca, &env).run()?;
            if values_agree(&s, &g, nsz) {
                return Ok(ReplayStatus::Refuted);
            }
            let mut pos = universal.len();
            loop {
                if pos == 0 {
                    return Ok(ReplayStatus::ConfirmedSampled);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < samples[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_corpus;
    use crate::typer::{enumerate_assignments, gen_constraints, WidthConfig};

    fn instance(text: &str) -> (Transform, TypeAssignment) {
        let t = parse_corpus(text).unwrap().remove(0);
        let c = gen_constraints(&t).unwrap();
        let mut asn = enumerate_assignments(&c, &WidthConfig::tiny());
        assert!(!asn.is_empty());
        (t, asn.remove(0))
    }

    fn verify(text: &str) -> BruteVerdict {
        let (t, ta) = instance(text);
        brute_force_verify(&t, &ta, &BTreeMap::new(), DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn commutativity_is_valid() {
        assert_eq!(verify("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n"), BruteVerdict::Valid);
    }

    #[test]
    fn spurious_identity_is_invalid() {
        // x + 0.0 = x fails at x = -0.0
        match verify("%r = fadd %x, 0.0\n=>\n%r = %x\n") {
            BruteVerdict::Invalid { witness } => {
                let x = witness["%x"];
                assert!(x.as_fp().unwrap().is_zero());
                assert!(x.as_fp().unwrap().is_negative());
            }
            v => panic!("expected invalid, got {v:?}"),
        }
    }

    #[test]
    fn undef_decomposes_only_one_way() {
        // source undef can always match a fixed target value
        assert_eq!(verify("%r = fmul undef, %x\n=>\n%r = fmul 0.0, %x\n"), BruteVerdict::Valid);
    }

    #[test]
    fn target_undef_cannot_match_every_source() {
        match verify("%r = fadd %x, %x\n=>\n%r = undef\n") {
            BruteVerdict::Invalid { .. } => {}
            v => panic!("expected invalid, got {v:?}"),
        }
    }

    #[test]
    fn replay_confirms_brute_witness() {
        let (t, ta) = instance("%r = fadd %x, 0.0\n=>\n%r = %x\n");
        let cca = BTreeMap::new();
        let BruteVerdict::Invalid { witness } = brute_force_verify(&t, &ta, &cca, DEFAULT_BUDGET).unwrap()
        else {
            panic!("expected invalid");
        };
        let status = replay_counterexample(&t, &ta, &cca, &witness, DEFAULT_BUDGET).unwrap();
        assert!(status.confirmed());
    }

    #[test]
    fn replay_refutes_non_counterexample() {
        let (t, ta) = instance("%r = fadd %x, 0.0\n=>\n%r = %x\n");
        let cca = BTreeMap::new();
        let mut env = Env::new();
        // +1.0 is not a counterexample for x+0 => x
        let one = crate::oracle::minifloat::from_rational(
            crate::typer::FPFormat::FP8,
            &num_rational::BigRational::from_integer(1.into()),
            false,
        );
        env.insert("%x".into(), Value::Fp(one));
        let status = replay_counterexample(&t, &ta, &cca, &env, DEFAULT_BUDGET).unwrap();
        assert_eq!(status, ReplayStatus::Refuted);
    }
}
