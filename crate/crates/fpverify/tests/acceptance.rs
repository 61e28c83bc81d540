//! End-to-end acceptance checks. Each test prints a single pass/fail
//! line for its criterion; a failed assertion prints `fail` first.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;

use fpverify::differential::{check_pairs, exhaustive_pairs, sampled_pairs, DiffOp};
use fpverify::driver::{
    render, verify_file, verify_text, Format, Report, TransformStatus, Verdict, VerifyConfig,
};
use fpverify::dsl::{parse_corpus, pretty_print, CondCode, Opcode};
use fpverify::oracle::minifloat::{all_values, mf_cmp};
use fpverify::oracle::MiniFloat;
use fpverify::smt::SolverConfig;
use fpverify::typer::{FPFormat, WidthConfig};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn config(fp: &[FPFormat], ints: &[u32]) -> VerifyConfig {
    let solver = SolverConfig::resolve(None).expect("no solver available");
    let mut cfg = VerifyConfig::new(solver);
    cfg.widths = WidthConfig { fp_formats: fp.to_vec(), int_widths: ints.to_vec() };
    cfg
}

struct Criterion {
    line: &'static str,
    start: Instant,
}

impl Criterion {
    fn new(line: &'static str) -> Criterion {
        Criterion { line, start: Instant::now() }
    }

    fn check(&self, ok: bool, what: &str) {
        if !ok {
            println!("{}: fail ({what})", self.line);
            panic!("{}: {what}", self.line);
        }
    }

    fn within(&self, limit: Duration) {
        let elapsed = self.start.elapsed();
        self.check(
            elapsed <= limit,
            &format!("took {elapsed:?}, limit {limit:?}"),
        );
    }

    fn pass(&self) {
        println!("{}: pass ({:?})", self.line, self.start.elapsed());
    }
}

#[test]
fn criterion_1_bug_reconstructions() {
    let c = Criterion::new("criterion 1 (bug reconstructions invalid with confirmed replays)");
    let cfg = config(&[FPFormat::HALF], &[16]);
    for name in ["pr26746.opt", "pr26958.opt", "pr26943.opt", "pr27036.opt"] {
        let fr = verify_file(&corpus(name), &cfg);
        c.check(fr.parse_errors.is_empty(), &format!("{name} has parse errors"));
        for tr in &fr.transforms {
            c.check(
                tr.status == TransformStatus::Invalid,
                &format!("{} is {:?}, expected Invalid", tr.name, tr.status),
            );
            for inst in tr.instances.iter().filter(|i| i.verdict == Verdict::Invalid) {
                let cex = inst.counterexample.as_ref();
                c.check(cex.is_some(), &format!("{} has no counterexample", tr.name));
                let cex = cex.unwrap();
                c.check(
                    cex.replay.starts_with("confirmed"),
                    &format!("{} replay is `{}`", tr.name, cex.replay),
                );
                match tr.name.as_str() {
                    "PR26746" => c.check(
                        cex.values.get("%x").is_some_and(|v| v.starts_with("-0.0")),
                        &format!("PR26746 witness {:?} is not -0.0", cex.values),
                    ),
                    "PR26958" => c.check(
                        cex.values.values().any(|v| v.contains("nan") || v.contains("inf")),
                        &format!("PR26958 witness {:?} has no nan/inf", cex.values),
                    ),
                    _ => {}
                }
            }
        }
    }
    c.within(Duration::from_secs(300));
    c.pass();
}

#[test]
fn criterion_2_undef_pair() {
    let c = Criterion::new("criterion 2 (undef rule invalid, corrected variant valid)");
    let cfg = config(&[FPFormat::FP8], &[8]);
    let fr = verify_file(&corpus("undef.opt"), &cfg);
    c.check(fr.parse_errors.is_empty(), "undef.opt has parse errors");
    c.check(fr.transforms.len() == 2, "expected two transforms");
    c.check(
        fr.transforms[0].status == TransformStatus::Invalid,
        &format!("{} is {:?}", fr.transforms[0].name, fr.transforms[0].status),
    );
    c.check(
        fr.transforms[1].status == TransformStatus::Verified,
        &format!("{} is {:?}", fr.transforms[1].name, fr.transforms[1].status),
    );
    c.pass();
}

#[test]
fn criterion_3_nsz_differential() {
    let c = Criterion::new("criterion 3 (nsz flips fadd-anyzero from invalid to valid)");
    let cfg = config(&[FPFormat::HALF, FPFormat::SINGLE, FPFormat::DOUBLE], &[8, 16, 32, 64]);
    let fr = verify_file(&corpus("nsz.opt"), &cfg);
    c.check(fr.parse_errors.is_empty(), "nsz.opt has parse errors");
    let without = &fr.transforms[0];
    let with = &fr.transforms[1];
    c.check(
        without.status == TransformStatus::Invalid,
        &format!("{} is {:?}", without.name, without.status),
    );
    for inst in &without.instances {
        c.check(inst.verdict == Verdict::Invalid, "instance not invalid without nsz");
        let cex = inst.counterexample.as_ref().expect("counterexample");
        c.check(
            cex.values.values().any(|v| v.contains("0.0")),
            &format!("no signed-zero witness in {:?}", cex.values),
        );
    }
    c.check(
        with.status == TransformStatus::Verified,
        &format!("{} is {:?}", with.name, with.status),
    );
    c.check(with.instances.len() == 3, "expected one instance per width");
    c.within(Duration::from_secs(60));
    c.pass();
}

#[test]
fn criterion_4_oracle_solver_equivalence() {
    let c = Criterion::new("criterion 4 (oracle and solver agree on every fp8 verdict)");
    let mut cfg = config(&[FPFormat::FP8], &[8]);
    cfg.brute_force = true;
    let fr = verify_file(&corpus("precise.opt"), &cfg);
    c.check(fr.parse_errors.is_empty(), "precise.opt has parse errors");
    c.check(
        fr.transforms.len() >= 20,
        &format!("only {} transforms", fr.transforms.len()),
    );
    for tr in &fr.transforms {
        c.check(
            tr.status != TransformStatus::Error,
            &format!("{}: {:?}", tr.name, tr.error),
        );
        for inst in &tr.instances {
            c.check(
                inst.verdict != Verdict::SolverFailed,
                &format!("{}: oracle/solver disagreement: {:?}", tr.name, inst.note),
            );
            c.check(
                inst.note.as_deref() != Some("brute force skipped: domain too large"),
                &format!("{}: instance skipped the oracle cross-check", tr.name),
            );
        }
    }
    c.within(Duration::from_secs(600));
    c.pass();
}

#[test]
fn criterion_5_encoding_differential() {
    let c = Criterion::new("criterion 5 (encoding matches the oracle on fp8 operand pairs)");
    let solver = SolverConfig::resolve(None).expect("no solver available");
    let all = exhaustive_pairs(FPFormat::FP8);
    c.check(all.len() == 65536, "expected 65536 exhaustive pairs");
    for op in [Opcode::Fadd, Opcode::Frem] {
        let mism = check_pairs(&solver, DiffOp::Binop(op), &all).expect("solver run");
        c.check(mism.is_empty(), &format!("{}: {} mismatches", op.name(), mism.len()));
    }
    let sampled = sampled_pairs(FPFormat::FP8, 2000, 0x5eed);
    for op in [
        DiffOp::Binop(Opcode::Fsub),
        DiffOp::Binop(Opcode::Fmul),
        DiffOp::Binop(Opcode::Fdiv),
        DiffOp::Fabs,
    ] {
        let mism = check_pairs(&solver, op, &sampled).expect("solver run");
        c.check(mism.is_empty(), &format!("{}: {} mismatches", op.label(), mism.len()));
    }
    c.pass();
}

/// The comparison a condition code denotes, computed independently on
/// host doubles (exact for fp8 values).
fn reference_cmp(cc: CondCode, a: f64, b: f64) -> bool {
    use CondCode::*;
    match cc {
        Oeq => a == b,
        Ogt => a > b,
        Oge => a >= b,
        Olt => a < b,
        Ole => a <= b,
        One => a != b && !a.is_nan() && !b.is_nan(),
        Ord => !a.is_nan() && !b.is_nan(),
        Ueq => a == b || a.is_nan() || b.is_nan(),
        Ugt => !(a <= b),
        Uge => !(a < b),
        Ult => !(a >= b),
        Ule => !(a > b),
        Une => a != b,
        Uno => a.is_nan() || b.is_nan(),
    }
}

fn to_f64(m: &MiniFloat) -> f64 {
    if m.is_nan() {
        f64::NAN
    } else if m.is_infinite() {
        if m.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }
    } else {
        let v = m.value().unwrap().to_f64().unwrap();
        if m.is_zero() && m.is_negative() { -0.0 } else { v }
    }
}

#[test]
fn criterion_6_fcmp_table() {
    let c = Criterion::new("criterion 6 (all 14 fcmp codes match the ordered/unordered definitions)");
    let values: Vec<(MiniFloat, f64)> = all_values(FPFormat::FP8).map(|v| (v, to_f64(&v))).collect();
    for cc in CondCode::ALL {
        for (a, fa) in &values {
            for (b, fb) in &values {
                let got = mf_cmp(cc, a, b);
                let want = reference_cmp(cc, *fa, *fb);
                c.check(
                    got == want,
                    &format!("{} {} {} = {got}, expected {want}", cc.name(), a.to_decimal_string(), b.to_decimal_string()),
                );
            }
        }
    }
    let nan = MiniFloat::nan(FPFormat::FP8);
    let pz = MiniFloat::pos_zero(FPFormat::FP8);
    let nz = MiniFloat::neg_zero(FPFormat::FP8);
    c.check(!mf_cmp(CondCode::Oeq, &nan, &nan), "oeq(nan, nan) should be false");
    c.check(
        values.iter().all(|(x, _)| mf_cmp(CondCode::Uno, &nan, x)),
        "uno(nan, x) should be true for every x",
    );
    c.check(mf_cmp(CondCode::Oeq, &nz, &pz), "oeq(-0.0, +0.0) should be true");

    // the SMT encoding of fcmp agrees with the oracle on the same pairs
    let solver = SolverConfig::resolve(None).expect("no solver available");
    let sampled = sampled_pairs(FPFormat::FP8, 2000, 0xfc3b);
    for cc in CondCode::ALL {
        let mism = check_pairs(&solver, DiffOp::Fcmp(cc), &sampled).expect("solver run");
        c.check(mism.is_empty(), &format!("fcmp {}: {} mismatches", cc.name(), mism.len()));
    }
    c.pass();
}

#[test]
fn criterion_7_timeout_handling() {
    let c = Criterion::new("criterion 7 (sleeping solver yields timeout and an unverified transform)");
    let dir = tempfile::tempdir().unwrap();
    let stub = dir.path().join("stuck.sh");
    std::fs::write(&stub, "#!/bin/sh\nsleep 30\n").unwrap();
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&stub, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    let mut cfg = config(&[FPFormat::HALF], &[16]);
    cfg.solver = SolverConfig::new(vec![stub.display().to_string()]);
    cfg.solver.timeout = Duration::from_secs(2);

    let start = Instant::now();
    let fr = verify_text("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n", &cfg);
    let elapsed = start.elapsed();
    let tr = &fr.transforms[0];
    c.check(
        tr.status == TransformStatus::Unverified,
        &format!("status is {:?}, expected Unverified", tr.status),
    );
    c.check(
        tr.instances.iter().all(|i| i.verdict == Verdict::Timeout),
        "instance verdict is not Timeout",
    );
    c.check(
        elapsed <= Duration::from_secs(3),
        &format!("took {elapsed:?}, limit timeout + 1s"),
    );
    c.pass();
}

#[test]
fn criterion_8_round_trips_and_exit_codes() {
    let c = Criterion::new("criterion 8 (parser/report round-trips and exit-code contract)");
    // parse -> print -> parse is structurally the identity on the corpus
    for name in [
        "pr26746.opt",
        "pr26958.opt",
        "pr26943.opt",
        "pr27036.opt",
        "undef.opt",
        "nsz.opt",
        "precise.opt",
    ] {
        let text = std::fs::read_to_string(corpus(name)).unwrap();
        let parsed = parse_corpus(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        for t in &parsed {
            let printed = pretty_print(t);
            let again = parse_corpus(&printed)
                .unwrap_or_else(|e| panic!("{name}: reparse failed: {e}\n{printed}"));
            c.check(again.len() == 1 && &again[0] == t, &format!("{name}: round trip changed `{}`", t.name));
        }
    }

    // a report survives JSON render -> parse
    let cfg = config(&[FPFormat::FP8], &[8]);
    let fr = verify_file(&corpus("nsz.opt"), &cfg);
    let report = Report {
        schema_version: fpverify::driver::SCHEMA_VERSION,
        totals: fr.counts,
        files: vec![fr],
    };
    let json = render(&report, Format::Json);
    let back: Report = serde_json::from_str(&json).expect("report JSON parses");
    c.check(back == report, "JSON report round trip changed the report");

    // exit codes: 1 with an invalid transform, 0 without, 3 on parse errors
    c.check(report.exit_code() == 1, "corpus with an invalid transform should exit 1");
    let clean = verify_text("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n", &cfg);
    let clean = Report { schema_version: 1, totals: clean.counts, files: vec![clean] };
    c.check(clean.exit_code() == 0, "all-verified corpus should exit 0");
    let broken = verify_text("%r = bogus %x\n=>\n%r = %x\n", &cfg);
    let broken = Report { schema_version: 1, totals: broken.counts, files: vec![broken] };
    c.check(broken.exit_code() == 3, "parse failure should exit 3");
    c.pass();
}
