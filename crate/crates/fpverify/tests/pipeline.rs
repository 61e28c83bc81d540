//! Pipeline integration: the library API end to end against a real
//! solver, plus parser totality on arbitrary input.

use proptest::prelude::*;

use fpverify::driver::{verify_one, verify_text, TransformStatus, Verdict, VerifyConfig};
use fpverify::dsl::{parse_corpus_blocks, pretty_print};
use fpverify::smt::SolverConfig;
use fpverify::typer::{FPFormat, WidthConfig};

fn fp8_config() -> VerifyConfig {
    let solver = SolverConfig::resolve(None).expect("no solver available");
    let mut cfg = VerifyConfig::new(solver);
    cfg.widths = WidthConfig { fp_formats: vec![FPFormat::FP8], int_widths: vec![8] };
    cfg
}

#[test]
fn valid_transform_verifies() {
    let tr = verify_one("%r = fadd %x, %y\n=>\n%r = fadd %y, %x\n", &fp8_config());
    assert_eq!(tr.status, TransformStatus::Verified);
    assert!(tr.instances.iter().all(|i| i.verdict == Verdict::Valid));
}

#[test]
fn invalid_transform_gets_confirmed_counterexample() {
    let tr = verify_one("%r = fadd %x, 0.0\n=>\n%r = %x\n", &fp8_config());
    assert_eq!(tr.status, TransformStatus::Invalid);
    let cex = tr.instances[0].counterexample.as_ref().expect("counterexample");
    assert!(cex.replay.starts_with("confirmed"), "replay: {}", cex.replay);
    assert!(cex.values["%x"].starts_with("-0.0"), "witness: {:?}", cex.values);
}

#[test]
fn dump_dir_receives_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fp8_config();
    cfg.dump_dir = Some(dir.path().to_path_buf());
    verify_one("Name: dumped\n%r = fmul %x, 1.0\n=>\n%r = %x\n", &cfg);
    let dumped: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(dumped.len(), 1);
    let text = std::fs::read_to_string(dumped[0].as_ref().unwrap().path()).unwrap();
    assert!(text.contains("(check-sat)"));
}

#[test]
fn bad_file_reports_parse_error_not_panic() {
    let fr = verify_text("%r = frobnicate %x\n=>\n%r = %x\n", &fp8_config());
    assert_eq!(fr.parse_errors.len(), 1);
    assert!(fr.transforms.is_empty());
}

proptest! {
    // the parser returns errors, it never panics
    #[test]
    fn parser_is_total(text in ".{0,200}") {
        let _ = parse_corpus_blocks(&text);
    }

    // anything that parses also prints and reparses to the same thing
    #[test]
    fn printed_form_reparses(text in "[%a-z0-9=+.,< >\\-\n]{0,120}") {
        for t in parse_corpus_blocks(&text).into_iter().flatten() {
            let printed = pretty_print(&t);
            let again = parse_corpus_blocks(&printed);
            prop_assert_eq!(again.len(), 1);
            prop_assert_eq!(&t, again[0].as_ref().unwrap());
        }
    }
}
