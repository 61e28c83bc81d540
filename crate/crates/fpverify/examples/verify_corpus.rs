//! Run the full pipeline over corpus files and print the text report.
//! The same thing as the `fpverify verify` binary with defaults, shown
//! as library calls.
//!
//! Usage: cargo run --example verify_corpus -- corpus/nsz.opt

use std::path::PathBuf;

use fpverify::driver::{render, verify_files, Format, VerifyConfig};
use fpverify::smt::SolverConfig;
use fpverify::typer::{FPFormat, WidthConfig};

fn main() {
    let files: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if files.is_empty() {
        eprintln!("usage: verify_corpus <file.opt>...");
        std::process::exit(3);
    }
    let solver = SolverConfig::resolve(None).expect("no solver found");
    let mut cfg = VerifyConfig::new(solver);
    // fp8 keeps the run quick and lets the oracle cross-check everything
    cfg.widths = WidthConfig { fp_formats: vec![FPFormat::FP8], int_widths: vec![8] };
    cfg.brute_force = true;

    let report = verify_files(&files, &cfg);
    print!("{}", render(&report, Format::Text));
    std::process::exit(report.exit_code());
}
