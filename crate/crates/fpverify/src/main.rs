use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use fpverify::driver::{render, verify_files, Format, VerifyConfig};
use fpverify::smt::SolverConfig;
use fpverify::typer::{FPFormat, WidthConfig};

#[derive(Parser)]
#[command(name = "fpverify", about = "Verify precise floating-point peephole optimizations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify every transform in the given specification files.
    Verify {
        /// Specification files (one or more).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Per-query solver timeout in seconds.
        #[arg(long, default_value_t = 300)]
        timeout: u64,
        /// Solver command; the script path is appended as the last
        /// argument. Defaults to $FPVERIFY_SOLVER, then z3 on PATH,
        /// then the bundled tools/z3smt.js shim.
        #[arg(long)]
        solver: Option<String>,
        /// Floating-point widths to enumerate, comma separated
        /// (half,single,double,fp8). Prefix with + to extend the
        /// default set, e.g. +fp8.
        #[arg(long)]
        fp_widths: Option<String>,
        /// Integer widths to enumerate, comma separated, e.g. 8,16,32,64.
        #[arg(long)]
        int_widths: Option<String>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
        /// Cross-check solver verdicts against the exhaustive oracle
        /// where the domains are small enough.
        #[arg(long)]
        brute_force: bool,
        /// Write each generated SMT-LIB script into this directory.
        #[arg(long)]
        dump_smt: Option<PathBuf>,
    },
}

fn parse_fp_widths(spec: &str) -> Result<Vec<FPFormat>, String> {
    let (extend, body) = match spec.strip_prefix('+') {
        Some(rest) => (true, rest),
        None => (false, spec),
    };
    let mut formats = if extend { WidthConfig::default().fp_formats } else { Vec::new() };
    for name in body.split(',').filter(|s| !s.is_empty()) {
        let f = FPFormat::from_name(name.trim()).ok_or_else(|| format!("unknown format `{name}`"))?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    if formats.is_empty() {
        return Err("no floating-point widths given".into());
    }
    Ok(formats)
}

fn parse_int_widths(spec: &str) -> Result<Vec<u32>, String> {
    let mut widths = Vec::new();
    for w in spec.split(',').filter(|s| !s.is_empty()) {
        let w: u32 = w.trim().parse().map_err(|_| format!("bad integer width `{w}`"))?;
        if w == 0 || w > 64 {
            return Err(format!("integer width {w} out of range (1..=64)"));
        }
        if !widths.contains(&w) {
            widths.push(w);
        }
    }
    Ok(widths)
}

fn main() {
    let cli = Cli::parse();
    let Cmd::Verify { files, timeout, solver, fp_widths, int_widths, format, brute_force, dump_smt } =
        cli.command;

    let mut solver_cfg = match SolverConfig::resolve(solver.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    };
    solver_cfg.timeout = Duration::from_secs(timeout);

    let mut widths = WidthConfig::default();
    if let Some(spec) = fp_widths.as_deref() {
        match parse_fp_widths(spec) {
            Ok(f) => widths.fp_formats = f,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(3);
            }
        }
    }
    if let Some(spec) = int_widths.as_deref() {
        match parse_int_widths(spec) {
            Ok(w) if !w.is_empty() => widths.int_widths = w,
            Ok(_) => {
                eprintln!("error: no integer widths given");
                std::process::exit(3);
            }
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(3);
            }
        }
    }

    let mut cfg = VerifyConfig::new(solver_cfg);
    cfg.widths = widths;
    cfg.brute_force = brute_force;
    cfg.dump_dir = dump_smt;

    let report = verify_files(&files, &cfg);
    let out = match format {
        OutFormat::Text => render(&report, Format::Text),
        OutFormat::Json => render(&report, Format::Json),
    };
    print!("{out}");
    std::process::exit(report.exit_code());
}
