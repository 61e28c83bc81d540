//! The verification pipeline: parse a corpus file, enumerate typed
//! instances of each transform, solve the queries, replay models through
//! the oracle, and render a report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::{parse_corpus_blocks, Transform};
use crate::fpsem::build_query;
use crate::oracle::{self, brute::BruteVerdict, Env};
use crate::precond::{enumerate_cc, CcAssignment};
use crate::smt::{emit, solver, SolverConfig, SolverStatus};
use crate::typer::{enumerate_assignments, gen_constraints, TypeAssignment, WidthConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub widths: WidthConfig,
    pub solver: SolverConfig,
    /// Cross-check every solver verdict against the brute-force oracle
    /// where the search space allows it.
    pub brute_force: bool,
    pub dump_dir: Option<PathBuf>,
    pub replay_budget: u64,
}

impl VerifyConfig {
    pub fn new(solver: SolverConfig) -> VerifyConfig {
        VerifyConfig {
            widths: WidthConfig::default(),
            solver,
            brute_force: false,
            dump_dir: None,
            replay_budget: oracle::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Invalid,
    Timeout,
    Unknown,
    SolverFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformStatus {
    /// Every instance is valid.
    Verified,
    /// At least one instance has a counterexample.
    Invalid,
    /// No counterexample, but some instance timed out or came back
    /// unknown, so the transform is unverified.
    Unverified,
    /// Infrastructure failure: untypeable, encoding error, solver crash.
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Counterexample {
    /// Variable name -> human-readable value (exact decimal + bits).
    pub values: BTreeMap<String, String>,
    /// Oracle replay verdict: confirmed / confirmed (sampled) / refuted.
    pub replay: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceReport {
    /// Type of every register and constant, e.g. `%x` -> `half`.
    pub types: BTreeMap<String, String>,
    /// Resolution of symbolic condition codes, when any.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ccs: BTreeMap<String, String>,
    pub verdict: Verdict,
    /// Whether the query carried a universal quantifier.
    pub quantified: bool,
    pub solve_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransformReport {
    pub name: String,
    pub status: TransformStatus,
    pub instances: Vec<InstanceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub verified: usize,
    pub unverified: usize,
    pub invalid: usize,
    pub errors: usize,
}

impl Counts {
    fn add(&mut self, s: TransformStatus) {
        match s {
            TransformStatus::Verified => self.verified += 1,
            TransformStatus::Unverified => self.unverified += 1,
            TransformStatus::Invalid => self.invalid += 1,
            TransformStatus::Error => self.errors += 1,
        }
    }

    fn merge(&mut self, o: &Counts) {
        self.verified += o.verified;
        self.unverified += o.unverified;
        self.invalid += o.invalid;
        self.errors += o.errors;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileReport {
    pub path: String,
    pub transforms: Vec<TransformReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<String>,
    pub counts: Counts,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub files: Vec<FileReport>,
    pub totals: Counts,
}

impl Report {
    /// Exit code contract: 0 all verified (timeouts absent), 1 some
    /// transform is invalid, 2 timeouts/unknowns only, 3 infrastructure
    /// failure (parse error, solver crash, untypeable transform).
    pub fn exit_code(&self) -> i32 {
        let parse_errors = self.files.iter().any(|f| !f.parse_errors.is_empty());
        if self.totals.errors > 0 || parse_errors {
            3
        } else if self.totals.invalid > 0 {
            1
        } else if self.totals.unverified > 0 {
            2
        } else {
            0
        }
    }
}

/// Verify every file and aggregate a report.
pub fn verify_files(paths: &[PathBuf], cfg: &VerifyConfig) -> Report {
    let mut files = Vec::new();
    let mut totals = Counts::default();
    for p in paths {
        let fr = verify_file(p, cfg);
        totals.merge(&fr.counts);
        files.push(fr);
    }
    Report { schema_version: SCHEMA_VERSION, files, totals }
}

pub fn verify_file(path: &Path, cfg: &VerifyConfig) -> FileReport {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return FileReport {
                path: path.display().to_string(),
                transforms: vec![],
                parse_errors: vec![format!("cannot read {}: {e}", path.display())],
                counts: Counts { errors: 1, ..Counts::default() },
            }
        }
    };
    let mut fr = verify_text(&text, cfg);
    fr.path = path.display().to_string();
    fr
}

/// Verify a corpus given as text (the `path` field is left empty).
pub fn verify_text(text: &str, cfg: &VerifyConfig) -> FileReport {
    let mut transforms = Vec::new();
    let mut parse_errors = Vec::new();
    let mut counts = Counts::default();
    for block in parse_corpus_blocks(text) {
        match block {
            Ok(t) => {
                let tr = verify_transform(&t, cfg);
                counts.add(tr.status);
                transforms.push(tr);
            }
            Err(e) => parse_errors.push(e.to_string()),
        }
    }
    FileReport { path: String::new(), transforms, parse_errors, counts }
}

pub fn verify_transform(t: &Transform, cfg: &VerifyConfig) -> TransformReport {
    let fail = |msg: String| TransformReport {
        name: t.name.clone(),
        status: TransformStatus::Error,
        instances: vec![],
        error: Some(msg),
    };
    let constraints = match gen_constraints(t) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let tas = enumerate_assignments(&constraints, &cfg.widths);
    if tas.is_empty() {
        return fail("no type assignment fits the configured widths".into());
    }
    let ccas = match enumerate_cc(t) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    if ccas.is_empty() {
        return fail("no condition-code assignment satisfies the precondition".into());
    }

    let pairs: Vec<(usize, &TypeAssignment, &CcAssignment)> = tas
        .iter()
        .flat_map(|ta| ccas.iter().map(move |cca| (ta, cca)))
        .enumerate()
        .map(|(i, (ta, cca))| (i, ta, cca))
        .collect();

    let instances: Vec<InstanceReport> = pairs
        .par_iter()
        .map(|(i, ta, cca)| run_instance(t, ta, cca, *i, cfg))
        .collect();

    let status = if instances.iter().any(|i| i.verdict == Verdict::Invalid) {
        TransformStatus::Invalid
    } else if instances.iter().any(|i| i.verdict == Verdict::SolverFailed) {
        TransformStatus::Error
    } else if instances
        .iter()
        .any(|i| matches!(i.verdict, Verdict::Timeout | Verdict::Unknown))
    {
        TransformStatus::Unverified
    } else {
        TransformStatus::Verified
    };
    TransformReport { name: t.name.clone(), status, instances, error: None }
}

fn describe_types(ta: &TypeAssignment) -> BTreeMap<String, String> {
    ta.by_name
        .iter()
        .filter(|(n, _)| !n.contains('!'))
        .map(|(n, ty)| (n.clone(), ty.to_string()))
        .collect()
}

fn run_instance(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &CcAssignment,
    index: usize,
    cfg: &VerifyConfig,
) -> InstanceReport {
    let mut report = InstanceReport {
        types: describe_types(ta),
        ccs: cca.iter().map(|(k, v)| (k.clone(), v.name().to_string())).collect(),
        verdict: Verdict::SolverFailed,
        quantified: false,
        solve_ms: 0,
        counterexample: None,
        note: None,
    };

    let query = match build_query(t, ta, cca) {
        Ok(q) => q,
        Err(e) => {
            report.note = Some(e.to_string());
            return report;
        }
    };
    report.quantified = query.quantified;
    let script = emit(&query);
    if let Some(dir) = &cfg.dump_dir {
        let _ = std::fs::create_dir_all(dir);
        let name = sanitize(&t.name);
        let _ = std::fs::write(dir.join(format!("{name}-{index}.smt2")), &script);
    }

    let solved = match solver::solve(&cfg.solver, &script) {
        Ok(r) => r,
        Err(e) => {
            report.note = Some(e.to_string());
            return report;
        }
    };
    report.solve_ms = solved.wall.as_millis() as u64;
    report.verdict = match solved.status {
        SolverStatus::Unsat => Verdict::Valid,
        SolverStatus::Sat => Verdict::Invalid,
        SolverStatus::Timeout => Verdict::Timeout,
        SolverStatus::Unknown => Verdict::Unknown,
        SolverStatus::Failed => {
            report.note = Some(truncate(&solved.transcript, 400));
            Verdict::SolverFailed
        }
    };

    if report.verdict == Verdict::Invalid {
        let model = solved.model.unwrap_or_default();
        report.counterexample = Some(build_counterexample(t, ta, cca, &model, cfg));
    }

    if cfg.brute_force {
        cross_check(t, ta, cca, &mut report, cfg);
    }
    report
}

fn build_counterexample(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &CcAssignment,
    model: &Env,
    cfg: &VerifyConfig,
) -> Counterexample {
    let values = model
        .iter()
        .map(|(name, v)| (name.clone(), v.describe()))
        .collect();
    let replay = match oracle::replay_counterexample(t, ta, cca, model, cfg.replay_budget) {
        Ok(status) => status.label().to_string(),
        Err(e) => format!("not replayed ({e})"),
    };
    Counterexample { values, replay }
}

/// Compare the solver verdict with the brute-force oracle; disagreement
/// is an infrastructure failure.
fn cross_check(
    t: &Transform,
    ta: &TypeAssignment,
    cca: &CcAssignment,
    report: &mut InstanceReport,
    cfg: &VerifyConfig,
) {
    match oracle::brute_force_verify(t, ta, cca, cfg.replay_budget) {
        Ok(BruteVerdict::Valid) if report.verdict == Verdict::Valid => {}
        Ok(BruteVerdict::Invalid { .. }) if report.verdict == Verdict::Invalid => {}
        Ok(v) if matches!(report.verdict, Verdict::Timeout | Verdict::Unknown) => {
            report.note = Some(format!(
                "oracle (solver inconclusive): {}",
                if matches!(v, BruteVerdict::Valid) { "valid" } else { "invalid" }
            ));
        }
        Ok(v) => {
            report.verdict = Verdict::SolverFailed;
            report.note = Some(format!(
                "oracle disagrees with the solver: oracle says {}",
                if matches!(v, BruteVerdict::Valid) { "valid" } else { "invalid" }
            ));
        }
        Err(oracle::BruteError::BudgetExceeded(_)) => {
            report.note.get_or_insert_with(|| "brute force skipped: domain too large".into());
        }
        Err(e) => {
            report.verdict = Verdict::SolverFailed;
            report.note = Some(format!("oracle failure: {e}"));
        }
    }
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "unnamed".into()
    } else {
        s
    }
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        return s.trim().to_string();
    }
    let mut end = n;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Render a report. The text form lists each transform with its verdict
/// and counterexamples; the JSON form is the serialized [`Report`].
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        Format::Text => render_text(report),
    }
}

fn render_text(report: &Report) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for f in &report.files {
        if !f.path.is_empty() {
            writeln!(out, "== {}", f.path).unwrap();
        }
        for e in &f.parse_errors {
            writeln!(out, "  parse error: {e}").unwrap();
        }
        for tr in &f.transforms {
            let label = match tr.status {
                TransformStatus::Verified => "verified",
                TransformStatus::Invalid => "INVALID",
                TransformStatus::Unverified => "unverified (timeout)",
                TransformStatus::Error => "ERROR",
            };
            let name = if tr.name.is_empty() { "(unnamed)" } else { &tr.name };
            writeln!(out, "  {name}: {label}").unwrap();
            if let Some(e) = &tr.error {
                writeln!(out, "    {e}").unwrap();
            }
            for inst in &tr.instances {
                if inst.verdict == Verdict::Valid && inst.note.is_none() {
                    continue;
                }
                let tys = inst
                    .types
                    .iter()
                    .map(|(n, t)| format!("{n}:{t}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let ccs = if inst.ccs.is_empty() {
                    String::new()
                } else {
                    format!(
                        " [{}]",
                        inst.ccs
                            .iter()
                            .map(|(n, c)| format!("{n}={c}"))
                            .collect::<Vec<_>>()
                            .join(" ")
                    )
                };
                writeln!(out, "    instance {tys}{ccs}: {:?}", inst.verdict).unwrap();
                if let Some(cex) = &inst.counterexample {
                    writeln!(out, "      counterexample (replay {}):", cex.replay).unwrap();
                    for (name, v) in &cex.values {
                        writeln!(out, "        {name} = {v}").unwrap();
                    }
                }
                if let Some(n) = &inst.note {
                    writeln!(out, "      note: {n}").unwrap();
                }
            }
        }
        writeln!(
            out,
            "  verified {}  unverified {}  invalid {}  errors {}",
            f.counts.verified, f.counts.unverified, f.counts.invalid, f.counts.errors
        )
        .unwrap();
    }
    writeln!(
        out,
        "total: verified {}  unverified {}  invalid {}  errors {}",
        report.totals.verified, report.totals.unverified, report.totals.invalid, report.totals.errors
    )
    .unwrap();
    out
}

/// Convenience for tests and examples: verify a single transform text.
pub fn verify_one(text: &str, cfg: &VerifyConfig) -> TransformReport {
    let mut fr = verify_text(text, cfg);
    assert!(fr.parse_errors.is_empty(), "parse errors: {:?}", fr.parse_errors);
    fr.transforms.remove(0)
}
