//! Running an external SMT solver. The solver is any command that takes
//! a script file as its last argument and prints `sat`/`unsat`/`unknown`
//! (and a model after `sat`) on stdout.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::oracle::Env;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no SMT solver found: pass --solver, set FPVERIFY_SOLVER, or put z3 on PATH")]
    NotFound,
    #[error("failed to run `{0}`: {1}")]
    Spawn(String, std::io::Error),
    #[error("i/o error talking to the solver: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Command and fixed arguments; the script path is appended.
    pub command: Vec<String>,
    pub timeout: Duration,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

impl SolverConfig {
    pub fn new(command: Vec<String>) -> SolverConfig {
        SolverConfig { command, timeout: DEFAULT_TIMEOUT }
    }

    /// Resolve the solver command: an explicit request, the
    /// `FPVERIFY_SOLVER` environment variable, `z3` on PATH, or the
    /// bundled `tools/z3smt.js` shim run with node.
    pub fn resolve(explicit: Option<&str>) -> Result<SolverConfig, SolverError> {
        if let Some(cmd) = explicit {
            return Ok(SolverConfig::new(split_command(cmd)));
        }
        if let Ok(cmd) = std::env::var("FPVERIFY_SOLVER") {
            if !cmd.trim().is_empty() {
                return Ok(SolverConfig::new(split_command(&cmd)));
            }
        }
        if command_exists("z3") {
            return Ok(SolverConfig::new(vec!["z3".into()]));
        }
        if let Some(shim) = find_shim() {
            if command_exists("node") {
                return Ok(SolverConfig::new(vec!["node".into(), shim.display().to_string()]));
            }
        }
        Err(SolverError::NotFound)
    }
}

fn split_command(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn command_exists(name: &str) -> bool {
    let path = std::env::var_os("PATH").unwrap_or_default();
    std::env::split_paths(&path).any(|dir| dir.join(name).is_file())
}

/// Look for `tools/z3smt.js` upward from the working directory and from
/// the compiled crate's location.
fn find_shim() -> Option<PathBuf> {
    let mut starts = vec![std::env::current_dir().ok()?];
    starts.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")));
    for start in starts {
        let mut dir = start.as_path();
        loop {
            let cand = dir.join("tools/z3smt.js");
            if cand.is_file() {
                return Some(cand);
            }
            match dir.parent() {
                Some(p) => dir = p,
                None => break,
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    /// The process failed, died, or printed something unintelligible.
    Failed,
}

#[derive(Debug)]
pub struct SolverResult {
    pub status: SolverStatus,
    /// Parsed model, when the status is `Sat` and a model was printed.
    pub model: Option<Env>,
    /// Raw stdout+stderr, for reports and debugging.
    pub transcript: String,
    pub wall: Duration,
}

/// Run one script through the solver with a wall-clock timeout. The
/// child is killed when the deadline passes.
pub fn solve(cfg: &SolverConfig, script: &str) -> Result<SolverResult, SolverError> {
    let mut file = tempfile::Builder::new()
        .prefix("fpverify-")
        .suffix(".smt2")
        .tempfile()?;
    file.write_all(script.as_bytes())?;
    let path = file.path().to_path_buf();

    let (prog, args) = cfg.command.split_first().ok_or(SolverError::NotFound)?;
    let start = Instant::now();
    let mut child = Command::new(prog)
        .args(args)
        .arg(&path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::Spawn(cfg.command.join(" "), e))?;

    // drain the pipes on threads so a chatty solver cannot deadlock
    let stdout = child.stdout.take().unwrap();
    let stderr = child.stderr.take().unwrap();
    let out_thread = std::thread::spawn(move || std::io::read_to_string(stdout).unwrap_or_default());
    let err_thread = std::thread::spawn(move || std::io::read_to_string(stderr).unwrap_or_default());

    let mut timed_out = false;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None => {
                if start.elapsed() >= cfg.timeout {
                    timed_out = true;
                    let _ = child.kill();
                    let _ = child.wait();
                    break;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    }
    let wall = start.elapsed();
    if timed_out {
        // Don't join the reader threads: a killed shell can leave
        // grandchildren holding the pipes open indefinitely.
        return Ok(SolverResult {
            status: SolverStatus::Timeout,
            model: None,
            transcript: String::new(),
            wall,
        });
    }
    let out = out_thread.join().unwrap_or_default();
    let err = err_thread.join().unwrap_or_default();
    let transcript = if err.is_empty() { out.clone() } else { format!("{out}\n{err}") };

    let status_word = out.split_whitespace().next().unwrap_or("");
    let (status, model) = match status_word {
        "sat" => {
            let model = crate::smt::model::parse_model(&out).ok().filter(|m| !m.is_empty());
            (SolverStatus::Sat, model)
        }
        "unsat" => (SolverStatus::Unsat, None),
        "unknown" | "timeout" => (SolverStatus::Unknown, None),
        _ => (SolverStatus::Failed, None),
    };
    Ok(SolverResult { status, model, transcript, wall })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_solver(dir: &std::path::Path, body: &str) -> SolverConfig {
        let path = dir.join("solver.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        SolverConfig::new(vec![path.display().to_string()])
    }

    #[test]
    fn parses_unsat() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_solver(dir.path(), "echo unsat");
        let r = solve(&cfg, "(check-sat)").unwrap();
        assert_eq!(r.status, SolverStatus::Unsat);
    }

    #[test]
    fn parses_sat_with_model() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_solver(
            dir.path(),
            "echo sat; echo '((define-fun %x () (_ FloatingPoint 5 11) (_ -zero 5 11)))'",
        );
        let r = solve(&cfg, "(check-sat)").unwrap();
        assert_eq!(r.status, SolverStatus::Sat);
        assert!(r.model.unwrap().contains_key("%x"));
    }

    #[test]
    fn kills_on_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fake_solver(dir.path(), "sleep 30; echo unsat");
        cfg.timeout = Duration::from_millis(200);
        let start = Instant::now();
        let r = solve(&cfg, "(check-sat)").unwrap();
        assert_eq!(r.status, SolverStatus::Timeout);
        assert!(start.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn garbage_is_failure() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fake_solver(dir.path(), "echo kaboom");
        let r = solve(&cfg, "(check-sat)").unwrap();
        assert_eq!(r.status, SolverStatus::Failed);
    }
}
