//! External solver subprocess driver: writes SMT-LIB 2 scripts to
//! files, invokes a z3-compatible executable and parses the verdict.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// The solver's answer to one `(check-sat)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

/// Outcome of one solver invocation.
#[derive(Clone, Debug)]
pub struct SolverVerdict {
    pub verdict: Verdict,
    /// solver output following the verdict line (model text, reasons)
    pub detail: Option<String>,
    pub duration: Duration,
}

/// Solver invocation errors. Timeouts and missing executables are
/// environment conditions, never coerced into a sat/unsat answer.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("no SMT solver found: set FACPL_SOLVER, put `z3` on PATH, or build the bundled facpl-smt-shim")]
    NotFound,
    #[error("failed to launch solver {path}: {source}")]
    Launch { path: String, source: std::io::Error },
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver exited without a verdict (status {status}): {stderr}")]
    NoVerdict { status: String, stderr: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// How to reach the solver executable.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        SolverConfig { path: path.into(), args: Vec::new(), timeout: Duration::from_secs(30) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Resolution order: the `FACPL_SOLVER` environment variable, `z3`
    /// on PATH, then the bundled `facpl-smt-shim` next to the current
    /// executable (where cargo places workspace binaries).
    pub fn discover() -> Result<Self, SolverError> {
        if let Ok(path) = std::env::var("FACPL_SOLVER") {
            let mut cfg = SolverConfig::new(path);
            if let Ok(args) = std::env::var("FACPL_SOLVER_ARGS") {
                cfg.args = args.split_whitespace().map(str::to_owned).collect();
            }
            return Ok(cfg);
        }
        if let Some(z3) = find_on_path("z3") {
            return Ok(SolverConfig::new(z3));
        }
        if let Some(shim) = find_sibling_shim() {
            return Ok(SolverConfig::new(shim));
        }
        Err(SolverError::NotFound)
    }
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    let path_var = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path_var) {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

/// Workspace binaries land next to each other (or one directory up from
/// test executables in `deps/`).
fn find_sibling_shim() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let mut dir = exe.parent()?;
    for _ in 0..3 {
        let candidate = dir.join("facpl-smt-shim");
        if candidate.is_file() {
            return Some(candidate);
        }
        dir = dir.parent()?;
    }
    None
}

/// Runs the configured solver on a script file and parses the first
/// `sat`/`unsat`/`unknown` token of its output.
pub fn run_solver(cfg: &SolverConfig, script_path: &Path) -> Result<SolverVerdict, SolverError> {
    let start = Instant::now();
    let mut child = Command::new(&cfg.path)
        .args(&cfg.args)
        .arg(script_path)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .stdin(Stdio::null())
        .spawn()
        .map_err(|source| SolverError::Launch { path: cfg.path.display().to_string(), source })?;

    let deadline = start + cfg.timeout;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Timeout(cfg.timeout));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
        }
    }
    let output = child.wait_with_output()?;
    let duration = start.elapsed();
    let stdout = String::from_utf8_lossy(&output.stdout);

    let mut verdict = None;
    let mut detail = String::new();
    for line in stdout.lines() {
        let trimmed = line.trim();
        if verdict.is_none() {
            match trimmed {
                "sat" => verdict = Some(Verdict::Sat),
                "unsat" => verdict = Some(Verdict::Unsat),
                "unknown" => verdict = Some(Verdict::Unknown),
                _ => {}
            }
        } else {
            detail.push_str(line);
            detail.push('\n');
        }
    }
    match verdict {
        Some(verdict) => Ok(SolverVerdict {
            verdict,
            detail: (!detail.is_empty()).then(|| detail.trim_end().to_owned()),
            duration,
        }),
        None => Err(SolverError::NoVerdict {
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        }),
    }
}

/// Convenience: write the script beside the given stem and run it.
pub fn run_script(
    cfg: &SolverConfig,
    script: &str,
    script_path: &Path,
) -> Result<SolverVerdict, SolverError> {
    if let Some(parent) = script_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(script_path, script)?;
    run_solver(cfg, script_path)
}
