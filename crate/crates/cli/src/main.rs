//! The `facpl` workbench: parse and type-check policies, evaluate
//! requests through the PDP/PEP pipeline, translate policies to
//! constraints or SMT-LIB, verify properties with an external solver,
//! generate random policies and benchmark evaluation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use facpl_core::ast::{Pas, Policy};
use facpl_core::enforce::{ActionRegistry, EnforcedOutcome, FileSink, MemorySink};
use facpl_core::generator::{gen_policy, GenSpec};
use facpl_core::oracle::{domain_for_policy, oracle_requests};
use facpl_core::parser::{parse_policy, parse_request, ParsedTopLevel};
use facpl_core::printer::print_policy;
use facpl_core::request::SystemTimeProvider;
use facpl_core::types::welltyped;
use facpl_core::{EnfAlg, Pdp};
use facpl_smt::{
    emit_policy_script, parse_property_file, render_constraint_tuple, ParsedProperty,
    PropertyQuery, SolverConfig, Verifier,
};

#[derive(Parser)]
#[command(name = "facpl", version, about = "FACPL policy workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a policy file and check it is well-typed
    Check {
        /// policy file (.fpl)
        policy: PathBuf,
    },
    /// Evaluate a request against a policy authorisation system
    Eval {
        /// PAS file, or a bare policy enforced with the `base` algorithm
        policy: PathBuf,
        /// request file (.req)
        request: PathBuf,
        /// print the outcome as JSON
        #[arg(long)]
        json: bool,
        /// append discharged actions to this log file
        #[arg(long)]
        log_sink: Option<PathBuf>,
    },
    /// Translate a policy to its constraint tuple and/or SMT-LIB script
    Translate {
        /// policy file (.fpl)
        policy: PathBuf,
        /// write the SMT-LIB script
        #[arg(long)]
        smt: bool,
        /// write the constraint tuple in readable form
        #[arg(long)]
        constraints: bool,
        /// output directory
        #[arg(short, long, default_value = "build")]
        out: PathBuf,
    },
    /// Verify authorisation and structural properties with an SMT solver
    Verify {
        /// policy file (.fpl)
        policy: PathBuf,
        /// property specification file (one query per line)
        properties: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// output directory for scripts and reports
        #[arg(short, long, default_value = "build")]
        out: PathBuf,
        /// run independent solver queries in parallel
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Generate a random policy p(depth, width, attributes)
    Gen {
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        attrs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// write to a file instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Benchmark request evaluation over generated policies (CSV output)
    Bench {
        /// depths to sweep, e.g. 1..4
        #[arg(long, default_value = "1..3")]
        depths: String,
        /// widths to sweep, e.g. 1..4
        #[arg(long, default_value = "1..3")]
        widths: String,
        #[arg(long, default_value_t = 100)]
        attrs: u32,
        /// random requests per policy
        #[arg(long, default_value_t = 1000)]
        requests: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// worker threads for evaluation
        #[arg(long)]
        jobs: Option<usize>,
        /// write CSV here instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// solver executable (default: $FACPL_SOLVER, z3 on PATH, or the bundled shim)
    #[arg(long)]
    solver: Option<PathBuf>,
    /// per-query solver timeout in seconds
    #[arg(long, default_value_t = 30)]
    timeout: u64,
}

/// Domain failures exit 1, environment failures exit 2.
enum CliError {
    Domain(String),
    Env(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Domain(_) => ExitCode::from(1),
            CliError::Env(_) => ExitCode::from(2),
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Env(format!("cannot read {}: {e}", path.display())))
}

fn load_top(path: &PathBuf) -> Result<ParsedTopLevel, CliError> {
    let text = read_file(path)?;
    parse_policy(&text, &path.display().to_string()).map_err(|diags| {
        CliError::Domain(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))
    })
}

fn load_policy(path: &PathBuf) -> Result<Policy, CliError> {
    match load_top(path)? {
        ParsedTopLevel::Policy(p) => Ok(p),
        ParsedTopLevel::Pas(_) => Err(CliError::Domain(format!(
            "{}: expected a policy, found a policy authorisation system",
            path.display()
        ))),
    }
}

fn policy_stem(path: &PathBuf) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "policy".into())
}

fn cmd_check(path: &PathBuf) -> Result<(), CliError> {
    let top = load_top(path)?;
    let policies: Vec<&Policy> = match &top {
        ParsedTopLevel::Policy(p) => vec![p],
        ParsedTopLevel::Pas(pas) => match &pas.pdp {
            Pdp::Policy(p) => vec![p],
            Pdp::Combined { policies, .. } => policies.iter().collect(),
        },
    };
    for p in policies {
        welltyped(p).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    }
    println!("{}: ok", path.display());
    Ok(())
}

fn outcome_json(outcome: &EnforcedOutcome) -> serde_json::Value {
    serde_json::json!({
        "decision": outcome.decision.keyword(),
        "dischargeLog": outcome
            .discharge_log
            .iter()
            .map(|r| {
                serde_json::json!({
                    "action": r.action,
                    "args": r.args.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "succeeded": r.succeeded,
                    "skippedOptional": r.skipped_optional,
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn cmd_eval(
    policy_path: &PathBuf,
    request_path: &PathBuf,
    json: bool,
    log_sink: Option<&PathBuf>,
) -> Result<(), CliError> {
    let pas = match load_top(policy_path)? {
        ParsedTopLevel::Pas(pas) => pas,
        ParsedTopLevel::Policy(p) => Pas { enf_alg: EnfAlg::Base, pdp: p.into() },
    };
    let request_text = read_file(request_path)?;
    let request = parse_request(&request_text, &request_path.display().to_string())
        .map_err(|ds| CliError::Domain(ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")))?;

    let registry = match log_sink {
        Some(path) => {
            let sink = FileSink::open(path)
                .map_err(|e| CliError::Env(format!("cannot open log sink: {e}")))?;
            ActionRegistry::with_defaults(Arc::new(sink))
        }
        None => ActionRegistry::with_defaults(Arc::new(MemorySink::default())),
    };
    let outcome =
        facpl_core::enforce::eval_pas(&pas, &request, &registry, Some(Arc::new(SystemTimeProvider)));

    if json {
        println!("{}", serde_json::to_string_pretty(&outcome_json(&outcome)).expect("json"));
    } else {
        println!("decision: {}", outcome.decision);
        if !outcome.discharge_log.is_empty() {
            println!("discharged obligations:");
            for r in &outcome.discharge_log {
                let status = if r.succeeded {
                    "OK"
                } else if r.skipped_optional {
                    "SKIPPED-OPT"
                } else {
                    "FAIL"
                };
                let args = r.args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
                println!("  {}({args}) {status}", r.action);
            }
        }
    }
    Ok(())
}

fn cmd_translate(
    policy_path: &PathBuf,
    smt: bool,
    constraints: bool,
    out: &PathBuf,
) -> Result<(), CliError> {
    if !smt && !constraints {
        return Err(CliError::Domain("pass --smt and/or --constraints".into()));
    }
    let policy = load_policy(policy_path)?;
    let stem = policy_stem(policy_path);
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Env(format!("cannot create {}: {e}", out.display())))?;
    if constraints {
        let text =
            render_constraint_tuple(&policy).map_err(|e| CliError::Domain(e.to_string()))?;
        let path = out.join(format!("{stem}.constraints.txt"));
        std::fs::write(&path, text).map_err(|e| CliError::Env(e.to_string()))?;
        println!("wrote {}", path.display());
    }
    if smt {
        let script = emit_policy_script(&policy).map_err(|e| CliError::Domain(e.to_string()))?;
        let path = out.join(format!("{stem}.smt2"));
        std::fs::write(&path, script).map_err(|e| CliError::Env(e.to_string()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig, CliError> {
    let cfg = match &args.solver {
        Some(path) => SolverConfig::new(path.clone()),
        None => SolverConfig::discover().map_err(|e| CliError::Env(e.to_string()))?,
    };
    Ok(cfg.with_timeout(Duration::from_secs(args.timeout)))
}

fn cmd_verify(
    policy_path: &PathBuf,
    props_path: &PathBuf,
    solver: &SolverArgs,
    out: &PathBuf,
    jobs: usize,
) -> Result<(), CliError> {
    let policy = load_policy(policy_path)?;
    let props_text = read_file(props_path)?;
    let parsed = parse_property_file(&props_text, &props_path.display().to_string())
        .map_err(CliError::Domain)?;
    let base_dir = props_path.parent().map(PathBuf::from).unwrap_or_default();
    let queries: Vec<PropertyQuery> = parsed
        .into_iter()
        .map(|p| {
            Ok(match p {
                ParsedProperty::EvaluateTo(r, d) => PropertyQuery::EvaluateTo(r, d),
                ParsedProperty::MayEvaluateTo(r, d) => PropertyQuery::MayEvaluateTo(r, d),
                ParsedProperty::MustEvaluateTo(r, d) => PropertyQuery::MustEvaluateTo(r, d),
                ParsedProperty::Complete => PropertyQuery::Complete,
                ParsedProperty::Disjoint(path) => {
                    PropertyQuery::Disjoint(load_policy(&base_dir.join(path))?)
                }
                ParsedProperty::Cover(path) => {
                    PropertyQuery::Cover(load_policy(&base_dir.join(path))?)
                }
            })
        })
        .collect::<Result<_, CliError>>()?;

    let cfg = solver_config(solver)?;
    let verifier = Verifier::new(policy_stem(policy_path), policy, out, cfg);
    let indexed: Vec<(usize, &PropertyQuery)> = queries.iter().enumerate().collect();
    let run =
        |(idx, q): &(usize, &PropertyQuery)| verifier.verify(q, *idx).map_err(|e| e.to_string());
    #[cfg(feature = "parallel")]
    let results: Vec<Result<facpl_smt::QueryReport, String>> = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Env(e.to_string()))?;
        pool.install(|| {
            use rayon::prelude::*;
            indexed.par_iter().map(run).collect()
        })
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<facpl_smt::QueryReport, String>> = {
        let _ = jobs;
        indexed.iter().map(run).collect()
    };

    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok(report) => reports.push(report),
            Err(message) => return Err(CliError::Env(format!("verification failed: {message}"))),
        }
    }
    let json = serde_json::to_string_pretty(&reports).expect("json");
    let report_path = out.join("verify-report.json");
    std::fs::write(&report_path, &json).map_err(|e| CliError::Env(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn cmd_gen(depth: u32, width: u32, attrs: u32, seed: u64, out: Option<&PathBuf>) -> Result<(), CliError> {
    let policy = gen_policy(GenSpec::new(depth, width, attrs, seed))
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let text = print_policy(&policy);
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Env(e.to_string()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u32>, CliError> {
    let err = || CliError::Domain(format!("invalid range `{text}` (expected e.g. 1..4)"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.parse().map_err(|_| err())?;
        let b: u32 = b.parse().map_err(|_| err())?;
        Ok(a..=b)
    } else {
        let v: u32 = text.parse().map_err(|_| err())?;
        Ok(v..=v)
    }
}

fn percentile_micros(sorted: &[Duration], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx].as_secs_f64() * 1e6
}

fn cmd_bench(
    depths: &str,
    widths: &str,
    attrs: u32,
    requests: usize,
    seed: u64,
    jobs: Option<usize>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;

    let mut writer: csv::Writer<Box<dyn std::io::Write>> = match out {
        Some(path) => csv::Writer::from_writer(Box::new(
            std::fs::File::create(path).map_err(|e| CliError::Env(e.to_string()))?,
        )),
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    writer
        .write_record(["d", "w", "a", "meanEvalMicros", "p95EvalMicros", "requestsEvaluated"])
        .map_err(|e| CliError::Env(e.to_string()))?;

    for d in parse_range(depths)? {
        for w in parse_range(widths)? {
            let policy = gen_policy(GenSpec::new(d, w, attrs, seed))
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let domains = domain_for_policy(&policy);
            let reqs = oracle_requests(&domains, 0, seed ^ 0x5eed, requests);
            // warmup excluded from the measurements
            for r in reqs.iter().take(100) {
                std::hint::black_box(facpl_core::eval::eval_policy(&policy, r));
            }
            let mut times: Vec<Duration> = Vec::with_capacity(reqs.len());
            for r in &reqs {
                let t0 = Instant::now();
                std::hint::black_box(facpl_core::eval::eval_policy(&policy, r));
                times.push(t0.elapsed());
            }
            times.sort();
            let mean =
                times.iter().map(|t| t.as_secs_f64()).sum::<f64>() / times.len().max(1) as f64 * 1e6;
            writer
                .write_record([
                    d.to_string(),
                    w.to_string(),
                    attrs.to_string(),
                    format!("{mean:.2}"),
                    format!("{:.2}", percentile_micros(&times, 0.95)),
                    times.len().to_string(),
                ])
                .map_err(|e| CliError::Env(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| CliError::Env(e.to_string()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { policy } => cmd_check(policy),
        Command::Eval { policy, request, json, log_sink } => {
            cmd_eval(policy, request, *json, log_sink.as_ref())
        }
        Command::Translate { policy, smt, constraints, out } => {
            cmd_translate(policy, *smt, *constraints, out)
        }
        Command::Verify { policy, properties, solver, out, jobs } => {
            cmd_verify(policy, properties, solver, out, *jobs)
        }
        Command::Gen { depth, width, attrs, seed, out } => {
            cmd_gen(*depth, *width, *attrs, *seed, out.as_ref())
        }
        Command::Bench { depths, widths, attrs, requests, seed, jobs, out } => {
            cmd_bench(depths, widths, *attrs, *requests, *seed, *jobs, out.as_ref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = match &e {
                CliError::Domain(m) | CliError::Env(m) => m,
            };
            eprintln!("error: {message}");
            e.code()
        }
    }
}
