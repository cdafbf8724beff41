//! A minimal SMT-LIB 2 script runner with the z3 command-line contract:
//! `facpl-smt-shim [-T:secs] [-in | FILE...]` reads scripts, prints the
//! solver output (`sat`/`unsat`/`unknown`, models, errors) to stdout and
//! exits non-zero when the script raised errors. It embeds Z3 statically,
//! so a solver is available wherever the workspace builds.

use std::ffi::{CStr, CString};
use std::io::Read;
use std::process::ExitCode;

fn eval_script(script: &str, timeout_ms: Option<u64>) -> String {
    unsafe {
        let cfg = z3_sys::Z3_mk_config();
        if let Some(ms) = timeout_ms {
            let key = CString::new("timeout").unwrap();
            let val = CString::new(ms.to_string()).unwrap();
            z3_sys::Z3_set_param_value(cfg, key.as_ptr(), val.as_ptr());
        }
        let ctx = z3_sys::Z3_mk_context(cfg);
        z3_sys::Z3_del_config(cfg);
        let source = CString::new(script).unwrap_or_default();
        let out = z3_sys::Z3_eval_smtlib2_string(ctx, source.as_ptr());
        let text = CStr::from_ptr(out).to_string_lossy().into_owned();
        z3_sys::Z3_del_context(ctx);
        text
    }
}

fn main() -> ExitCode {
    let mut timeout_ms = None;
    let mut from_stdin = false;
    let mut files = Vec::new();
    for arg in std::env::args().skip(1) {
        if let Some(secs) = arg.strip_prefix("-T:") {
            match secs.parse::<u64>() {
                Ok(s) => timeout_ms = Some(s.saturating_mul(1000)),
                Err(_) => {
                    eprintln!("invalid -T value: {secs}");
                    return ExitCode::from(2);
                }
            }
        } else if arg == "-in" {
            from_stdin = true;
        } else if arg == "-h" || arg == "--help" {
            eprintln!("usage: facpl-smt-shim [-T:secs] [-in | FILE...]");
            return ExitCode::SUCCESS;
        } else {
            files.push(arg);
        }
    }

    let mut scripts = Vec::new();
    if from_stdin || files.is_empty() {
        let mut buf = String::new();
        if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
            eprintln!("error reading stdin: {e}");
            return ExitCode::from(2);
        }
        scripts.push(buf);
    }
    for f in files {
        match std::fs::read_to_string(&f) {
            Ok(s) => scripts.push(s),
            Err(e) => {
                eprintln!("error reading {f}: {e}");
                return ExitCode::from(2);
            }
        }
    }

    let mut had_error = false;
    for script in scripts {
        let out = eval_script(&script, timeout_ms);
        if !out.is_empty() {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
        }
        if out.contains("(error") {
            had_error = true;
        }
    }
    if had_error {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
