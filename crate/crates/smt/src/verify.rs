//! Property verification: builds one script per query following the
//! satisfiability strategies (Evaluate-To / May / Must over request
//! codings, completeness, disjointness and coverage over decision
//! constraints) and maps solver verdicts to property outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Serialize;

use facpl_core::ast::{AttributeName, Decision, Expr, Policy, SyntacticRequest};
use facpl_core::request::build_request;
use facpl_core::translate::{translate_policy, GreedyNotTranslatable};
use facpl_core::types::{welltyped_exprs, TypeAssignment, TypeTerm, Unsat};
use facpl_core::value::{GroundValue, Value};

use crate::emit::{EmitError, ScriptBuilder};
use crate::solver::{run_script, SolverConfig, SolverError, Verdict};

/// A property to verify against a policy.
#[derive(Clone, Debug)]
pub enum PropertyQuery {
    EvaluateTo(SyntacticRequest, Decision),
    MayEvaluateTo(SyntacticRequest, Decision),
    MustEvaluateTo(SyntacticRequest, Decision),
    Complete,
    Disjoint(Policy),
    Cover(Policy),
}

impl PropertyQuery {
    pub fn slug(&self) -> String {
        match self {
            PropertyQuery::EvaluateTo(_, d) => format!("evaluate-to-{}", d.keyword()),
            PropertyQuery::MayEvaluateTo(_, d) => format!("may-evaluate-to-{}", d.keyword()),
            PropertyQuery::MustEvaluateTo(_, d) => format!("must-evaluate-to-{}", d.keyword()),
            PropertyQuery::Complete => "complete".into(),
            PropertyQuery::Disjoint(_) => "disjoint".into(),
            PropertyQuery::Cover(_) => "cover".into(),
        }
    }
}

/// Did the property hold? `Unknown` surfaces an inconclusive solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropertyOutcome {
    Holds,
    Fails,
    Unknown,
}

/// Per-query verification report; serialised as the JSON document of
/// the verdict output.
#[derive(Clone, Debug, Serialize)]
pub struct QueryReport {
    pub policy: String,
    pub property: String,
    pub verdict: String,
    #[serde(rename = "solverVerdict")]
    pub solver_verdict: String,
    #[serde(rename = "durationMs")]
    pub duration_ms: u128,
    #[serde(rename = "scriptPath")]
    pub script_path: String,
    #[serde(rename = "strEnumeration")]
    pub str_enumeration: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl QueryReport {
    pub fn outcome(&self) -> PropertyOutcome {
        match self.verdict.as_str() {
            "holds" => PropertyOutcome::Holds,
            "fails" => PropertyOutcome::Fails,
            _ => PropertyOutcome::Unknown,
        }
    }
}

/// Verification pipeline failures.
#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Greedy(#[from] GreedyNotTranslatable),
    #[error("policy is not well-typed: {0}")]
    IllTyped(#[from] Unsat),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("request value for {name} has no representable type: {detail}")]
    UntypableRequest { name: AttributeName, detail: String },
}

fn collect_expr_strings(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Lit(Value::Str(s)) => {
            out.insert(s.clone());
        }
        Expr::Lit(_) | Expr::Name(_) => {}
        Expr::Not(inner) => collect_expr_strings(inner, out),
        Expr::Bin(_, a, b) => {
            collect_expr_strings(a, out);
            collect_expr_strings(b, out);
        }
    }
}

fn collect_policy_strings(p: &Policy, out: &mut BTreeSet<String>) {
    match p {
        Policy::Rule(r) => {
            collect_expr_strings(&r.target, out);
            for o in &r.obligations {
                for a in &o.args {
                    collect_expr_strings(a, out);
                }
            }
        }
        Policy::Set(s) => {
            collect_expr_strings(&s.target, out);
            for c in &s.policies {
                collect_policy_strings(c, out);
            }
            for o in s.obl_permit.iter().chain(&s.obl_deny) {
                for a in &o.args {
                    collect_expr_strings(a, out);
                }
            }
        }
    }
}

fn collect_policy_exprs<'a>(p: &'a Policy, out: &mut Vec<&'a Expr>) {
    match p {
        Policy::Rule(r) => {
            out.push(&r.target);
            for o in &r.obligations {
                out.extend(o.args.iter());
            }
        }
        Policy::Set(s) => {
            out.push(&s.target);
            for c in &s.policies {
                collect_policy_exprs(c, out);
            }
            for o in s.obl_permit.iter().chain(&s.obl_deny) {
                out.extend(o.args.iter());
            }
        }
    }
}

fn value_type(v: &Value) -> TypeTerm {
    match v {
        Value::Bool(_) => TypeTerm::Bool,
        Value::Double(_) => TypeTerm::Double,
        Value::Str(_) => TypeTerm::Str,
        Value::Date(_) => TypeTerm::Date,
    }
}

fn ground_type(name: &AttributeName, g: &GroundValue) -> Result<TypeTerm, VerifyError> {
    match g {
        GroundValue::One(v) => Ok(value_type(v)),
        GroundValue::Many(set) => {
            let mut it = set.iter();
            let first = it.next().expect("value sets are non-empty");
            let elem = value_type(first);
            for v in it {
                if value_type(v) != elem {
                    return Err(VerifyError::UntypableRequest {
                        name: name.clone(),
                        detail: format!("mixed-type set {g}"),
                    });
                }
            }
            Ok(TypeTerm::set_of(elem))
        }
    }
}

/// Everything verification needs about a request: merged bindings and
/// the strings occurring in its values.
fn request_bindings(
    r: &SyntacticRequest,
) -> (BTreeMap<AttributeName, GroundValue>, BTreeSet<String>) {
    let sem = build_request(r);
    let mut bindings = BTreeMap::new();
    let mut strings = BTreeSet::new();
    for name in sem.bound_names() {
        let g = sem.binding(name).expect("bound name").clone();
        match &g {
            GroundValue::One(Value::Str(s)) => {
                strings.insert(s.clone());
            }
            GroundValue::Many(set) => {
                for v in set.iter() {
                    if let Value::Str(s) = v {
                        strings.insert(s.clone());
                    }
                }
            }
            _ => {}
        }
        bindings.insert(name.clone(), g);
    }
    (bindings, strings)
}

/// The verification context for one policy (optionally against a second
/// policy for the structural comparisons).
pub struct Verifier {
    pub policy_label: String,
    policy: Policy,
    out_dir: PathBuf,
    solver: SolverConfig,
}

impl Verifier {
    pub fn new(
        policy_label: impl Into<String>,
        policy: Policy,
        out_dir: impl Into<PathBuf>,
        solver: SolverConfig,
    ) -> Self {
        Verifier { policy_label: policy_label.into(), policy, out_dir: out_dir.into(), solver }
    }

    /// Runs one query end to end: translate, type, emit, solve, judge.
    pub fn verify(&self, query: &PropertyQuery, query_idx: usize) -> Result<QueryReport, VerifyError> {
        let tuple = translate_policy(&self.policy)?;
        let other = match query {
            PropertyQuery::Disjoint(p) | PropertyQuery::Cover(p) => Some(p),
            _ => None,
        };
        let other_tuple = other.map(translate_policy).transpose()?;

        // joint type assignment over both policies
        let mut exprs = Vec::new();
        collect_policy_exprs(&self.policy, &mut exprs);
        if let Some(p) = other {
            collect_policy_exprs(p, &mut exprs);
        }
        let mut assignment: TypeAssignment = welltyped_exprs(&exprs)?;

        // string pool: both policies plus the query request
        let mut strings = BTreeSet::new();
        collect_policy_strings(&self.policy, &mut strings);
        if let Some(p) = other {
            collect_policy_strings(p, &mut strings);
        }

        let request = match query {
            PropertyQuery::EvaluateTo(r, _)
            | PropertyQuery::MayEvaluateTo(r, _)
            | PropertyQuery::MustEvaluateTo(r, _) => {
                let (bindings, req_strings) = request_bindings(r);
                strings.extend(req_strings);
                for (name, g) in &bindings {
                    if !assignment.contains_key(name) {
                        assignment.insert(name.clone(), ground_type(name, g)?);
                    }
                }
                Some(bindings)
            }
            _ => None,
        };

        let mut builder = ScriptBuilder::new(&assignment, strings.into_iter());
        builder.add_policy("", &tuple)?;
        if let Some(t) = &other_tuple {
            builder.add_policy("p2_", t)?;
        }

        let policy_names: BTreeSet<AttributeName> = self.policy.names();
        let (assertions, holds_iff) = match query {
            PropertyQuery::EvaluateTo(_, d) => {
                let req = builder.request_assertions(
                    request.as_ref().expect("request present"),
                    &policy_names,
                    true,
                )?;
                (format!("(assert {})\n{req}", cns("", *d)), Verdict::Sat)
            }
            PropertyQuery::MayEvaluateTo(_, d) => {
                let req = builder.request_assertions(
                    request.as_ref().expect("request present"),
                    &policy_names,
                    false,
                )?;
                (format!("(assert {})\n{req}", cns("", *d)), Verdict::Sat)
            }
            PropertyQuery::MustEvaluateTo(_, d) => {
                let req = builder.request_assertions(
                    request.as_ref().expect("request present"),
                    &policy_names,
                    false,
                )?;
                (format!("(assert (not {}))\n{req}", cns("", *d)), Verdict::Unsat)
            }
            PropertyQuery::Complete => {
                (format!("(assert {})", cns("", Decision::NotApp)), Verdict::Unsat)
            }
            PropertyQuery::Disjoint(_) => {
                let clauses = [
                    (Decision::Permit, Decision::Permit),
                    (Decision::Permit, Decision::Deny),
                    (Decision::Deny, Decision::Permit),
                    (Decision::Deny, Decision::Deny),
                ]
                .map(|(a, b)| format!("(and {} {})", cns("", a), cns("p2_", b)));
                (format!("(assert (or {}))", clauses.join(" ")), Verdict::Unsat)
            }
            PropertyQuery::Cover(_) => {
                let p = format!("(and (not {}) {})", cns("", Decision::Permit), cns("p2_", Decision::Permit));
                let d = format!("(and (not {}) {})", cns("", Decision::Deny), cns("p2_", Decision::Deny));
                (format!("(assert (or {p} {d}))"), Verdict::Unsat)
            }
        };

        let script = builder.script(&[assertions]);
        let file_name = format!("{}_{:02}_{}.smt2", self.policy_label, query_idx, query.slug());
        let script_path = self.out_dir.join(file_name);
        let result = run_script(&self.solver, &script, &script_path)?;

        let verdict = match (&result.verdict, &holds_iff) {
            (Verdict::Unknown, _) => "unknown",
            (v, want) if v == want => "holds",
            _ => "fails",
        };
        Ok(QueryReport {
            policy: self.policy_label.clone(),
            property: query.slug(),
            verdict: verdict.into(),
            solver_verdict: match result.verdict {
                Verdict::Sat => "sat".into(),
                Verdict::Unsat => "unsat".into(),
                Verdict::Unknown => "unknown".into(),
            },
            duration_ms: result.duration.as_millis(),
            script_path: script_path.display().to_string(),
            str_enumeration: builder.string_enumeration(),
            model: result.detail,
        })
    }
}

fn cns(prefix: &str, d: Decision) -> String {
    let label = match d {
        Decision::Permit => "permit",
        Decision::Deny => "deny",
        Decision::NotApp => "notapp",
        Decision::Indet => "indet",
    };
    format!("{prefix}cns_{label}")
}

/// Emits the standalone policy fragment (declarations and decision
/// constraints) without running a solver; the `--smt` translation output.
pub fn emit_policy_script(policy: &Policy) -> Result<String, VerifyError> {
    let tuple = translate_policy(policy)?;
    let mut exprs = Vec::new();
    collect_policy_exprs(policy, &mut exprs);
    let assignment = welltyped_exprs(&exprs)?;
    let mut strings = BTreeSet::new();
    collect_policy_strings(policy, &mut strings);
    let mut builder = ScriptBuilder::new(&assignment, strings.into_iter());
    builder.add_policy("", &tuple)?;
    Ok(builder.script(&[]))
}

/// One line of a property specification file.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedProperty {
    EvaluateTo(SyntacticRequest, Decision),
    MayEvaluateTo(SyntacticRequest, Decision),
    MustEvaluateTo(SyntacticRequest, Decision),
    Complete,
    Disjoint(PathBuf),
    Cover(PathBuf),
}

/// Property file syntax: one query per line, `//` comments.
///
/// ```text
/// evaluate-to deny (sub/role,"pharmacist") (act/id,"write")
/// may-evaluate-to not-app (sub/role,"pharmacist")
/// must-evaluate-to permit (sub/id,"A")
/// complete
/// disjoint other-policy.fpl
/// cover other-policy.fpl
/// ```
pub fn parse_property_file(text: &str, file: &str) -> Result<Vec<ParsedProperty>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, char::is_whitespace);
        let keyword = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let parse_decision = |s: &str| {
            Decision::ALL
                .into_iter()
                .find(|d| d.keyword() == s)
                .ok_or_else(|| format!("{file}:{}: unknown decision `{s}`", lineno + 1))
        };
        let parse_req_part = |rest: &str| -> Result<(SyntacticRequest, Decision), String> {
            let mut sub = rest.splitn(2, char::is_whitespace);
            let decision = parse_decision(sub.next().unwrap_or(""))?;
            let pairs = sub.next().unwrap_or("").trim();
            let request = facpl_core::parser::parse_request(pairs, file)
                .map_err(|ds| format!("{file}:{}: {}", lineno + 1, ds[0]))?;
            Ok((request, decision))
        };
        out.push(match keyword {
            "evaluate-to" => {
                let (r, d) = parse_req_part(rest)?;
                ParsedProperty::EvaluateTo(r, d)
            }
            "may-evaluate-to" => {
                let (r, d) = parse_req_part(rest)?;
                ParsedProperty::MayEvaluateTo(r, d)
            }
            "must-evaluate-to" => {
                let (r, d) = parse_req_part(rest)?;
                ParsedProperty::MustEvaluateTo(r, d)
            }
            "complete" => ParsedProperty::Complete,
            "disjoint" => ParsedProperty::Disjoint(PathBuf::from(rest)),
            "cover" => ParsedProperty::Cover(PathBuf::from(rest)),
            other => {
                return Err(format!("{file}:{}: unknown property keyword `{other}`", lineno + 1))
            }
        });
    }
    Ok(out)
}

/// Writes the four decision constraints in readable constraint syntax;
/// the `--constraints` translation output.
pub fn render_constraint_tuple(policy: &Policy) -> Result<String, GreedyNotTranslatable> {
    let tuple = translate_policy(policy)?;
    Ok(format!("{tuple}\n"))
}

