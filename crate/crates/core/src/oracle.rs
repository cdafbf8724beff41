//! Brute-force oracle over finite request domains: enumerates every
//! relevant request of a policy (seed values, a wrongly-typed probe and
//! ⊥ per attribute) and cross-checks the evaluator's decision against
//! the constraint tuple, exercising the semantic-correspondence and
//! partition properties.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ast::{AttributeName, BinOp, Decision, Expr, Policy};
use crate::batch::par_map;
use crate::constraint::ConstraintTuple;
use crate::eval::eval_policy;
use crate::request::SemanticRequest;
use crate::translate::{translate_policy, GreedyNotTranslatable};
use crate::value::{GroundValue, Value, ValueSet};

/// The finite options for one attribute: seed values, a wrongly-typed
/// probe and ⊥ (represented as `None`).
#[derive(Clone, Debug)]
pub struct NameDomain {
    pub options: Vec<Option<GroundValue>>,
}

/// Raised when the cross product outgrows the enumeration bound.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("request enumeration would produce {count} requests, beyond the bound of {bound}")]
pub struct BoundExceeded {
    pub count: u128,
    pub bound: u128,
}

/// Default cap on exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BOUND: u128 = 200_000;

#[derive(Default)]
struct LiteralUse {
    scalar: Vec<Value>,
    element: Vec<Value>,
}

fn scan_expr(e: &Expr, uses: &mut BTreeMap<AttributeName, LiteralUse>) {
    match e {
        Expr::Name(n) => {
            uses.entry(n.clone()).or_default();
        }
        Expr::Lit(_) => {}
        Expr::Not(inner) => scan_expr(inner, uses),
        Expr::Bin(op, a, b) => {
            scan_expr(a, uses);
            scan_expr(b, uses);
            match (op, a.as_ref(), b.as_ref()) {
                (BinOp::In, Expr::Lit(v), Expr::Name(n)) => {
                    uses.entry(n.clone()).or_default().element.push(v.clone());
                }
                (_, Expr::Name(n), Expr::Lit(v)) | (_, Expr::Lit(v), Expr::Name(n)) => {
                    uses.entry(n.clone()).or_default().scalar.push(v.clone());
                }
                _ => {}
            }
        }
    }
}

fn scan_policy(p: &Policy, uses: &mut BTreeMap<AttributeName, LiteralUse>) {
    match p {
        Policy::Rule(r) => {
            scan_expr(&r.target, uses);
            for o in &r.obligations {
                for a in &o.args {
                    scan_expr(a, uses);
                }
            }
        }
        Policy::Set(s) => {
            scan_expr(&s.target, uses);
            for child in &s.policies {
                scan_policy(child, uses);
            }
            for o in s.obl_permit.iter().chain(&s.obl_deny) {
                for a in &o.args {
                    scan_expr(a, uses);
                }
            }
        }
    }
}

fn dedup(vals: Vec<Value>) -> Vec<Value> {
    let mut out = Vec::new();
    for v in vals {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// A value of a different literal domain than `sample`, exercising the
/// error paths that typed requests never reach.
fn wrong_type_probe(sample: Option<&Value>) -> Value {
    match sample {
        Some(Value::Str(_)) | None => Value::double(99.0),
        _ => Value::string("probe"),
    }
}

/// A fresh value of the same domain as `sample`, distinct from every seed.
fn fresh_same_type(sample: Option<&Value>) -> Value {
    match sample {
        Some(Value::Double(_)) => Value::double(123456.5),
        Some(Value::Date(_)) => Value::Date("1999-01-01T00:00:00".parse().unwrap()),
        Some(Value::Bool(b)) => Value::Bool(!b),
        _ => Value::string("unseen-value"),
    }
}

/// Derives per-name finite domains from the literals occurring next to
/// each name in the policy. Scalar domains take each seed, one unseen
/// same-type value, a wrongly-typed probe and ⊥; set domains take the
/// subsets (sizes 1 and 2) of the element literals plus an unseen
/// element, a scalar probe and ⊥.
pub fn domain_for_policy(p: &Policy) -> BTreeMap<AttributeName, NameDomain> {
    let mut uses = BTreeMap::new();
    scan_policy(p, &mut uses);
    uses.into_iter()
        .map(|(name, lit_use)| {
            let mut options: Vec<Option<GroundValue>> = Vec::new();
            if !lit_use.element.is_empty() {
                let mut pool = dedup(lit_use.element);
                pool.truncate(3);
                pool.push(fresh_same_type(pool.first()));
                for i in 0..pool.len() {
                    options.push(Some(GroundValue::Many(Arc::new(ValueSet::singleton(
                        pool[i].clone(),
                    )))));
                    for j in (i + 1)..pool.len() {
                        options.push(Some(GroundValue::Many(Arc::new(ValueSet::pair(
                            pool[i].clone(),
                            pool[j].clone(),
                        )))));
                    }
                }
                options.push(Some(GroundValue::One(wrong_type_probe(None))));
            } else {
                let mut seeds = dedup(lit_use.scalar);
                seeds.truncate(4);
                let fresh = fresh_same_type(seeds.first());
                let probe = wrong_type_probe(seeds.first());
                seeds.push(fresh);
                for s in &seeds {
                    options.push(Some(GroundValue::One(s.clone())));
                }
                options.push(Some(GroundValue::One(probe)));
            }
            options.push(None);
            (name, NameDomain { options })
        })
        .collect()
}

fn domain_size(domains: &BTreeMap<AttributeName, NameDomain>) -> u128 {
    domains.values().fold(1u128, |acc, d| acc.saturating_mul(d.options.len() as u128))
}

fn request_from_choice(
    domains: &BTreeMap<AttributeName, NameDomain>,
    choice: &[usize],
) -> SemanticRequest {
    let mut bindings = BTreeMap::new();
    for ((name, domain), idx) in domains.iter().zip(choice) {
        if let Some(v) = &domain.options[*idx] {
            bindings.insert(name.clone(), v.clone());
        }
    }
    SemanticRequest::from_bindings(bindings)
}

/// Exhaustively enumerates the cross product of the per-name domains,
/// refusing when it exceeds `bound`.
pub fn enumerate_requests(
    domains: &BTreeMap<AttributeName, NameDomain>,
    bound: u128,
) -> Result<Vec<SemanticRequest>, BoundExceeded> {
    let count = domain_size(domains);
    if count > bound {
        return Err(BoundExceeded { count, bound });
    }
    let sizes: Vec<usize> = domains.values().map(|d| d.options.len()).collect();
    let mut choice = vec![0usize; sizes.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(request_from_choice(domains, &choice));
        // odometer increment over the per-name option indices
        let mut i = 0;
        loop {
            if i == sizes.len() {
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < sizes[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// The oracle request set: the full enumeration when it fits the bound,
/// otherwise `sample_size` seeded random draws from the same domains.
pub fn oracle_requests(
    domains: &BTreeMap<AttributeName, NameDomain>,
    bound: u128,
    sample_seed: u64,
    sample_size: usize,
) -> Vec<SemanticRequest> {
    match enumerate_requests(domains, bound) {
        Ok(all) => all,
        Err(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
            let sizes: Vec<usize> = domains.values().map(|d| d.options.len()).collect();
            (0..sample_size)
                .map(|_| {
                    let choice: Vec<usize> =
                        sizes.iter().map(|s| rng.gen_range(0..*s)).collect();
                    request_from_choice(domains, &choice)
                })
                .collect()
        }
    }
}

/// One disagreement between the evaluator and the constraint tuple.
#[derive(Clone, Debug)]
pub struct CorrespondenceFailure {
    pub request: String,
    pub evaluator_decision: Decision,
    pub satisfied: Vec<Decision>,
}

/// Outcome of the oracle run for one policy.
#[derive(Clone, Debug, Default)]
pub struct CorrespondenceReport {
    pub requests_checked: usize,
    pub failures: Vec<CorrespondenceFailure>,
}

impl CorrespondenceReport {
    pub fn all_agree(&self) -> bool {
        self.failures.is_empty()
    }
}

fn describe_request(r: &SemanticRequest) -> String {
    let mut out = String::new();
    for name in r.bound_names() {
        if let Some(v) = r.binding(name) {
            out.push_str(&format!("({name}, {v}) "));
        }
    }
    if out.is_empty() {
        out.push_str("(empty)");
    }
    out
}

/// Checks, for every given request, that the evaluator decision is the
/// unique satisfied component of the policy's constraint tuple
/// (correspondence and partition in one pass).
pub fn check_correspondence(
    p: &Policy,
    requests: &[SemanticRequest],
) -> Result<CorrespondenceReport, GreedyNotTranslatable> {
    let tuple = translate_policy(p)?;
    Ok(check_correspondence_with(p, &tuple, requests))
}

/// Same, with a pre-translated tuple.
pub fn check_correspondence_with(
    p: &Policy,
    tuple: &ConstraintTuple,
    requests: &[SemanticRequest],
) -> CorrespondenceReport {
    let failures: Vec<_> = par_map(requests, |r| {
        let decision = eval_policy(p, r).decision();
        let satisfied = tuple.satisfied_components(r);
        if satisfied.len() == 1 && satisfied[0] == decision {
            None
        } else {
            Some(CorrespondenceFailure {
                request: describe_request(r),
                evaluator_decision: decision,
                satisfied,
            })
        }
    })
    .into_iter()
    .flatten()
    .collect();
    CorrespondenceReport { requests_checked: requests.len(), failures }
}
