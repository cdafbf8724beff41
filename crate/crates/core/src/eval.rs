//! The PDP denotational semantics: expressions, obligation
//! instantiation, rules, policy sets, combining algorithms and PDPs.

use crate::ast::{
    AlgId, BinOp, Decision, Expr, InstObligation, Obligation, Pdp, PdpResponse, Policy, Strategy,
};
use crate::request::SemanticRequest;
use crate::value::{ExtendedValue, GroundValue, Value};

use ExtendedValue as Ev;

/// Expression semantics. Total: type mismatches yield `Error`, missing
/// attributes yield ⊥, and `and`/`or` mask both per their 4-valued tables.
pub fn eval_expr(e: &Expr, r: &SemanticRequest) -> ExtendedValue {
    match e {
        Expr::Name(n) => r.lookup(n),
        Expr::Lit(v) => Ev::Val(v.clone()),
        Expr::Not(inner) => match eval_expr(inner, r) {
            v if v.is_true() => Ev::FALSE,
            v if v.is_false() => Ev::TRUE,
            Ev::Bottom => Ev::Bottom,
            _ => Ev::Error,
        },
        Expr::Bin(op, a, b) => {
            let x = eval_expr(a, r);
            let y = eval_expr(b, r);
            eval_bin(*op, &x, &y)
        }
    }
}

/// Binary operator table over already-evaluated operands.
pub fn eval_bin(op: BinOp, x: &ExtendedValue, y: &ExtendedValue) -> ExtendedValue {
    match op {
        BinOp::And => {
            if x.is_true() && y.is_true() {
                Ev::TRUE
            } else if x.is_false() || y.is_false() {
                Ev::FALSE
            } else if (x.is_bottom() && (y.is_true() || y.is_bottom()))
                || (y.is_bottom() && (x.is_true() || x.is_bottom()))
            {
                Ev::Bottom
            } else {
                Ev::Error
            }
        }
        BinOp::Or => {
            if x.is_true() || y.is_true() {
                Ev::TRUE
            } else if x.is_false() && y.is_false() {
                Ev::FALSE
            } else if (x.is_bottom() && (y.is_false() || y.is_bottom()))
                || (y.is_bottom() && (x.is_false() || x.is_bottom()))
            {
                Ev::Bottom
            } else {
                Ev::Error
            }
        }
        BinOp::Equal => match (x, y) {
            _ if bottom_dominates(x, y) => Ev::Bottom,
            (Ev::Val(a), Ev::Val(b)) if a.same_domain(b) => Ev::bool(a == b),
            (Ev::Set(a), Ev::Set(b)) => Ev::bool(a == b),
            _ => Ev::Error,
        },
        BinOp::In => match (x, y) {
            _ if bottom_dominates(x, y) => Ev::Bottom,
            (Ev::Val(a), Ev::Set(s)) if s.homogeneous_with(a) => Ev::bool(s.contains(a)),
            _ => Ev::Error,
        },
        BinOp::GreaterThan => match (x, y) {
            _ if bottom_dominates(x, y) => Ev::Bottom,
            (Ev::Val(Value::Double(a)), Ev::Val(Value::Double(b))) => Ev::bool(a.get() > b.get()),
            (Ev::Val(Value::Date(a)), Ev::Val(Value::Date(b))) => Ev::bool(a > b),
            _ => Ev::Error,
        },
        BinOp::Add => arith(x, y, |a, b| Some(a + b)),
        BinOp::Subtract => arith(x, y, |a, b| Some(a - b)),
        BinOp::Multiply => arith(x, y, |a, b| Some(a * b)),
        BinOp::Divide => arith(x, y, |a, b| (b != 0.0).then(|| a / b)),
    }
}

/// The ⊥ rule shared by the non-masking operators: ⊥ wins when one
/// operand is ⊥ and the other is not an error.
fn bottom_dominates(x: &ExtendedValue, y: &ExtendedValue) -> bool {
    (x.is_bottom() && !y.is_error()) || (y.is_bottom() && !x.is_error())
}

fn arith(x: &ExtendedValue, y: &ExtendedValue, f: impl Fn(f64, f64) -> Option<f64>) -> ExtendedValue {
    if bottom_dominates(x, y) {
        return Ev::Bottom;
    }
    match (x.as_double(), y.as_double()) {
        (Some(a), Some(b)) => match f(a, b) {
            Some(v) => Ev::Val(Value::double(v)),
            None => Ev::Error,
        },
        _ => Ev::Error,
    }
}

/// Sequence semantics: the concatenation of per-expression results, or
/// `Err(())` when any element evaluates to error or ⊥.
pub fn eval_expr_seq(es: &[Expr], r: &SemanticRequest) -> Result<Vec<GroundValue>, ()> {
    es.iter()
        .map(|e| eval_expr(e, r).to_ground().ok_or(()))
        .collect()
}

/// Obligation instantiation: every argument sequence must evaluate to
/// ground values, otherwise the whole sequence fails.
pub fn instantiate_obligations(
    os: &[Obligation],
    r: &SemanticRequest,
) -> Result<Vec<InstObligation>, ()> {
    os.iter()
        .map(|o| {
            Ok(InstObligation {
                ob_type: o.ob_type,
                action: o.action.clone(),
                args: eval_expr_seq(&o.args, r)?,
            })
        })
        .collect()
}

/// Policy semantics: rules and policy sets.
pub fn eval_policy(p: &Policy, r: &SemanticRequest) -> PdpResponse {
    match p {
        Policy::Rule(rule) => {
            let t = eval_expr(&rule.target, r);
            if t.is_true() {
                match instantiate_obligations(&rule.obligations, r) {
                    Ok(ios) => PdpResponse::with_effect(rule.effect, ios),
                    Err(()) => PdpResponse::indet(),
                }
            } else if t.is_false() || t.is_bottom() {
                PdpResponse::not_app()
            } else {
                PdpResponse::indet()
            }
        }
        Policy::Set(set) => {
            let t = eval_expr(&set.target, r);
            if t.is_false() || t.is_bottom() {
                return PdpResponse::not_app();
            }
            if !t.is_true() {
                return PdpResponse::indet();
            }
            let combined = combine(set.alg.id, set.alg.strategy, &set.policies, r);
            let own = match combined.decision() {
                Decision::Permit => instantiate_obligations(&set.obl_permit, r),
                Decision::Deny => instantiate_obligations(&set.obl_deny, r),
                Decision::NotApp => return PdpResponse::not_app(),
                Decision::Indet => return PdpResponse::indet(),
            };
            match own {
                Ok(ios) => combined.append_obligations(ios),
                Err(()) => PdpResponse::indet(),
            }
        }
    }
}

/// One cell of the combination matrix for `alg` applied to responses
/// `a` and `b`.
pub fn combine_binary(alg: AlgId, a: &PdpResponse, b: &PdpResponse) -> PdpResponse {
    use Decision::{Deny, Indet, NotApp, Permit};

    let keep_a = || a.clone();
    let keep_b = || b.clone();
    let both = |d: Decision| {
        let mut ios = a.obligations().to_vec();
        ios.extend_from_slice(b.obligations());
        match d {
            Permit => PdpResponse::permit(ios),
            Deny => PdpResponse::deny(ios),
            _ => unreachable!("obligation concatenation only applies to permit/deny"),
        }
    };

    let (da, db) = (a.decision(), b.decision());
    match alg {
        AlgId::PermitOverrides => match (da, db) {
            (Permit, Permit) => both(Permit),
            (Permit, _) => keep_a(),
            (_, Permit) => keep_b(),
            (Deny, Deny) => both(Deny),
            (Deny, NotApp) => keep_a(),
            (NotApp, Deny) => keep_b(),
            (NotApp, NotApp) => PdpResponse::not_app(),
            _ => PdpResponse::indet(),
        },
        AlgId::DenyOverrides => match (da, db) {
            (Deny, Deny) => both(Deny),
            (Deny, _) => keep_a(),
            (_, Deny) => keep_b(),
            (Permit, Permit) => both(Permit),
            (Permit, NotApp) => keep_a(),
            (NotApp, Permit) => keep_b(),
            (NotApp, NotApp) => PdpResponse::not_app(),
            _ => PdpResponse::indet(),
        },
        AlgId::DenyUnlessPermit => match (da, db) {
            (Permit, Permit) => both(Permit),
            (Permit, _) => keep_a(),
            (_, Permit) => keep_b(),
            (Deny, Deny) => both(Deny),
            (Deny, _) => keep_a(),
            (_, Deny) => keep_b(),
            _ => PdpResponse::deny(Vec::new()),
        },
        AlgId::PermitUnlessDeny => match (da, db) {
            (Deny, Deny) => both(Deny),
            (Deny, _) => keep_a(),
            (_, Deny) => keep_b(),
            (Permit, Permit) => both(Permit),
            (Permit, _) => keep_a(),
            (_, Permit) => keep_b(),
            _ => PdpResponse::permit(Vec::new()),
        },
        AlgId::FirstApplicable => match (da, db) {
            (Permit | Deny | Indet, _) => keep_a(),
            (NotApp, NotApp) => PdpResponse::not_app(),
            (NotApp, _) => keep_b(),
        },
        AlgId::OneApplicable => match (da, db) {
            (Permit | Deny, NotApp) => keep_a(),
            (NotApp, Permit | Deny) => keep_b(),
            (NotApp, NotApp) => PdpResponse::not_app(),
            _ => PdpResponse::indet(),
        },
        AlgId::WeakConsensus => match (da, db) {
            (Permit, Permit) => both(Permit),
            (Deny, Deny) => both(Deny),
            (Permit, NotApp) => keep_a(),
            (NotApp, Permit) => keep_b(),
            (Deny, NotApp) => keep_a(),
            (NotApp, Deny) => keep_b(),
            (NotApp, NotApp) => PdpResponse::not_app(),
            _ => PdpResponse::indet(),
        },
        AlgId::StrongConsensus => match (da, db) {
            (Permit, Permit) => both(Permit),
            (Deny, Deny) => both(Deny),
            (NotApp, NotApp) => PdpResponse::not_app(),
            _ => PdpResponse::indet(),
        },
    }
}

/// The isFinal predicate: decisions that cannot change under further
/// combination with `alg`.
pub fn is_final(alg: AlgId, res: &PdpResponse) -> bool {
    use Decision::{Indet, NotApp, Permit};
    match alg {
        AlgId::PermitOverrides | AlgId::DenyUnlessPermit => res.decision() == Permit,
        AlgId::DenyOverrides | AlgId::PermitUnlessDeny => res.decision() == Decision::Deny,
        AlgId::FirstApplicable => res.decision() != NotApp,
        AlgId::OneApplicable | AlgId::WeakConsensus | AlgId::StrongConsensus => {
            res.decision() == Indet
        }
    }
}

/// Single-policy adjustment: `p-unless-d` and `d-unless-p` turn
/// not-app/indet into their default effect, the other algorithms pass
/// the response through.
fn adjust_single(alg: AlgId, res: PdpResponse) -> PdpResponse {
    match (alg, res.decision()) {
        (AlgId::PermitUnlessDeny, Decision::NotApp | Decision::Indet) => {
            PdpResponse::permit(Vec::new())
        }
        (AlgId::DenyUnlessPermit, Decision::NotApp | Decision::Indet) => {
            PdpResponse::deny(Vec::new())
        }
        _ => res,
    }
}

/// Combining algorithm semantics: a left fold of the binary operator
/// over the policy denotations. The `greedy` strategy stops as soon as
/// the running result is final, skipping the remaining evaluations.
pub fn combine(alg: AlgId, strategy: Strategy, ps: &[Policy], r: &SemanticRequest) -> PdpResponse {
    assert!(!ps.is_empty(), "combining algorithms require a non-empty policy sequence");
    if ps.len() == 1 {
        return adjust_single(alg, eval_policy(&ps[0], r));
    }
    match strategy {
        Strategy::All => {
            let mut acc = eval_policy(&ps[0], r);
            for p in &ps[1..] {
                acc = combine_binary(alg, &acc, &eval_policy(p, r));
            }
            acc
        }
        Strategy::Greedy => {
            let mut acc = eval_policy(&ps[0], r);
            for p in &ps[1..] {
                if is_final(alg, &acc) {
                    return acc;
                }
                acc = combine_binary(alg, &acc, &eval_policy(p, r));
            }
            acc
        }
    }
}

/// PDP semantics: a bare policy evaluates directly, the combined form
/// applies its algorithm to the enclosed policies.
pub fn eval_pdp(pdp: &Pdp, r: &SemanticRequest) -> PdpResponse {
    match pdp {
        Pdp::Policy(p) => eval_policy(p, r),
        Pdp::Combined { alg, policies } => combine(alg.id, alg.strategy, policies, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{name, Alg, Effect, ObType, Rule};
    use crate::request::{build_request, FixedProvider};
    use crate::value::ValueSet;
    use crate::SyntacticRequest;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn lit(v: Value) -> Expr {
        Expr::Lit(v)
    }

    fn nref(n: &str) -> Expr {
        Expr::Name(name(n))
    }

    fn empty() -> SemanticRequest {
        SemanticRequest::empty()
    }

    #[test]
    fn and_masks_bottom() {
        // and(true, x) with x ↦ ⊥ → ⊥
        let r = empty();
        let e = Expr::and(lit(Value::Bool(true)), nref("a/x"));
        assert_eq!(eval_expr(&e, &r), Ev::Bottom);
        // and(false, ⊥) → false
        let e = Expr::and(lit(Value::Bool(false)), nref("a/x"));
        assert_eq!(eval_expr(&e, &r), Ev::FALSE);
    }

    #[test]
    fn or_bottom_row() {
        let r = empty();
        let e = Expr::or(lit(Value::Bool(false)), nref("a/x"));
        assert_eq!(eval_expr(&e, &r), Ev::Bottom);
        let e = Expr::or(lit(Value::Bool(true)), nref("a/x"));
        assert_eq!(eval_expr(&e, &r), Ev::TRUE);
    }

    #[test]
    fn and_or_error_masking() {
        // and(false, error) → false; or(true, error) → true; and(⊥, error) → error
        let err = Expr::not(lit(Value::double(5.0)));
        assert_eq!(eval_expr(&err, &empty()), Ev::Error);
        assert_eq!(eval_expr(&Expr::and(lit(Value::Bool(false)), err.clone()), &empty()), Ev::FALSE);
        assert_eq!(eval_expr(&Expr::or(lit(Value::Bool(true)), err.clone()), &empty()), Ev::TRUE);
        assert_eq!(eval_expr(&Expr::and(nref("a/x"), err.clone()), &empty()), Ev::Error);
        assert_eq!(eval_expr(&Expr::and(lit(Value::Bool(true)), err), &empty()), Ev::Error);
    }

    #[test]
    fn not_of_non_boolean_is_error() {
        assert_eq!(eval_expr(&Expr::not(lit(Value::double(5.0))), &empty()), Ev::Error);
        assert_eq!(eval_expr(&Expr::not(nref("a/x")), &empty()), Ev::Bottom);
    }

    #[test]
    fn arithmetic() {
        let e = Expr::bin(BinOp::Add, lit(Value::double(2.0)), lit(Value::double(3.0)));
        assert_eq!(eval_expr(&e, &empty()), Ev::Val(Value::double(5.0)));
        let e = Expr::bin(BinOp::Divide, lit(Value::double(2.0)), lit(Value::double(0.0)));
        assert_eq!(eval_expr(&e, &empty()), Ev::Error);
        // ⊥ propagation: add(⊥, "s") → ⊥, add(⊥, error) → error
        let e = Expr::bin(BinOp::Add, nref("a/x"), lit(Value::string("s")));
        assert_eq!(eval_expr(&e, &empty()), Ev::Bottom);
        let err = Expr::not(lit(Value::double(5.0)));
        let e = Expr::bin(BinOp::Add, nref("a/x"), err);
        assert_eq!(eval_expr(&e, &empty()), Ev::Error);
    }

    #[test]
    fn equal_requires_same_domain() {
        let e = Expr::equal(lit(Value::double(5.0)), lit(Value::string("a")));
        assert_eq!(eval_expr(&e, &empty()), Ev::Error);
        let e = Expr::equal(lit(Value::double(5.0)), lit(Value::double(5.0)));
        assert_eq!(eval_expr(&e, &empty()), Ev::TRUE);
    }

    #[test]
    fn equal_on_sets() {
        let r = build_request(
            &SyntacticRequest::new(vec![
                (name("a/s"), Value::string("x")),
                (name("a/s"), Value::string("y")),
                (name("b/s"), Value::string("y")),
                (name("b/s"), Value::string("x")),
            ])
            .unwrap(),
        );
        let e = Expr::equal(nref("a/s"), nref("b/s"));
        assert_eq!(eval_expr(&e, &r), Ev::TRUE);
        // scalar vs set is a domain mismatch
        let e = Expr::equal(lit(Value::string("x")), nref("a/s"));
        assert_eq!(eval_expr(&e, &r), Ev::Error);
    }

    #[test]
    fn membership_on_multivalued_attribute() {
        let r = build_request(
            &SyntacticRequest::new(vec![
                (name("subject/permission"), Value::string("e-Pre-Read")),
                (name("subject/permission"), Value::string("e-Pre-Write")),
            ])
            .unwrap(),
        );
        let e = Expr::is_in(lit(Value::string("e-Pre-Read")), nref("subject/permission"));
        assert_eq!(eval_expr(&e, &r), Ev::TRUE);
        let e = Expr::is_in(lit(Value::string("other")), nref("subject/permission"));
        assert_eq!(eval_expr(&e, &r), Ev::FALSE);
        // membership in a scalar is an error
        let r = build_request(
            &SyntacticRequest::new(vec![(name("a/x"), Value::string("v"))]).unwrap(),
        );
        let e = Expr::is_in(lit(Value::string("v")), nref("a/x"));
        assert_eq!(eval_expr(&e, &r), Ev::Error);
        // membership of a ⊥ name
        let e = Expr::is_in(lit(Value::string("v")), nref("a/missing"));
        assert_eq!(eval_expr(&e, &r), Ev::Bottom);
    }

    #[test]
    fn greater_than_on_dates() {
        let d1 = Value::Date("2016-10-22T00:00:00".parse().unwrap());
        let d2 = Value::Date("2016-10-23T00:00:00".parse().unwrap());
        let e = Expr::bin(BinOp::GreaterThan, lit(d2.clone()), lit(d1.clone()));
        assert_eq!(eval_expr(&e, &empty()), Ev::TRUE);
        let e = Expr::bin(BinOp::GreaterThan, lit(d1), lit(Value::double(5.0)));
        assert_eq!(eval_expr(&e, &empty()), Ev::Error);
    }

    #[test]
    fn expr_seq_is_strict() {
        assert_eq!(eval_expr_seq(&[], &empty()), Ok(vec![]));
        let ok = eval_expr_seq(&[lit(Value::double(1.0)), lit(Value::double(2.0))], &empty());
        assert_eq!(
            ok,
            Ok(vec![GroundValue::One(Value::double(1.0)), GroundValue::One(Value::double(2.0))])
        );
        assert_eq!(eval_expr_seq(&[lit(Value::double(1.0)), nref("a/unbound")], &empty()), Err(()));
    }

    #[test]
    fn obligation_instantiation_failure() {
        let o = Obligation::new(ObType::Mandatory, "mailTo", vec![nref("resource/patient-mail")]);
        assert_eq!(instantiate_obligations(&[o], &empty()), Err(()));
        assert_eq!(instantiate_obligations(&[], &empty()), Ok(vec![]));
    }

    #[test]
    fn rule_evaluation() {
        let r = empty();
        let deny = Policy::Rule(Rule::bare(Effect::Deny));
        assert_eq!(eval_policy(&deny, &r), PdpResponse::deny(vec![]));
        // unsatisfied target → not-app
        let p = Policy::rule(Effect::Permit, lit(Value::Bool(false)), vec![]);
        assert_eq!(eval_policy(&p, &r), PdpResponse::not_app());
        // ⊥ target → not-app
        let p = Policy::rule(Effect::Permit, nref("a/x"), vec![]);
        assert_eq!(eval_policy(&p, &r), PdpResponse::not_app());
        // non-boolean target → indet
        let p = Policy::rule(Effect::Permit, lit(Value::double(5.0)), vec![]);
        assert_eq!(eval_policy(&p, &r), PdpResponse::indet());
        // failing obligation → indet
        let p = Policy::rule(
            Effect::Permit,
            lit(Value::Bool(true)),
            vec![Obligation::new(ObType::Mandatory, "log", vec![nref("a/x")])],
        );
        assert_eq!(eval_policy(&p, &r), PdpResponse::indet());
    }

    #[test]
    fn combine_binary_spot_checks() {
        let fo1 = vec![InstObligation { ob_type: ObType::Mandatory, action: "fo1".into(), args: vec![] }];
        let fo2 = vec![InstObligation { ob_type: ObType::Mandatory, action: "fo2".into(), args: vec![] }];
        // p-over: (deny FO1, indet) → indet
        let r = combine_binary(AlgId::PermitOverrides, &PdpResponse::deny(fo1.clone()), &PdpResponse::indet());
        assert_eq!(r, PdpResponse::indet());
        // p-over: (not-app, permit FO2) → permit FO2
        let r = combine_binary(AlgId::PermitOverrides, &PdpResponse::not_app(), &PdpResponse::permit(fo2.clone()));
        assert_eq!(r, PdpResponse::permit(fo2.clone()));
        // d-unless-p: (not-app, indet) → deny ε
        let r = combine_binary(AlgId::DenyUnlessPermit, &PdpResponse::not_app(), &PdpResponse::indet());
        assert_eq!(r, PdpResponse::deny(vec![]));
        // strong-con: (permit FO1, permit FO2) → permit FO1•FO2
        let r = combine_binary(
            AlgId::StrongConsensus,
            &PdpResponse::permit(fo1.clone()),
            &PdpResponse::permit(fo2.clone()),
        );
        let mut both = fo1.clone();
        both.extend(fo2.clone());
        assert_eq!(r, PdpResponse::permit(both));
    }

    #[test]
    fn is_final_spot_checks() {
        assert!(is_final(AlgId::PermitOverrides, &PdpResponse::permit(vec![])));
        assert!(!is_final(AlgId::PermitOverrides, &PdpResponse::deny(vec![])));
        assert!(!is_final(AlgId::FirstApplicable, &PdpResponse::not_app()));
        assert!(is_final(AlgId::FirstApplicable, &PdpResponse::deny(vec![])));
        assert!(is_final(AlgId::WeakConsensus, &PdpResponse::indet()));
        assert!(is_final(AlgId::OneApplicable, &PdpResponse::indet()));
        assert!(!is_final(AlgId::StrongConsensus, &PdpResponse::permit(vec![])));
    }

    #[test]
    fn combine_folds_and_greedy_stops() {
        let r = empty();
        let deny = Policy::Rule(Rule::bare(Effect::Deny));
        let permit = Policy::Rule(Rule::bare(Effect::Permit));
        // p-over_all over [deny, permit] → permit
        let res = combine(AlgId::PermitOverrides, Strategy::All, &[deny.clone(), permit.clone()], &r);
        assert_eq!(res.decision(), Decision::Permit);
        // p-over_greedy over [permit, divergent-marker] stops before the second
        let poisoned = Policy::rule(
            Effect::Deny,
            lit(Value::Bool(true)),
            vec![Obligation::new(ObType::Mandatory, "boom", vec![])],
        );
        let res = combine(AlgId::PermitOverrides, Strategy::Greedy, &[permit, poisoned], &r);
        assert_eq!(res, PdpResponse::permit(vec![]));
        // d-unless-p_all over a single not-app policy → deny ε
        let unapplied = Policy::rule(Effect::Permit, lit(Value::Bool(false)), vec![]);
        let res = combine(AlgId::DenyUnlessPermit, Strategy::All, &[unapplied], &r);
        assert_eq!(res, PdpResponse::deny(vec![]));
    }

    #[test]
    fn policy_set_obligations_append() {
        let r = build_request(
            &SyntacticRequest::new(vec![(name("resource/patient-mail"), Value::string("a@b"))]).unwrap(),
        );
        let set = Policy::set(
            Alg::all(AlgId::PermitOverrides),
            Expr::TRUE,
            vec![Policy::Rule(Rule::bare(Effect::Deny))],
            vec![],
            vec![Obligation::new(
                ObType::Mandatory,
                "mailTo",
                vec![nref("resource/patient-mail"), lit(Value::string("msg"))],
            )],
        )
        .unwrap();
        let res = eval_policy(&set, &r);
        assert_eq!(res.decision(), Decision::Deny);
        assert_eq!(res.obligations().len(), 1);
        assert_eq!(res.obligations()[0].action, "mailTo");
        // same set with patient-mail missing → indet
        let res = eval_policy(&set, &empty());
        assert_eq!(res, PdpResponse::indet());
    }

    #[test]
    fn context_provider_feeds_obligations() {
        let mut fixed = BTreeMap::new();
        let t: Value = Value::Date("2016-10-22T10:15:12".parse().unwrap());
        fixed.insert(name("system/time"), GroundValue::One(t.clone()));
        let r = build_request(
            &SyntacticRequest::new(vec![(name("a/x"), Value::string("v"))]).unwrap(),
        )
        .with_provider(Arc::new(FixedProvider(fixed)));
        let p = Policy::rule(
            Effect::Permit,
            Expr::TRUE,
            vec![Obligation::new(ObType::Mandatory, "log", vec![nref("system/time")])],
        );
        let res = eval_policy(&p, &r);
        assert_eq!(res.decision(), Decision::Permit);
        assert_eq!(res.obligations()[0].args, vec![GroundValue::One(t)]);
    }

    #[test]
    fn and_or_commutative_over_all_operand_combinations() {
        // operands covering true, false, ⊥, error and a non-boolean value
        let operands = [
            Ev::TRUE,
            Ev::FALSE,
            Ev::Bottom,
            Ev::Error,
            Ev::Val(Value::double(5.0)),
            Ev::Set(Arc::new(ValueSet::singleton(Value::string("s")))),
        ];
        for x in &operands {
            for y in &operands {
                assert_eq!(eval_bin(BinOp::And, x, y), eval_bin(BinOp::And, y, x), "and {x:?} {y:?}");
                assert_eq!(eval_bin(BinOp::Or, x, y), eval_bin(BinOp::Or, y, x), "or {x:?} {y:?}");
            }
        }
    }
}
