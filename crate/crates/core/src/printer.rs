//! Pretty-printer for policies, requests and authorisation systems.
//! `parse(print(x))` is structurally identical to `x` for every valid
//! term; the notational shortcuts (`target: true` and empty obligation
//! sequences omitted) are applied on output.

use std::fmt::Write;

use crate::ast::{
    BinOp, Expr, Obligation, Pas, Pdp, Policy, PolicySet, Rule, SyntacticRequest,
};
use crate::parser::ParsedTopLevel;

/// Prints and/or infix (parenthesising to preserve the tree shape) and
/// every other operator in prefix form, matching the published listings.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, Prec::Or);
    out
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Or,
    And,
    Atom,
}

fn expr_prec(e: &Expr) -> Prec {
    match e {
        Expr::Bin(BinOp::Or, _, _) => Prec::Or,
        Expr::Bin(BinOp::And, _, _) => Prec::And,
        _ => Prec::Atom,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: Prec) {
    match e {
        Expr::Name(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Not(inner) => {
            out.push_str("not(");
            write_expr(out, inner, Prec::Or);
            out.push(')');
        }
        Expr::Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
            let prec = expr_prec(e);
            let parenthesise = prec < min;
            if parenthesise {
                out.push('(');
            }
            // left operand: same level or tighter keeps left associativity;
            // right operand must bind strictly tighter to reparse identically
            write_expr(out, a, prec);
            let _ = write!(out, " {} ", op.keyword());
            let right_min = match prec {
                Prec::Or => Prec::And,
                _ => Prec::Atom,
            };
            write_expr(out, b, right_min);
            if parenthesise {
                out.push(')');
            }
        }
        Expr::Bin(op, a, b) => {
            let _ = write!(out, "{}(", op.keyword());
            write_expr(out, a, Prec::Or);
            out.push_str(", ");
            write_expr(out, b, Prec::Or);
            out.push(')');
        }
    }
}

fn write_obligation(out: &mut String, o: &Obligation) {
    let _ = write!(out, "[{} {}(", o.ob_type.keyword(), o.action);
    for (i, a) in o.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, Prec::Or);
    }
    out.push_str(")]");
}

fn write_obligation_seq(out: &mut String, keyword: &str, os: &[Obligation], indent: usize) {
    if os.is_empty() {
        return;
    }
    let _ = write!(out, "\n{:indent$}{keyword}: ", "");
    for (i, o) in os.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write_obligation(out, o);
    }
}

fn write_rule(out: &mut String, r: &Rule, indent: usize) {
    let _ = write!(out, "({}", r.effect.keyword());
    if r.target != Expr::TRUE {
        out.push_str(" target: ");
        write_expr(out, &r.target, Prec::Or);
    }
    if !r.obligations.is_empty() {
        write_obligation_seq(out, "obl", &r.obligations, indent + 2);
        let _ = write!(out, "\n{:indent$}", "");
    }
    out.push(')');
}

fn write_policy_set(out: &mut String, s: &PolicySet, indent: usize) {
    let _ = write!(out, "{{ {}", s.alg);
    if s.target != Expr::TRUE {
        let _ = write!(out, "\n{:width$}target: ", "", width = indent + 2);
        write_expr(out, &s.target, Prec::Or);
    }
    let _ = write!(out, "\n{:width$}policies:", "", width = indent + 2);
    for p in &s.policies {
        let _ = write!(out, "\n{:width$}", "", width = indent + 4);
        write_policy(out, p, indent + 4);
    }
    write_obligation_seq(out, "obl-p", &s.obl_permit, indent + 2);
    write_obligation_seq(out, "obl-d", &s.obl_deny, indent + 2);
    let _ = write!(out, "\n{:indent$}}}", "");
}

fn write_policy(out: &mut String, p: &Policy, indent: usize) {
    match p {
        Policy::Rule(r) => write_rule(out, r, indent),
        Policy::Set(s) => write_policy_set(out, s, indent),
    }
}

pub fn print_policy(p: &Policy) -> String {
    let mut out = String::new();
    write_policy(&mut out, p, 0);
    out.push('\n');
    out
}

pub fn print_pas(pas: &Pas) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{ pep: {}\n  pdp: ", pas.enf_alg.keyword());
    match &pas.pdp {
        Pdp::Policy(p) => write_policy(&mut out, p, 2),
        Pdp::Combined { alg, policies } => {
            let _ = write!(out, "{alg} policies:");
            for p in policies {
                out.push_str("\n    ");
                write_policy(&mut out, p, 4);
            }
        }
    }
    out.push_str("\n}\n");
    out
}

pub fn print_top(top: &ParsedTopLevel) -> String {
    match top {
        ParsedTopLevel::Pas(pas) => print_pas(pas),
        ParsedTopLevel::Policy(p) => print_policy(p),
    }
}

pub fn print_request(r: &SyntacticRequest) -> String {
    let mut out = String::new();
    for (name, value) in &r.pairs {
        let _ = writeln!(out, "({name}, {value})");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{name, Alg, AlgId, Effect, ObType, Value};
    use crate::parser::{parse_policy_only, parse_request};

    #[test]
    fn bare_deny_prints_shortcut() {
        let p = Policy::Rule(Rule::bare(Effect::Deny));
        assert_eq!(print_policy(&p), "(deny)\n");
    }

    #[test]
    fn right_nested_and_keeps_shape() {
        let a = Expr::Name(name("a/x"));
        let b = Expr::Name(name("b/y"));
        let c = Expr::Name(name("c/z"));
        let right = Expr::and(a.clone(), Expr::and(b.clone(), c.clone()));
        let text = print_expr(&right);
        assert_eq!(text, "a/x and (b/y and c/z)");
        let reparsed = crate::parser::parse_expr(&text, "<t>").unwrap();
        assert_eq!(reparsed, right);

        let left = Expr::and(Expr::and(a.clone(), b.clone()), c.clone());
        let text = print_expr(&left);
        assert_eq!(text, "a/x and b/y and c/z");
        assert_eq!(crate::parser::parse_expr(&text, "<t>").unwrap(), left);

        let mixed = Expr::and(Expr::or(a, b), c);
        let text = print_expr(&mixed);
        assert_eq!(text, "(a/x or b/y) and c/z");
        assert_eq!(crate::parser::parse_expr(&text, "<t>").unwrap(), mixed);
    }

    #[test]
    fn policy_round_trip() {
        let p = Policy::set(
            Alg::all(AlgId::PermitOverrides),
            Expr::equal(Expr::Name(name("resource/type")), Expr::Lit(Value::string("e-Prescription"))),
            vec![
                Policy::rule(
                    Effect::Permit,
                    Expr::is_in(Expr::Lit(Value::string("e-Pre-Read")), Expr::Name(name("subject/permission"))),
                    vec![],
                ),
                Policy::Rule(Rule::bare(Effect::Deny)),
            ],
            vec![Obligation::new(ObType::Mandatory, "log", vec![Expr::Name(name("system/time"))])],
            vec![],
        )
        .unwrap();
        let text = print_policy(&p);
        let reparsed = parse_policy_only(&text, "<t>").unwrap();
        assert_eq!(reparsed, p);
    }

    #[test]
    fn request_round_trip() {
        let r = SyntacticRequest::new(vec![
            (name("subject/id"), Value::string("Dr. House")),
            (name("subject/permission"), Value::string("e-Pre-Read")),
            (name("subject/permission"), Value::string("e-Pre-Write")),
        ])
        .unwrap();
        let text = print_request(&r);
        assert_eq!(parse_request(&text, "<t>").unwrap(), r);
    }
}
