//! Translation of policies into constraint tuples: expressions,
//! obligation sequences, rules, policy sets and the per-algorithm tuple
//! combinators. Only the `all` instantiation strategy is translatable.

use crate::ast::{AlgId, BinOp, Effect, Expr, Obligation, Pdp, Policy, Strategy};
use crate::constraint::{COp, Constraint, ConstraintTuple};

/// Raised when a policy (or one of its descendants) uses the `greedy`
/// strategy, whose early stop cannot be predicted statically.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("greedy strategy not translatable: the evaluation cut-off cannot be predicted statically")]
pub struct GreedyNotTranslatable;

fn constraint_op(op: BinOp) -> COp {
    match op {
        BinOp::And => COp::FourAnd,
        BinOp::Or => COp::FourOr,
        BinOp::Equal => COp::Equal,
        BinOp::In => COp::In,
        BinOp::GreaterThan => COp::GreaterThan,
        BinOp::Add => COp::Add,
        BinOp::Subtract => COp::Subtract,
        BinOp::Multiply => COp::Multiply,
        BinOp::Divide => COp::Divide,
    }
}

/// Expression translation: the identity on names and values, an
/// homomorphism on operators.
pub fn translate_expr(e: &Expr) -> Constraint {
    match e {
        Expr::Name(n) => Constraint::name(n.clone()),
        Expr::Lit(v) => Constraint::lit(v.clone()),
        Expr::Not(inner) => Constraint::four_not(translate_expr(inner)),
        Expr::Bin(op, a, b) => Constraint::bin(constraint_op(*op), translate_expr(a), translate_expr(b)),
    }
}

/// Obligation-sequence translation: satisfiable exactly when every
/// argument expression evaluates neither to ⊥ nor to error. The empty
/// sequence translates to true.
pub fn translate_obls(os: &[Obligation]) -> Constraint {
    Constraint::conj(os.iter().map(|o| {
        Constraint::conj(o.args.iter().map(|arg| {
            let c = translate_expr(arg);
            Constraint::and(
                Constraint::not(Constraint::is_bot(c.clone())),
                Constraint::not(Constraint::is_err(c)),
            )
        }))
    }))
}

/// The indeterminate guard shared by every policy form: the target is
/// neither boolean nor missing.
fn target_error(ct: &Constraint) -> Constraint {
    Constraint::not(Constraint::or(
        Constraint::is_bool(ct.clone()),
        Constraint::is_bot(ct.clone()),
    ))
}

/// Policy translation into a constraint tuple.
pub fn translate_policy(p: &Policy) -> Result<ConstraintTuple, GreedyNotTranslatable> {
    match p {
        Policy::Rule(rule) => {
            let ct = translate_expr(&rule.target);
            let co = translate_obls(&rule.obligations);
            let applies = Constraint::and(ct.clone(), co.clone());
            let not_app = Constraint::not(ct.clone());
            let indet = Constraint::or(
                target_error(&ct),
                Constraint::and(ct, Constraint::not(co)),
            );
            let (permit, deny) = match rule.effect {
                Effect::Permit => (applies, Constraint::truth(false)),
                Effect::Deny => (Constraint::truth(false), applies),
            };
            Ok(ConstraintTuple { permit, deny, not_app, indet })
        }
        Policy::Set(set) => {
            if set.alg.strategy != Strategy::All {
                return Err(GreedyNotTranslatable);
            }
            let ct = translate_expr(&set.target);
            let alg = combine_tuples(
                set.alg.id,
                set.policies
                    .iter()
                    .map(translate_policy)
                    .collect::<Result<Vec<_>, _>>()?,
            );
            let cop = translate_obls(&set.obl_permit);
            let cod = translate_obls(&set.obl_deny);
            let permit = Constraint::and(Constraint::and(ct.clone(), alg.permit.clone()), cop.clone());
            let deny = Constraint::and(Constraint::and(ct.clone(), alg.deny.clone()), cod.clone());
            let not_app = Constraint::or(
                Constraint::not(ct.clone()),
                Constraint::and(ct.clone(), alg.not_app.clone()),
            );
            let indet = Constraint::or(
                Constraint::or(
                    Constraint::or(
                        target_error(&ct),
                        Constraint::and(ct.clone(), alg.indet.clone()),
                    ),
                    Constraint::and(
                        Constraint::and(ct.clone(), alg.permit.clone()),
                        Constraint::not(cop),
                    ),
                ),
                Constraint::and(Constraint::and(ct, alg.deny.clone()), Constraint::not(cod)),
            );
            Ok(ConstraintTuple { permit, deny, not_app, indet })
        }
    }
}

/// Left fold of the binary tuple combinator; a single tuple passes
/// through unchanged except under `p-unless-d` / `d-unless-p`, which
/// collapse every non-default decision into their default effect.
pub fn combine_tuples(alg: AlgId, tuples: Vec<ConstraintTuple>) -> ConstraintTuple {
    assert!(!tuples.is_empty(), "tuple combination requires at least one tuple");
    if tuples.len() == 1 {
        let a = tuples.into_iter().next().unwrap();
        return match alg {
            AlgId::PermitUnlessDeny => ConstraintTuple {
                permit: Constraint::or(Constraint::or(a.permit, a.not_app), a.indet),
                deny: a.deny,
                not_app: Constraint::truth(false),
                indet: Constraint::truth(false),
            },
            AlgId::DenyUnlessPermit => ConstraintTuple {
                permit: a.permit,
                deny: Constraint::or(Constraint::or(a.deny, a.not_app), a.indet),
                not_app: Constraint::truth(false),
                indet: Constraint::truth(false),
            },
            _ => a,
        };
    }
    let mut it = tuples.into_iter();
    let first = it.next().unwrap();
    it.fold(first, |a, b| combine_pair(alg, &a, &b))
}

fn combine_pair(alg: AlgId, a: &ConstraintTuple, b: &ConstraintTuple) -> ConstraintTuple {
    use Constraint as C;
    let and = C::and;
    let or = C::or;
    let not = C::not;
    match alg {
        AlgId::PermitOverrides => ConstraintTuple {
            permit: or(a.permit.clone(), b.permit.clone()),
            deny: or(
                or(
                    and(a.deny.clone(), b.deny.clone()),
                    and(a.deny.clone(), b.not_app.clone()),
                ),
                and(a.not_app.clone(), b.deny.clone()),
            ),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(
                and(a.indet.clone(), not(b.permit.clone())),
                and(not(a.permit.clone()), b.indet.clone()),
            ),
        },
        AlgId::DenyOverrides => ConstraintTuple {
            permit: or(
                or(
                    and(a.permit.clone(), b.permit.clone()),
                    and(a.permit.clone(), b.not_app.clone()),
                ),
                and(a.not_app.clone(), b.permit.clone()),
            ),
            deny: or(a.deny.clone(), b.deny.clone()),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(
                and(a.indet.clone(), not(b.deny.clone())),
                and(not(a.deny.clone()), b.indet.clone()),
            ),
        },
        AlgId::DenyUnlessPermit => ConstraintTuple {
            permit: or(a.permit.clone(), b.permit.clone()),
            deny: and(
                and(
                    and(not(a.permit.clone()), not(b.permit.clone())),
                    or(or(a.deny.clone(), a.not_app.clone()), a.indet.clone()),
                ),
                or(or(b.deny.clone(), b.not_app.clone()), b.indet.clone()),
            ),
            not_app: C::truth(false),
            indet: C::truth(false),
        },
        AlgId::PermitUnlessDeny => ConstraintTuple {
            permit: and(
                and(
                    and(not(a.deny.clone()), not(b.deny.clone())),
                    or(or(a.permit.clone(), a.not_app.clone()), a.indet.clone()),
                ),
                or(or(b.permit.clone(), b.not_app.clone()), b.indet.clone()),
            ),
            deny: or(a.deny.clone(), b.deny.clone()),
            not_app: C::truth(false),
            indet: C::truth(false),
        },
        AlgId::FirstApplicable => ConstraintTuple {
            permit: or(a.permit.clone(), and(b.permit.clone(), a.not_app.clone())),
            deny: or(a.deny.clone(), and(b.deny.clone(), a.not_app.clone())),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(a.indet.clone(), and(a.not_app.clone(), b.indet.clone())),
        },
        AlgId::OneApplicable => ConstraintTuple {
            permit: or(
                and(a.permit.clone(), b.not_app.clone()),
                and(a.not_app.clone(), b.permit.clone()),
            ),
            deny: or(
                and(a.deny.clone(), b.not_app.clone()),
                and(a.not_app.clone(), b.deny.clone()),
            ),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(
                or(a.indet.clone(), b.indet.clone()),
                and(
                    or(a.permit.clone(), a.deny.clone()),
                    or(b.permit.clone(), b.deny.clone()),
                ),
            ),
        },
        AlgId::WeakConsensus => ConstraintTuple {
            permit: or(
                or(
                    and(a.permit.clone(), b.permit.clone()),
                    and(a.permit.clone(), not(b.deny.clone())),
                ),
                and(not(a.deny.clone()), b.permit.clone()),
            ),
            deny: or(
                or(
                    and(a.deny.clone(), b.deny.clone()),
                    and(a.deny.clone(), not(b.permit.clone())),
                ),
                and(not(a.permit.clone()), b.deny.clone()),
            ),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(
                or(
                    and(a.permit.clone(), b.deny.clone()),
                    and(a.deny.clone(), b.permit.clone()),
                ),
                or(a.indet.clone(), b.indet.clone()),
            ),
        },
        AlgId::StrongConsensus => ConstraintTuple {
            permit: and(a.permit.clone(), b.permit.clone()),
            deny: and(a.deny.clone(), b.deny.clone()),
            not_app: and(a.not_app.clone(), b.not_app.clone()),
            indet: or(
                or(
                    or(a.indet.clone(), b.indet.clone()),
                    or(
                        and(a.not_app.clone(), not(b.not_app.clone())),
                        and(not(a.not_app.clone()), b.not_app.clone()),
                    ),
                ),
                or(
                    and(a.permit.clone(), b.deny.clone()),
                    and(a.deny.clone(), b.permit.clone()),
                ),
            ),
        },
    }
}

/// PDP translation: the combined form behaves like a policy set with
/// target true and no obligations; a bare policy translates directly.
pub fn translate_pdp(pdp: &Pdp) -> Result<ConstraintTuple, GreedyNotTranslatable> {
    match pdp {
        Pdp::Policy(p) => translate_policy(p),
        Pdp::Combined { alg, policies } => {
            let wrapper = Policy::set(
                *alg,
                Expr::TRUE,
                policies.clone(),
                Vec::new(),
                Vec::new(),
            )
            .expect("PDP policies are non-empty");
            translate_policy(&wrapper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{name, Alg, Rule, Value};
    use crate::constraint::{eval_constraint, satisfied, Node};
    use crate::request::SemanticRequest;

    fn c_trg1() -> Expr {
        // the first e-Health rule target (shortened attribute names)
        Expr::and(
            Expr::and(
                Expr::and(
                    Expr::equal(Expr::Name(name("sub/role")), Expr::Lit(Value::string("doctor"))),
                    Expr::equal(Expr::Name(name("act/id")), Expr::Lit(Value::string("write"))),
                ),
                Expr::is_in(Expr::Lit(Value::string("e-Pre-Write")), Expr::Name(name("sub/perm"))),
            ),
            Expr::is_in(Expr::Lit(Value::string("e-Pre-Read")), Expr::Name(name("sub/perm"))),
        )
    }

    #[test]
    fn expr_translation_is_homomorphic() {
        let c = translate_expr(&c_trg1());
        // shape: ((((= n v) &&. (= n v)) &&. (in v n)) &&. (in v n))
        let Node::Bin(COp::FourAnd, lhs, rhs) = c.node() else { panic!("expected &&.") };
        assert!(matches!(rhs.node(), Node::Bin(COp::In, _, _)));
        let Node::Bin(COp::FourAnd, lhs2, _) = lhs.node() else { panic!("expected nested &&.") };
        assert!(matches!(lhs2.node(), Node::Bin(COp::FourAnd, _, _)));
        // identity on literals
        assert_eq!(translate_expr(&Expr::Lit(Value::double(5.0))), Constraint::lit(Value::double(5.0)));
        // not → 4-valued negation
        let c = translate_expr(&Expr::not(Expr::equal(
            Expr::Name(name("a/b")),
            Expr::Lit(Value::double(1.0)),
        )));
        assert!(matches!(c.node(), Node::FourNot(inner) if matches!(inner.node(), Node::Bin(COp::Equal, _, _))));
    }

    #[test]
    fn empty_obligations_translate_to_true() {
        assert_eq!(translate_obls(&[]), Constraint::truth(true));
        // an obligation with no arguments also yields true
        let o = Obligation::new(crate::ast::ObType::Mandatory, "act", vec![]);
        assert_eq!(translate_obls(&[o]), Constraint::truth(true));
    }

    #[test]
    fn log_obligation_constraint_covers_all_names() {
        let o = Obligation::new(
            crate::ast::ObType::Mandatory,
            "log",
            vec![
                Expr::Name(name("sys/time")),
                Expr::Name(name("res/typ")),
                Expr::Name(name("sub/id")),
                Expr::Name(name("act/id")),
            ],
        );
        let c = translate_obls(&[o]);
        // satisfied only when all four names are bound
        let mut bindings = std::collections::BTreeMap::new();
        for n in ["sys/time", "res/typ", "sub/id", "act/id"] {
            bindings.insert(name(n), crate::value::GroundValue::One(Value::string("v")));
        }
        assert!(satisfied(&c, &SemanticRequest::from_bindings(bindings.clone())));
        bindings.remove(&name("act/id"));
        assert!(!satisfied(&c, &SemanticRequest::from_bindings(bindings)));
    }

    #[test]
    fn deny_rule_tuple_shape() {
        let tuple = translate_policy(&Policy::Rule(Rule::bare(Effect::Deny))).unwrap();
        // permit: false, deny: true && true
        assert_eq!(tuple.permit, Constraint::truth(false));
        assert!(matches!(tuple.deny.node(), Node::Bin(COp::And, a, b)
            if *a.node() == *Constraint::truth(true).node() && *b.node() == *Constraint::truth(true).node()));
        // not-app: !true
        assert!(matches!(tuple.not_app.node(), Node::Not(inner) if *inner.node() == *Constraint::truth(true).node()));
        let r = SemanticRequest::empty();
        assert!(satisfied(&tuple.deny, &r));
        assert!(!satisfied(&tuple.permit, &r));
        assert!(!satisfied(&tuple.not_app, &r));
        assert!(!satisfied(&tuple.indet, &r));
    }

    #[test]
    fn greedy_strategy_is_rejected() {
        let p = Policy::set(
            Alg::new(AlgId::PermitOverrides, Strategy::Greedy),
            Expr::TRUE,
            vec![Policy::Rule(Rule::bare(Effect::Deny))],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(translate_policy(&p), Err(GreedyNotTranslatable));
        // nested greedy is found too
        let outer = Policy::set(
            Alg::all(AlgId::PermitOverrides),
            Expr::TRUE,
            vec![p],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(translate_policy(&outer), Err(GreedyNotTranslatable));
        let pdp = Pdp::combined(
            Alg::new(AlgId::PermitOverrides, Strategy::Greedy),
            vec![Policy::Rule(Rule::bare(Effect::Deny))],
        )
        .unwrap();
        assert_eq!(translate_pdp(&pdp), Err(GreedyNotTranslatable));
    }

    #[test]
    fn single_tuple_unless_algorithms() {
        let a = translate_policy(&Policy::Rule(Rule::bare(Effect::Deny))).unwrap();
        let out = combine_tuples(AlgId::PermitUnlessDeny, vec![a.clone()]);
        assert_eq!(out.not_app, Constraint::truth(false));
        assert_eq!(out.indet, Constraint::truth(false));
        assert_eq!(out.deny, a.deny);
        // permit collects p ∨ n ∨ i
        assert!(matches!(out.permit.node(), Node::Bin(COp::Or, _, _)));
        // every other algorithm passes the tuple through
        let same = combine_tuples(AlgId::FirstApplicable, vec![a.clone()]);
        assert_eq!(same, a);
    }

    #[test]
    fn pdp_combined_translates_like_wrapped_set() {
        let deny = Policy::Rule(Rule::bare(Effect::Deny));
        let pdp = Pdp::combined(Alg::all(AlgId::PermitOverrides), vec![deny.clone()]).unwrap();
        let tuple = translate_pdp(&pdp).unwrap();
        // satisfiable by every request: deny component holds at the empty request
        let r = SemanticRequest::empty();
        assert_eq!(tuple.satisfied_components(&r), vec![crate::ast::Decision::Deny]);
        assert_eq!(eval_constraint(&tuple.permit, &r), crate::value::ExtendedValue::FALSE);
    }

    #[test]
    fn pover_pair_shapes_match_published_combinator() {
        let a = translate_policy(&Policy::Rule(Rule::bare(Effect::Deny))).unwrap();
        let b = translate_policy(&Policy::Rule(Rule::bare(Effect::Permit))).unwrap();
        let out = combine_pair(AlgId::PermitOverrides, &a, &b);
        // deny component: (Ad && Bd) || (Ad && Bn) || (An && Bd)
        let Node::Bin(COp::Or, lhs, rhs) = out.deny.node() else { panic!("expected ||") };
        let Node::Bin(COp::Or, ll, lr) = lhs.node() else { panic!("expected nested ||") };
        for part in [ll, lr, rhs] {
            assert!(matches!(part.node(), Node::Bin(COp::And, _, _)));
        }
        // d-unless-p not-app is constant false
        let out = combine_pair(AlgId::DenyUnlessPermit, &a, &b);
        assert_eq!(out.not_app, Constraint::truth(false));
    }
}
