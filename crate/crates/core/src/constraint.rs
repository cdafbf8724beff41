//! The constraint representation and its evaluator. Constraints extend
//! boolean and comparison formulae with the 4-valued operators of the
//! expression language plus the predicates isBot, isErr and isBool; the
//! classical operators always return plain booleans.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::ast::AttributeName;
use crate::eval::eval_bin;
use crate::request::SemanticRequest;
use crate::value::{ExtendedValue, Value};

use ExtendedValue as Ev;

/// Binary constraint operators: the classical ∧/∨, their 4-valued
/// counterparts, comparisons and arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum COp {
    And,
    Or,
    FourAnd,
    FourOr,
    Equal,
    GreaterThan,
    In,
    Add,
    Subtract,
    Multiply,
    Divide,
}

impl COp {
    pub fn symbol(self) -> &'static str {
        match self {
            COp::And => "&&",
            COp::Or => "||",
            COp::FourAnd => "&&.",
            COp::FourOr => "||.",
            COp::Equal => "=",
            COp::GreaterThan => ">",
            COp::In => "in",
            COp::Add => "+",
            COp::Subtract => "-",
            COp::Multiply => "*",
            COp::Divide => "/",
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum Node {
    Lit(Value),
    Name(AttributeName),
    IsBot(Constraint),
    IsErr(Constraint),
    IsBool(Constraint),
    /// Classical negation: true exactly when the operand is false or ⊥.
    Not(Constraint),
    /// 4-valued negation: swaps true/false, keeps ⊥, error otherwise.
    FourNot(Constraint),
    Bin(COp, Constraint, Constraint),
}

/// A constraint tree with shared subterms. Combinators reference their
/// argument tuples several times, so sharing keeps translated policies
/// linear in memory and lets the evaluator memoize per subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint(Arc<Node>);

impl Constraint {
    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Identity of the shared node, stable for the lifetime of the tree;
    /// used as a memoization key by evaluators and emitters.
    pub fn as_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn key(&self) -> usize {
        self.as_key()
    }

    pub fn lit(v: Value) -> Self {
        Constraint(Arc::new(Node::Lit(v)))
    }

    pub fn truth(b: bool) -> Self {
        Constraint::lit(Value::Bool(b))
    }

    pub fn name(n: AttributeName) -> Self {
        Constraint(Arc::new(Node::Name(n)))
    }

    pub fn is_bot(c: Constraint) -> Self {
        Constraint(Arc::new(Node::IsBot(c)))
    }

    pub fn is_err(c: Constraint) -> Self {
        Constraint(Arc::new(Node::IsErr(c)))
    }

    pub fn is_bool(c: Constraint) -> Self {
        Constraint(Arc::new(Node::IsBool(c)))
    }

    pub fn not(c: Constraint) -> Self {
        Constraint(Arc::new(Node::Not(c)))
    }

    pub fn four_not(c: Constraint) -> Self {
        Constraint(Arc::new(Node::FourNot(c)))
    }

    pub fn bin(op: COp, a: Constraint, b: Constraint) -> Self {
        Constraint(Arc::new(Node::Bin(op, a, b)))
    }

    pub fn and(a: Constraint, b: Constraint) -> Self {
        Constraint::bin(COp::And, a, b)
    }

    pub fn or(a: Constraint, b: Constraint) -> Self {
        Constraint::bin(COp::Or, a, b)
    }

    /// Left fold of classical ∧ over a non-empty sequence; `true` when empty.
    pub fn conj(cs: impl IntoIterator<Item = Constraint>) -> Self {
        let mut it = cs.into_iter();
        match it.next() {
            None => Constraint::truth(true),
            Some(first) => it.fold(first, Constraint::and),
        }
    }

    /// Left fold of classical ∨ over a non-empty sequence; `false` when empty.
    pub fn disj(cs: impl IntoIterator<Item = Constraint>) -> Self {
        let mut it = cs.into_iter();
        match it.next() {
            None => Constraint::truth(false),
            Some(first) => it.fold(first, Constraint::or),
        }
    }

    /// Number of distinct nodes in the shared tree.
    pub fn node_count(&self) -> usize {
        fn walk(c: &Constraint, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(c.key()) {
                return;
            }
            match c.node() {
                Node::Lit(_) | Node::Name(_) => {}
                Node::IsBot(a) | Node::IsErr(a) | Node::IsBool(a) | Node::Not(a) | Node::FourNot(a) => {
                    walk(a, seen)
                }
                Node::Bin(_, a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

/// Evaluator state: results memoized per shared subterm.
struct EvalCtx<'a> {
    request: &'a SemanticRequest,
    memo: HashMap<usize, ExtendedValue>,
}

impl EvalCtx<'_> {
    fn eval(&mut self, c: &Constraint) -> ExtendedValue {
        if let Some(v) = self.memo.get(&c.key()) {
            return v.clone();
        }
        let v = match c.node() {
            Node::Lit(v) => Ev::Val(v.clone()),
            Node::Name(n) => self.request.lookup(n),
            Node::IsBot(a) => Ev::bool(self.eval(a).is_bottom()),
            Node::IsErr(a) => Ev::bool(self.eval(a).is_error()),
            Node::IsBool(a) => Ev::bool(self.eval(a).is_bool()),
            Node::Not(a) => {
                let v = self.eval(a);
                Ev::bool(v.is_false() || v.is_bottom())
            }
            Node::FourNot(a) => match self.eval(a) {
                v if v.is_true() => Ev::FALSE,
                v if v.is_false() => Ev::TRUE,
                Ev::Bottom => Ev::Bottom,
                _ => Ev::Error,
            },
            Node::Bin(op, a, b) => {
                let x = self.eval(a);
                let y = self.eval(b);
                match op {
                    COp::And => Ev::bool(x.is_true() && y.is_true()),
                    COp::Or => Ev::bool(x.is_true() || y.is_true()),
                    COp::FourAnd => eval_bin(crate::ast::BinOp::And, &x, &y),
                    COp::FourOr => eval_bin(crate::ast::BinOp::Or, &x, &y),
                    COp::Equal => eval_bin(crate::ast::BinOp::Equal, &x, &y),
                    COp::GreaterThan => eval_bin(crate::ast::BinOp::GreaterThan, &x, &y),
                    COp::In => eval_bin(crate::ast::BinOp::In, &x, &y),
                    COp::Add => eval_bin(crate::ast::BinOp::Add, &x, &y),
                    COp::Subtract => eval_bin(crate::ast::BinOp::Subtract, &x, &y),
                    COp::Multiply => eval_bin(crate::ast::BinOp::Multiply, &x, &y),
                    COp::Divide => eval_bin(crate::ast::BinOp::Divide, &x, &y),
                }
            }
        };
        self.memo.insert(c.key(), v.clone());
        v
    }
}

/// Constraint semantics: total and deterministic.
pub fn eval_constraint(c: &Constraint, r: &SemanticRequest) -> ExtendedValue {
    EvalCtx { request: r, memo: HashMap::new() }.eval(c)
}

/// True iff the constraint evaluates to exactly the boolean `true`.
pub fn satisfied(c: &Constraint, r: &SemanticRequest) -> bool {
    eval_constraint(c, r).is_true()
}

/// A policy constraint tuple: one boolean constraint per decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintTuple {
    pub permit: Constraint,
    pub deny: Constraint,
    pub not_app: Constraint,
    pub indet: Constraint,
}

impl ConstraintTuple {
    pub fn component(&self, d: crate::ast::Decision) -> &Constraint {
        match d {
            crate::ast::Decision::Permit => &self.permit,
            crate::ast::Decision::Deny => &self.deny,
            crate::ast::Decision::NotApp => &self.not_app,
            crate::ast::Decision::Indet => &self.indet,
        }
    }

    /// Evaluates all four components, memoizing shared subterms once.
    pub fn evaluate(&self, r: &SemanticRequest) -> [ExtendedValue; 4] {
        let mut ctx = EvalCtx { request: r, memo: HashMap::new() };
        [
            ctx.eval(&self.permit),
            ctx.eval(&self.deny),
            ctx.eval(&self.not_app),
            ctx.eval(&self.indet),
        ]
    }

    /// The decisions whose component is satisfied. The partition
    /// property says this always has exactly one element.
    pub fn satisfied_components(&self, r: &SemanticRequest) -> Vec<crate::ast::Decision> {
        let vals = self.evaluate(r);
        crate::ast::Decision::ALL
            .into_iter()
            .zip(vals)
            .filter_map(|(d, v)| v.is_true().then_some(d))
            .collect()
    }
}

impl fmt::Display for ConstraintTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "<permit : {}", self.permit)?;
        writeln!(f, " deny : {}", self.deny)?;
        writeln!(f, " not-app : {}", self.not_app)?;
        write!(f, " indet : {}>", self.indet)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Lit(v) => write!(f, "{v}"),
            Node::Name(n) => write!(f, "{n}"),
            Node::IsBot(c) => write!(f, "isBot({c})"),
            Node::IsErr(c) => write!(f, "isErr({c})"),
            Node::IsBool(c) => write!(f, "isBool({c})"),
            Node::Not(c) => write!(f, "!{}", Paren(c)),
            Node::FourNot(c) => write!(f, "!.{}", Paren(c)),
            Node::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

/// Parenthesises non-atomic operands of the negations.
struct Paren<'a>(&'a Constraint);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.node() {
            Node::Lit(_) | Node::Name(_) | Node::IsBot(_) | Node::IsErr(_) | Node::IsBool(_) => {
                write!(f, "{}", self.0)
            }
            _ => write!(f, "({})", self.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::name;
    use crate::request::SemanticRequest;

    fn empty() -> SemanticRequest {
        SemanticRequest::empty()
    }

    #[test]
    fn classic_not_treats_bottom_as_true() {
        let c = Constraint::not(Constraint::name(name("a/x")));
        assert_eq!(eval_constraint(&c, &empty()), Ev::TRUE);
        let c = Constraint::not(Constraint::truth(true));
        assert_eq!(eval_constraint(&c, &empty()), Ev::FALSE);
        // classical negation of a non-boolean is false, not error
        let c = Constraint::not(Constraint::lit(Value::double(5.0)));
        assert_eq!(eval_constraint(&c, &empty()), Ev::FALSE);
    }

    #[test]
    fn predicates() {
        let bot = Constraint::name(name("a/x"));
        assert_eq!(eval_constraint(&Constraint::is_bot(bot.clone()), &empty()), Ev::TRUE);
        assert_eq!(eval_constraint(&Constraint::is_err(bot.clone()), &empty()), Ev::FALSE);
        assert_eq!(eval_constraint(&Constraint::is_bool(bot), &empty()), Ev::FALSE);
        let err = Constraint::four_not(Constraint::lit(Value::double(5.0)));
        assert_eq!(eval_constraint(&Constraint::is_err(err), &empty()), Ev::TRUE);
        let t = Constraint::truth(true);
        assert_eq!(eval_constraint(&Constraint::is_bool(t), &empty()), Ev::TRUE);
    }

    #[test]
    fn four_valued_and_mirrors_expressions() {
        let c = Constraint::bin(COp::FourAnd, Constraint::truth(true), Constraint::name(name("a/x")));
        assert_eq!(eval_constraint(&c, &empty()), Ev::Bottom);
    }

    #[test]
    fn equality_type_mismatch_is_error() {
        let c = Constraint::bin(COp::Equal, Constraint::lit(Value::double(5.0)), Constraint::lit(Value::string("a")));
        assert_eq!(eval_constraint(&c, &empty()), Ev::Error);
    }

    #[test]
    fn classical_ops_always_boolean() {
        let bot = Constraint::name(name("a/x"));
        let c = Constraint::and(bot.clone(), Constraint::truth(true));
        assert_eq!(eval_constraint(&c, &empty()), Ev::FALSE);
        let c = Constraint::or(bot, Constraint::truth(true));
        assert_eq!(eval_constraint(&c, &empty()), Ev::TRUE);
    }

    #[test]
    fn satisfied_is_exactly_true() {
        assert!(satisfied(&Constraint::truth(true), &empty()));
        assert!(!satisfied(&Constraint::name(name("a/x")), &empty()));
        assert!(!satisfied(&Constraint::lit(Value::double(1.0)), &empty()));
    }

    #[test]
    fn shared_subterms_counted_once() {
        let shared = Constraint::name(name("a/x"));
        let c = Constraint::and(shared.clone(), Constraint::or(shared.clone(), shared));
        assert_eq!(c.node_count(), 3);
    }
}
