//! Type inference for the untyped expression language: the inference
//! rules produce equality constraints over type terms, solved by
//! syntactic unification. Solutions instantiate the sorts of the SMT
//! encoding and reject ill-typed policies up front.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{AttributeName, BinOp, Expr, Policy};
use crate::value::Value;

/// Type terms: ground types, sets and inference variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TypeTerm {
    Bool,
    Double,
    Str,
    Date,
    SetOf(Box<TypeTerm>),
    Var(u32),
}

impl TypeTerm {
    pub fn set_of(t: TypeTerm) -> Self {
        TypeTerm::SetOf(Box::new(t))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            TypeTerm::Var(_) => false,
            TypeTerm::SetOf(t) => t.is_ground(),
            _ => true,
        }
    }
}

impl fmt::Display for TypeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTerm::Bool => write!(f, "Bool"),
            TypeTerm::Double => write!(f, "Double"),
            TypeTerm::Str => write!(f, "String"),
            TypeTerm::Date => write!(f, "Date"),
            TypeTerm::SetOf(t) => write!(f, "Set({t})"),
            TypeTerm::Var(v) => write!(f, "X{v}"),
        }
    }
}

/// A conjunction of type equalities in generation order, plus the
/// numeric-or-date overload obligations of `greater-than`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingConstraint {
    pub equalities: Vec<(TypeTerm, TypeTerm)>,
    pub comparable: Vec<TypeTerm>,
}

impl TypingConstraint {
    fn push(&mut self, a: TypeTerm, b: TypeTerm) {
        self.equalities.push((a, b));
    }

    pub fn extend(&mut self, other: TypingConstraint) {
        self.equalities.extend(other.equalities);
        self.comparable.extend(other.comparable);
    }
}

/// The typing context: an injective map from attribute names to type
/// variables.
#[derive(Clone, Debug, Default)]
pub struct TypingContext {
    vars: BTreeMap<AttributeName, u32>,
    next: u32,
}

impl TypingContext {
    pub fn fresh(&mut self) -> TypeTerm {
        let v = self.next;
        self.next += 1;
        TypeTerm::Var(v)
    }

    pub fn var_for(&mut self, name: &AttributeName) -> TypeTerm {
        if let Some(v) = self.vars.get(name) {
            return TypeTerm::Var(*v);
        }
        let TypeTerm::Var(v) = self.fresh() else { unreachable!() };
        self.vars.insert(name.clone(), v);
        TypeTerm::Var(v)
    }

    pub fn names(&self) -> impl Iterator<Item = (&AttributeName, u32)> {
        self.vars.iter().map(|(n, v)| (n, *v))
    }
}

fn literal_type(v: &Value) -> TypeTerm {
    match v {
        Value::Bool(_) => TypeTerm::Bool,
        Value::Double(_) => TypeTerm::Double,
        Value::Str(_) => TypeTerm::Str,
        Value::Date(_) => TypeTerm::Date,
    }
}

/// The inference judgment: returns the type of `e` and the constraint
/// accumulated along the way.
pub fn infer(e: &Expr, ctx: &mut TypingContext) -> (TypeTerm, TypingConstraint) {
    match e {
        Expr::Lit(v) => (literal_type(v), TypingConstraint::default()),
        Expr::Name(n) => (ctx.var_for(n), TypingConstraint::default()),
        Expr::Not(inner) => {
            let (t, mut c) = infer(inner, ctx);
            c.push(t, TypeTerm::Bool);
            (TypeTerm::Bool, c)
        }
        Expr::Bin(op, a, b) => {
            let (ta, mut c) = infer(a, ctx);
            let (tb, cb) = infer(b, ctx);
            c.extend(cb);
            match op {
                BinOp::And | BinOp::Or => {
                    c.push(ta, TypeTerm::Bool);
                    c.push(tb, TypeTerm::Bool);
                    (TypeTerm::Bool, c)
                }
                BinOp::Equal => {
                    c.push(ta, tb);
                    (TypeTerm::Bool, c)
                }
                BinOp::In => {
                    // the element type of the second operand must match
                    // the type of the first
                    let elem = ctx.fresh();
                    c.push(tb, TypeTerm::set_of(elem.clone()));
                    c.push(ta, elem);
                    (TypeTerm::Bool, c)
                }
                BinOp::GreaterThan => {
                    // both operands share one type, resolved to a double
                    // or date by the overload pass
                    c.push(ta.clone(), tb);
                    c.comparable.push(ta);
                    (TypeTerm::Bool, c)
                }
                BinOp::Add | BinOp::Subtract | BinOp::Multiply | BinOp::Divide => {
                    c.push(ta, TypeTerm::Double);
                    c.push(tb, TypeTerm::Double);
                    (TypeTerm::Double, c)
                }
            }
        }
    }
}

/// A ground assignment for every name in the typing context; variables
/// left unconstrained default to String.
pub type TypeAssignment = BTreeMap<AttributeName, TypeTerm>;

/// Unification failure, reporting the first conflicting pair.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("type constraint unsatisfiable: {left} = {right}")]
pub struct Unsat {
    pub left: TypeTerm,
    pub right: TypeTerm,
}

#[derive(Default)]
struct Unifier {
    bindings: BTreeMap<u32, TypeTerm>,
}

impl Unifier {
    fn resolve(&self, t: &TypeTerm) -> TypeTerm {
        match t {
            TypeTerm::Var(v) => match self.bindings.get(v) {
                Some(bound) => self.resolve(&bound.clone()),
                None => t.clone(),
            },
            TypeTerm::SetOf(inner) => TypeTerm::set_of(self.resolve(inner)),
            other => other.clone(),
        }
    }

    fn occurs(&self, v: u32, t: &TypeTerm) -> bool {
        match t {
            TypeTerm::Var(u) => *u == v,
            TypeTerm::SetOf(inner) => self.occurs(v, inner),
            _ => false,
        }
    }

    fn unify(&mut self, a: &TypeTerm, b: &TypeTerm) -> Result<(), Unsat> {
        let ra = self.resolve(a);
        let rb = self.resolve(b);
        match (&ra, &rb) {
            (TypeTerm::Var(v), _) => {
                if ra == rb {
                    return Ok(());
                }
                if self.occurs(*v, &rb) {
                    return Err(Unsat { left: ra, right: rb });
                }
                self.bindings.insert(*v, rb);
                Ok(())
            }
            (_, TypeTerm::Var(_)) => self.unify(&rb, &ra),
            (TypeTerm::SetOf(x), TypeTerm::SetOf(y)) => self.unify(x, y),
            _ if ra == rb => Ok(()),
            _ => Err(Unsat { left: ra, right: rb }),
        }
    }
}

/// Solves the conjunction by unification. Comparison overloads resolve
/// to Double when still free, and must otherwise already be a double or
/// a date. Unresolved variables default to String.
pub fn solve(c: &TypingConstraint, ctx: &TypingContext) -> Result<TypeAssignment, Unsat> {
    let mut u = Unifier::default();
    for (a, b) in &c.equalities {
        u.unify(a, b)?;
    }
    for t in &c.comparable {
        match u.resolve(t) {
            TypeTerm::Double | TypeTerm::Date => {}
            v @ TypeTerm::Var(_) => u.unify(&v, &TypeTerm::Double)?,
            other => return Err(Unsat { left: other, right: TypeTerm::Double }),
        }
    }
    let mut assignment = TypeAssignment::new();
    for (name, var) in ctx.names() {
        assignment.insert(name.clone(), ground(u.resolve(&TypeTerm::Var(var))));
    }
    Ok(assignment)
}

fn ground(t: TypeTerm) -> TypeTerm {
    match t {
        TypeTerm::Var(_) => TypeTerm::Str,
        TypeTerm::SetOf(inner) => TypeTerm::set_of(ground(*inner)),
        other => other,
    }
}

fn policy_exprs<'a>(p: &'a Policy, out: &mut Vec<&'a Expr>) {
    match p {
        Policy::Rule(r) => {
            out.push(&r.target);
            for o in &r.obligations {
                out.extend(o.args.iter());
            }
        }
        Policy::Set(s) => {
            out.push(&s.target);
            for child in &s.policies {
                policy_exprs(child, out);
            }
            for o in s.obl_permit.iter().chain(&s.obl_deny) {
                out.extend(o.args.iter());
            }
        }
    }
}

/// Well-typedness of a whole policy: one typing context covers every
/// expression in targets and obligation arguments, and all generated
/// constraints must be satisfied by a single assignment.
pub fn welltyped(p: &Policy) -> Result<TypeAssignment, Unsat> {
    let mut exprs = Vec::new();
    policy_exprs(p, &mut exprs);
    welltyped_exprs(&exprs)
}

/// Same, for an arbitrary expression collection under one context.
pub fn welltyped_exprs(exprs: &[&Expr]) -> Result<TypeAssignment, Unsat> {
    let mut ctx = TypingContext::default();
    let mut all = TypingConstraint::default();
    for e in exprs {
        let (_, c) = infer(e, &mut ctx);
        all.extend(c);
    }
    solve(&all, &ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{name, Effect, ObType, Obligation, Rule};

    #[test]
    fn literal_rule() {
        let mut ctx = TypingContext::default();
        let (t, c) = infer(&Expr::Lit(Value::Bool(true)), &mut ctx);
        assert_eq!(t, TypeTerm::Bool);
        assert!(c.equalities.is_empty());
    }

    #[test]
    fn ill_typed_or_example() {
        // or(cat/id, equal(cat/id, 5)) generates X = Double, X = Bool, Bool = Bool
        let e = Expr::or(
            Expr::Name(name("cat/id")),
            Expr::equal(Expr::Name(name("cat/id")), Expr::Lit(Value::double(5.0))),
        );
        let mut ctx = TypingContext::default();
        let (t, c) = infer(&e, &mut ctx);
        assert_eq!(t, TypeTerm::Bool);
        assert_eq!(
            c.equalities,
            vec![
                (TypeTerm::Var(0), TypeTerm::Double),
                (TypeTerm::Var(0), TypeTerm::Bool),
                (TypeTerm::Bool, TypeTerm::Bool),
            ]
        );
        let err = solve(&c, &ctx).unwrap_err();
        assert_eq!(err, Unsat { left: TypeTerm::Double, right: TypeTerm::Bool });
    }

    #[test]
    fn membership_types_set_elements() {
        let e = Expr::is_in(Expr::Lit(Value::string("e-Pre-Read")), Expr::Name(name("sub/perm")));
        let mut ctx = TypingContext::default();
        let (t, c) = infer(&e, &mut ctx);
        assert_eq!(t, TypeTerm::Bool);
        let a = solve(&c, &ctx).unwrap();
        assert_eq!(a[&name("sub/perm")], TypeTerm::set_of(TypeTerm::Str));
    }

    #[test]
    fn transitive_unification() {
        let mut c = TypingConstraint::default();
        c.equalities.push((TypeTerm::Var(0), TypeTerm::Var(1)));
        c.equalities.push((TypeTerm::Var(1), TypeTerm::set_of(TypeTerm::Str)));
        let mut ctx = TypingContext::default();
        ctx.var_for(&name("a/x"));
        ctx.var_for(&name("a/y"));
        let a = solve(&c, &ctx).unwrap();
        assert_eq!(a[&name("a/x")], TypeTerm::set_of(TypeTerm::Str));
        assert_eq!(a[&name("a/y")], TypeTerm::set_of(TypeTerm::Str));
    }

    #[test]
    fn occurs_check() {
        let mut c = TypingConstraint::default();
        c.equalities.push((TypeTerm::Var(0), TypeTerm::set_of(TypeTerm::Var(0))));
        assert!(solve(&c, &TypingContext::default()).is_err());
    }

    #[test]
    fn satisfiability_invariant_under_reordering() {
        let eqs = vec![
            (TypeTerm::Var(0), TypeTerm::Double),
            (TypeTerm::Var(1), TypeTerm::Var(0)),
            (TypeTerm::Var(1), TypeTerm::Bool),
        ];
        // unsat in every permutation
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in perms {
            let c = TypingConstraint {
                equalities: perm.iter().map(|i| eqs[*i].clone()).collect(),
                comparable: vec![],
            };
            assert!(solve(&c, &TypingContext::default()).is_err(), "perm {perm:?}");
        }
    }

    #[test]
    fn greater_than_overload() {
        // free comparison defaults to Double
        let e = Expr::bin(BinOp::GreaterThan, Expr::Name(name("a/x")), Expr::Name(name("a/y")));
        let mut ctx = TypingContext::default();
        let (_, c) = infer(&e, &mut ctx);
        let a = solve(&c, &ctx).unwrap();
        assert_eq!(a[&name("a/x")], TypeTerm::Double);
        // a date-constrained comparison stays a date
        let e = Expr::bin(
            BinOp::GreaterThan,
            Expr::Name(name("a/t")),
            Expr::Lit(Value::Date("2016-10-22T00:00:00".parse().unwrap())),
        );
        let mut ctx = TypingContext::default();
        let (_, c) = infer(&e, &mut ctx);
        let a = solve(&c, &ctx).unwrap();
        assert_eq!(a[&name("a/t")], TypeTerm::Date);
        // strings are not comparable
        let e = Expr::bin(
            BinOp::GreaterThan,
            Expr::Name(name("a/s")),
            Expr::Lit(Value::string("x")),
        );
        let mut ctx = TypingContext::default();
        let (_, c) = infer(&e, &mut ctx);
        assert!(solve(&c, &ctx).is_err());
    }

    #[test]
    fn welltyped_rule_with_no_names() {
        let p = Policy::Rule(Rule::bare(Effect::Deny));
        assert_eq!(welltyped(&p).unwrap(), TypeAssignment::new());
    }

    #[test]
    fn defaulting_to_string() {
        // a name only read in an obligation has no constraints
        let p = Policy::rule(
            Effect::Permit,
            Expr::TRUE,
            vec![Obligation::new(ObType::Mandatory, "log", vec![Expr::Name(name("sub/id"))])],
        );
        let a = welltyped(&p).unwrap();
        assert_eq!(a[&name("sub/id")], TypeTerm::Str);
    }
}
