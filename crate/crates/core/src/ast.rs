//! Abstract syntax of policies, requests and responses, plus the
//! structural helpers `depth` and `names`.

use std::collections::BTreeSet;
use std::fmt;

use crate::value::GroundValue;
pub use crate::value::Value;

/// A structured attribute name `category/attribute`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeName {
    pub category: String,
    pub attribute: String,
}

impl AttributeName {
    pub fn new(category: impl Into<String>, attribute: impl Into<String>) -> Self {
        AttributeName { category: category.into(), attribute: attribute.into() }
    }
}

impl fmt::Display for AttributeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.category, self.attribute)
    }
}

/// Shorthand for building an [`AttributeName`] from `"cat/attr"` literals.
pub fn name(spec: &str) -> AttributeName {
    let (c, a) = spec.split_once('/').expect("attribute name must be cat/attr");
    AttributeName::new(c, a)
}

/// Binary expression operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Equal,
    In,
    GreaterThan,
    Add,
    Subtract,
    Divide,
    Multiply,
}

impl BinOp {
    pub fn keyword(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Equal => "equal",
            BinOp::In => "in",
            BinOp::GreaterThan => "greater-than",
            BinOp::Add => "add",
            BinOp::Subtract => "subtract",
            BinOp::Divide => "divide",
            BinOp::Multiply => "multiply",
        }
    }
}

/// Policy expressions over attribute names and literal values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Name(AttributeName),
    Lit(Value),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub const TRUE: Expr = Expr::Lit(Value::Bool(true));

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Or, a, b)
    }

    pub fn equal(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Equal, a, b)
    }

    pub fn is_in(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::In, a, b)
    }

    fn collect_names(&self, out: &mut BTreeSet<AttributeName>) {
        match self {
            Expr::Name(n) => {
                out.insert(n.clone());
            }
            Expr::Lit(_) => {}
            Expr::Not(e) => e.collect_names(out),
            Expr::Bin(_, a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }
}

/// Obligation type: mandatory or optional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObType {
    Mandatory,
    Optional,
}

impl ObType {
    pub fn keyword(self) -> &'static str {
        match self {
            ObType::Mandatory => "m",
            ObType::Optional => "o",
        }
    }
}

/// An obligation: a typed PEP action with expression arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub ob_type: ObType,
    pub action: String,
    pub args: Vec<Expr>,
}

impl Obligation {
    pub fn new(ob_type: ObType, action: impl Into<String>, args: Vec<Expr>) -> Self {
        Obligation { ob_type, action: action.into(), args }
    }

    fn collect_names(&self, out: &mut BTreeSet<AttributeName>) {
        for a in &self.args {
            a.collect_names(out);
        }
    }
}

/// Rule effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    Permit,
    Deny,
}

impl Effect {
    pub fn keyword(self) -> &'static str {
        match self {
            Effect::Permit => "permit",
            Effect::Deny => "deny",
        }
    }
}

/// The eight combining algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgId {
    PermitOverrides,
    DenyOverrides,
    DenyUnlessPermit,
    PermitUnlessDeny,
    FirstApplicable,
    OneApplicable,
    WeakConsensus,
    StrongConsensus,
}

impl AlgId {
    pub const ALL: [AlgId; 8] = [
        AlgId::PermitOverrides,
        AlgId::DenyOverrides,
        AlgId::DenyUnlessPermit,
        AlgId::PermitUnlessDeny,
        AlgId::FirstApplicable,
        AlgId::OneApplicable,
        AlgId::WeakConsensus,
        AlgId::StrongConsensus,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            AlgId::PermitOverrides => "p-over",
            AlgId::DenyOverrides => "d-over",
            AlgId::DenyUnlessPermit => "d-unless-p",
            AlgId::PermitUnlessDeny => "p-unless-d",
            AlgId::FirstApplicable => "first-app",
            AlgId::OneApplicable => "one-app",
            AlgId::WeakConsensus => "weak-con",
            AlgId::StrongConsensus => "strong-con",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.keyword() == s)
    }
}

/// Obligation instantiation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    All,
    Greedy,
}

impl Strategy {
    pub fn keyword(self) -> &'static str {
        match self {
            Strategy::All => "all",
            Strategy::Greedy => "greedy",
        }
    }
}

/// A combining algorithm together with its instantiation strategy,
/// written `p-over_all`, `first-app_greedy`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alg {
    pub id: AlgId,
    pub strategy: Strategy,
}

impl Alg {
    pub fn new(id: AlgId, strategy: Strategy) -> Self {
        Alg { id, strategy }
    }

    pub fn all(id: AlgId) -> Self {
        Alg { id, strategy: Strategy::All }
    }
}

impl fmt::Display for Alg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.id.keyword(), self.strategy.keyword())
    }
}

/// A basic authorisation rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub effect: Effect,
    pub target: Expr,
    pub obligations: Vec<Obligation>,
}

impl Rule {
    pub fn new(effect: Effect, target: Expr, obligations: Vec<Obligation>) -> Self {
        Rule { effect, target, obligations }
    }

    /// The bare `(permit)` / `(deny)` rule with target `true` and no obligations.
    pub fn bare(effect: Effect) -> Self {
        Rule { effect, target: Expr::TRUE, obligations: Vec::new() }
    }
}

/// A policy set: an algorithm, a target, a non-empty sequence of enclosed
/// policies and per-effect obligation sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicySet {
    pub alg: Alg,
    pub target: Expr,
    pub policies: Vec<Policy>,
    pub obl_permit: Vec<Obligation>,
    pub obl_deny: Vec<Obligation>,
}

impl PolicySet {
    pub fn new(
        alg: Alg,
        target: Expr,
        policies: Vec<Policy>,
        obl_permit: Vec<Obligation>,
        obl_deny: Vec<Obligation>,
    ) -> Result<Self, EmptyPolicySet> {
        if policies.is_empty() {
            return Err(EmptyPolicySet);
        }
        Ok(PolicySet { alg, target, policies, obl_permit, obl_deny })
    }
}

/// Error returned when constructing a policy set with no enclosed policies.
#[derive(Debug, thiserror::Error)]
#[error("a policy set must enclose at least one policy")]
pub struct EmptyPolicySet;

/// A policy: a rule or a policy set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    Rule(Rule),
    Set(Box<PolicySet>),
}

impl Policy {
    pub fn rule(effect: Effect, target: Expr, obligations: Vec<Obligation>) -> Self {
        Policy::Rule(Rule::new(effect, target, obligations))
    }

    pub fn set(
        alg: Alg,
        target: Expr,
        policies: Vec<Policy>,
        obl_permit: Vec<Obligation>,
        obl_deny: Vec<Obligation>,
    ) -> Result<Self, EmptyPolicySet> {
        Ok(Policy::Set(Box::new(PolicySet::new(alg, target, policies, obl_permit, obl_deny)?)))
    }

    /// Nesting depth: 0 for rules, 1 + maximum child depth for policy sets.
    pub fn depth(&self) -> usize {
        match self {
            Policy::Rule(_) => 0,
            Policy::Set(s) => 1 + s.policies.iter().map(Policy::depth).max().unwrap_or(0),
        }
    }

    /// The set of attribute names syntactically occurring in targets and
    /// obligation arguments, recursively.
    pub fn names(&self) -> BTreeSet<AttributeName> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<AttributeName>) {
        match self {
            Policy::Rule(r) => {
                r.target.collect_names(out);
                for o in &r.obligations {
                    o.collect_names(out);
                }
            }
            Policy::Set(s) => {
                s.target.collect_names(out);
                for p in &s.policies {
                    p.collect_names(out);
                }
                for o in s.obl_permit.iter().chain(&s.obl_deny) {
                    o.collect_names(out);
                }
            }
        }
    }

    /// Total number of policies enclosed below this one (the node itself
    /// is not counted).
    pub fn subpolicy_count(&self) -> usize {
        match self {
            Policy::Rule(_) => 0,
            Policy::Set(s) => {
                s.policies.len() + s.policies.iter().map(Policy::subpolicy_count).sum::<usize>()
            }
        }
    }

    /// True when every combining algorithm enclosed in this policy uses
    /// the `all` instantiation strategy.
    pub fn all_strategy_only(&self) -> bool {
        match self {
            Policy::Rule(_) => true,
            Policy::Set(s) => {
                s.alg.strategy == Strategy::All && s.policies.iter().all(Policy::all_strategy_only)
            }
        }
    }
}

/// Names occurring in a single expression.
pub fn expr_names(e: &Expr) -> BTreeSet<AttributeName> {
    let mut out = BTreeSet::new();
    e.collect_names(&mut out);
    out
}

/// PEP enforcement algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnfAlg {
    Base,
    DenyBiased,
    PermitBiased,
}

impl EnfAlg {
    pub fn keyword(self) -> &'static str {
        match self {
            EnfAlg::Base => "base",
            EnfAlg::DenyBiased => "deny-biased",
            EnfAlg::PermitBiased => "permit-biased",
        }
    }
}

/// A policy decision point: a bare policy, or an algorithm applied to a
/// sequence of policies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pdp {
    Policy(Box<Policy>),
    Combined { alg: Alg, policies: Vec<Policy> },
}

impl Pdp {
    pub fn combined(alg: Alg, policies: Vec<Policy>) -> Result<Self, EmptyPolicySet> {
        if policies.is_empty() {
            return Err(EmptyPolicySet);
        }
        Ok(Pdp::Combined { alg, policies })
    }

    pub fn names(&self) -> BTreeSet<AttributeName> {
        let mut out = BTreeSet::new();
        match self {
            Pdp::Policy(p) => p.collect_names(&mut out),
            Pdp::Combined { policies, .. } => {
                for p in policies {
                    p.collect_names(&mut out);
                }
            }
        }
        out
    }
}

impl From<Policy> for Pdp {
    fn from(p: Policy) -> Self {
        Pdp::Policy(Box::new(p))
    }
}

/// A policy authorisation system: an enforcement algorithm paired with a PDP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pas {
    pub enf_alg: EnfAlg,
    pub pdp: Pdp,
}

/// A syntactic request: a non-empty sequence of name/value pairs.
/// Repeated names model multivalued attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntacticRequest {
    pub pairs: Vec<(AttributeName, Value)>,
}

impl SyntacticRequest {
    pub fn new(pairs: Vec<(AttributeName, Value)>) -> Result<Self, EmptyRequest> {
        if pairs.is_empty() {
            return Err(EmptyRequest);
        }
        Ok(SyntacticRequest { pairs })
    }
}

/// Error returned when constructing an empty request.
#[derive(Debug, thiserror::Error)]
#[error("a request must contain at least one attribute")]
pub struct EmptyRequest;

/// Authorisation decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decision {
    Permit,
    Deny,
    NotApp,
    Indet,
}

impl Decision {
    pub const ALL: [Decision; 4] =
        [Decision::Permit, Decision::Deny, Decision::NotApp, Decision::Indet];

    pub fn keyword(self) -> &'static str {
        match self {
            Decision::Permit => "permit",
            Decision::Deny => "deny",
            Decision::NotApp => "not-app",
            Decision::Indet => "indet",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// An instantiated obligation: the action with its arguments evaluated
/// to ground values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstObligation {
    pub ob_type: ObType,
    pub action: String,
    pub args: Vec<GroundValue>,
}

impl fmt::Display for InstObligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}(", self.ob_type.keyword(), self.action)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")]")
    }
}

/// A PDP response: a decision plus the instantiated obligations. The
/// `not-app` and `indet` decisions never carry obligations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdpResponse {
    decision: Decision,
    obligations: Vec<InstObligation>,
}

impl PdpResponse {
    pub fn permit(obligations: Vec<InstObligation>) -> Self {
        PdpResponse { decision: Decision::Permit, obligations }
    }

    pub fn deny(obligations: Vec<InstObligation>) -> Self {
        PdpResponse { decision: Decision::Deny, obligations }
    }

    pub fn not_app() -> Self {
        PdpResponse { decision: Decision::NotApp, obligations: Vec::new() }
    }

    pub fn indet() -> Self {
        PdpResponse { decision: Decision::Indet, obligations: Vec::new() }
    }

    pub fn with_effect(effect: Effect, obligations: Vec<InstObligation>) -> Self {
        match effect {
            Effect::Permit => Self::permit(obligations),
            Effect::Deny => Self::deny(obligations),
        }
    }

    pub fn decision(&self) -> Decision {
        self.decision
    }

    pub fn obligations(&self) -> &[InstObligation] {
        &self.obligations
    }

    pub fn into_obligations(self) -> Vec<InstObligation> {
        self.obligations
    }

    /// Response with the same decision and `self`'s obligations followed
    /// by `extra` (the io₁ • io₂ concatenation).
    pub fn append_obligations(mut self, extra: Vec<InstObligation>) -> Self {
        self.obligations.extend(extra);
        self
    }
}

impl fmt::Display for PdpResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}", self.decision)?;
        for o in &self.obligations {
            write!(f, " {o}")?;
        }
        write!(f, ">")
    }
}
