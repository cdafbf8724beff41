//! SMT-LIB 2 script emission. Every attribute is a `TValue` record (a
//! value of its inferred sort plus missing/error flags), value sets are
//! integer-indexed arrays, strings an enumerated datatype of the policy
//! and request constants plus one fresh "any other string" constant.
//! Emission is deterministic: identical inputs produce byte-identical
//! scripts.
//!
//! The encoding fixes one sort per attribute, so every wrongly-typed
//! binding collapses into the `err` flag; a request binding, say, a
//! boolean to a string-sorted attribute is indistinguishable from any
//! other type mismatch. This is the granularity at which the analysis
//! reasons about errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use facpl_core::ast::AttributeName;
use facpl_core::constraint::{COp, Constraint, ConstraintTuple, Node};
use facpl_core::types::{TypeAssignment, TypeTerm};
use facpl_core::value::{GroundValue, Value};

/// Emission failures.
#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("attribute {0} has no inferred type; run type inference first")]
    MissingType(AttributeName),
    #[error("request binds {name} to {value}, conflicting with its inferred type {expected}")]
    TypedRequest { name: AttributeName, value: String, expected: String },
    #[error("constraint shape not expressible: {0}")]
    Unsupported(String),
}

/// SMT sorts used by the encoding.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Real,
    Int,
    Str,
    Set(Box<Sort>),
}

impl Sort {
    fn from_type(t: &TypeTerm) -> Sort {
        match t {
            TypeTerm::Bool => Sort::Bool,
            TypeTerm::Double => Sort::Real,
            TypeTerm::Date => Sort::Int,
            TypeTerm::Str | TypeTerm::Var(_) => Sort::Str,
            TypeTerm::SetOf(inner) => Sort::Set(Box::new(Sort::from_type(inner))),
        }
    }

    fn text(&self) -> String {
        match self {
            Sort::Bool => "Bool".into(),
            Sort::Real => "Real".into(),
            Sort::Int => "Int".into(),
            Sort::Str => "Str".into(),
            Sort::Set(inner) => format!("(VSet {})", inner.text()),
        }
    }

    /// Short tag used in generated function names.
    fn tag(&self) -> String {
        match self {
            Sort::Bool => "Bool".into(),
            Sort::Real => "Real".into(),
            Sort::Int => "Int".into(),
            Sort::Str => "Str".into(),
            Sort::Set(inner) => format!("Set{}", inner.tag()),
        }
    }

}

/// How a lowered constraint is represented: a plain boolean (classical
/// fragment) or a TValue record of some sort.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Plain,
    TValue(Sort),
}

fn sanitize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else {
            out.push('_');
        }
    }
    if out.is_empty() {
        out.push('_');
    }
    out
}

/// Deterministic map from attribute names to SMT constant symbols.
pub struct NameTable(BTreeMap<AttributeName, String>);

impl NameTable {
    pub fn build(names: impl IntoIterator<Item = AttributeName>) -> Self {
        let sorted: BTreeSet<AttributeName> = names.into_iter().collect();
        let mut used = BTreeSet::new();
        let mut table = BTreeMap::new();
        for n in sorted {
            let base = format!("n_{}_{}", sanitize(&n.category), sanitize(&n.attribute));
            let mut candidate = base.clone();
            let mut k = 2;
            while !used.insert(candidate.clone()) {
                candidate = format!("{base}_{k}");
                k += 1;
            }
            table.insert(n, candidate);
        }
        NameTable(table)
    }

    fn symbol(&self, n: &AttributeName) -> Option<&str> {
        self.0.get(n).map(|s| s.as_str())
    }

    fn iter(&self) -> impl Iterator<Item = (&AttributeName, &String)> {
        self.0.iter()
    }
}

/// The enumerated string sort: one constant per literal plus the
/// distinguished fresh constant standing for every other string.
pub struct StringPool {
    constants: BTreeMap<String, String>,
    other: String,
}

impl StringPool {
    pub fn build(strings: impl IntoIterator<Item = String>) -> Self {
        let sorted: BTreeSet<String> = strings.into_iter().collect();
        let mut used = BTreeSet::new();
        let mut constants = BTreeMap::new();
        for (i, s) in sorted.into_iter().enumerate() {
            let short: String = sanitize(&s).chars().take(16).collect();
            let symbol = format!("cst_{i}_{short}");
            used.insert(symbol.clone());
            constants.insert(s, symbol);
        }
        StringPool { constants, other: "str_other".into() }
    }

    fn symbol(&self, s: &str) -> Option<&str> {
        self.constants.get(s).map(|x| x.as_str())
    }

    /// The enumeration, in declaration order.
    pub fn enumeration(&self) -> Vec<String> {
        self.constants.values().cloned().chain(std::iter::once(self.other.clone())).collect()
    }
}

fn int_literal(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

/// Exact decimal rendering of a binary64 value (every finite double has
/// a finite decimal expansion).
fn real_literal(v: f64) -> String {
    let plain = format!("{v:?}");
    if !plain.contains(['e', 'E']) {
        let body = if plain.contains('.') { plain.trim_start_matches('-').to_string() } else { format!("{}.0", plain.trim_start_matches('-')) };
        return if v.is_sign_negative() && v != 0.0 { format!("(- {body})") } else { body };
    }
    use num_bigint::BigInt;
    let bits = v.to_bits();
    let sign = (bits >> 63) & 1 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_bits == 0 {
        (BigInt::from(frac), -1074i64)
    } else {
        (BigInt::from(frac | (1u64 << 52)), exp_bits - 1075)
    };
    let body = if exp >= 0 {
        let whole = mantissa << exp;
        format!("{whole}.0")
    } else {
        // mantissa / 2^k == mantissa * 5^k / 10^k
        let scaled = (mantissa * BigInt::from(5u8).pow((-exp) as u32)).to_string();
        let k = (-exp) as usize;
        if scaled.len() > k {
            let (int_part, frac_part) = scaled.split_at(scaled.len() - k);
            format!("{int_part}.{frac_part}")
        } else {
            format!("0.{}{}", "0".repeat(k - scaled.len()), scaled)
        }
    };
    if sign {
        format!("(- {body})")
    } else {
        body
    }
}

fn date_to_int(d: &facpl_core::value::Date) -> i64 {
    d.and_utc().timestamp()
}

fn value_sort(v: &Value) -> Sort {
    match v {
        Value::Bool(_) => Sort::Bool,
        Value::Double(_) => Sort::Real,
        Value::Str(_) => Sort::Str,
        Value::Date(_) => Sort::Int,
    }
}

fn value_literal(v: &Value, strings: &StringPool) -> Result<String, EmitError> {
    Ok(match v {
        Value::Bool(b) => b.to_string(),
        Value::Double(d) => real_literal(d.get()),
        Value::Date(d) => int_literal(date_to_int(d)),
        Value::Str(s) => strings
            .symbol(s)
            .ok_or_else(|| EmitError::Unsupported(format!("string {s:?} missing from pool")))?
            .to_string(),
    })
}

/// Operator functions referenced by the lowered constraints, collected
/// so only the needed definitions are emitted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum OpFun {
    IsTrue,
    IsFalse,
    FNot,
    FAnd,
    FOr,
    Equal(Sort),
    In(Sort),
    Gt(Sort),
    Arith(COp),
}

impl OpFun {
    fn name(&self) -> String {
        match self {
            OpFun::IsTrue => "isTrue".into(),
            OpFun::IsFalse => "isFalse".into(),
            OpFun::FNot => "FNot".into(),
            OpFun::FAnd => "FAnd".into(),
            OpFun::FOr => "FOr".into(),
            OpFun::Equal(s) => format!("equal{}", s.tag()),
            OpFun::In(s) => format!("in{}", s.tag()),
            OpFun::Gt(s) => format!("gt{}", s.tag()),
            OpFun::Arith(op) => match op {
                COp::Add => "addReal".into(),
                COp::Subtract => "subReal".into(),
                COp::Multiply => "mulReal".into(),
                COp::Divide => "divReal".into(),
                _ => unreachable!("not an arithmetic operator"),
            },
        }
    }

    fn definition(&self) -> String {
        let bool_true = "(mk-val true false false)";
        let bool_false = "(mk-val false false false)";
        let bool_err = "(mk-val false false true)";
        let bool_miss = "(mk-val false true false)";
        match self {
            OpFun::IsTrue => format!(
                "(define-fun isTrue ((x (TValue Bool))) Bool\n  (and (val x) (not (miss x)) (not (err x))))"
            ),
            OpFun::IsFalse => format!(
                "(define-fun isFalse ((x (TValue Bool))) Bool\n  (and (not (val x)) (not (miss x)) (not (err x))))"
            ),
            OpFun::FNot => format!(
                "(define-fun FNot ((x (TValue Bool))) (TValue Bool)\n  (ite (isTrue x) {bool_false}\n    (ite (isFalse x) {bool_true}\n      (ite (miss x) {bool_miss} {bool_err}))))"
            ),
            OpFun::FAnd => format!(
                "(define-fun FAnd ((x (TValue Bool)) (y (TValue Bool))) (TValue Bool)\n  (ite (and (isTrue x) (isTrue y)) {bool_true}\n    (ite (or (isFalse x) (isFalse y)) {bool_false}\n      (ite (or (err x) (err y)) {bool_err} {bool_miss}))))"
            ),
            OpFun::FOr => format!(
                "(define-fun FOr ((x (TValue Bool)) (y (TValue Bool))) (TValue Bool)\n  (ite (or (isTrue x) (isTrue y)) {bool_true}\n    (ite (and (isFalse x) (isFalse y)) {bool_false}\n      (ite (or (err x) (err y)) {bool_err} {bool_miss}))))"
            ),
            OpFun::Equal(s) => {
                let st = s.text();
                format!(
                    "(define-fun equal{} ((x (TValue {st})) (y (TValue {st}))) (TValue Bool)\n  (ite (or (err x) (err y)) {bool_err}\n    (ite (or (miss x) (miss y)) {bool_miss}\n      (ite (= (val x) (val y)) {bool_true} {bool_false}))))",
                    s.tag()
                )
            }
            OpFun::In(elem) => {
                let et = elem.text();
                format!(
                    "(define-fun in{} ((x (TValue {et})) (y (TValue (VSet {et})))) (TValue Bool)\n  (ite (or (err x) (err y)) {bool_err}\n    (ite (or (miss x) (miss y)) {bool_miss}\n      (ite (exists ((i Int)) (= (val x) (select (val y) i))) {bool_true} {bool_false}))))",
                    elem.tag()
                )
            }
            OpFun::Gt(s) => {
                let st = s.text();
                format!(
                    "(define-fun gt{} ((x (TValue {st})) (y (TValue {st}))) (TValue Bool)\n  (ite (or (err x) (err y)) {bool_err}\n    (ite (or (miss x) (miss y)) {bool_miss}\n      (ite (> (val x) (val y)) {bool_true} {bool_false}))))",
                    s.tag()
                )
            }
            OpFun::Arith(op) => {
                let real_err = "(mk-val 0.0 false true)";
                let real_miss = "(mk-val 0.0 true false)";
                let (fun, body) = match op {
                    COp::Add => ("addReal", "(mk-val (+ (val x) (val y)) false false)".to_string()),
                    COp::Subtract => ("subReal", "(mk-val (- (val x) (val y)) false false)".to_string()),
                    COp::Multiply => ("mulReal", "(mk-val (* (val x) (val y)) false false)".to_string()),
                    COp::Divide => (
                        "divReal",
                        format!("(ite (= (val y) 0.0) {real_err} (mk-val (/ (val x) (val y)) false false))"),
                    ),
                    _ => unreachable!("not an arithmetic operator"),
                };
                format!(
                    "(define-fun {fun} ((x (TValue Real)) (y (TValue Real))) (TValue Real)\n  (ite (or (err x) (err y)) {real_err}\n    (ite (or (miss x) (miss y)) {real_miss}\n      {body})))"
                )
            }
        }
    }
}

struct Lowering<'a> {
    names: &'a NameTable,
    sorts: &'a BTreeMap<AttributeName, Sort>,
    strings: &'a StringPool,
    ops: BTreeSet<OpFun>,
    defs: Vec<(String, Repr, String)>,
    memo: BTreeMap<usize, (String, Repr)>,
    prefix: String,
    counter: usize,
}

impl<'a> Lowering<'a> {
    fn repr_text(repr: &Repr) -> String {
        match repr {
            Repr::Plain => "Bool".into(),
            Repr::TValue(s) => format!("(TValue {})", s.text()),
        }
    }

    fn define(&mut self, expr: String, repr: Repr) -> (String, Repr) {
        let name = format!("{}c{}", self.prefix, self.counter);
        self.counter += 1;
        self.defs.push((name.clone(), repr.clone(), expr));
        (name, repr)
    }

    /// Plain-boolean "is exactly true" coercion of any representation.
    fn coerce_true(&mut self, (expr, repr): (String, Repr)) -> String {
        match repr {
            Repr::Plain => expr,
            Repr::TValue(Sort::Bool) => {
                self.ops.insert(OpFun::IsTrue);
                format!("(isTrue {expr})")
            }
            Repr::TValue(_) => "false".into(),
        }
    }

    fn lower(&mut self, c: &Constraint) -> Result<(String, Repr), EmitError> {
        let key = c.as_key();
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let lowered: (String, Repr) = match c.node() {
            Node::Lit(v) => {
                let text = value_literal(v, self.strings)?;
                (format!("(mk-val {text} false false)"), Repr::TValue(value_sort(v)))
            }
            Node::Name(n) => {
                let symbol = self
                    .names
                    .symbol(n)
                    .ok_or_else(|| EmitError::MissingType(n.clone()))?;
                let sort = self.sorts.get(n).ok_or_else(|| EmitError::MissingType(n.clone()))?;
                (symbol.to_string(), Repr::TValue(sort.clone()))
            }
            Node::IsBot(a) => {
                let (expr, repr) = self.lower(a)?;
                let text = match repr {
                    Repr::Plain => "false".into(),
                    Repr::TValue(_) => format!("(miss {expr})"),
                };
                (text, Repr::Plain)
            }
            Node::IsErr(a) => {
                let (expr, repr) = self.lower(a)?;
                let text = match repr {
                    Repr::Plain => "false".into(),
                    Repr::TValue(_) => format!("(err {expr})"),
                };
                (text, Repr::Plain)
            }
            Node::IsBool(a) => {
                let (expr, repr) = self.lower(a)?;
                let text = match repr {
                    Repr::Plain => "true".into(),
                    Repr::TValue(Sort::Bool) => {
                        format!("(and (not (miss {expr})) (not (err {expr})))")
                    }
                    Repr::TValue(_) => "false".into(),
                };
                (text, Repr::Plain)
            }
            Node::Not(a) => {
                let (expr, repr) = self.lower(a)?;
                let text = match repr {
                    Repr::Plain => format!("(not {expr})"),
                    Repr::TValue(Sort::Bool) => {
                        self.ops.insert(OpFun::IsFalse);
                        format!("(or (isFalse {expr}) (miss {expr}))")
                    }
                    Repr::TValue(_) => format!("(miss {expr})"),
                };
                (text, Repr::Plain)
            }
            Node::FourNot(a) => {
                let lowered = self.lower(a)?;
                match &lowered.1 {
                    Repr::TValue(Sort::Bool) => {
                        self.ops.insert(OpFun::IsTrue);
                        self.ops.insert(OpFun::IsFalse);
                        self.ops.insert(OpFun::FNot);
                        (format!("(FNot {})", lowered.0), Repr::TValue(Sort::Bool))
                    }
                    Repr::TValue(_) => {
                        // a non-boolean operand is ⊥ when missing, error otherwise
                        let expr = lowered.0;
                        (
                            format!(
                                "(ite (miss {expr}) (mk-val false true false) (mk-val false false true))"
                            ),
                            Repr::TValue(Sort::Bool),
                        )
                    }
                    Repr::Plain => {
                        return Err(EmitError::Unsupported(
                            "4-valued negation over a classical operand".into(),
                        ))
                    }
                }
            }
            Node::Bin(op, a, b) => self.lower_bin(*op, a, b)?,
        };
        // short expressions inline; larger ones become shared definitions
        let out = if lowered.0.len() > 40 && !matches!(c.node(), Node::Name(_)) {
            let repr = lowered.1.clone();
            self.define(lowered.0, repr)
        } else {
            lowered
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn lower_bin(&mut self, op: COp, a: &Constraint, b: &Constraint) -> Result<(String, Repr), EmitError> {
        match op {
            COp::And | COp::Or => {
                let la = self.lower(a)?;
                let lb = self.lower(b)?;
                let xa = self.coerce_true(la);
                let xb = self.coerce_true(lb);
                let f = if op == COp::And { "and" } else { "or" };
                Ok((format!("({f} {xa} {xb})"), Repr::Plain))
            }
            COp::FourAnd | COp::FourOr => {
                let (xa, ra) = self.lower(a)?;
                let (xb, rb) = self.lower(b)?;
                if ra != Repr::TValue(Sort::Bool) || rb != Repr::TValue(Sort::Bool) {
                    return Err(EmitError::Unsupported(
                        "4-valued conjunction over non-boolean operands (is the policy well-typed?)".into(),
                    ));
                }
                self.ops.insert(OpFun::IsTrue);
                self.ops.insert(OpFun::IsFalse);
                let f = if op == COp::FourAnd {
                    self.ops.insert(OpFun::FAnd);
                    "FAnd"
                } else {
                    self.ops.insert(OpFun::FOr);
                    "FOr"
                };
                Ok((format!("({f} {xa} {xb})"), Repr::TValue(Sort::Bool)))
            }
            COp::Equal => {
                let (xa, ra) = self.lower(a)?;
                let (xb, rb) = self.lower(b)?;
                match (&ra, &rb) {
                    (Repr::TValue(sa), Repr::TValue(sb)) if sa == sb => {
                        self.ops.insert(OpFun::IsTrue);
                        self.ops.insert(OpFun::Equal(sa.clone()));
                        Ok((format!("(equal{} {xa} {xb})", sa.tag()), Repr::TValue(Sort::Bool)))
                    }
                    _ => Err(EmitError::Unsupported(
                        "equality over mismatched sorts (is the policy well-typed?)".into(),
                    )),
                }
            }
            COp::In => {
                let (xa, ra) = self.lower(a)?;
                let (xb, rb) = self.lower(b)?;
                match (&ra, &rb) {
                    (Repr::TValue(elem), Repr::TValue(Sort::Set(inner))) if **inner == *elem => {
                        self.ops.insert(OpFun::IsTrue);
                        self.ops.insert(OpFun::In(elem.clone()));
                        Ok((format!("(in{} {xa} {xb})", elem.tag()), Repr::TValue(Sort::Bool)))
                    }
                    _ => Err(EmitError::Unsupported(
                        "membership over mismatched sorts (is the policy well-typed?)".into(),
                    )),
                }
            }
            COp::GreaterThan => {
                let (xa, ra) = self.lower(a)?;
                let (xb, rb) = self.lower(b)?;
                match (&ra, &rb) {
                    (Repr::TValue(s @ (Sort::Real | Sort::Int)), Repr::TValue(s2)) if s == s2 => {
                        self.ops.insert(OpFun::IsTrue);
                        self.ops.insert(OpFun::Gt(s.clone()));
                        Ok((format!("(gt{} {xa} {xb})", s.tag()), Repr::TValue(Sort::Bool)))
                    }
                    _ => Err(EmitError::Unsupported(
                        "comparison over non-numeric sorts (is the policy well-typed?)".into(),
                    )),
                }
            }
            COp::Add | COp::Subtract | COp::Multiply | COp::Divide => {
                let (xa, ra) = self.lower(a)?;
                let (xb, rb) = self.lower(b)?;
                if ra != Repr::TValue(Sort::Real) || rb != Repr::TValue(Sort::Real) {
                    return Err(EmitError::Unsupported(
                        "arithmetic over non-double sorts (is the policy well-typed?)".into(),
                    ));
                }
                let f = OpFun::Arith(op);
                let name = f.name();
                self.ops.insert(f);
                Ok((format!("({name} {xa} {xb})"), Repr::TValue(Sort::Real)))
            }
        }
    }
}

/// One policy's lowered decision constraints plus everything needed to
/// assemble full scripts.
pub struct PolicyFragment {
    pub defines: String,
    /// symbols of the four decision constraints, in decision order
    pub decision_symbols: [String; 4],
}

/// Assembles deterministic scripts for one or two policies over a
/// shared attribute space.
pub struct ScriptBuilder {
    names: NameTable,
    sorts: BTreeMap<AttributeName, Sort>,
    strings: StringPool,
    ops: BTreeSet<OpFun>,
    fragments: Vec<PolicyFragment>,
    counter_base: usize,
}

impl ScriptBuilder {
    /// `assignment` must ground every attribute occurring in the tuples
    /// and requests; `strings` is the full string-constant pool.
    pub fn new(assignment: &TypeAssignment, strings: impl IntoIterator<Item = String>) -> Self {
        let sorts: BTreeMap<AttributeName, Sort> =
            assignment.iter().map(|(n, t)| (n.clone(), Sort::from_type(t))).collect();
        ScriptBuilder {
            names: NameTable::build(sorts.keys().cloned()),
            sorts,
            strings: StringPool::build(strings),
            ops: BTreeSet::new(),
            fragments: Vec::new(),
            counter_base: 0,
        }
    }

    pub fn string_enumeration(&self) -> Vec<String> {
        self.strings.enumeration()
    }

    /// Lowers one constraint tuple; decision constraints are named
    /// `<prefix>cns_permit` etc.
    pub fn add_policy(&mut self, prefix: &str, tuple: &ConstraintTuple) -> Result<(), EmitError> {
        let mut lowering = Lowering {
            names: &self.names,
            sorts: &self.sorts,
            strings: &self.strings,
            ops: std::mem::take(&mut self.ops),
            defs: Vec::new(),
            memo: BTreeMap::new(),
            prefix: prefix.to_owned(),
            counter: self.counter_base,
        };
        let mut decision_symbols = Vec::new();
        let mut cns_defs = Vec::new();
        for (label, component) in [
            ("permit", &tuple.permit),
            ("deny", &tuple.deny),
            ("notapp", &tuple.not_app),
            ("indet", &tuple.indet),
        ] {
            let lowered = lowering.lower(component)?;
            let body = lowering.coerce_true(lowered);
            let symbol = format!("{prefix}cns_{label}");
            cns_defs.push(format!("(define-fun {symbol} () Bool {body})"));
            decision_symbols.push(symbol);
        }
        let mut defines = String::new();
        for (name, repr, expr) in &lowering.defs {
            let _ = writeln!(defines, "(define-fun {name} () {} {expr})", Lowering::repr_text(repr));
        }
        for d in cns_defs {
            let _ = writeln!(defines, "{d}");
        }
        self.counter_base = lowering.counter;
        self.ops = lowering.ops;
        self.fragments.push(PolicyFragment {
            defines,
            decision_symbols: decision_symbols.try_into().expect("four decisions"),
        });
        Ok(())
    }

    /// Request assertions. `exact` additionally asserts every unbound
    /// policy attribute missing; the extendable mode leaves them free.
    pub fn request_assertions(
        &self,
        bindings: &BTreeMap<AttributeName, GroundValue>,
        policy_names: &BTreeSet<AttributeName>,
        exact: bool,
    ) -> Result<String, EmitError> {
        let mut out = String::new();
        for (name, value) in bindings {
            let symbol = self
                .names
                .symbol(name)
                .ok_or_else(|| EmitError::MissingType(name.clone()))?;
            let sort = self.sorts.get(name).ok_or_else(|| EmitError::MissingType(name.clone()))?;
            let mismatch = |value: &GroundValue| EmitError::TypedRequest {
                name: name.clone(),
                value: value.to_string(),
                expected: sort.text(),
            };
            match value {
                GroundValue::One(v) => {
                    if value_sort(v) != *sort {
                        return Err(mismatch(value));
                    }
                    let lit = value_literal(v, &self.strings)?;
                    let _ = writeln!(out, "(assert (= (val {symbol}) {lit}))");
                }
                GroundValue::Many(set) => {
                    let Sort::Set(elem) = sort else { return Err(mismatch(value)) };
                    let mut lits = Vec::new();
                    for v in set.iter() {
                        if value_sort(v) != **elem {
                            return Err(mismatch(value));
                        }
                        lits.push(value_literal(v, &self.strings)?);
                    }
                    // every member is present...
                    for lit in &lits {
                        let _ = writeln!(
                            out,
                            "(assert (exists ((i Int)) (= (select (val {symbol}) i) {lit})))"
                        );
                    }
                    // ...and nothing else is
                    let alternatives =
                        lits.iter().map(|l| format!("(= (select (val {symbol}) i) {l})")).collect::<Vec<_>>();
                    let body = if alternatives.len() == 1 {
                        alternatives[0].clone()
                    } else {
                        format!("(or {})", alternatives.join(" "))
                    };
                    let _ = writeln!(out, "(assert (forall ((i Int)) {body}))");
                }
            }
            let _ = writeln!(out, "(assert (and (not (miss {symbol})) (not (err {symbol}))))");
        }
        if exact {
            for n in policy_names {
                if !bindings.contains_key(n) {
                    let symbol = self
                        .names
                        .symbol(n)
                        .ok_or_else(|| EmitError::MissingType(n.clone()))?;
                    let _ = writeln!(out, "(assert (miss {symbol}))");
                }
            }
        }
        Ok(out)
    }

    /// Assembles the final script: declarations, operator definitions,
    /// policy fragments, extra assertions, check-sat.
    pub fn script(&self, assertions: &[String]) -> String {
        let mut out = String::new();
        out.push_str("; generated by facpl-smt\n");
        out.push_str("(set-logic ALL)\n");
        out.push_str(
            "(declare-datatypes ((TValue 1)) ((par (T) ((mk-val (val T) (miss Bool) (err Bool))))))\n",
        );
        out.push_str("(define-sort VSet (T) (Array Int T))\n");
        let enumeration = self.strings.enumeration();
        let _ = writeln!(
            out,
            "(declare-datatypes ((Str 0)) (({})))",
            enumeration.iter().map(|c| format!("({c})")).collect::<Vec<_>>().join(" ")
        );
        for (name, symbol) in self.names.iter() {
            let sort = &self.sorts[name];
            let _ = writeln!(out, "(declare-const {symbol} (TValue {}))", sort.text());
            let _ = writeln!(out, "(assert (not (and (miss {symbol}) (err {symbol}))))");
        }
        for op in &self.ops {
            let _ = writeln!(out, "{}", op.definition());
        }
        for fragment in &self.fragments {
            out.push_str(&fragment.defines);
        }
        for a in assertions {
            let _ = writeln!(out, "{a}");
        }
        out.push_str("(check-sat)\n");
        out
    }

    pub fn fragment(&self, idx: usize) -> &PolicyFragment {
        &self.fragments[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run_script, SolverConfig, Verdict};

    /// The four abstract inputs of the truth tables.
    #[derive(Clone, Copy, PartialEq, Debug)]
    enum Cell {
        T,
        F,
        B,
        E,
    }

    impl Cell {
        fn assertion(self, var: &str) -> String {
            match self {
                Cell::T => format!("(assert (and (val {var}) (not (miss {var})) (not (err {var}))))"),
                Cell::F => format!("(assert (and (not (val {var})) (not (miss {var})) (not (err {var}))))"),
                Cell::B => format!("(assert (and (miss {var}) (not (err {var}))))"),
                Cell::E => format!("(assert (and (err {var}) (not (miss {var}))))"),
            }
        }

        fn record(self) -> &'static str {
            match self {
                Cell::T => "(mk-val true false false)",
                Cell::F => "(mk-val false false false)",
                Cell::B => "(mk-val false true false)",
                Cell::E => "(mk-val false false true)",
            }
        }
    }

    fn prelude(ops: &[OpFun], decls: &str) -> String {
        let mut s = String::new();
        s.push_str("(set-logic ALL)\n");
        s.push_str(
            "(declare-datatypes ((TValue 1)) ((par (T) ((mk-val (val T) (miss Bool) (err Bool))))))\n",
        );
        s.push_str("(define-sort VSet (T) (Array Int T))\n");
        s.push_str("(declare-datatypes ((Str 0)) (((str_other))))\n");
        for op in ops {
            s.push_str(&op.definition());
            s.push('\n');
        }
        s.push_str(decls);
        s
    }

    fn assert_valid(tag: &str, script_body: String, claim: &str) {
        let cfg = SolverConfig::discover().expect(
            "no SMT solver available; build the workspace so facpl-smt-shim exists or set FACPL_SOLVER",
        );
        let dir = std::env::temp_dir().join(format!("facpl-tt-{}", std::process::id()));
        let path = dir.join(format!("{tag}.smt2"));
        let script = format!("{script_body}(assert (not {claim}))\n(check-sat)\n");
        let verdict = run_script(&cfg, &script, &path).expect("solver ran");
        assert_eq!(verdict.verdict, Verdict::Unsat, "{tag}: {claim} not valid\n{script}");
    }

    /// The and/or tables: true iff both/either true, false dominating
    /// for and (dually for or), ⊥ only against true/⊥ (false/⊥), error
    /// otherwise.
    fn and_table(x: Cell, y: Cell) -> Cell {
        use Cell::*;
        match (x, y) {
            (T, T) => T,
            (F, _) | (_, F) => F,
            (B, T) | (T, B) | (B, B) => B,
            _ => E,
        }
    }

    fn or_table(x: Cell, y: Cell) -> Cell {
        use Cell::*;
        match (x, y) {
            (T, _) | (_, T) => T,
            (F, F) => F,
            (B, F) | (F, B) | (B, B) => B,
            _ => E,
        }
    }

    #[test]
    fn emitted_four_valued_functions_match_published_tables() {
        let cells = [Cell::T, Cell::F, Cell::B, Cell::E];
        let decls = "(declare-const x (TValue Bool))\n(declare-const y (TValue Bool))\n";
        let ops = [OpFun::IsTrue, OpFun::IsFalse, OpFun::FNot, OpFun::FAnd, OpFun::FOr];
        for (i, x) in cells.iter().enumerate() {
            for (j, y) in cells.iter().enumerate() {
                let base = format!(
                    "{}{}\n{}\n",
                    prelude(&ops, decls),
                    x.assertion("x"),
                    y.assertion("y")
                );
                assert_valid(
                    &format!("fand-{i}{j}"),
                    base.clone(),
                    &format!("(= (FAnd x y) {})", and_table(*x, *y).record()),
                );
                assert_valid(
                    &format!("for-{i}{j}"),
                    base,
                    &format!("(= (FOr x y) {})", or_table(*x, *y).record()),
                );
            }
            let not_expected = match x {
                Cell::T => Cell::F,
                Cell::F => Cell::T,
                other => *other,
            };
            let base = format!("{}{}\n", prelude(&ops, decls), x.assertion("x"));
            assert_valid(
                &format!("fnot-{i}"),
                base,
                &format!("(= (FNot x) {})", not_expected.record()),
            );
        }
    }

    #[test]
    fn emitted_comparisons_propagate_bottom_and_error() {
        // rows of the =, in and > clauses where at least one operand is
        // ⊥ or error; the value row is checked to yield a plain boolean
        let cells = [Cell::B, Cell::E];
        let cases: [(&str, &str, OpFun); 3] = [
            ("equalStr", "(declare-const x (TValue Str))\n(declare-const y (TValue Str))\n", OpFun::Equal(Sort::Str)),
            ("inStr", "(declare-const x (TValue Str))\n(declare-const y (TValue (VSet Str)))\n", OpFun::In(Sort::Str)),
            ("gtReal", "(declare-const x (TValue Real))\n(declare-const y (TValue Real))\n", OpFun::Gt(Sort::Real)),
        ];
        for (fun, decls, op) in cases {
            let ops = [OpFun::IsTrue, OpFun::IsFalse, op];
            for x in cells {
                for y in cells {
                    let expected = if x == Cell::E || y == Cell::E { Cell::E } else { Cell::B };
                    let base = format!(
                        "{}{}\n{}\n",
                        prelude(&ops, decls),
                        x.assertion("x"),
                        y.assertion("y")
                    );
                    assert_valid(
                        &format!("{fun}-{x:?}{y:?}"),
                        base,
                        &format!("(= ({fun} x y) {})", expected.record()),
                    );
                }
                // one side bound, the other ⊥/error: the special value wins
                let base = format!(
                    "{}{}\n{}\n",
                    prelude(&ops, decls),
                    x.assertion("x"),
                    "(assert (and (not (miss y)) (not (err y))))"
                );
                assert_valid(
                    &format!("{fun}-{x:?}-bound"),
                    base,
                    &format!("(= ({fun} x y) {})", x.record()),
                );
            }
            // both bound: the result is a plain boolean record
            let base = format!(
                "{}{}\n{}\n",
                prelude(&ops, decls),
                "(assert (and (not (miss x)) (not (err x))))",
                "(assert (and (not (miss y)) (not (err y))))"
            );
            assert_valid(
                &format!("{fun}-bound"),
                base,
                &format!("(and (not (miss ({fun} x y))) (not (err ({fun} x y))))"),
            );
        }
    }

    #[test]
    fn real_literals_are_exact() {
        assert_eq!(real_literal(5.0), "5.0");
        assert_eq!(real_literal(-2.5), "(- 2.5)");
        assert_eq!(real_literal(0.1), "0.1");
        // 1e300 round-trips through the exact expansion
        let s = real_literal(1e300);
        assert!(!s.contains('e') && s.ends_with(".0"), "{s}");
        assert!(s.len() > 300);
        let tiny = real_literal(5e-324);
        assert!(tiny.starts_with("0.") && tiny.len() > 700, "{}", tiny.len());
    }

    #[test]
    fn int_literals_wrap_negatives() {
        assert_eq!(int_literal(5), "5");
        assert_eq!(int_literal(-5), "(- 5)");
    }

    #[test]
    fn sanitizer_and_name_collisions() {
        let a = AttributeName::new("sub", "a-b");
        let b = AttributeName::new("sub", "a_b");
        let t = NameTable::build([a.clone(), b.clone()]);
        let sa = t.symbol(&a).unwrap();
        let sb = t.symbol(&b).unwrap();
        assert_ne!(sa, sb);
        assert!(sa.starts_with("n_sub_a"));
    }

    #[test]
    fn string_pool_is_sorted_and_distinguished() {
        let p = StringPool::build(["b".into(), "a".into(), "b".into()]);
        let e = p.enumeration();
        assert_eq!(e.len(), 3);
        assert_eq!(e[2], "str_other");
        assert!(e[0].contains("a") && e[1].contains("b"));
    }
}
