//! Literal values, value sets and the extended value universe used by
//! expression and constraint evaluation.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use chrono::NaiveDateTime;

/// IEEE-754 binary64 with a fixed, total equality: negative zero is
/// normalised to positive zero and every NaN collapses to one canonical
/// bit pattern, so repeated evaluations always agree.
#[derive(Clone, Copy, Debug)]
pub struct Double(f64);

impl Double {
    pub fn new(v: f64) -> Self {
        if v.is_nan() {
            Double(f64::NAN)
        } else if v == 0.0 {
            Double(0.0)
        } else {
            Double(v)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Double {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == std::cmp::Ordering::Equal
    }
}

impl Eq for Double {}

impl PartialOrd for Double {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Double {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::hash::Hash for Double {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Double {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A calendar date with optional time of day, second precision. A date
/// without a time component normalises to midnight, so `2016-10-22` and
/// `2016-10-22T00:00:00` denote the same value.
pub type Date = NaiveDateTime;

/// A literal value: boolean, double, string or date.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Double(Double),
    Str(String),
    Date(Date),
}

impl Value {
    pub fn double(v: f64) -> Self {
        Value::Double(Double::new(v))
    }

    pub fn string(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_double(&self) -> Option<f64> {
        match self {
            Value::Double(d) => Some(d.get()),
            _ => None,
        }
    }

    /// True when `self` and `other` belong to the same literal domain
    /// (both booleans, both doubles, both strings or both dates).
    pub fn same_domain(&self, other: &Value) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Double(d) => write!(f, "{d}"),
            Value::Str(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Value::Date(d) => {
                let t = d.time();
                use chrono::Timelike;
                if t.num_seconds_from_midnight() == 0 {
                    write!(f, "{}", d.format("%Y-%m-%d"))
                } else {
                    write!(f, "{}", d.format("%Y-%m-%dT%H:%M:%S"))
                }
            }
        }
    }
}

/// A finite, non-empty set of literal values. Sets never contain ⊥ or
/// error; iteration order is canonical (sorted by type tag, then value).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ValueSet(BTreeSet<Value>);

impl ValueSet {
    pub fn singleton(v: Value) -> Self {
        let mut s = BTreeSet::new();
        s.insert(v);
        ValueSet(s)
    }

    pub fn pair(a: Value, b: Value) -> Self {
        let mut s = BTreeSet::new();
        s.insert(a);
        s.insert(b);
        ValueSet(s)
    }

    pub fn insert(&mut self, v: Value) {
        self.0.insert(v);
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.contains(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }

    /// True when every element belongs to the same literal domain as `probe`.
    pub fn homogeneous_with(&self, probe: &Value) -> bool {
        self.0.iter().all(|v| v.same_domain(probe))
    }
}

impl FromIterator<Value> for ValueSet {
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        ValueSet(iter.into_iter().collect())
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A value bound to an attribute name by a request: either a single
/// literal or a (merged, multivalued) set of literals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundValue {
    One(Value),
    Many(Arc<ValueSet>),
}

impl fmt::Display for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundValue::One(v) => write!(f, "{v}"),
            GroundValue::Many(s) => write!(f, "{s}"),
        }
    }
}

/// Result universe of expression and constraint evaluation: a literal
/// value, a set of values, the missing-attribute marker ⊥, or error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedValue {
    Val(Value),
    Set(Arc<ValueSet>),
    Bottom,
    Error,
}

impl ExtendedValue {
    pub const TRUE: ExtendedValue = ExtendedValue::Val(Value::Bool(true));
    pub const FALSE: ExtendedValue = ExtendedValue::Val(Value::Bool(false));

    pub fn bool(b: bool) -> Self {
        ExtendedValue::Val(Value::Bool(b))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, ExtendedValue::Val(Value::Bool(true)))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, ExtendedValue::Val(Value::Bool(false)))
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, ExtendedValue::Val(Value::Bool(_)))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, ExtendedValue::Bottom)
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ExtendedValue::Error)
    }

    pub fn as_double(&self) -> Option<f64> {
        match self {
            ExtendedValue::Val(v) => v.as_double(),
            _ => None,
        }
    }

    /// The ground value carried by this result, if any.
    pub fn to_ground(&self) -> Option<GroundValue> {
        match self {
            ExtendedValue::Val(v) => Some(GroundValue::One(v.clone())),
            ExtendedValue::Set(s) => Some(GroundValue::Many(s.clone())),
            ExtendedValue::Bottom | ExtendedValue::Error => None,
        }
    }
}

impl From<GroundValue> for ExtendedValue {
    fn from(g: GroundValue) -> Self {
        match g {
            GroundValue::One(v) => ExtendedValue::Val(v),
            GroundValue::Many(s) => ExtendedValue::Set(s),
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Val(v) => write!(f, "{v}"),
            ExtendedValue::Set(s) => write!(f, "{s}"),
            ExtendedValue::Bottom => write!(f, "bottom"),
            ExtendedValue::Error => write!(f, "error"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_normalisation() {
        assert_eq!(Value::double(5.0), Value::double(5.0));
        assert_eq!(Value::double(-0.0), Value::double(0.0));
        assert_eq!(Value::double(f64::NAN), Value::double(-f64::NAN));
        assert_ne!(Value::double(5.0), Value::double(5.1));
    }

    #[test]
    fn date_midnight_prints_short() {
        let d: Date = "2016-10-22T00:00:00".parse().unwrap();
        assert_eq!(Value::Date(d).to_string(), "2016-10-22");
        let t: Date = "2016-10-22T10:15:12".parse().unwrap();
        assert_eq!(Value::Date(t).to_string(), "2016-10-22T10:15:12");
    }

    #[test]
    fn set_is_canonical() {
        let s1 = ValueSet::pair(Value::string("b"), Value::string("a"));
        let s2 = ValueSet::pair(Value::string("a"), Value::string("b"));
        assert_eq!(s1, s2);
        assert_eq!(s1.to_string(), "{\"a\", \"b\"}");
        assert_eq!(ValueSet::pair(Value::double(1.0), Value::double(1.0)).len(), 1);
    }

    #[test]
    fn string_display_escapes() {
        assert_eq!(Value::string("a\"b\\c").to_string(), "\"a\\\"b\\\\c\"");
    }
}
