//! Semantic requests: the total map from attribute names to values,
//! value sets or ⊥, built from syntactic requests by the merge operator.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::ast::{AttributeName, SyntacticRequest};
use crate::value::{ExtendedValue, GroundValue, Value, ValueSet};

/// Supplies values for attribute names the request leaves unbound, in
/// place of the run-time context handler. Implementations must be
/// referentially transparent within one evaluation run; results are
/// memoized after the first retrieval so repeated lookups agree.
pub trait ContextProvider: Send + Sync {
    /// `None` leaves the attribute missing (⊥).
    fn retrieve(&self, name: &AttributeName) -> Option<GroundValue>;
}

/// Context provider binding only `system/time` to the current time.
pub struct SystemTimeProvider;

impl ContextProvider for SystemTimeProvider {
    fn retrieve(&self, name: &AttributeName) -> Option<GroundValue> {
        use chrono::Timelike;
        if name.category == "system" && name.attribute == "time" {
            let now = chrono::Utc::now().naive_utc();
            let now = now.with_nanosecond(0).unwrap_or(now);
            Some(GroundValue::One(Value::Date(now)))
        } else {
            None
        }
    }
}

/// Context provider with a fixed set of bindings; handy in tests.
pub struct FixedProvider(pub BTreeMap<AttributeName, GroundValue>);

impl ContextProvider for FixedProvider {
    fn retrieve(&self, name: &AttributeName) -> Option<GroundValue> {
        self.0.get(name).cloned()
    }
}

/// The total map from attribute names to `Value | ValueSet | ⊥`,
/// realised as a finite map defaulting to ⊥, with an optional context
/// provider consulted (once, memoized) before defaulting.
pub struct SemanticRequest {
    bindings: BTreeMap<AttributeName, GroundValue>,
    provider: Option<Arc<dyn ContextProvider>>,
    cache: Mutex<HashMap<AttributeName, Option<GroundValue>>>,
}

impl SemanticRequest {
    /// The request binding nothing; every name maps to ⊥.
    pub fn empty() -> Self {
        SemanticRequest { bindings: BTreeMap::new(), provider: None, cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_bindings(bindings: BTreeMap<AttributeName, GroundValue>) -> Self {
        SemanticRequest { bindings, provider: None, cache: Mutex::new(HashMap::new()) }
    }

    pub fn with_provider(mut self, provider: Arc<dyn ContextProvider>) -> Self {
        self.provider = Some(provider);
        self
    }

    /// Names directly bound by the request (not including provider results).
    pub fn bound_names(&self) -> impl Iterator<Item = &AttributeName> {
        self.bindings.keys()
    }

    pub fn binding(&self, name: &AttributeName) -> Option<&GroundValue> {
        self.bindings.get(name)
    }

    /// Total lookup: the bound value, a merged value set, a memoized
    /// provider result, or ⊥.
    pub fn lookup(&self, name: &AttributeName) -> ExtendedValue {
        if let Some(g) = self.bindings.get(name) {
            return g.clone().into();
        }
        let Some(provider) = &self.provider else {
            return ExtendedValue::Bottom;
        };
        let mut cache = self.cache.lock().expect("context cache poisoned");
        let entry = cache.entry(name.clone()).or_insert_with(|| provider.retrieve(name));
        match entry {
            Some(g) => g.clone().into(),
            None => ExtendedValue::Bottom,
        }
    }
}

impl Clone for SemanticRequest {
    fn clone(&self) -> Self {
        SemanticRequest {
            bindings: self.bindings.clone(),
            provider: self.provider.clone(),
            cache: Mutex::new(self.cache.lock().expect("context cache poisoned").clone()),
        }
    }
}

impl std::fmt::Debug for SemanticRequest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemanticRequest")
            .field("bindings", &self.bindings)
            .field("has_provider", &self.provider.is_some())
            .finish()
    }
}

/// Merge of an existing binding with one more attribute value, written
/// v ⋓ v' in the request semantics: two scalars form a two-element set
/// (a repeated identical value collapses to a singleton set), a set
/// absorbs the new value, and ⊥ becomes the value itself.
fn merge(existing: Option<GroundValue>, v: Value) -> GroundValue {
    match existing {
        None => GroundValue::One(v),
        Some(GroundValue::One(u)) => GroundValue::Many(Arc::new(ValueSet::pair(u, v))),
        Some(GroundValue::Many(s)) => {
            let mut set = (*s).clone();
            set.insert(v);
            GroundValue::Many(Arc::new(set))
        }
    }
}

/// Clause for requests: fold every pair of the syntactic request into the
/// finite map, merging repeated names.
pub fn build_request(request: &SyntacticRequest) -> SemanticRequest {
    let mut bindings: BTreeMap<AttributeName, GroundValue> = BTreeMap::new();
    for (name, value) in &request.pairs {
        let existing = bindings.remove(name);
        bindings.insert(name.clone(), merge(existing, value.clone()));
    }
    SemanticRequest::from_bindings(bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::name;

    fn req(pairs: &[(&str, Value)]) -> SyntacticRequest {
        SyntacticRequest::new(pairs.iter().map(|(n, v)| (name(n), v.clone())).collect()).unwrap()
    }

    #[test]
    fn single_pair_binds_one_name() {
        let r = build_request(&req(&[("a/b", Value::double(5.0))]));
        assert_eq!(r.lookup(&name("a/b")), ExtendedValue::Val(Value::double(5.0)));
        assert_eq!(r.lookup(&name("a/c")), ExtendedValue::Bottom);
    }

    #[test]
    fn repeated_name_merges_to_set() {
        let r = build_request(&req(&[
            ("subject/permission", Value::string("e-Pre-Read")),
            ("subject/permission", Value::string("e-Pre-Write")),
        ]));
        match r.lookup(&name("subject/permission")) {
            ExtendedValue::Set(s) => {
                assert_eq!(s.len(), 2);
                assert!(s.contains(&Value::string("e-Pre-Read")));
                assert!(s.contains(&Value::string("e-Pre-Write")));
            }
            other => panic!("expected set, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_identical_values_collapse_to_singleton_set() {
        let r = build_request(&req(&[("a/b", Value::double(1.0)), ("a/b", Value::double(1.0))]));
        match r.lookup(&name("a/b")) {
            ExtendedValue::Set(s) => assert_eq!(s.len(), 1),
            other => panic!("expected singleton set, got {other:?}"),
        }
    }

    #[test]
    fn three_values_union() {
        let r = build_request(&req(&[
            ("a/b", Value::double(1.0)),
            ("a/b", Value::double(2.0)),
            ("a/b", Value::double(3.0)),
        ]));
        match r.lookup(&name("a/b")) {
            ExtendedValue::Set(s) => assert_eq!(s.len(), 3),
            other => panic!("expected set, got {other:?}"),
        }
    }

    #[test]
    fn provider_is_memoized() {
        use std::sync::atomic::{AtomicUsize, Ordering};

        struct Counting(AtomicUsize);
        impl ContextProvider for Counting {
            fn retrieve(&self, name: &AttributeName) -> Option<GroundValue> {
                self.0.fetch_add(1, Ordering::SeqCst);
                (name.category == "system").then(|| GroundValue::One(Value::double(1.0)))
            }
        }

        let provider = Arc::new(Counting(AtomicUsize::new(0)));
        let r = SemanticRequest::empty().with_provider(provider.clone());
        assert_eq!(r.lookup(&name("system/x")), ExtendedValue::Val(Value::double(1.0)));
        assert_eq!(r.lookup(&name("system/x")), ExtendedValue::Val(Value::double(1.0)));
        assert_eq!(r.lookup(&name("other/x")), ExtendedValue::Bottom);
        assert_eq!(r.lookup(&name("other/x")), ExtendedValue::Bottom);
        assert_eq!(provider.0.load(Ordering::SeqCst), 2);
    }
}
