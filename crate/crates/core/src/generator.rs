//! Randomized policy test-bed: policies p(d, w, a) with controlled
//! depth, width and attribute-name count, deterministic for a fixed seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Alg, AlgId, AttributeName, Effect, Expr, ObType, Obligation, Policy, Strategy};
use crate::value::Value;

/// Shape parameters of a generated policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub depth: u32,
    pub width: u32,
    pub attribute_count: u32,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(depth: u32, width: u32, attribute_count: u32, seed: u64) -> Self {
        GenSpec { depth, width, attribute_count, seed }
    }
}

/// Generation errors: invalid or oversized shapes.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("depth, width and attribute count must all be at least 1")]
    Degenerate,
    #[error("policy shape guard exceeded: depth and width are limited to 8 ({subpolicies} sub-policies requested)")]
    TooLarge { subpolicies: u64 },
}

/// Total number of sub-policies of p(d, w, ·): Σ_{i=1..d} wⁱ.
pub fn subpolicy_count(depth: u32, width: u32) -> u64 {
    (1..=depth).map(|i| (width as u64).pow(i)).sum()
}

/// How a generated attribute is used, keeping generated policies
/// well-typed: scalar names appear in equality tests, set names in
/// membership tests.
#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Scalar,
    Set,
}

struct Gen {
    rng: ChaCha8Rng,
    names: Vec<(AttributeName, NameKind)>,
    width: u32,
}

impl Gen {
    fn pool(name: &AttributeName) -> Vec<Value> {
        (0..4).map(|k| Value::string(format!("{}-v{k}", name.attribute))).collect()
    }

    fn pick_name(&mut self, kind: NameKind) -> Option<(AttributeName, NameKind)> {
        let candidates: Vec<_> =
            self.names.iter().filter(|(_, k)| *k == kind).map(|(n, _)| n.clone()).collect();
        if candidates.is_empty() {
            return None;
        }
        Some((candidates[self.rng.gen_range(0..candidates.len())].clone(), kind))
    }

    fn atom(&mut self) -> Expr {
        let preferred = if self.rng.gen_bool(0.5) { NameKind::Scalar } else { NameKind::Set };
        let fallback = match preferred {
            NameKind::Scalar => NameKind::Set,
            NameKind::Set => NameKind::Scalar,
        };
        let (n, kind) = self
            .pick_name(preferred)
            .or_else(|| self.pick_name(fallback))
            .expect("the name pool is non-empty");
        let pool = Self::pool(&n);
        let lit = pool[self.rng.gen_range(0..pool.len())].clone();
        match kind {
            NameKind::Scalar => Expr::equal(Expr::Name(n), Expr::Lit(lit)),
            NameKind::Set => Expr::is_in(Expr::Lit(lit), Expr::Name(n)),
        }
    }

    fn target(&mut self) -> Expr {
        let atoms = self.rng.gen_range(1..=3);
        let mut e = self.atom();
        for _ in 1..atoms {
            e = Expr::and(e, self.atom());
        }
        e
    }

    fn maybe_obligation(&mut self) -> Vec<Obligation> {
        if !self.rng.gen_bool(0.3) {
            return Vec::new();
        }
        let count = self.rng.gen_range(1..=2);
        let args = (0..count)
            .map(|_| {
                let idx = self.rng.gen_range(0..self.names.len());
                Expr::Name(self.names[idx].0.clone())
            })
            .collect();
        vec![Obligation::new(ObType::Mandatory, "log", args)]
    }

    fn alg(&mut self) -> Alg {
        Alg { id: AlgId::ALL[self.rng.gen_range(0..AlgId::ALL.len())], strategy: Strategy::All }
    }

    fn node(&mut self, level: u32, depth: u32) -> Policy {
        if level == depth {
            let effect = if self.rng.gen_bool(0.5) { Effect::Permit } else { Effect::Deny };
            return Policy::rule(effect, self.target(), self.maybe_obligation());
        }
        let children = (0..self.width).map(|_| self.node(level + 1, depth)).collect();
        let alg = self.alg();
        let target = self.target();
        let (obl_permit, obl_deny) = if self.rng.gen_bool(0.5) {
            (self.maybe_obligation(), Vec::new())
        } else {
            (Vec::new(), self.maybe_obligation())
        };
        Policy::set(alg, target, children, obl_permit, obl_deny)
            .expect("width is at least 1")
    }
}

/// Generates the policy p(d, w, a) for the given seed: a policy-set
/// hierarchy with exactly `w` children per internal node and `d`
/// nesting levels, whose leaf rules carry random effects and whose
/// targets draw equality/membership atoms over a pool of `a` names.
pub fn gen_policy(spec: GenSpec) -> Result<Policy, GenError> {
    if spec.depth == 0 || spec.width == 0 || spec.attribute_count == 0 {
        return Err(GenError::Degenerate);
    }
    if spec.depth > 8 || spec.width > 8 {
        return Err(GenError::TooLarge { subpolicies: subpolicy_count(spec.depth, spec.width) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let names = (0..spec.attribute_count)
        .map(|i| {
            let name = AttributeName::new(format!("cat{}", i % 4), format!("attr{i}"));
            // each name has one fixed role so generated policies stay well-typed
            let kind = if i == 0 {
                NameKind::Scalar
            } else if i == 1 {
                NameKind::Set
            } else if rng.gen_bool(0.5) {
                NameKind::Scalar
            } else {
                NameKind::Set
            };
            (name, kind)
        })
        .collect::<Vec<_>>();
    let mut gen = Gen { rng, names, width: spec.width };
    Ok(gen.node(0, spec.depth))
}

/// The literal pool associated with a generated attribute name; exposed
/// for oracle domain seeding.
pub fn literal_pool(name: &AttributeName) -> Vec<Value> {
    Gen::pool(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subpolicy_count_formula() {
        assert_eq!(subpolicy_count(1, 1), 1);
        assert_eq!(subpolicy_count(3, 2), 14);
        assert_eq!(subpolicy_count(4, 5), 780);
        assert_eq!(subpolicy_count(2, 3), 12);
        assert_eq!(subpolicy_count(5, 5), 3905);
    }

    #[test]
    fn generated_shape_matches_spec() {
        for (d, w) in [(1u32, 1u32), (2, 3), (3, 2), (4, 3)] {
            let p = gen_policy(GenSpec::new(d, w, 6, 42)).unwrap();
            assert_eq!(p.depth(), d as usize, "depth for ({d},{w})");
            assert_eq!(p.subpolicy_count() as u64, subpolicy_count(d, w), "count for ({d},{w})");
            assert_internal_width(&p, w);
        }
    }

    fn assert_internal_width(p: &Policy, w: u32) {
        if let Policy::Set(s) = p {
            assert_eq!(s.policies.len(), w as usize);
            assert_eq!(s.alg.strategy, Strategy::All);
            for child in &s.policies {
                assert_internal_width(child, w);
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = gen_policy(GenSpec::new(3, 3, 10, 7)).unwrap();
        let b = gen_policy(GenSpec::new(3, 3, 10, 7)).unwrap();
        assert_eq!(a, b);
        let c = gen_policy(GenSpec::new(3, 3, 10, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn name_count_is_bounded() {
        let p = gen_policy(GenSpec::new(3, 3, 5, 1)).unwrap();
        assert!(p.names().len() <= 5);
        // with a tiny pool names repeat across levels
        let p = gen_policy(GenSpec::new(3, 3, 2, 1)).unwrap();
        assert!(p.names().len() <= 2);
    }

    #[test]
    fn guard_rejects_oversized_shapes() {
        assert!(matches!(gen_policy(GenSpec::new(9, 2, 5, 0)), Err(GenError::TooLarge { .. })));
        assert!(matches!(gen_policy(GenSpec::new(0, 2, 5, 0)), Err(GenError::Degenerate)));
    }

    #[test]
    fn generated_policies_are_welltyped() {
        for seed in 0..20 {
            let p = gen_policy(GenSpec::new(3, 2, 6, seed)).unwrap();
            assert!(crate::types::welltyped(&p).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn generated_policies_round_trip() {
        for seed in 0..10 {
            let p = gen_policy(GenSpec::new(2, 3, 8, seed)).unwrap();
            let text = crate::printer::print_policy(&p);
            let reparsed = crate::parser::parse_policy_only(&text, "<gen>").unwrap();
            assert_eq!(reparsed, p, "seed {seed}");
        }
    }
}
