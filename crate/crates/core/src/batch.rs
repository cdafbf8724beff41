//! Data-parallel helpers for batch evaluation. With the `parallel`
//! feature (on by default) the loops run on rayon; without it they fall
//! back to sequential iteration with the same results.

use crate::ast::{PdpResponse, Policy};
use crate::eval::eval_policy;
use crate::request::SemanticRequest;

#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Evaluates one policy against a batch of requests.
pub fn eval_policy_batch(p: &Policy, requests: &[SemanticRequest]) -> Vec<PdpResponse> {
    par_map(requests, |r| eval_policy(p, r))
}

/// Strictly sequential variant, kept for benchmarking against the
/// parallel path.
pub fn eval_policy_batch_sequential(p: &Policy, requests: &[SemanticRequest]) -> Vec<PdpResponse> {
    requests.iter().map(|r| eval_policy(p, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{name, Effect, Expr, Value};
    use crate::oracle::{domain_for_policy, enumerate_requests};

    #[test]
    fn parallel_and_sequential_agree() {
        let p = Policy::rule(
            Effect::Permit,
            Expr::equal(Expr::Name(name("a/x")), Expr::Lit(Value::string("v"))),
            vec![],
        );
        let reqs = enumerate_requests(&domain_for_policy(&p), 1000).unwrap();
        assert_eq!(eval_policy_batch(&p, &reqs), eval_policy_batch_sequential(&p, &reqs));
    }
}
