//! FACPL policy engine: abstract syntax, concrete-syntax front end,
//! PDP/PEP evaluation semantics, constraint representation and
//! translation, type inference and the randomized policy generator.

pub mod ast;
pub mod batch;
pub mod constraint;
pub mod enforce;
pub mod eval;
pub mod generator;
pub mod oracle;
pub mod parser;
pub mod printer;
pub mod request;
pub mod translate;
pub mod types;
pub mod value;

pub use ast::{
    Alg, AlgId, AttributeName, BinOp, Decision, Effect, EnfAlg, Expr, InstObligation, ObType,
    Obligation, Pas, Pdp, PdpResponse, Policy, PolicySet, Rule, Strategy, SyntacticRequest,
};
pub use request::{build_request, ContextProvider, SemanticRequest, SystemTimeProvider};
pub use value::{Date, Double, ExtendedValue, GroundValue, Value, ValueSet};
