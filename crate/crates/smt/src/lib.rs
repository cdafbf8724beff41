//! SMT-LIB 2 emission and solver-backed verification of authorisation
//! and structural properties for FACPL policies.

pub mod emit;
pub mod solver;
pub mod verify;

pub use emit::{EmitError, ScriptBuilder};
pub use solver::{run_solver, SolverConfig, SolverError, SolverVerdict, Verdict};
pub use verify::{
    emit_policy_script, parse_property_file, render_constraint_tuple, ParsedProperty,
    PropertyOutcome, PropertyQuery, QueryReport, Verifier, VerifyError,
};
