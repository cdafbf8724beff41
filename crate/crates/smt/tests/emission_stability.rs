//! Script emission must be deterministic: identical inputs produce
//! byte-identical scripts, pinned by a golden file for a small policy.

use facpl_core::parser::parse_policy_only;
use facpl_smt::emit_policy_script;

const SMALL_POLICY: &str = r#"
{ p-over_all
  target: equal(res/typ, "doc")
  policies:
    (permit target: equal(sub/role, "owner") and in("read", sub/perm))
    (deny)
  obl-p: [m log(sub/id)]
}
"#;

#[test]
fn emission_is_deterministic() {
    let p = parse_policy_only(SMALL_POLICY, "<golden>").unwrap();
    let a = emit_policy_script(&p).unwrap();
    let b = emit_policy_script(&p).unwrap();
    assert_eq!(a, b);
    // reparsing and emitting again still yields the same bytes
    let reparsed = parse_policy_only(&facpl_core::printer::print_policy(&p), "<golden>").unwrap();
    let c = emit_policy_script(&reparsed).unwrap();
    assert_eq!(a, c);
}

#[test]
fn emission_matches_golden_file() {
    let p = parse_policy_only(SMALL_POLICY, "<golden>").unwrap();
    let script = emit_policy_script(&p).unwrap();
    let golden_path = format!("{}/tests/golden/small_policy.smt2", env!("CARGO_MANIFEST_DIR"));
    let golden = std::fs::read_to_string(&golden_path)
        .unwrap_or_else(|e| panic!("missing golden file {golden_path}: {e}"));
    assert_eq!(script, golden, "emitted script drifted from the golden file");
}
