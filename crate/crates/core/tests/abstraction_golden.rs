//! Golden abstraction cases checked against the library and against a
//! string-level oracle that knows nothing about the rule engine.

mod common;

use wflens::abstraction::{abstract_path, default_ruleset};
use wflens::workflow::ConcretePath;

use common::{golden_cases as cases, oracle};

#[test]
fn canonical_step_uses_example() {
    let path: ConcretePath = "jobs.build.steps[0].uses".parse().unwrap();
    assert_eq!(
        abstract_path(&path, default_ruleset()).to_string(),
        "jobs.<id>.steps[*].uses"
    );
}

#[test]
fn golden_file_matches_library() {
    let cases = cases();
    assert!(cases.len() >= 50, "only {} cases", cases.len());
    for (concrete, expected) in &cases {
        let path: ConcretePath = concrete.parse().unwrap();
        assert_eq!(
            &abstract_path(&path, default_ruleset()).to_string(),
            expected,
            "{concrete}"
        );
    }
}

#[test]
fn golden_file_matches_oracle() {
    for (concrete, expected) in cases() {
        assert_eq!(oracle(&concrete), expected, "{concrete}");
    }
}

#[test]
fn golden_file_covers_every_placeholder_and_wildcards() {
    let all: String = cases()
        .into_iter()
        .map(|(_, c)| c)
        .collect::<Vec<_>>()
        .join("\n");
    for token in ["<id>", "<var>", "<param>", "<s_id>", "[*]"] {
        assert!(all.contains(token), "no case produces {token}");
    }
}
