//! Every corpus through the full check battery: the positive presentations
//! come out clean, and each planted negative is caught by the check that its
//! notes file names.

use exlen_core::checks::{run_all_checks, CheckOptions};
use exlen_core::model::CategoryPresentation;

fn load(name: &str) -> CategoryPresentation {
    let path = format!("{}/../../corpus/{}.toml", env!("CARGO_MANIFEST_DIR"), name);
    CategoryPresentation::load(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn positive_corpora_pass_everything() {
    for name in ["zero", "brick1", "chain2", "ladder", "ka2", "da3"] {
        let p = load(name);
        assert!(p.validate().is_empty(), "{name} should validate");
        let run = run_all_checks(&p, &CheckOptions::default()).unwrap();
        for rep in &run.reports {
            assert!(rep.ok(), "{name}/{}: {:?}", rep.name, rep.violations);
        }
    }
}

#[test]
fn bad_stability_fails_validation_only_there() {
    let p = load("bad_stability");
    let violations = p.validate();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0].rule, "stability-equality");
    let msg = violations[0].to_string();
    assert!(msg.contains("conflation #1"), "{msg}");
    assert!(msg.contains("Θ(b) = 1"), "{msg}");
}

#[test]
fn bad_facsub_validates_but_is_not_standard() {
    let p = load("bad_facsub");
    assert!(p.validate().is_empty(), "the corruption is past the validator");
    let run = run_all_checks(&p, &CheckOptions::default()).unwrap();
    assert!(!run.ok());
    let standard = run.reports.iter().find(|r| r.name == "standardness").unwrap();
    assert_eq!(standard.violations.len(), 1);
    assert!(
        standard.violations[0].contains("brick A") && standard.violations[0].contains("{A,B,C}"),
        "{:?}",
        standard.violations
    );
}

#[test]
fn bad_missing_conflation_breaks_the_pair_round_trip() {
    let p = load("bad_missing_conflation");
    assert!(p.validate().is_empty(), "the corruption is past the validator");
    let run = run_all_checks(&p, &CheckOptions::default()).unwrap();
    assert!(!run.ok());
    let pairs = run.reports.iter().find(|r| r.name == "torsion-pairs").unwrap();
    assert!(
        pairs
            .violations
            .iter()
            .any(|v| v.contains("round trip failed for T = {P1}")
                && v.contains("perp_left(perp_right) = {S1,P1}")),
        "{:?}",
        pairs.violations
    );
}
