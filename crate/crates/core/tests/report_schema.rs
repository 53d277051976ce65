use jtwist_core::boundary::CaseId;
use jtwist_core::fixture::Fixture;
use jtwist_core::report::{run_all, run_oracle, run_phi, RunConfig, VerificationReport, SCHEMA};

fn validate(rep: &VerificationReport) {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::options().with_draft(jsonschema::Draft::Draft202012).compile(&schema).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    let msgs: Vec<String> = match compiled.validate(&doc) {
        Ok(()) => vec![],
        Err(errs) => errs.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations:\n{}", msgs.join("\n"));
}

fn quick() -> RunConfig {
    RunConfig { seeds: 2, words: 50, ..RunConfig::default() }
}

#[test]
fn phi_report_validates() {
    validate(&run_phi(&quick(), &Fixture::builtin(), CaseId::B).unwrap());
}

#[test]
fn oracle_report_validates() {
    let cfg = RunConfig { cases: vec![CaseId::A2, CaseId::C], ..quick() };
    validate(&run_oracle(&cfg, &Fixture::builtin()).unwrap());
}

#[test]
fn full_report_validates_and_reproduces() {
    let a = run_all(&quick(), &Fixture::builtin()).unwrap();
    validate(&a);
    let b = run_all(&quick(), &Fixture::builtin()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_markdown(), b.to_markdown());
}

#[test]
fn schema_rejects_tampered_report() {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::options().with_draft(jsonschema::Draft::Draft202012).compile(&schema).unwrap();
    let rep = run_phi(&quick(), &Fixture::builtin(), CaseId::A1).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert!(compiled.is_valid(&doc));
    doc["summary"]["exit_code"] = 7.into();
    assert!(!compiled.is_valid(&doc));
    doc["summary"]["exit_code"] = 0.into();
    doc["cases"][0]["case"] = "z".into();
    assert!(!compiled.is_valid(&doc));
}
