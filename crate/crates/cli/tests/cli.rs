use std::path::Path;
use std::process::{Command, Output};

use jtwist_core::report::SCHEMA;

const FIXTURE: &str = include_str!("../../core/fixtures/boundary_point.txt");

fn jtwist(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtwist"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("JTWIST_OUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn validate(path: &Path) -> serde_json::Value {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::options().with_draft(jsonschema::Draft::Draft202012).compile(&schema).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(compiled.is_valid(&doc), "{} does not match the schema", path.display());
    doc
}

#[test]
fn phi_a1_passes_and_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = jtwist(&["phi", "--case", "a1", "--seeds", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = validate(&dir.path().join("report.json"));
    assert_eq!(doc["summary"]["exit_code"], 0);
    assert!(std::fs::read_to_string(dir.path().join("report.md")).unwrap().contains("Status: **PASS**"));
}

#[test]
fn explained_mismatch_warns_but_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = jtwist(&["phi", "--case", "b", "--seeds", "3", "--format", "md", "--omega", "evaluated"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: phi4"));
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("## Warnings: mismatches explained by the oracle"));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn reports_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = jtwist(&["oracle", "--case", "a2,c", "--seeds", "2"], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["report.json", "report.md"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    validate(&a.path().join("report.json"));
}

#[test]
fn corrupted_fixture_fails_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("corrupt.txt");
    let src = FIXTURE.replace("clifford-derivative | dn_c_t | 1/2 hp", "clifford-derivative | dn_c_t | 3/2 hp");
    assert_ne!(src, FIXTURE);
    std::fs::write(&fx, src).unwrap();
    let line = FIXTURE.lines().position(|l| l.contains("dn_c_t")).unwrap() + 1;
    let o = jtwist(&["all", "--seeds", "3", "--fixture", fx.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("corrupt.txt line {line}: `dn_c_t`")), "{}", stderr(&o));
    let doc = validate(&dir.path().join("out/report.json"));
    assert_eq!(doc["summary"]["exit_code"], 1);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seeds = 2\ntolerance = -1e-6\n").unwrap();
    assert_eq!(jtwist(&["lemmas", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
    std::fs::write(&cfg, "seeds = 2\ncolour = blue\n").unwrap();
    let o = jtwist(&["lemmas", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.cfg:2"), "{}", stderr(&o));

    let fx = dir.path().join("broken.txt");
    std::fs::write(&fx, FIXTURE.replace("christoffel | gamma_n_tt | 1/2 hp", "christoffel | gamma_n_tt | half")).unwrap();
    assert_eq!(jtwist(&["phi", "--case", "a1", "--fixture", fx.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(jtwist(&["phi"], dir.path()).status.code(), Some(2));
    assert_eq!(jtwist(&["phi", "--case", "d"], dir.path()).status.code(), Some(2));
    assert_eq!(jtwist(&["phi", "--case", "a1", "--tolerance", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_jtwist"))
        .args(["phi", "--case", "a3", "--seeds", "1", "--format", "json"])
        .env("JTWIST_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    validate(&dir.path().join("report.json"));
}
