use std::path::PathBuf;
use std::process::{Command, Output};

fn e1dirac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_e1dirac")).args(args).output().unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn catalog_lists_every_entry() {
    let out = e1dirac(&["catalog"]);
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().count(), 10);
    assert!(names.lines().any(|l| l == "contact_jacobi_r3"));
}

#[test]
fn exit_codes_follow_the_outcome() {
    assert_eq!(e1dirac(&["check", "catalog:contact_jacobi_r3"]).status.code(), Some(0));
    assert_eq!(e1dirac(&["check", "catalog:jacobi_transverse_r3"]).status.code(), Some(1));
    assert_eq!(e1dirac(&["check", "catalog:no_such_entry"]).status.code(), Some(2));
    assert_eq!(e1dirac(&["classify", "catalog:contact_jacobi_r3", "--at", "1,2"]).status.code(), Some(2));
    let p = scratch(
        "ambiguous.scn",
        "name = ambiguous\ncoordinates = [x, y]\nkind = homogeneous_poisson\npi = [x y: x]\nz = [0, y]\n",
    );
    let out = e1dirac(&["classify", p.to_str().unwrap(), "--at", "3e-9,0.4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ill_conditioned"));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let p = scratch("typo.scn", "name = typo\ncoordinates = [x, y]\nkind = dirac_2form\nomega = [x y: w + 1]\n");
    let out = e1dirac(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":4:15:"), "{err}");
    assert!(err.contains("unknown_coordinate"), "{err}");
}

#[test]
fn json_output_and_file_agree() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("planes.json");
    let out = e1dirac(&["trace", "catalog:jacobi_planes_r3", "--steps", "10", "--json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
    let v: serde_json::Value = serde_json::from_slice(&written).unwrap();
    assert_eq!(v["actions"][0]["details"]["steps_accepted"], 10);
    assert_eq!(v["actions"][0]["details"]["leaf_type"], "LCP");
    assert_eq!(v["exit_code"], 0);
}

#[test]
fn overrides_change_the_digest() {
    let a = e1dirac(&["check", "catalog:area_form_r2", "--json"]);
    let b = e1dirac(&["check", "catalog:area_form_r2", "--json", "--seed", "9"]);
    let digest = |o: &Output| serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["digest"].clone();
    assert_ne!(digest(&a), digest(&b));
    assert_eq!(digest(&a), digest(&e1dirac(&["check", "catalog:area_form_r2", "--json"])));
}

#[test]
fn schema_lists_the_report_keys() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let out = e1dirac(&["check", "catalog:zero_dirac_r2", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let mut keys: Vec<&str> = report.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    required.sort();
    keys.sort();
    assert_eq!(required, keys);
    let action_keys = &schema["$defs"]["check"]["required"];
    for k in action_keys.as_array().unwrap() {
        assert!(report["actions"][0]["details"].get(k.as_str().unwrap()).is_some(), "{k}");
    }
}
