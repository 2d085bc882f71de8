use std::process::{Command, Output};

fn hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = r#"
[[scenario]]
label = "padic-2-3"
family = "padic-axb"
params = { p = 2, q = 3 }
precision = 32
reports = ["describe-pair", "b-set", "qadic", "completion"]

[[scenario]]
label = "d5"
family = "dihedral"
params = { n = 5 }
reports = ["b-set", "structure-constants"]
"#;

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("scenarios.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, CONFIG);
    let a = hecke(&["run", "--config", &cfg]);
    let b = hecke(&["run", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report = hecke_core::report::Report::from_json(&stdout(&a)).unwrap();
    assert_eq!(report.scenarios.len(), 2);
    assert_eq!(report.scenarios[0].label, "padic-2-3");
    assert!(report.scenarios[0].results.contains_key("qadic"));
    assert!(!report.scenarios[1].results.contains_key("qadic"));
    assert_eq!(report.to_json() + "\n", stdout(&a));
}

#[test]
fn out_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, CONFIG);
    let out = dir.path().join("report.csv");
    let o = hecke(&[
        "b-set",
        "--config",
        &cfg,
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scenario,report,path,value"));
    assert!(lines.all(|l| l.contains(",b-set,")));
    assert!(csv.contains("padic-2-3,b-set,n0,2"));
}

#[test]
fn family_flags_and_overrides() {
    let o = hecke(&[
        "qadic", "--family", "padic-axb", "--param", "p=2", "--param", "q=7", "--precision",
        "16", "--seed", "9",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = &v["scenarios"][0];
    assert_eq!(s["config"]["precision"], 16);
    assert_eq!(s["config"]["seed"], 9);
    assert_eq!(s["results"]["qadic"]["n0"], 3);
}

#[test]
fn empty_report_list_echoes_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[[scenario]]\nfamily = \"dihedral\"\nparams = { n = 4 }\nreports = []\n",
    );
    let o = hecke(&["run", "--config", &cfg]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scenarios"][0]["config"]["family"], "dihedral");
    assert!(v["scenarios"][0]["results"].as_object().unwrap().is_empty());
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = write_config(&dir, "[[scenario]]\nfamily = \"dihedral\"\nbogus = 1\n");
    assert_eq!(hecke(&["run", "--config", &unknown_key]).status.code(), Some(2));
    let bad_family = hecke(&["b-set", "--family", "no-such-group"]);
    assert_eq!(bad_family.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_family.stderr).contains("unknown family"));
    assert_eq!(hecke(&["run"]).status.code(), Some(2));
    assert_eq!(hecke(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        hecke(&["run", "--config", "/nonexistent/x.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(hecke(&["selftest", "--criteria", "0"]).status.code(), Some(2));
}

#[test]
fn selftest_subset_passes_and_warns_without_scenarios() {
    let o = hecke(&["selftest", "--criteria", "4,6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("criterion  4 [PASS] B-set reproduction"));
    assert!(text.contains("criterion  6 [PASS] q-adic suite"));
    assert!(text.contains("warning: no scenarios configured"));
}

#[test]
fn selftest_runs_configured_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, CONFIG);
    let out = dir.path().join("criteria.json");
    let o = hecke(&[
        "selftest",
        "--criteria",
        "4",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("scenario padic-2-3 [PASS]"));
    assert!(text.contains("scenario d5 [PASS]"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v[0]["passed"], true);
}

#[test]
fn injected_fault_fails_named_criterion() {
    let o = hecke(&[
        "selftest",
        "--criteria",
        "1",
        "--inject-fault",
        "corrupt-structure-constants",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("criterion  1 [FAIL] oracle equivalence"));
}
