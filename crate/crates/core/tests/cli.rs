use std::process::{Command, Output};

fn hdsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdsteer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = hdsteer(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn table1_grid() {
    let text = stdout(&["table1", "--kmax", "8", "--nmax", "6"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,k,n,value,method,source,residual"));
    assert_eq!(lines.count(), 35);
    assert!(text.contains(",3,2,0.2679491924,closed_form,qubit_triplet_exact,"));
    assert!(text.contains(",5,6,1.2877337674,closed_form,recursive,"));
}

#[test]
fn table1_json_mirrors_csv() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&[
        "table1", "--kmax", "3", "--nmax", "3", "--format", "json",
    ]))
    .unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for key in ["d", "k", "n", "value", "method", "source", "residual"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn certify_reports() {
    assert!(stdout(&["certify", "--sr", "0.8716", "--k", "5"]).contains("certified_n = 4"));
    assert!(stdout(&["certify", "--sr", "0", "--k", "3"]).contains("certified_n = 1"));
    assert!(stdout(&["certify", "--sr", "0.30", "--k", "2"]).contains("certified_n = 4"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&[
        "certify", "--sr", "0.27", "--k", "3", "--format", "json",
    ]))
    .unwrap();
    assert_eq!(v["certified_n"], 3);
}

#[test]
fn scalar_commands() {
    assert!(stdout(&["sr", "--d", "2", "--k", "2", "--v", "1"]).contains("SR = 0.17157"));
    let zero = stdout(&["sr", "--d", "3", "--k", "3", "--v", "0"]);
    let value: f64 = zero
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("SR = ")
        .parse()
        .unwrap();
    assert!(value.abs() < 1e-6);
    assert!(stdout(&["eta", "--d", "3", "--k", "2"]).contains("eta_g = 0.7886"));
}

#[test]
fn capacity_is_a_row() {
    let text = stdout(&["table2", "--max-strategies", "8"]);
    assert!(text.contains("2,2,,0.17157"));
    assert!(text.contains("3,2,,,skipped,capacity,"));
    assert!(text.contains("7,8,,,skipped,capacity,"));
}

#[test]
fn validate_is_reproducible() {
    let a = stdout(&["validate", "--count", "4", "--seed", "11"]);
    let b = stdout(&["validate", "--count", "4", "--seed", "11", "--jobs", "1"]);
    assert_eq!(a, b);
    assert!(!a.contains(",fail,"));
}

#[test]
fn bad_flags_fail() {
    assert!(!hdsteer(&["certify", "--k", "2"]).status.success());
    assert!(!hdsteer(&["certify", "--sr", "0.2", "--k", "1"])
        .status
        .success());
    assert!(!hdsteer(&["sr", "--d", "6", "--k", "5"]).status.success());
    assert!(!hdsteer(&["table1", "--kmax", "40"]).status.success());
}
