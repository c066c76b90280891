use std::fs;
use std::process::{Command, Output};

fn spnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spnc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_claim_b1() {
    let o = spnc(&["verify", "--claim", "B1", "--q", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("B1 bfly-snc-odd q=5: independent"));
}

#[test]
fn negative_control_reports_expected_leak() {
    let o = spnc(&["verify", "--claim", "N1", "--q", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("leaks (expected)"));
    let o = spnc(&["verify", "--claim", "N1-negative-control"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_all_exits_zero() {
    for q in ["4", "5", "7"] {
        let o = spnc(&["verify", "--all", "--q", q]);
        assert_eq!(o.status.code(), Some(0), "q={q}");
        assert!(stdout(&o).ends_with("all expectations hold\n"));
    }
}

#[test]
fn wrong_protocol_for_claim_fails_expectation() {
    // the plain relay does not satisfy B2
    let o = spnc(&["verify", "--claim", "B2", "--protocol", "bfly-plain"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("UNEXPECTED"));
}

#[test]
fn single_run_prints_transcript() {
    let o = spnc(&[
        "verify",
        "--protocol",
        "bfly-snc-gf4",
        "--q",
        "4",
        "--messages",
        "e,1",
        "--randomness",
        "1+e",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["protocol"], "bfly-snc-gf4");
    assert_eq!(v["field"], 4);
    assert!(v["edge_symbols"]["e3"].is_array());
}

#[test]
fn json_report() {
    let o = spnc(&["verify", "--claim", "T2", "--q", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["claim"], "T2");
    assert_eq!(v[0]["holds"], true);
    assert_eq!(v[0]["outcomes"].as_array().unwrap().len(), 3);
}

#[test]
fn rates_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.csv");
    let p = path.to_str().unwrap();
    let o = spnc(&["rates", "--h-min", "0.2", "--h-max", "3", "--steps", "57", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "h,single,mac_sum2,mac_joint2,mac_joint3,secure_cf,secure_cf_feasible"
    );
    assert_eq!(lines.len(), 58);
    assert!(lines[1].starts_with("0.2,"));
    assert!(lines[57].starts_with("3,"));
}

#[test]
fn compare_to_stdout() {
    let o = spnc(&[
        "compare",
        "--network",
        "butterfly",
        "--h-min",
        "0.1",
        "--h-max",
        "3",
        "--steps",
        "3",
        "--out",
        "-",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "h,BF-SNC-NoMAC,BF-SNC-MAC,BF-PLNC-SCF,BF-PLNC-Simple");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1].split(',').nth(3), Some("inf"));
}

#[test]
fn crossover_found_and_missing() {
    let o = spnc(&[
        "crossover",
        "--a",
        "3S-PLNC-SCF",
        "--b",
        "3S-SNC-MAC",
        "--lo",
        "1.0",
        "--hi",
        "2.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let h: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("h* = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((1.3..=2.1).contains(&h));
    assert!(out.contains("residual"));
    let o = spnc(&[
        "crossover",
        "--a",
        "butterfly-snc-mac",
        "--b",
        "butterfly-snc-nomac",
        "--lo",
        "0.5",
        "--hi",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_time_exits_two() {
    let o = spnc(&["time", "--scheme", "BF-PLNC-SCF", "--h", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("inf"));
    let o = spnc(&["time", "--scheme", "BF-SNC-NoMAC", "--h", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn schedules_print() {
    let o = spnc(&["schedule"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.matches("| Time slot |").count(), 8);
    let o = spnc(&["schedule", "--scheme", "3S-SNC-NoMAC"]);
    assert!(stdout(&o).contains("e7 x2"));
}

#[test]
fn list_everything() {
    let out = stdout(&spnc(&["list"]));
    for name in ["bfly-plnc-simple", "3src-plnc-cf", "T4", "N1", "3S-PLNC-CF"] {
        assert!(out.contains(name), "{name}");
    }
}

#[test]
fn oracle_is_reproducible() {
    let args = [
        "oracle",
        "--kind",
        "single",
        "--h",
        "1",
        "--mc-samples",
        "20000",
        "--seed",
        "9",
    ];
    let a = spnc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, spnc(&args).stdout);
    let o = spnc(&["oracle", "--kind", "single", "--h", "1", "--mc-samples", "10"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn usage_errors() {
    assert_eq!(spnc(&[]).status.code(), Some(64));
    assert_eq!(spnc(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(spnc(&["verify", "--claim", "B9"]).status.code(), Some(64));
    assert_eq!(spnc(&["verify", "--claim", "B1", "--q", "6"]).status.code(), Some(64));
    assert_eq!(spnc(&["rates", "--steps", "0"]).status.code(), Some(64));
    assert_eq!(spnc(&["compare", "--network", "ring"]).status.code(), Some(64));
    let o = spnc(&["rates", "--h-min", "3", "--h-max", "1", "--steps", "4"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(!o.stderr.is_empty());
}

#[test]
fn help_and_version() {
    let o = spnc(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("crossover"));
    assert_eq!(spnc(&["--version"]).status.code(), Some(0));
}

#[test]
fn noise_convention_flag() {
    let o = spnc(&[
        "--noise",
        "unit-complex",
        "crossover",
        "--a",
        "3S-PLNC-SCF",
        "--b",
        "3S-SNC-MAC",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("h* = 1.23"));
    assert_eq!(spnc(&["--noise", "loud", "list"]).status.code(), Some(64));
}
