use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linksched_cli::ScenarioFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linksched"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(csv_text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn column(text: &str, name: &str) -> usize {
    text.lines().next().unwrap().split(',').position(|c| c == name).unwrap()
}

const TWO_CHANNEL_OVERLOADED: &str = r#"{
    "name": "overloaded",
    "phases": [{
        "channel": {"states": [1, 2], "probs": ["3/4", "1/4"]},
        "arrivals": {"amounts": [1, 2], "probs": [0.5, 0.5]}
    }],
    "policy": {"kind": "dpp"},
    "v": 40,
    "horizon": 100
}"#;

#[test]
fn bundled_scenarios_round_trip() {
    for name in ["two-channel", "nine-channel", "nonergodic", "lifo"] {
        let parsed = ScenarioFile::load(&scenario(name)).unwrap();
        let again = ScenarioFile::from_json(&parsed.to_json().unwrap()).unwrap();
        assert_eq!(parsed, again, "{name}");
        assert_eq!(parsed.schedule().unwrap(), again.schedule().unwrap(), "{name}");
    }
}

#[test]
fn simulate_two_channel_reaches_optimal_power() {
    let out = run_ok(bin().args(["simulate", "--every", "50000", "--scenario"]).arg(scenario("two-channel")));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = rows(&text).pop().unwrap();
    assert_eq!(&last[0], "100000");
    let p: f64 = last[column(&text, "mean_p_bar")].parse().unwrap();
    assert!((p - 0.75).abs() <= 0.01, "p_bar {p}");
}

#[test]
fn malformed_probabilities_fail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = fs::read_to_string(scenario("two-channel")).unwrap().replace("\"1/5\"", "\"1/10\"");
    fs::write(&path, text).unwrap();
    let out = bin().args(["simulate", "--scenario"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("probabilities sum to"), "{err}");
}

#[test]
fn unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(&path, TWO_CHANNEL_OVERLOADED.replace("\"horizon\"", "\"horizn\"")).unwrap();
    let out = bin().args(["simulate", "--scenario"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, extra) in [vec!["--runs", "1"], vec!["--runs", "1"], vec!["--runs", "600", "--jobs", "1"], vec!["--runs", "600", "--jobs", "3"]]
        .into_iter()
        .enumerate()
    {
        let path = dir.path().join(format!("{i}.csv"));
        run_ok(
            bin()
                .args(["simulate", "--horizon", "300", "--seed", "11", "--scenario"])
                .arg(scenario("two-channel"))
                .args(extra)
                .arg("--out")
                .arg(&path),
        );
        files.push(fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[2], files[3]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn delay_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("delays.csv");
    let out = run_ok(
        bin()
            .args(["simulate", "--horizon", "20000", "--every", "20000", "--scenario"])
            .arg(scenario("lifo"))
            .arg("--delays")
            .arg(&hist),
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("trimmed(0.98)="));
    let text = fs::read_to_string(&hist).unwrap();
    assert!(text.starts_with("delay,amount,cumulative_fraction\n"));
    let last = rows(&text).pop().unwrap();
    let frac: f64 = last[2].parse().unwrap();
    assert!((frac - 1.0).abs() < 1e-9);
}

#[test]
fn verify_refuses_small_v() {
    let out = bin()
        .args(["verify", "--v", "1", "--horizon", "50", "--runs", "10", "--scenario"])
        .arg(scenario("two-channel"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("below omega_M^2"));
}

#[test]
fn verify_rejects_infeasible_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("over.json");
    fs::write(&path, TWO_CHANNEL_OVERLOADED).unwrap();
    let out = bin().args(["verify", "--runs", "10", "--scenario"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the maximum service rate"));
}

#[test]
fn verify_two_channel_passes() {
    let out = run_ok(
        bin()
            .args(["verify", "--v", "40", "--horizon", "300", "--runs", "20000", "--scenario"])
            .arg(scenario("two-channel")),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let reports = rows(&text);
    assert_eq!(reports.len(), 12);
    assert!(reports.iter().all(|r| &r[7] == "pass"), "{text}");
}

#[test]
fn sweep_rows_and_baselines() {
    let out = run_ok(
        bin()
            .args(["sweep", "--v", "4,40", "--horizon", "200000", "--scenario"])
            .arg(scenario("two-channel")),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 2 + 4);
    let p = |r: &csv::StringRecord| r[3].parse::<f64>().unwrap();
    assert!(p(&rows[0]) > p(&rows[1]));
    assert!((p(&rows[1]) - 0.75).abs() < 0.01);
    for r in &rows[2..] {
        assert_eq!(&r[0], "omega-only");
        let analytic: f64 = r[7].parse().unwrap();
        assert!((p(r) - analytic).abs() < 0.01, "{r:?}");
    }
}

#[test]
fn sweep_needs_v_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plain.json");
    fs::write(&path, TWO_CHANNEL_OVERLOADED.replace("[1, 2], \"probs\": [0.5", "[0, 2], \"probs\": [0.5")).unwrap();
    let out = bin().args(["sweep", "--scenario"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one V"));
}

#[test]
fn converse_table() {
    let out = run_ok(bin().args(["converse", "--eps", "0.0078125,0.00390625,0.001953125"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[6], "0.0625");
    }
    let out = bin().args(["converse", "--eps", "0.5"]).output().unwrap();
    assert!(!out.status.success());
}
