use std::path::Path;
use std::process::{Command, Output};

fn qlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlink")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bell_csv_summary() {
    let o = qlink(&["bell", "--seed", "3", "--trials", "4000", "--format", "csv"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.starts_with("quantity,value,stderr,n"));
    assert!(text.contains("chsh_exact,2.82842712474619"));
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = qlink(&["teleport", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "protocol = \"bell\"\nseed = 1\nshots = 5\n").unwrap();
    let o = qlink(&["bell", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shots"));
}

#[test]
fn protocol_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "protocol = \"swap\"\nseed = 1\n").unwrap();
    assert_eq!(qlink(&["bell", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn empty_bin_exits_three() {
    let o = qlink(&["bell", "--seed", "1", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_post_select_label() {
    let o = qlink(&["swap", "--seed", "1", "--post-select", "B22"]);
    assert_eq!(o.status.code(), Some(2));
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut args = vec!["swap", "--seed", "11", "--trials", "3000", "--post-select", "B11", "--out"];
    args.push(out.to_str().unwrap());
    args.extend_from_slice(extra);
    let o = qlink(&args);
    assert!(o.status.success(), "{o:?}");
    std::fs::read(out).unwrap()
}

#[test]
fn logs_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let one = run_to(dir.path(), "w1.jsonl", &["--workers", "1"]);
    let four = run_to(dir.path(), "w4.jsonl", &["--workers", "4"]);
    let default = run_to(dir.path(), "w.jsonl", &[]);
    assert_eq!(one, four);
    assert_eq!(one, default);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lhv.toml");
    std::fs::write(
        &cfg,
        "protocol = \"lhv\"\nseed = 5\ntrials = 3000\ndelay_scale_T0 = 1e-9\nwindow = 1e-9\n",
    )
    .unwrap();
    let out = dir.path().join("lhv.csv");
    let o = qlink(&[
        "lhv",
        "--config",
        cfg.to_str().unwrap(),
        "--window",
        "inf",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("acceptance_rate,1,,"), "{text}");
}

#[test]
fn link_json_and_text() {
    let o = qlink(&["link", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = v["iss_rate_deficit"].as_f64().unwrap();
    assert!((d - 9.8e-10).abs() / 9.8e-10 < 0.05);
    let text = stdout(&qlink(&["link"]));
    assert!(text.contains("ISS clock-rate deficit"));
}

#[test]
fn events_reorder_under_boost() {
    let at_rest: serde_json::Value = serde_json::from_slice(&qlink(&["events"]).stdout).unwrap();
    assert_eq!(at_rest["first_trial_ordering"], "MA-MB-MD");
    assert_eq!(at_rest["causal"]["certified"], true);
    let fast: serde_json::Value = serde_json::from_slice(&qlink(&["events", "--boost", "1.5e8"]).stdout).unwrap();
    assert_eq!(fast["first_trial_ordering"], "MB-MD-MA");
    let ground: serde_json::Value =
        serde_json::from_slice(&qlink(&["events", "--layout", "ground", "--trials", "5"]).stdout).unwrap();
    assert_eq!(ground["causal"]["certified"], false);
}

#[test]
fn superluminal_boost_rejected() {
    assert_eq!(qlink(&["events", "--boost", "4e8"]).status.code(), Some(2));
}
