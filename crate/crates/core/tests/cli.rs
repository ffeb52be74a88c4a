use std::fs;
use std::process::Command;

fn vlcfl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vlcfl"))
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n_users = 12\nglobal_rounds = 2\n").unwrap();
    let out = dir.path().join("out");
    let st = vlcfl()
        .args(["run", "--seeds", "0-2", "--mode", "hybrid", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 4);
    assert!(records.lines().skip(1).all(|l| l.split(',').nth(1) == Some("hybrid")));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("n_users = 12"));
}

#[test]
fn sweep_users_selection_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "sweep_users = [10, 20]\n").unwrap();
    let st = vlcfl()
        .args(["sweep-users", "--seeds", "0,1", "--mode", "rf_only", "--no-train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success());
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().skip(1).all(|l| l.starts_with("rf_only,")));
}

#[test]
fn sweep_bandwidth_with_custom_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::new();
    for i in 0..60 {
        let row: Vec<String> = (0..14).map(|j| ((i * 7 + j * 3) % 11).to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&data, text).unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n_users = 5\ntest_size = 10\nglobal_rounds = 2\nsweep_bandwidths = [[1e6, 2e6], [4e6, 8e6]]\n")
        .unwrap();
    let st = vlcfl()
        .args(["sweep-bandwidth", "--seeds", "7", "--config"])
        .arg(&cfg)
        .arg("--dataset")
        .arg(&data)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let records = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 5);
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "round_deadline_s = -1.0\n").unwrap();
    let st = vlcfl().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!st.status.success());
    assert!(String::from_utf8_lossy(&st.stderr).contains("round_deadline_s"));
}

#[test]
fn malformed_dataset_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let good = vec!["1"; 14].join(",");
    let bad = format!("{},oops", vec!["1"; 13].join(","));
    fs::write(&data, format!("{good}\n{good}\n{bad}\n")).unwrap();
    let st = vlcfl().args(["run", "--dataset"]).arg(&data).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!st.status.success());
    assert!(String::from_utf8_lossy(&st.stderr).contains("line 3"));
}

#[test]
fn validate_passes() {
    let st = vlcfl().arg("validate").output().unwrap();
    let text = String::from_utf8_lossy(&st.stdout);
    assert!(st.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
