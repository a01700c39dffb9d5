use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn onebit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit"))
        .args(args)
        .env_remove("ONEBIT_SEED")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("onebit-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn crofton_emits_one_row_per_trial() {
    let o = onebit(&["crofton", "--n", "3", "--trials", "20", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,seed,trial,statistic,value,pass"));
    assert_eq!(lines.filter(|l| l.starts_with("crofton,5,")).count(), 20);
}

#[test]
fn rip_auto_m_reported_in_json() {
    let o = onebit(&[
        "rip", "--n", "64", "--s", "4", "--delta", "0.2", "--m", "auto", "--seed", "7", "--trials", "2",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["runs"][0]["m"], 2773);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(v["summary"]["pass_rate"].is_number());
}

#[test]
fn missing_delta_is_usage_error() {
    let o = onebit(&["rip", "--n", "64", "--s", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_values_are_usage_errors() {
    for args in [
        &["rip", "--delta", "1.5"][..],
        &["rip", "--delta", "0.2", "--s", "0"],
        &["crofton", "--trials", "0"],
        &["all", "--n", "8"],
        &["no-such-experiment"],
    ] {
        assert_eq!(onebit(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = onebit(&[
            "small-cells", "--delta", "0.3", "--trials", "6", "--seed", "11", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn unwritable_output_is_io_error() {
    let o = onebit(&["crofton", "--trials", "1", "--out", "/nonexistent-dir/x/report.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = scratch("run.toml");
    fs::write(&cfg, "n = 5\ntrials = 3\nseed = 9\n").unwrap();
    let o = onebit(&["crofton", "--config", cfg.to_str().unwrap(), "--seed", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let run = &v["config"]["runs"][0];
    assert_eq!(run["n"], 5);
    assert_eq!(run["trials"], 3);
    assert_eq!(run["seed"], 4);

    let bad = scratch("bad.toml");
    fs::write(&bad, "n = 5\nbogus = 1\n").unwrap();
    let o = onebit(&["crofton", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_env_is_fallback() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_onebit"))
        .args(["crofton", "--trials", "2"])
        .env("ONEBIT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
    assert!(stdout(&with_env).lines().skip(1).all(|l| l.starts_with("crofton,42,")));
    let explicit = onebit(&["crofton", "--trials", "2", "--seed", "42"]);
    assert_eq!(with_env.stdout, explicit.stdout);
}

#[test]
fn all_runs_every_experiment() {
    let o = onebit(&["all", "--trials", "1", "--seed", "3", "--format", "json"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["experiments"].as_array().unwrap().len(), 12);
}
