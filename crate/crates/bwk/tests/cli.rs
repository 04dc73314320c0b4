//! End-to-end checks of the `bwk` binary: exit codes, output formats, and
//! rerun determinism, driven through the real executable.

use std::path::Path;
use std::process::{Command, Output};

fn bwk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bwk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("temp file writes");
    path.to_str().expect("utf-8 path").to_owned()
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    for args in [
        &[][..],
        &["nosuch"][..],
        &["run"][..],
        &["lb", "--p", "0.5"][..],
        &["mesh", "--kind", "hyperbolic", "--eps", "0.1"][..],
    ] {
        let out = bwk(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
    // A config naming an unknown policy is an input error, not a crash.
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"env":{"env":"roundrobin","d":2,"B":3,"T":20},"policies":["nope"]}"#,
    );
    let out = bwk(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = bwk(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf-8 help");
    for sub in ["run", "lp", "mesh", "lb", "suite"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
}

#[test]
fn lp_reports_value_and_duals() {
    let dir = tempfile::tempdir().expect("tempdir");
    let env = write(
        dir.path(),
        "env.json",
        r#"{"env":"pricing","demand":[[0.2,0.25],[0.5,0.5],[0.9,0.25]],
            "prices":[0.2,0.5,0.9],"B":5,"T":30}"#,
    );
    let out = bwk(&["lp", &env], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("lp prints JSON");
    // Selling at 0.9 moves 5 units in 20 rounds for 0.225 a round.
    let lpopt = json["lpopt"].as_f64().expect("lpopt");
    assert!((lpopt - 4.5).abs() < 1e-9);
    assert_eq!(json["expected_pulls"].as_array().expect("pulls").len(), 3);
    assert_eq!(json["dual_prices"].as_array().expect("duals").len(), 2);
    assert_eq!(json["tight_budgets"][0], serde_json::Value::Bool(true));
}

#[test]
fn run_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"env":{"env":"lb","m":2,"B":6,"p":0.5,"eps":0.1,"T":60},
            "policies":["pdbwk","uniform_random"],"trials":5,
            "base_seed":3,"scaling":[1,2]}"#,
    );
    let run = |out_name: &str, extra: &[&str]| -> (Vec<u8>, serde_json::Value) {
        let out_path = dir.path().join(out_name);
        let mut args = vec!["run", &cfg, "--out", out_path.to_str().expect("path")];
        args.extend_from_slice(extra);
        let out = bwk(&args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let summary = serde_json::from_slice(&out.stdout).expect("summary JSON");
        (std::fs::read(out_path).expect("csv written"), summary)
    };
    let (csv_a, summary_a) = run("a.csv", &[]);
    let (csv_b, summary_b) = run("b.csv", &[]);
    assert_eq!(csv_a, csv_b, "identical invocations produce identical CSV bytes");
    assert_eq!(summary_a, summary_b);
    let (csv_c, _) = run("c.csv", &["--seed", "99"]);
    assert_ne!(csv_a, csv_c, "--seed reroutes every trial's randomness");

    let text = String::from_utf8(csv_a).expect("utf-8 csv");
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("policy,env,alpha,trial,seed,reward,stop_time,lpopt,regret")
    );
    // 2 policies x 2 scalings x 5 trials.
    assert_eq!(lines.count(), 20);
}

#[test]
fn run_trials_flag_overrides_config() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"env":{"env":"roundrobin","d":2,"B":3,"T":20},
            "policies":["uniform_random"],"trials":2}"#,
    );
    let out_path = dir.path().join("rows.csv");
    let out = bwk(
        &["run", &cfg, "--trials", "7", "--out", out_path.to_str().expect("path")],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(out_path).expect("csv written");
    assert_eq!(text.lines().count(), 1 + 7);
}

#[test]
fn mesh_prints_points_and_cover_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = bwk(&["mesh", "--kind", "additive", "--eps", "0.25"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("mesh prints JSON");
    let points: Vec<f64> = json["points"]
        .as_array()
        .expect("points")
        .iter()
        .map(|v| v.as_f64().expect("number"))
        .collect();
    assert_eq!(points, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

    let env = write(
        dir.path(),
        "env.json",
        r#"{"env":"pricing","demand":[[0.2,0.25],[0.5,0.5],[0.9,0.25]],
            "prices":[0.2,0.5,0.9],"B":5,"T":30}"#,
    );
    let out = bwk(
        &["mesh", "--kind", "additive", "--eps", "0.25", "--instance", &env],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("cover JSON");
    assert_eq!(json["cover"]["covered"], serde_json::Value::Bool(true));
    let lost = json["cover"]["lp_value_lost"].as_f64().expect("loss");
    let bound = json["cover"]["loss_bound"].as_f64().expect("bound");
    assert!(lost >= -1e-9 && lost <= bound + 1e-6, "lost {lost} vs bound {bound}");
}

#[test]
fn lb_closed_forms_match_hand_values() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = bwk(
        &["lb", "--p", "0.5", "--eps", "0.1", "--B", "10", "--m", "3", "--T", "100"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("lb prints JSON");
    // Best arm consumes 0.4 per round: floor(B+1)/q - 1 = 11/0.4 - 1 = 26.5.
    let unconstrained = json["best_arm_unconstrained_mean"].as_f64().expect("mean");
    assert!((unconstrained - 26.5).abs() < 1e-9);
    let hits = json["expected_hit_times"].as_array().expect("hit times");
    assert!((hits[0].as_f64().expect("hit") - 25.0).abs() < 1e-9);
    assert!((hits[1].as_f64().expect("hit") - 20.0).abs() < 1e-9);
    // The LP stops exactly at the budget, so it forfeits the overshoot round.
    let lpopt = json["lpopt"].as_f64().expect("lpopt");
    assert!((lpopt - 25.0).abs() < 1e-9);
}
