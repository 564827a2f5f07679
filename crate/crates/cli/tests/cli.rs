use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_guarantee");
const DEFAULT: &str = include_str!("../configs/default.json");

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GUARANTEE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Default scenario with a fixed variant and fewer draws, for speed.
fn quick_config(dir: &Path) -> PathBuf {
    let mut v: Value = serde_json::from_str(DEFAULT).unwrap();
    v["mc_draws"] = 20_000.into();
    v["figure"]["variant"] = "fixed_weight_given_published".into();
    let path = dir.join("quick.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

/// Data rows of a CSV written by the tool, after the `#` and column lines.
fn csv_rows(path: &Path) -> (String, String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (meta, header, rows)
}

#[test]
fn example1_prints_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    let o = run(&["example1", "--alpha-prime", "0.01", "--pi", "0.25", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("0.13375"));
    let (_, header, rows) = csv_rows(&tmp.path().join("example1_scale.csv"));
    assert_eq!(header, "alpha_nominal,alpha_actual,u_bar,max_scale,cost_ratio");
    let at_01 = rows.iter().find(|r| r[0] == "0.01").unwrap();
    assert_eq!(at_01[3], "373");
}

#[test]
fn wald_coverage_has_a_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    let o = run(
        &["coverage", "--proc", "wald", "--n", "300", "--alpha-prime", "0.05", "--config", cfg.to_str().unwrap()],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (meta, header, rows) = csv_rows(&tmp.path().join("coverage.csv"));
    assert!(meta.starts_with("# guarantee "));
    assert_eq!(header, "p,coverage,violation");
    assert!(rows.iter().any(|r| r[1].parse::<f64>().unwrap() < 0.95));
}

#[test]
fn fig1_calibrates_and_writes_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["fig1", "--p-c", "0.5", "--n", "300", "--pi", "0.5"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (meta, header, rows) = csv_rows(&tmp.path().join("fig1.csv"));
    assert_eq!(header, "alpha_nominal,alpha_actual,p_C,variant,n,pi");
    for key in ["seed=20240601", "coverage_step=", "sup_step=", "refine_step=", "(calibrated)", "0.1.0"] {
        assert!(meta.contains(key), "{meta}");
    }
    let row = rows.iter().find(|r| r[0] == "0.05" && r[3] != "identity").unwrap();
    let actual: f64 = row[1].parse().unwrap();
    assert!((0.17..=0.27).contains(&actual), "{actual}");
    assert!(rows.iter().any(|r| r[3] == "identity"));
    let side: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("fig1_calibration.json")).unwrap()).unwrap();
    assert_eq!(side["data"]["variant"], row[3].as_str());
    assert!(side["data"]["calibration"]["residual"].as_f64().unwrap().abs() < 0.05);
    assert_eq!(side["meta"]["variant_source"], "calibrated");
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = quick_config(a.path());
    for dir in [a.path(), b.path()] {
        for cmd in [&["fig1", "--p-c", "0.3,0.6"][..], &["pool"], &["researcher"]] {
            let mut args = cmd.to_vec();
            args.extend(["--config", cfg.to_str().unwrap()]);
            let o = run(&args, dir);
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    for name in ["fig1.csv", "pool.csv", "researcher.csv", "researcher.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    // A different seed changes the simulated columns and the header.
    let c = tempfile::tempdir().unwrap();
    let o = run(&["pool", "--seed", "7", "--config", cfg.to_str().unwrap()], c.path());
    assert!(o.status.success());
    let (meta, _, _) = csv_rows(&c.path().join("pool.csv"));
    assert!(meta.contains("seed=7"));
    assert_ne!(fs::read(a.path().join("pool.csv")).unwrap(), fs::read(c.path().join("pool.csv")).unwrap());
}

#[test]
fn unknown_key_exits_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let text = DEFAULT.replacen("\"delta\": 0.05", "\"delta\": 0.05,\n    \"deltaa\": 1", 1);
    let line = text.lines().position(|l| l.contains("deltaa")).unwrap() + 1;
    let path = tmp.path().join("bad.json");
    fs::write(&path, &text).unwrap();
    let o = run(&["decide", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains(&format!("bad.json:{line}:")), "{err}");
    assert!(err.contains("deltaa"), "{err}");
}

#[test]
fn invalid_value_exits_2_at_its_block() {
    let tmp = tempfile::tempdir().unwrap();
    let text = DEFAULT.replacen("\"u_bar\": -50.0", "\"u_bar\": 5.0", 1);
    let line = text.lines().position(|l| l.contains("\"implementer\"")).unwrap() + 1;
    let path = tmp.path().join("bad.json");
    fs::write(&path, &text).unwrap();
    let o = run(&["decide", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("bad.json:{line}:")), "{}", stderr(&o));
}

#[test]
fn malformed_json_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, "{\n  \"seed\": 1,\n  oops\n}").unwrap();
    let o = run(&["pool", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:3:"), "{}", stderr(&o));
}

#[test]
fn runtime_error_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    let o = run(&["coverage", "--alpha-prime", "1.5", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let missing = run(&["pool", "--config", "/nonexistent/x.json"], tmp.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn environment_sets_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    let target = tmp.path().join("from_env");
    let o = Command::new(BIN)
        .args(["decide", "--config", cfg.to_str().unwrap()])
        .env("GUARANTEE_OUT_DIR", &target)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&fs::read_to_string(target.join("decision.json")).unwrap()).unwrap();
    assert_eq!(doc["data"]["no_guarantee"]["scale"], 373);
    assert_eq!(doc["meta"]["seed"], 20240601);
}

#[test]
fn contract_researcher_pool_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    for cmd in ["contract", "researcher", "pool"] {
        let o = run(&[cmd, "--config", cfg.to_str().unwrap()], tmp.path());
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
    let mi: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("minimal_insurance.json")).unwrap()).unwrap();
    assert_eq!(mi["data"]["tail_decision"]["scale"], 1000);
    assert_eq!(mi["data"]["proportional_decision"]["scale"], 1000);

    let (_, header, rows) = csv_rows(&tmp.path().join("researcher.csv"));
    assert_eq!(header, "p,lhs,bound_type,bound,actual");
    assert!(!rows.is_empty());

    let (_, header, rows) = csv_rows(&tmp.path().join("pool.csv"));
    assert!(header.starts_with("size,expected_utility,certainty_equivalent"));
    let ce: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(ce.windows(2).all(|w| w[1] >= w[0]), "{ce:?}");
}

#[test]
fn reproduce_exit_matches_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    let o = run(&["reproduce", "--config", cfg.to_str().unwrap()], tmp.path());
    let out = stdout(&o);
    let (_, header, rows) = csv_rows(&tmp.path().join("reproduce.csv"));
    assert_eq!(header, "id,quantity,target,computed,tolerance,pass");
    let ids: Vec<&str> = out.lines().filter_map(|l| l.split_whitespace().next()).collect();
    for id in ["1", "2", "3a", "3b", "4", "5a", "5b", "6", "7", "8", "9", "10"] {
        assert!(ids.contains(&id), "missing anchor {id}");
    }
    let all_pass = out.lines().filter(|l| l.ends_with("PASS") || l.ends_with("FAIL")).all(|l| l.ends_with("PASS"));
    assert_eq!(o.status.success(), all_pass);
    assert_eq!(rows.len(), 12);
}
