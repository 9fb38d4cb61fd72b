use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use warpflow_cli::compare::cmd_compare;
use warpflow_cli::config::{ConfigError, ScenarioConfig};
use warpflow_cli::sweep::cmd_sweep;
use warpflow_cli::{cmd_check_warp, parse_config};

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    out.sort();
    out
}

fn scenario(name: &str) -> PathBuf {
    scenarios().into_iter().find(|p| p.file_stem().unwrap() == name).unwrap()
}

fn warpflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpflow")).args(args).env_remove("WARPFLOW_OUT").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const FLAT_CIRCLE: &str = r#"
[warp]
family = "constant"
r0 = 1.0
domain_upper = 0.0

[curve]
preset = "circle"
z0 = -1.0
n = 32

[solver]
t_end = 0.2
sample_dt = 0.1
"#;

#[test]
fn shipped_scenarios_parse_and_round_trip() {
    let all = scenarios();
    assert!(all.len() >= 9);
    for path in all {
        let scenario = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = ScenarioConfig::from_toml(&scenario.config.to_toml()).unwrap();
        assert_eq!(again, scenario.config, "{}", path.display());
    }
}

#[test]
fn typo_in_family_is_named_with_a_suggestion() {
    let tmp = tempfile::tempdir().unwrap();
    let text = FLAT_CIRCLE.replace("\"constant\"", "\"reciproal\"").replace("domain_upper = 0.0\n", "");
    let p = write(tmp.path(), "typo.cfg", &text);
    let errs = parse_config(&p).unwrap_err();
    assert_eq!(errs.0.len(), 1, "{errs}");
    assert!(errs.0.iter().any(|e| matches!(
        e,
        ConfigError::UnknownFamily { name, suggestion: Some(s) } if name == "reciproal" && s == "reciprocal"
    )));
    let out = warpflow(&["run", p.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reciprocal"));
}

#[test]
fn empty_and_missing_files_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(tmp.path(), "empty.cfg", "");
    assert!(matches!(parse_config(&empty).unwrap_err().0[0], ConfigError::Parse(_)));
    assert_eq!(warpflow(&["run", empty.to_str().unwrap()]).status.code(), Some(2));
    let missing = tmp.path().join("nope.cfg");
    assert!(matches!(parse_config(&missing).unwrap_err().0[0], ConfigError::Io(_)));
}

#[test]
fn smoke_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("smoke");
    let res = warpflow(&["run", scenario("smoke").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    for f in ["diagnostics.csv", "events.jsonl", "summary.json", "config.toml", "run.log", "snapshots/index.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    assert!(!fs::read_to_string(out.join("summary.json")).unwrap().contains("wall"));

    let mut rd = csv::Reader::from_path(out.join("diagnostics.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(&header[..4], ["t", "L", "minTheta", "maxV"]);
    let col = header.iter().position(|h| h == "resThetaPDE").unwrap();
    for row in rd.records() {
        let v: f64 = row.unwrap()[col].parse().unwrap();
        assert!(v.abs() <= 1e-10);
    }
}

#[test]
fn floor_above_the_curve_stops_at_once() {
    let tmp = tempfile::tempdir().unwrap();
    let text = FLAT_CIRCLE.replace("sample_dt = 0.1", "sample_dt = 0.1\nz_floor = -0.5") + "\n[checks.graph_preserved]\n";
    let p = write(tmp.path(), "floor.cfg", &text);
    let out = tmp.path().join("floor");
    let res = warpflow(&["run", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
    assert_eq!(summary["terminal_event"]["t"], 0.0);
    assert_eq!(summary["terminal_event"]["kind"], "floor_reached");
}

#[test]
fn output_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "flat.cfg", FLAT_CIRCLE);
    let root = tmp.path().join("root");
    let res = Command::new(env!("CARGO_BIN_EXE_warpflow"))
        .args(["--quiet", "run", p.to_str().unwrap()])
        .env("WARPFLOW_OUT", &root)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(root.join("flat").join("summary.json").exists());
}

#[test]
fn check_warp_reports() {
    let recip = cmd_check_warp(&parse_config(&scenario("oracle_recip")).unwrap(), None).unwrap();
    assert!(recip.c0 && recip.c1 && recip.c3 && recip.c4);
    assert!((recip.c - 1.0).abs() < 0.01 && (recip.d - 2.0).abs() < 0.02);

    let exp = cmd_check_warp(&parse_config(&scenario("oracle_exp")).unwrap(), None).unwrap();
    assert!(!exp.c3 && exp.witnesses.contains_key("c3"));
    assert_eq!(exp.c2_bound, Some(2.0));

    let tmp = tempfile::tempdir().unwrap();
    let bowl = cmd_check_warp(&parse_config(&scenario("remark_final")).unwrap(), Some(tmp.path())).unwrap();
    assert!(!bowl.c0);
    assert!(bowl.notes.iter().any(|n| n.contains("closed geodesic")));
    assert!(tmp.path().join("conditions.json").exists());
}

#[test]
fn empty_sweep_writes_a_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_toml(FLAT_CIRCLE).unwrap();
    let rows = cmd_sweep(&cfg, "curve.z0", &[], tmp.path(), 1).unwrap();
    assert!(rows.is_empty());
    let text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("row,value,ok"));
}

#[test]
fn sweep_rows_fail_independently() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_toml(FLAT_CIRCLE).unwrap();
    let rows = cmd_sweep(&cfg, "curve.z0", &[-1.0, 0.5, -2.0], tmp.path(), 2).unwrap();
    let ok: Vec<bool> = rows.iter().map(|r| r.ok).collect();
    assert_eq!(ok, [true, false, true]);
    assert!(rows[1].error.is_some());
}

#[test]
fn circle_error_shrinks_with_resolution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_toml(
        r#"
[warp]
family = "reciprocal"
domain_upper = -1.0

[curve]
preset = "circle"
z0 = -2.0
n = 64

[solver]
t_end = 1.0
sample_dt = 0.5
windows = false
"#,
    )
    .unwrap();
    let rows = cmd_sweep(&cfg, "curve.n", &[16.0, 32.0, 64.0, 128.0], tmp.path(), 0).unwrap();
    let errs: Vec<f64> = rows.iter().map(|r| r.circle_error.unwrap()).collect();
    for w in errs.windows(2) {
        assert!(w[1] * 4.0 <= w[0], "{errs:?}");
    }
}

#[test]
fn compare_tracks_circles_and_rejects_bad_sandwiches() {
    let tmp = tempfile::tempdir().unwrap();
    let recip = parse_config(&scenario("oracle_recip")).unwrap();
    let mut cfg = recip.config.clone();
    cfg.solver.t_end = Some(1.0);
    let report = cmd_compare(&cfg.validate().unwrap(), &tmp.path().join("circle")).unwrap();
    assert!(report.all_ordered);
    assert!(report.sup_deviation.unwrap() < 1e-3);
    assert!(tmp.path().join("circle").join("compare.csv").exists());

    let mut bad = cfg.clone();
    let comparison = bad.checks.get_mut("comparison").unwrap();
    comparison.z_lower = Some(-1.5);
    let err = cmd_compare(&bad.validate().unwrap(), &tmp.path().join("bad")).unwrap_err();
    assert!(err.to_string().contains("sandwich"), "{err}");

    let mut fold = parse_config(&scenario("thm1_c1")).unwrap().config;
    fold.solver.t_end = Some(0.5);
    let report = cmd_compare(&fold.validate().unwrap(), &tmp.path().join("fold")).unwrap();
    assert!(report.all_ordered && report.sup_deviation.is_none());
}

#[test]
fn compare_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "flat.cfg", FLAT_CIRCLE);
    let res = warpflow(&["--quiet", "compare", p.to_str().unwrap(), "--out", tmp.path().join("c").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    assert!(tmp.path().join("c").join("compare.json").exists());
}
