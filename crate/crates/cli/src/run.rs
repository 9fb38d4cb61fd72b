//! Single scenario execution and its on-disk artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context as _, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use warpflow_core::curve::build_geometry;
use warpflow_core::diagnostics::{analyze, comparison_check, AnalysisOptions};
use warpflow_core::flow::{detect_graph_time, run, Event, EventKind};
use warpflow_core::warp::{ConditionReport, SamplingGrid};
use warpflow_core::{Curve, Record, Trajectory};

use crate::checks::{evaluate, CheckOutcome, Context};
use crate::config::{Check, Scenario, ScenarioConfig};

/// One diagnostics row as written to `diagnostics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecordRow {
    pub t: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "minTheta")]
    pub min_theta: f64,
    #[serde(rename = "maxV")]
    pub max_v: f64,
    #[serde(rename = "maxAbsKappa")]
    pub max_abs_kappa: f64,
    #[serde(rename = "intKappaSq")]
    pub int_kappa_sq: f64,
    pub psi: f64,
    #[serde(rename = "zMin")]
    pub z_min: f64,
    #[serde(rename = "zMax")]
    pub z_max: f64,
    #[serde(rename = "resLengthDecay")]
    pub res_length_decay: Option<f64>,
    #[serde(rename = "resThetaPDE")]
    pub res_theta_pde: Option<f64>,
    #[serde(rename = "resVPDE")]
    pub res_v_pde: Option<f64>,
    #[serde(rename = "resKappaSqPDE")]
    pub res_kappa_sq_pde: Option<f64>,
    #[serde(rename = "lemma32Slack")]
    pub lemma32_slack: Option<f64>,
    #[serde(rename = "chainSlack")]
    pub chain_slack: Option<f64>,
    #[serde(rename = "dsKappaMax")]
    pub max_ds_kappa: f64,
    #[serde(rename = "dssKappaMax")]
    pub max_dss_kappa: f64,
    #[serde(rename = "comparisonOk")]
    pub comparison_ok: Option<bool>,
}

impl From<&Record> for RecordRow {
    fn from(r: &Record) -> Self {
        Self {
            t: r.t,
            length: r.length,
            min_theta: r.min_theta,
            max_v: r.max_v,
            max_abs_kappa: r.max_abs_kappa,
            int_kappa_sq: r.int_kappa_sq,
            psi: r.psi,
            z_min: r.z_min,
            z_max: r.z_max,
            res_length_decay: r.res_length_decay,
            res_theta_pde: r.res_theta_pde,
            res_v_pde: r.res_v_pde,
            res_kappa_sq_pde: r.res_kappa_sq_pde,
            lemma32_slack: r.lemma32_slack,
            chain_slack: r.chain_slack,
            max_ds_kappa: r.max_ds_kappa,
            max_dss_kappa: r.max_dss_kappa,
            comparison_ok: r.comparison_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub min: f64,
    pub max: f64,
    #[serde(rename = "final")]
    pub last: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub warp: String,
    pub preset: String,
    pub terminal_event: Event,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    pub initial_length: Option<f64>,
    pub steps: usize,
    pub remeshes: usize,
    pub samples: usize,
    pub condition_report: ConditionReport,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub final_record: Option<RecordRow>,
    pub passed: bool,
}

/// Everything a run produced, before anything touches disk.
pub struct Execution {
    pub summary: RunSummary,
    pub records: Vec<Record>,
    pub trajectory: Trajectory,
    pub events: Vec<Event>,
}

pub fn config_hash(cfg: &ScenarioConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.to_toml().as_bytes()))
}

type Column = (&'static str, fn(&Record) -> f64);

fn aggregates(records: &[Record]) -> BTreeMap<String, Aggregate> {
    let columns: [Column; 8] = [
        ("L", |r| r.length),
        ("minTheta", |r| r.min_theta),
        ("maxV", |r| r.max_v),
        ("maxAbsKappa", |r| r.max_abs_kappa),
        ("intKappaSq", |r| r.int_kappa_sq),
        ("psi", |r| r.psi),
        ("zMin", |r| r.z_min),
        ("zMax", |r| r.z_max),
    ];
    let mut out = BTreeMap::new();
    let Some(last) = records.last() else { return out };
    for (name, pick) in columns {
        let values = records.iter().map(pick);
        let min = values.clone().fold(f64::INFINITY, f64::min);
        let max = values.fold(f64::NEG_INFINITY, f64::max);
        out.insert(name.to_string(), Aggregate { min, max, last: pick(last) });
    }
    out
}

/// Runs the flow, the diagnostics and every requested check.
pub fn execute(scenario: &Scenario) -> Result<Execution> {
    let warp = &scenario.warp;
    let initial = scenario
        .preset
        .build_equidistributed(warp, scenario.oversample)
        .context("building the initial curve")?;
    let initial_length = build_geometry(&initial, warp).ok().map(|g| g.length);
    let traj = run(warp, initial, &scenario.params)?;

    let c0 = scenario
        .checks
        .iter()
        .find_map(|c| if let Check::Lemma32 { c0, .. } = c { Some(*c0) } else { None })
        .unwrap_or(0.0);
    let mut records = analyze(&traj, warp, &AnalysisOptions { c0, sandwich: None })?;
    if let Some(Check::Comparison { z_lower, z_upper }) =
        scenario.checks.iter().find(|c| matches!(c, Check::Comparison { .. }))
    {
        let times: Vec<f64> = records.iter().map(|r| r.t).collect();
        let zmin: Vec<f64> = records.iter().map(|r| r.z_min).collect();
        let zmax: Vec<f64> = records.iter().map(|r| r.z_max).collect();
        if let Ok(ok) = comparison_check(&times, &zmin, &zmax, warp, *z_lower, *z_upper) {
            for (r, flag) in records.iter_mut().zip(ok) {
                r.comparison_ok = Some(flag);
            }
        }
    }

    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let min_theta: Vec<f64> = records.iter().map(|r| r.min_theta).collect();
    let t0 = detect_graph_time(&times, &min_theta, scenario.params.graph_margin);

    let ctx = Context {
        warp,
        preset: &scenario.preset,
        traj: &traj,
        records: &records,
        t0,
        margin: scenario.params.graph_margin,
    };
    let checks: BTreeMap<String, CheckOutcome> =
        scenario.checks.iter().map(|c| (c.name().to_string(), evaluate(c, &ctx))).collect();
    let passed = checks.values().all(|c| c.passed) && !traj.terminal.is_failure();

    let mut events = traj.events.clone();
    if let Some(t0) = t0 {
        let at = events.iter().position(|e| e.kind.is_terminal()).unwrap_or(events.len());
        events.insert(at, Event { t: t0, kind: EventKind::GraphAttained { t0 } });
    }
    let terminal_event = events.last().cloned().expect("a run always ends with a terminal event");

    let summary = RunSummary {
        config_hash: config_hash(&scenario.config),
        warp: warp.family_key().to_string(),
        preset: scenario.preset.name().to_string(),
        terminal_event,
        t0,
        initial_length,
        steps: traj.steps,
        remeshes: traj.remeshes,
        samples: records.len(),
        condition_report: warp.check_conditions(&SamplingGrid::default()),
        checks,
        aggregates: aggregates(&records),
        final_record: records.last().map(RecordRow::from),
        passed,
    };
    Ok(Execution { summary, records, trajectory: traj, events })
}

pub fn write_snapshot(path: &Path, curve: &Curve, warp: &warpflow_core::Warp) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "theta", "z", "ds", "a", "b", "theta_fn", "kappa"])?;
    let geom = build_geometry(curve, warp).ok();
    for i in 0..curve.len() {
        let (theta, z) = (curve.theta()[i], curve.z()[i]);
        let mut row = vec![i.to_string(), theta.to_string(), z.to_string()];
        match &geom {
            Some(g) => row.extend(
                [g.ds[i], g.a[i], g.b[i], g.theta_fn()[i], g.kappa[i]].iter().map(|v| v.to_string()),
            ),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `diagnostics.csv`, `snapshots/`, `events.jsonl` and `summary.json`.
pub fn write_artifacts(exec: &Execution, scenario: &Scenario, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("snapshots")).with_context(|| format!("creating {}", dir.display()))?;

    let mut diag = csv::Writer::from_path(dir.join("diagnostics.csv"))?;
    for r in &exec.records {
        diag.serialize(RecordRow::from(r))?;
    }
    diag.flush()?;

    let every = scenario.config.output.snapshot_every.unwrap_or(10);
    let samples = &exec.trajectory.samples;
    let mut index = csv::Writer::from_path(dir.join("snapshots").join("index.csv"))?;
    index.write_record(["sample", "t", "file"])?;
    for (k, s) in samples.iter().enumerate() {
        let keep = k == 0 || k + 1 == samples.len() || (every > 0 && k % every == 0);
        if !keep {
            continue;
        }
        let name = format!("sample_{k:05}.csv");
        write_snapshot(&dir.join("snapshots").join(&name), &s.curve, &scenario.warp)?;
        index.write_record([k.to_string(), s.t.to_string(), name])?;
    }
    index.flush()?;

    let mut events = fs::File::create(dir.join("events.jsonl"))?;
    for e in &exec.events {
        writeln!(events, "{}", serde_json::to_string(e)?)?;
    }

    let mut summary = serde_json::to_string_pretty(&exec.summary)?;
    summary.push('\n');
    fs::write(dir.join("summary.json"), summary)?;
    fs::write(dir.join("config.toml"), scenario.config.to_toml())?;
    Ok(())
}

/// Executes a scenario and writes its artifacts under `dir`.
pub fn cmd_run(scenario: &Scenario, dir: &Path) -> Result<RunSummary> {
    let exec = execute(scenario)?;
    write_artifacts(&exec, scenario, dir)?;
    Ok(exec.summary)
}
