//! One template, one numeric axis, many independent runs.

use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use crate::checks::circle_sup_error;
use crate::config::ScenarioConfig;
use crate::run::{execute, write_artifacts};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub row: usize,
    pub value: f64,
    pub ok: bool,
    pub passed: Option<bool>,
    pub terminal: Option<String>,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    #[serde(rename = "L0")]
    pub initial_length: Option<f64>,
    /// `1/(2C^2)` of the row's warp.
    pub c2_bound: Option<f64>,
    /// Whether `L(0)^2 < 1/(2C^2)`.
    pub below_c2: Option<bool>,
    pub circle_error: Option<f64>,
    pub final_min_theta: Option<f64>,
    pub config_hash: Option<String>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(row: usize, value: f64, error: String) -> Self {
        Self {
            row,
            value,
            ok: false,
            passed: None,
            terminal: None,
            t0: None,
            initial_length: None,
            c2_bound: None,
            below_c2: None,
            circle_error: None,
            final_min_theta: None,
            config_hash: None,
            error: Some(error),
        }
    }
}

fn run_row(template: &ScenarioConfig, axis: &str, row: usize, value: f64, out: &Path) -> SweepRow {
    let scenario = match template.with_axis(axis, value).and_then(|c| c.validate()) {
        Ok(s) => s,
        Err(e) => return SweepRow::failed(row, value, e.to_string().replace('\n', "; ")),
    };
    let exec = match execute(&scenario) {
        Ok(x) => x,
        Err(e) => return SweepRow::failed(row, value, e.to_string()),
    };
    if let Err(e) = write_artifacts(&exec, &scenario, &out.join(format!("row_{row:03}"))) {
        return SweepRow::failed(row, value, e.to_string());
    }
    let s = &exec.summary;
    let c2_bound = s.condition_report.c2_bound;
    let terminal = serde_json::to_value(&s.terminal_event.kind)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string));
    SweepRow {
        row,
        value,
        ok: true,
        passed: Some(s.passed),
        terminal,
        t0: s.t0,
        initial_length: s.initial_length,
        c2_bound,
        below_c2: c2_bound.zip(s.initial_length).map(|(b, l)| l * l < b),
        circle_error: circle_sup_error(&scenario.warp, &scenario.preset, &exec.trajectory),
        final_min_theta: s.final_record.as_ref().map(|r| r.min_theta),
        config_hash: Some(s.config_hash.clone()),
        error: None,
    }
}

/// Runs every value of `axis` (concurrently on `jobs` threads, 0 = all cores)
/// and writes `sweep.csv` plus one artifact directory per row.
pub fn cmd_sweep(template: &ScenarioConfig, axis: &str, values: &[f64], out: &Path, jobs: usize) -> Result<Vec<SweepRow>> {
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values.par_iter().enumerate().map(|(i, &v)| run_row(template, axis, i, v, out)).collect()
    });
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    if rows.is_empty() {
        w.write_record([
            "row",
            "value",
            "ok",
            "passed",
            "terminal",
            "T0",
            "L0",
            "c2_bound",
            "below_c2",
            "circle_error",
            "final_min_theta",
            "config_hash",
            "error",
        ])?;
    }
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}
