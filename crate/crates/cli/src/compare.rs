//! The flow against its two enclosing horizontal circles.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use warpflow_core::curve::Preset;
use warpflow_core::diagnostics::comparison_bounds;
use warpflow_core::flow::baseline_circle_path;

use crate::config::{Check, Scenario};
use crate::run::execute;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub z_lower: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub z_upper: f64,
    pub ordered: bool,
    /// `max |z - z_ode|` over vertices when the initial curve is a circle.
    pub circle_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub z_lower0: f64,
    pub z_upper0: f64,
    pub all_ordered: bool,
    pub sup_deviation: Option<f64>,
    pub rows: Vec<CompareRow>,
}

/// Sandwich heights from the `comparison` check, or a half-unit margin
/// around the initial curve clipped to the domain.
pub fn sandwich(scenario: &Scenario, z_min0: f64, z_max0: f64) -> (f64, f64) {
    for c in &scenario.checks {
        if let Check::Comparison { z_lower, z_upper } = *c {
            return (z_lower, z_upper);
        }
    }
    let room = scenario.warp.domain_upper() - z_max0;
    (z_min0 - 0.5, z_max0 + (0.5f64).min(0.5 * room))
}

pub fn cmd_compare(scenario: &Scenario, dir: &Path) -> Result<CompareReport> {
    let exec = execute(scenario)?;
    let recs = &exec.records;
    let times: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let zmin: Vec<f64> = recs.iter().map(|r| r.z_min).collect();
    let zmax: Vec<f64> = recs.iter().map(|r| r.z_max).collect();
    let (lo0, hi0) = sandwich(scenario, zmin[0], zmax[0]);
    let (lo, hi) = comparison_bounds(&times, &zmin, &zmax, &scenario.warp, lo0, hi0)?;

    let circle = match scenario.preset {
        Preset::Circle { z0, .. } => Some(baseline_circle_path(&scenario.warp, z0, &times)?),
        _ => None,
    };
    let rows: Vec<CompareRow> = (0..times.len())
        .map(|i| CompareRow {
            t: times[i],
            z_lower: lo[i],
            z_min: zmin[i],
            z_max: zmax[i],
            z_upper: hi[i],
            ordered: lo[i] < zmin[i] && zmax[i] < hi[i],
            circle_deviation: circle.as_ref().map(|path| {
                exec.trajectory.samples[i].curve.z().iter().fold(0.0f64, |m, z| m.max((z - path[i]).abs()))
            }),
        })
        .collect();
    let report = CompareReport {
        z_lower0: lo0,
        z_upper0: hi0,
        all_ordered: rows.iter().all(|r| r.ordered),
        sup_deviation: circle.as_ref().map(|_| rows.iter().filter_map(|r| r.circle_deviation).fold(0.0, f64::max)),
        rows,
    };

    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("compare.csv"))?;
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    #[derive(Serialize)]
    struct Brief {
        z_lower0: f64,
        z_upper0: f64,
        all_ordered: bool,
        sup_deviation: Option<f64>,
        samples: usize,
    }
    let brief = Brief {
        z_lower0: lo0,
        z_upper0: hi0,
        all_ordered: report.all_ordered,
        sup_deviation: report.sup_deviation,
        samples: report.rows.len(),
    };
    std::fs::write(dir.join("compare.json"), serde_json::to_string_pretty(&brief)? + "\n")?;
    Ok(report)
}
