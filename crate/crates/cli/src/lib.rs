//! Scenario files, orchestration and artifacts for `warpflow`.

pub mod checks;
pub mod compare;
pub mod config;
pub mod run;
pub mod sweep;

use std::path::{Path, PathBuf};

use anyhow::Result;
use warpflow_core::warp::{ConditionReport, SamplingGrid};

pub use config::{parse_config, Scenario, ScenarioConfig};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "WARPFLOW_OUT";

/// `--out` wins, then `[output] dir`, then `$WARPFLOW_OUT/<stem>`, then `runs/<stem>`.
pub fn output_dir(cli: Option<&Path>, cfg: &ScenarioConfig, config_path: &Path) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(d) = &cfg.output.dir {
        return PathBuf::from(d);
    }
    let stem = config_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    match std::env::var_os(OUT_ENV) {
        Some(root) => PathBuf::from(root).join(stem),
        None => PathBuf::from("runs").join(stem),
    }
}

/// Condition report of the scenario's warp, also written as `conditions.json`.
pub fn cmd_check_warp(scenario: &Scenario, dir: Option<&Path>) -> Result<ConditionReport> {
    let report = scenario.warp.check_conditions(&SamplingGrid::default());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("conditions.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}
