use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use warpflow_cli::compare::cmd_compare;
use warpflow_cli::config::ScenarioConfig;
use warpflow_cli::run::cmd_run;
use warpflow_cli::sweep::cmd_sweep;
use warpflow_cli::{cmd_check_warp, output_dir, parse_config, Scenario};

#[derive(Parser)]
#[command(name = "warpflow", version, about = "Curve shortening flow on warped-product surfaces")]
struct Cli {
    /// Output directory (default: [output] dir, then $WARPFLOW_OUT/<config stem>, then runs/<config stem>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only report failures.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write diagnostics, snapshots, events and a summary.
    Run { config: PathBuf },
    /// Print the condition report of the scenario's warp.
    CheckWarp { config: PathBuf },
    /// Run the scenario once per value of a numeric field.
    Sweep {
        config: PathBuf,
        /// Dotted field path such as `curve.depth`; defaults to the [sweep] section.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values; defaults to the [sweep] section.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Compare the flow with its enclosing horizontal circles.
    Compare { config: PathBuf },
}

fn load(path: &Path) -> Result<Scenario, ExitCode> {
    parse_config(path).map_err(|errs| {
        eprintln!("{}: invalid config", path.display());
        for e in &errs.0 {
            eprintln!("  {e}");
        }
        ExitCode::from(2)
    })
}

fn fail(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => {
            let scenario = match load(config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let dir = output_dir(cli.out.as_deref(), &scenario.config, config);
            let start = Instant::now();
            let summary = match cmd_run(&scenario, &dir) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let elapsed = start.elapsed().as_secs_f64();
            let _ = std::fs::write(dir.join("run.log"), format!("wall_time_s {elapsed:.3}\n"));
            for (name, c) in &summary.checks {
                if !cli.quiet || !c.passed {
                    println!("{} {name}: {}", if c.passed { "PASS" } else { "FAIL" }, c.detail);
                }
            }
            if !cli.quiet {
                println!(
                    "terminal {} at t = {}, T0 = {:?}, {} steps, {elapsed:.2} s -> {}",
                    serde_json::to_value(&summary.terminal_event.kind)
                        .ok()
                        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
                        .unwrap_or_default(),
                    summary.terminal_event.t,
                    summary.t0,
                    summary.steps,
                    dir.display()
                );
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::CheckWarp { config } => {
            let scenario = match load(config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match cmd_check_warp(&scenario, cli.out.as_deref()) {
                Ok(report) => {
                    if !cli.quiet {
                        println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep { config, axis, values } => {
            let text = match std::fs::read_to_string(config) {
                Ok(t) => t,
                Err(e) => return fail(e.into()),
            };
            let template = match ScenarioConfig::from_toml(&text) {
                Ok(c) => c,
                Err(errs) => {
                    eprintln!("{}: invalid config\n  {errs}", config.display());
                    return ExitCode::from(2);
                }
            };
            let axis = axis.clone().or_else(|| template.sweep.as_ref().map(|s| s.axis.clone()));
            let values = values.clone().or_else(|| template.sweep.as_ref().map(|s| s.values.clone()));
            let Some(axis) = axis else {
                eprintln!("sweep needs --axis or a [sweep] section");
                return ExitCode::from(2);
            };
            let values = values.unwrap_or_default();
            let dir = output_dir(cli.out.as_deref(), &template, config);
            match cmd_sweep(&template, &axis, &values, &dir, cli.jobs) {
                Ok(rows) => {
                    for r in &rows {
                        if !cli.quiet || !r.ok {
                            println!(
                                "row {} {axis} = {}: T0 = {:?}, L0 = {:?}, passed = {:?}{}",
                                r.row,
                                r.value,
                                r.t0,
                                r.initial_length,
                                r.passed,
                                r.error.as_ref().map(|e| format!(", error: {e}")).unwrap_or_default()
                            );
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Compare { config } => {
            let scenario = match load(config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let dir = output_dir(cli.out.as_deref(), &scenario.config, config);
            match cmd_compare(&scenario, &dir) {
                Ok(report) => {
                    if !cli.quiet {
                        println!("{:>10} {:>12} {:>12} {:>12} {:>12} ordered", "t", "z_lower", "z_min", "z_max", "z_upper");
                        for r in &report.rows {
                            println!(
                                "{:>10.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {}",
                                r.t, r.z_lower, r.z_min, r.z_max, r.z_upper, r.ordered
                            );
                        }
                        if let Some(d) = report.sup_deviation {
                            println!("sup |z - z_ode| = {d:.3e}");
                        }
                    }
                    if report.all_ordered {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
    }
}
