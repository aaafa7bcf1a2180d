//! Run outputs: CSV emission, the hashed run manifest, a one-screen text
//! summary, and the command-line front end.
//!
//! Exit codes: 0 on success, 1 for input or output problems (arguments,
//! files, malformed data), 2 when the evaluation itself fails (infeasible
//! slot, solver limits, determinism check mismatch).

use crate::net::load_topology;
use crate::sim::{run_day, DayResult, Scenario, SolverMode};
use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} already exists; pass --force to overwrite")]
    Exists(PathBuf),
}

/// Renders the per-slot, per-node sourcing table.
pub fn power_csv(day: &DayResult) -> String {
    let mut out = String::from("slot_start_hour,node,re_kw,br_kw,bt_kw,battery_residual_kwh\n");
    for slot in &day.slots {
        for row in &slot.node_power {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                slot.start_hour,
                row.node,
                row.re_kw,
                row.br_kw,
                row.bt_kw,
                row.battery_residual_kwh
            )
            .unwrap();
        }
    }
    out
}

/// Renders the per-slot routing and blocking table.
pub fn metrics_csv(day: &DayResult) -> String {
    let mut out = String::from(
        "slot_start_hour,blocked_count,blocking_prob_volume,blocking_prob_count,virtual_hops_weighted,lightpath_count\n",
    );
    for slot in &day.slots {
        let m = &slot.metrics;
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{}",
            slot.start_hour,
            m.blocked_count,
            m.blocking_prob_volume,
            m.blocking_prob_count,
            m.virtual_hops_weighted,
            m.lightpath_count
        )
        .unwrap();
    }
    out
}

/// Human-readable digest of a day run.
pub fn summarize(day: &DayResult) -> String {
    let slots = day.slots.len();
    let mean = |f: &dyn Fn(&crate::sim::SlotResult) -> f64| {
        if slots == 0 {
            0.0
        } else {
            day.slots.iter().map(f).sum::<f64>() / slots as f64
        }
    };
    let (re, br, bt) = day.energy_by_source_kwh();
    let mut out = String::new();
    writeln!(
        out,
        "scenario {} ({}, {} slots of {} h)",
        day.scenario_name, day.solver, slots, day.slot_hours
    )
    .unwrap();
    writeln!(out, "  blocked demand-slots: {}", day.total_blocked()).unwrap();
    writeln!(
        out,
        "  mean blocking probability: {:.6} by volume, {:.6} by count",
        mean(&|s| s.metrics.blocking_prob_volume),
        mean(&|s| s.metrics.blocking_prob_count)
    )
    .unwrap();
    writeln!(
        out,
        "  mean virtual hops (flow weighted): {:.4}",
        mean(&|s| s.metrics.virtual_hops_weighted)
    )
    .unwrap();
    writeln!(
        out,
        "  energy sourced: renewable {re:.3} kWh, grid {br:.3} kWh, battery {bt:.3} kWh"
    )
    .unwrap();
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

/// What a run produced, with content hashes for reproducibility checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_name: String,
    pub solver_mode: String,
    pub slot_count: usize,
    pub files: Vec<ManifestFile>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

fn write_fresh(path: &Path, content: &str, force: bool) -> Result<(), ReportError> {
    if path.exists() && !force {
        return Err(ReportError::Exists(path.to_path_buf()));
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Writes power.csv, metrics.csv and manifest.json into `dir`.
pub fn write_outputs(dir: &Path, day: &DayResult, force: bool) -> Result<RunManifest, ReportError> {
    std::fs::create_dir_all(dir)?;
    let power = power_csv(day);
    let metrics = metrics_csv(day);
    write_fresh(&dir.join("power.csv"), &power, force)?;
    write_fresh(&dir.join("metrics.csv"), &metrics, force)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_name: day.scenario_name.clone(),
        solver_mode: day.solver.to_string(),
        slot_count: day.slots.len(),
        files: vec![
            ManifestFile {
                path: "metrics.csv".into(),
                sha256: sha256_hex(metrics.as_bytes()),
            },
            ManifestFile {
                path: "power.csv".into(),
                sha256: sha256_hex(power.as_bytes()),
            },
        ],
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_fresh(&dir.join("manifest.json"), &text, force)?;
    Ok(manifest)
}

#[derive(Debug, Parser)]
#[command(
    name = "gridshade",
    version,
    about = "Evaluate energy-aware routing over a day of two-hour slots"
)]
struct Cli {
    /// Topology JSON file.
    #[arg(long)]
    topology: PathBuf,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for power.csv, metrics.csv, manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's solver mode.
    #[arg(long, value_parser = SolverMode::from_str)]
    solver: Option<SolverMode>,
    /// Overwrite existing outputs and lift the exact-solver size guard.
    #[arg(long)]
    force: bool,
    /// Run the day twice and require byte-identical outputs.
    #[arg(long)]
    seed_check: bool,
}

/// CLI driver, factored out of `main` so tests can call it.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help and version through this path
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let topo_text = match std::fs::read_to_string(&cli.topology) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: topology {}: {e}", cli.topology.display());
            return 1;
        }
    };
    let topo = match load_topology(&topo_text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: topology {}: {e}", cli.topology.display());
            return 1;
        }
    };
    let mut scenario: Scenario = match crate::sim::load_scenario_file(&cli.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: scenario {}: {e}", cli.scenario.display());
            return 1;
        }
    };
    if let Some(mode) = cli.solver {
        scenario.solver = mode;
    }
    if let Err(e) = scenario.validate(&topo) {
        eprintln!("error: {e}");
        return 1;
    }

    let day = match run_day(&topo, &scenario, cli.force) {
        Ok(day) => day,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    if cli.seed_check {
        match run_day(&topo, &scenario, cli.force) {
            Ok(again) => {
                if power_csv(&again) != power_csv(&day) || metrics_csv(&again) != metrics_csv(&day)
                {
                    eprintln!("error: repeated run produced different outputs");
                    return 2;
                }
                println!("determinism check passed: two runs, identical outputs");
            }
            Err(e) => {
                eprintln!("error: repeated run failed: {e}");
                return 2;
            }
        }
    }

    match write_outputs(&cli.out, &day, cli.force) {
        Ok(_) => {
            print!("{}", summarize(&day));
            println!("wrote {}", cli.out.join("manifest.json").display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
