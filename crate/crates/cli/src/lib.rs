//! Command implementations behind the `gauntlet` binary. Each command
//! resolves a configuration, runs the simulator and writes its outputs
//! into one directory together with a `manifest.json`.

pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gauntlet_core::analysis::MetricsReport;
use gauntlet_core::config::apply_override;
use gauntlet_core::engine::{run, CaseId, TrajectoryRecord};
use gauntlet_core::montecarlo::{run_ensemble, EnsembleResult, ROLLING_WINDOW};
use gauntlet_core::{ConfigError, SimConfig};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use output::{
    write_assignments, write_events, write_json, write_risks, write_rolling, write_trajectory, write_trials,
    write_wez_grid, Manifest,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// A validated configuration plus where it came from.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: SimConfig,
    pub path: Option<PathBuf>,
}

impl Resolved {
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.config.to_canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads the optional config file, applies `KEY=VALUE` overrides in order
/// and validates the result.
pub fn resolve_config(path: Option<&Path>, overrides: &[String]) -> Result<Resolved, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?;
            serde_json::from_str::<Value>(&text).map_err(|e| ConfigError::Parse {
                path: p.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => Value::Object(Default::default()),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    Ok(Resolved {
        config: SimConfig::from_value(doc)?,
        path: path.map(Path::to_path_buf),
    })
}

fn prepare(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn finish(command: &str, cfg: &Resolved, out: &Path, started: Instant, files: &[&str]) -> Result<(), CliError> {
    let manifest = Manifest {
        command: command.to_string(),
        config_path: cfg.path.clone(),
        config_hash: cfg.hash(),
        out_dir: out.to_path_buf(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_s: started.elapsed().as_secs_f64(),
        files: files.iter().map(|f| f.to_string()).collect(),
    };
    write_json(&out.join("manifest.json"), &manifest)
}

fn write_record_files(out: &Path, rec: &TrajectoryRecord, report: &MetricsReport, reactive: bool) -> Result<(), CliError> {
    write_trajectory(&out.join("trajectory.csv"), rec, reactive)?;
    write_events(&out.join("events.csv"), rec)?;
    write_risks(&out.join("risks.csv"), rec)?;
    write_json(&out.join("metrics.json"), report)
}

/// Runs one deterministic case.
pub fn cmd_run(case: CaseId, cfg: &Resolved, out: &Path) -> Result<MetricsReport, CliError> {
    let started = Instant::now();
    prepare(out)?;
    let c = &cfg.config;
    let sc = c.scenario(case)?;
    let rec = run(&sc).map_err(ConfigError::from)?;
    let report = MetricsReport::from_record(&rec, c.epsilon, c.p_indiv);
    write_record_files(out, &rec, &report, false)?;
    let ranges: Vec<f64> = sc.threats.iter().map(|p| p.range).collect();
    write_wez_grid(&out.join("wez_grid.csv"), &rec, &ranges, &sc.wez, &sc.field, &c.wez_grid_times)?;
    finish(
        &format!("run --case {}", case.as_str()),
        cfg,
        out,
        started,
        &["trajectory.csv", "events.csv", "risks.csv", "metrics.json", "wez_grid.csv"],
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct CaseEntry {
    case_id: CaseId,
    trials: usize,
    successes: usize,
    p_empirical: f64,
    ci_half_width: f64,
    p_analytical: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct Summary {
    n_trials: usize,
    master_seed: u64,
    clipped_fraction: f64,
    timeouts: usize,
    cases: Vec<CaseEntry>,
}

/// Runs the Monte Carlo ensemble over all three cases. `threads` only
/// changes wall time; outputs are identical for any value.
pub fn cmd_mc(cfg: &Resolved, out: &Path, threads: usize) -> Result<EnsembleResult, CliError> {
    let started = Instant::now();
    prepare(out)?;
    let c = &cfg.config;
    let res = run_ensemble(&c.mc, c, &CaseId::ALL, threads)?;
    write_trials(&out.join("trials.csv"), &res, c.threats.len())?;
    let summary = Summary {
        n_trials: c.mc.n_trials,
        master_seed: c.mc.master_seed,
        clipped_fraction: res.clipped_fraction,
        timeouts: res.timeouts,
        cases: res
            .summaries
            .iter()
            .map(|s| CaseEntry {
                case_id: s.case_id,
                trials: s.trials,
                successes: s.successes,
                p_empirical: s.p_empirical,
                ci_half_width: s.ci_half_width,
                p_analytical: s.p_analytical,
            })
            .collect(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_rolling(&out.join("rolling.csv"), &res, ROLLING_WINDOW)?;
    finish("mc", cfg, out, started, &["trials.csv", "summary.json", "rolling.csv"])?;
    Ok(res)
}

/// Runs the team roster against the pure-pursuit threats.
pub fn cmd_reactive(cfg: &Resolved, out: &Path) -> Result<(TrajectoryRecord, MetricsReport), CliError> {
    let started = Instant::now();
    prepare(out)?;
    let c = &cfg.config;
    let sc = c.reactive_scenario()?;
    let rec = run(&sc).map_err(ConfigError::from)?;
    let report = MetricsReport::from_record(&rec, c.epsilon, c.p_indiv);
    write_record_files(out, &rec, &report, true)?;
    write_assignments(&out.join("assignments.csv"), &rec)?;
    finish(
        "reactive",
        cfg,
        out,
        started,
        &["trajectory.csv", "events.csv", "risks.csv", "metrics.json", "assignments.csv"],
    )?;
    Ok((rec, report))
}
