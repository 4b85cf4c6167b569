//! File writers for run, ensemble and reactive outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gauntlet_core::engine::{FieldBounds, TrajectoryRecord};
use gauntlet_core::geom::Vec2;
use gauntlet_core::montecarlo::EnsembleResult;
use gauntlet_core::threats::CaptureState;
use gauntlet_core::wez_risk::{pair_risk, WezConstants};
use serde::Serialize;

use crate::CliError;

pub const TRAJECTORY_HEADER: [&str; 10] =
    ["t", "agent_kind", "agent_index", "x", "y", "psi", "status", "p_max", "z_min", "target_index"];
pub const EVENTS_HEADER: [&str; 4] = ["t", "kind", "acp_index", "threat_index"];
pub const RISKS_HEADER: [&str; 4] = ["t", "acp_index", "threat_index", "p"];
pub const WEZ_GRID_HEADER: [&str; 4] = ["t", "x", "y", "p_max"];
pub const ASSIGNMENTS_HEADER: [&str; 3] = ["time", "threat_index", "target_acp_index"];

/// Grid resolution of `wez_grid.csv`.
pub const WEZ_GRID_NX: usize = 121;
pub const WEZ_GRID_NY: usize = 61;

/// Shortest decimal form that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn threat_state(s: CaptureState) -> &'static str {
    match s {
        CaptureState::Hunting => "hunting",
        CaptureState::Expended => "expended",
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn write_trajectory(path: &Path, rec: &TrajectoryRecord, reactive: bool) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for s in &rec.steps {
        let t = num(s.t);
        for (i, a) in s.acps.iter().enumerate() {
            rows.push(vec![
                t.clone(),
                "acp".into(),
                i.to_string(),
                num(a.pose.x),
                num(a.pose.y),
                num(a.pose.psi()),
                a.status.as_str().into(),
                opt(s.max_risk(i).map(num)),
                opt(a.z_min.map(num)),
                String::new(),
            ]);
        }
        for (j, th) in s.threats.iter().enumerate() {
            rows.push(vec![
                t.clone(),
                "threat".into(),
                j.to_string(),
                num(th.pose.x),
                num(th.pose.y),
                num(th.pose.psi()),
                threat_state(th.state).into(),
                String::new(),
                String::new(),
                if reactive { opt(th.target) } else { String::new() },
            ]);
        }
    }
    write_csv(path, &TRAJECTORY_HEADER, rows)
}

pub fn write_events(path: &Path, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let rows = rec
        .events
        .iter()
        .map(|e| vec![num(e.t), e.kind.as_str().into(), e.acp_index.to_string(), opt(e.threat_index)]);
    write_csv(path, &EVENTS_HEADER, rows)
}

/// Every per-pair risk sample, the data the exposure metrics sum over.
pub fn write_risks(path: &Path, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let rows = rec.steps.iter().flat_map(|s| {
        s.risks
            .iter()
            .map(move |r| vec![num(s.t), r.acp.to_string(), r.threat.to_string(), num(r.p)])
    });
    write_csv(path, &RISKS_HEADER, rows)
}

pub fn write_assignments(path: &Path, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let rows = rec
        .assignments
        .iter()
        .map(|a| vec![num(a.time), a.threat_index.to_string(), opt(a.target_acp_index)]);
    write_csv(path, &ASSIGNMENTS_HEADER, rows)
}

/// Risk field `max_j p_j` on a regular grid over the field at each
/// requested time, using the hunting threats of the nearest recorded step.
/// Times past the end of the record are skipped.
pub fn write_wez_grid(
    path: &Path,
    rec: &TrajectoryRecord,
    ranges: &[f64],
    wez: &WezConstants,
    field: &FieldBounds,
    times: &[f64],
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &t in times {
        let k = (t / rec.dt).round();
        if !(k >= 0.0) || k as usize >= rec.steps.len() {
            continue;
        }
        let step = &rec.steps[k as usize];
        let hunting: Vec<_> = step
            .threats
            .iter()
            .zip(ranges)
            .filter(|(th, _)| th.state == CaptureState::Hunting)
            .collect();
        for iy in 0..WEZ_GRID_NY {
            let y = field.y_min + (field.y_max - field.y_min) * iy as f64 / (WEZ_GRID_NY - 1) as f64;
            for ix in 0..WEZ_GRID_NX {
                let x = field.x_min + (field.x_max - field.x_min) * ix as f64 / (WEZ_GRID_NX - 1) as f64;
                let p = hunting
                    .iter()
                    .map(|(th, r)| pair_risk(Vec2::new(x, y), th.pose, **r, wez))
                    .fold(0.0, f64::max);
                rows.push(vec![num(t), num(x), num(y), num(p)]);
            }
        }
    }
    write_csv(path, &WEZ_GRID_HEADER, rows)
}

pub fn trials_header(n_threats: usize) -> Vec<String> {
    let mut h: Vec<String> = ["trial", "case"].iter().map(|s| s.to_string()).collect();
    for j in 0..n_threats {
        for f in ["range", "anchor_x", "anchor_y", "v_patrol"] {
            h.push(format!("{f}_{j}"));
        }
    }
    for f in ["clipped", "s_team", "outcomes", "j_wez", "v_wez", "m_team", "timed_out"] {
        h.push(f.into());
    }
    h
}

pub fn write_trials(path: &Path, res: &EnsembleResult, n_threats: usize) -> Result<(), CliError> {
    let header = trials_header(n_threats);
    let rows = res.trials.iter().map(|t| {
        let mut row = vec![t.trial_index.to_string(), t.case_id.as_str().into()];
        for s in &t.sampled.threats {
            row.extend([num(s.range), num(s.anchor_x), num(s.anchor_y), num(s.v_patrol)]);
        }
        let outcomes: Vec<&str> = t.outcomes.iter().map(|o| o.as_str()).collect();
        row.extend([
            t.sampled.clipped.to_string(),
            t.s_team.to_string(),
            outcomes.join(";"),
            num(t.j_wez),
            num(t.v_wez),
            num(t.m_team),
            t.timed_out.to_string(),
        ]);
        row
    });
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(path, &header, rows)
}

/// Rolling success curves, one column per case; row `k` covers trials
/// `k .. k + window`.
pub fn write_rolling(path: &Path, res: &EnsembleResult, window: usize) -> Result<(), CliError> {
    let mut header = vec!["window_end".to_string()];
    header.extend(res.summaries.iter().map(|s| s.case_id.as_str().to_string()));
    let n = res.summaries.iter().map(|s| s.rolling.len()).max().unwrap_or(0);
    let rows = (0..n).map(|k| {
        let mut row = vec![(k + window).to_string()];
        row.extend(res.summaries.iter().map(|s| opt(s.rolling.get(k).map(|v| num(*v)))));
        row
    });
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(path, &header, rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub version: String,
    pub duration_s: f64,
    pub files: Vec<String>,
}
