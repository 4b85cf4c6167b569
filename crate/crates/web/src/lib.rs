//! WebAssembly bindings for the browser demo in `www/`. The exported
//! functions exchange JSON strings; the plain-Rust versions behind them
//! are public so they can be tested natively.

use gauntlet_core::analysis::{p_mission_analytical, wald_ci_half_width, MetricsReport};
use gauntlet_core::engine::{run, Scenario, TrajectoryRecord};
use gauntlet_core::threats::CaptureState;
use gauntlet_core::wez_risk::pair_risk;
use gauntlet_core::{CaseId, SimConfig, Vec2};
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid the risk snapshot accepts along either axis.
pub const MAX_GRID: usize = 400;

fn parse_config(config: &str) -> Result<SimConfig, String> {
    let doc: Value = if config.trim().is_empty() {
        json!({})
    } else {
        serde_json::from_str(config).map_err(|e| format!("config is not JSON: {e}"))?
    };
    SimConfig::from_value(doc).map_err(|e| e.to_string())
}

/// `case` is one of the three case names or `reactive`.
fn scenario(cfg: &SimConfig, case: &str) -> Result<Scenario, String> {
    let sc = if case == "reactive" {
        cfg.reactive_scenario()
    } else {
        cfg.scenario(case.parse::<CaseId>()?)
    };
    sc.map_err(|e| e.to_string())
}

fn simulate_record(config: &str, case: &str) -> Result<(SimConfig, Scenario, TrajectoryRecord), String> {
    let cfg = parse_config(config)?;
    let sc = scenario(&cfg, case)?;
    let rec = run(&sc).map_err(|e| e.to_string())?;
    Ok((cfg, sc, rec))
}

#[derive(Serialize)]
struct Track {
    role: Option<&'static str>,
    goal: Option<[f64; 2]>,
    /// `[x, y, psi]` per recorded step.
    poses: Vec<[f64; 3]>,
    /// Index of the first step at which the agent was no longer active.
    ended_at: Option<usize>,
}

/// Runs a case and returns its metrics plus every agent's track.
pub fn simulate(config: &str, case: &str) -> Result<String, String> {
    let (cfg, sc, rec) = simulate_record(config, case)?;
    let report = MetricsReport::from_record(&rec, cfg.epsilon, cfg.p_indiv);
    let mut tracks = Vec::new();
    for (i, info) in rec.acps.iter().enumerate() {
        tracks.push(Track {
            role: Some(info.role.as_str()),
            goal: Some([info.goal.x, info.goal.y]),
            poses: rec.steps.iter().map(|s| pose3(s.acps[i].pose)).collect(),
            ended_at: rec.steps.iter().position(|s| s.acps[i].status.as_str() != "active"),
        });
    }
    for j in 0..rec.n_threats {
        tracks.push(Track {
            role: None,
            goal: None,
            poses: rec.steps.iter().map(|s| pose3(s.threats[j].pose)).collect(),
            ended_at: rec.steps.iter().position(|s| s.threats[j].state == CaptureState::Expended),
        });
    }
    let out = json!({
        "metrics": report,
        "dt": rec.dt,
        "steps": rec.steps.len(),
        "field": [sc.field.x_min, sc.field.x_max, sc.field.y_min, sc.field.y_max],
        "n_acps": rec.acps.len(),
        "tracks": tracks,
        "events": rec.events.iter().map(|e| json!({"t": e.t, "kind": e.kind.as_str(), "acp": e.acp_index})).collect::<Vec<_>>(),
    });
    Ok(out.to_string())
}

fn pose3(p: gauntlet_core::Pose2) -> [f64; 3] {
    [p.x, p.y, p.psi()]
}

/// Combined risk `max_j p_j` over an `nx` by `ny` grid spanning the field,
/// using the threats as they stood at the recorded step nearest to `t`.
/// Rows run bottom to top.
pub fn risk_grid(config: &str, case: &str, t: f64, nx: usize, ny: usize) -> Result<String, String> {
    if !(2..=MAX_GRID).contains(&nx) || !(2..=MAX_GRID).contains(&ny) {
        return Err(format!("grid size must be within 2..={MAX_GRID}"));
    }
    if !t.is_finite() {
        return Err("t must be finite".into());
    }
    let (cfg, sc, rec) = simulate_record(config, case)?;
    let k = ((t / rec.dt).round().max(0.0) as usize).min(rec.steps.len() - 1);
    let step = &rec.steps[k];
    let wez = cfg.wez();
    let f = sc.field;
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let y = f.y_min + (f.y_max - f.y_min) * iy as f64 / (ny - 1) as f64;
        for ix in 0..nx {
            let x = f.x_min + (f.x_max - f.x_min) * ix as f64 / (nx - 1) as f64;
            let p = step
                .threats
                .iter()
                .zip(&sc.threats)
                .filter(|(th, _)| th.state == CaptureState::Hunting)
                .map(|(th, params)| pair_risk(Vec2::new(x, y), th.pose, params.range, &wez))
                .fold(0.0, f64::max);
            values.push(p);
        }
    }
    Ok(json!({ "t": step.t, "nx": nx, "ny": ny, "epsilon": wez.epsilon, "values": values }).to_string())
}

/// Redundancy bound for `n` vehicles and the Wald half-width of an
/// observed `successes / trials` rate.
pub fn mission_probability(p_indiv: f64, n: u32, successes: u32, trials: u32) -> Result<String, String> {
    if !(0.0..=1.0).contains(&p_indiv) {
        return Err("p_indiv must lie in [0, 1]".into());
    }
    if trials == 0 || successes > trials {
        return Err("need 0 <= successes <= trials and trials >= 1".into());
    }
    let curve: Vec<f64> = (1..=n.max(1)).map(|k| p_mission_analytical(p_indiv, k)).collect();
    Ok(json!({
        "p_mission": p_mission_analytical(p_indiv, n),
        "curve": curve,
        "p_empirical": successes as f64 / trials as f64,
        "ci_half_width": wald_ci_half_width(successes as usize, trials as usize),
    })
    .to_string())
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(config: &str, case: &str) -> Result<String, JsError> {
    simulate(config, case).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = riskGrid)]
pub fn risk_grid_js(config: &str, case: &str, t: f64, nx: usize, ny: usize) -> Result<String, JsError> {
    risk_grid(config, case, t, nx, ny).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = missionProbability)]
pub fn mission_probability_js(p_indiv: f64, n: u32, successes: u32, trials: u32) -> Result<String, JsError> {
    mission_probability(p_indiv, n, successes, trials).map_err(|e| JsError::new(&e))
}
