//! JSON configuration. Every key is optional and defaults to the nominal
//! gauntlet scenario; unknown keys are rejected with their path.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::csbez::GuidanceConfig;
use crate::dynamics::Role;
use crate::engine::{AcpSpec, CaseId, EngineError, FieldBounds, Scenario};
use crate::geom::{Pose2, Vec2};
use crate::montecarlo::McConfig;
use crate::threats::{CaptureRules, PursuerParams, SweepPhase};
use crate::wez_risk::WezConstants;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error(transparent)]
    Scenario(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
}

impl VehicleConfig {
    fn new(start: [f64; 2], goal: [f64; 2], role: Role) -> Self {
        VehicleConfig {
            start,
            goal,
            role,
            weight: None,
            heading: None,
        }
    }

    fn spec(&self) -> AcpSpec {
        AcpSpec {
            start: Vec2::new(self.start[0], self.start[1]),
            goal: Vec2::new(self.goal[0], self.goal[1]),
            role: self.role,
            weight: self.weight.unwrap_or(self.role.default_weight()),
            heading: self.heading,
        }
    }
}

/// A patrolling threat on a vertical sweep line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatrolConfig {
    /// Patrol line abscissa and sweep center ordinate.
    pub anchor: [f64; 2],
    pub half_amplitude: f64,
    pub phase: SweepPhase,
    /// Distance along the sweep cycle already covered at t = 0, meters.
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_patrol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
}

/// A pure-pursuit interceptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PursuitConfig {
    pub position: [f64; 2],
    #[serde(default)]
    pub heading: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub v_e: f64,
    pub omega_max: f64,
    /// Pursuer intercept speed.
    pub v_p: f64,
    pub turn_radius: f64,
    pub range: f64,
    pub v_patrol: f64,
    pub k: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    pub p_capture: f64,
    pub r_capture: f64,
    /// Per-vehicle success probability used for the analytical
    /// redundancy bound of a single run.
    pub p_indiv: f64,
    pub guidance: GuidanceConfig,
    pub field: FieldBounds,
    /// Vehicle flown in the direct and single-CSBEZ cases.
    pub solo: VehicleConfig,
    /// Roster flown in the multi-ACP case and the reactive experiment.
    pub team: Vec<VehicleConfig>,
    pub threats: Vec<PatrolConfig>,
    pub reactive_threats: Vec<PursuitConfig>,
    /// Timestamps at which the risk field is sampled for contour plots.
    pub wez_grid_times: Vec<f64>,
    pub mc: McConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            v_e: 1.0,
            omega_max: 1.2,
            v_p: 2.0,
            turn_radius: 0.6,
            range: 3.0,
            v_patrol: 0.5,
            k: 2.5,
            beta: 0.35,
            epsilon: 0.35,
            dt: 0.05,
            t_max: 30.0,
            goal_radius: 0.15,
            p_capture: CaptureRules::default().p_capture,
            r_capture: CaptureRules::default().r_capture,
            p_indiv: 0.72,
            guidance: GuidanceConfig::default(),
            field: FieldBounds::default(),
            solo: VehicleConfig::new([-5.0, 0.0], [5.0, 0.0], Role::Solo),
            team: vec![
                VehicleConfig::new([-5.0, 0.0], [5.0, 0.0], Role::PrimaryIntercept),
                VehicleConfig::new([-5.0, 0.9], [5.0, 0.9], Role::EscortSupport),
                VehicleConfig::new([-5.0, -0.9], [5.0, -0.9], Role::DecoyAlternate),
            ],
            threats: vec![
                PatrolConfig {
                    anchor: [-0.5, 0.0],
                    half_amplitude: 1.5,
                    phase: SweepPhase::Ascending,
                    offset: 0.0,
                    v_patrol: None,
                    range: None,
                },
                PatrolConfig {
                    anchor: [2.5, 0.0],
                    half_amplitude: 1.5,
                    phase: SweepPhase::Descending,
                    offset: 0.0,
                    v_patrol: None,
                    range: None,
                },
            ],
            reactive_threats: vec![
                PursuitConfig {
                    position: [-0.5, 2.0],
                    heading: -FRAC_PI_2,
                    range: None,
                },
                PursuitConfig {
                    position: [2.5, -2.0],
                    heading: FRAC_PI_2,
                    range: None,
                },
            ],
            wez_grid_times: vec![0.0, 3.5, 7.2, 11.0],
            mc: McConfig::default(),
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl SimConfig {
    /// Parses a JSON document; missing keys take their defaults.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Checks value ranges and that every scenario built from this config
    /// is valid.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.p_capture > 0.0 && self.p_capture < 1.0) {
            return Err(invalid("p_capture", "must be in (0, 1)"));
        }
        if !(self.r_capture > 0.0) {
            return Err(invalid("r_capture", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.p_indiv) {
            return Err(invalid("p_indiv", "must be in [0, 1]"));
        }
        if self.team.is_empty() {
            return Err(invalid("team", "needs at least one vehicle"));
        }
        self.mc.validate().map_err(|e| invalid("mc", e.to_string()))?;
        for case in CaseId::ALL {
            self.scenario(case)?.validate()?;
        }
        self.reactive_scenario()?.validate()?;
        Ok(())
    }

    pub fn wez(&self) -> WezConstants {
        WezConstants {
            k: self.k,
            beta: self.beta,
            epsilon: self.epsilon,
        }
    }

    pub fn capture_rules(&self) -> CaptureRules {
        CaptureRules {
            p_capture: self.p_capture,
            r_capture: self.r_capture,
        }
    }

    fn patrol_threats(&self) -> Result<Vec<PursuerParams>, ConfigError> {
        self.threats
            .iter()
            .enumerate()
            .map(|(j, t)| {
                if !t.offset.is_finite() {
                    return Err(invalid(&format!("threats[{j}].offset"), "must be finite"));
                }
                PursuerParams::patrol(
                    Vec2::new(t.anchor[0], t.anchor[1]),
                    t.half_amplitude,
                    t.phase,
                    t.v_patrol.unwrap_or(self.v_patrol),
                    self.v_p,
                    self.turn_radius,
                    t.range.unwrap_or(self.range),
                )
                .map(|p| p.with_sweep_offset(t.offset))
                .map_err(|e| invalid(&format!("threats[{j}]"), e.to_string()))
            })
            .collect()
    }

    fn pursuit_threats(&self) -> Result<Vec<PursuerParams>, ConfigError> {
        self.reactive_threats
            .iter()
            .enumerate()
            .map(|(j, t)| {
                PursuerParams::pursuit(
                    Pose2::new(t.position[0], t.position[1], t.heading),
                    self.v_p,
                    self.turn_radius,
                    t.range.unwrap_or(self.range),
                )
                .map_err(|e| invalid(&format!("reactive_threats[{j}]"), e.to_string()))
            })
            .collect()
    }

    fn base(&self, case_id: CaseId, acps: Vec<AcpSpec>, threats: Vec<PursuerParams>) -> Scenario {
        Scenario {
            case_id,
            acps,
            threats,
            wez: self.wez(),
            guidance: self.guidance,
            capture: self.capture_rules(),
            dt: self.dt,
            t_max: self.t_max,
            goal_radius: self.goal_radius,
            v_e: self.v_e,
            omega_max: self.omega_max,
            field: self.field,
        }
    }

    /// One of the three comparative cases against the patrolling threats.
    pub fn scenario(&self, case_id: CaseId) -> Result<Scenario, ConfigError> {
        let acps = match case_id {
            CaseId::Direct | CaseId::SingleCsbez => vec![self.solo.spec()],
            CaseId::MultiAcp => self.team.iter().map(VehicleConfig::spec).collect(),
        };
        Ok(self.base(case_id, acps, self.patrol_threats()?))
    }

    /// The team against pure-pursuit interceptors.
    pub fn reactive_scenario(&self) -> Result<Scenario, ConfigError> {
        let acps = self.team.iter().map(VehicleConfig::spec).collect();
        Ok(self.base(CaseId::MultiAcp, acps, self.pursuit_threats()?))
    }

    /// Canonical JSON of the resolved configuration.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Applies a `KEY=VALUE` override to a JSON document. `KEY` is a dotted
/// path (`guidance.alpha`, `threats.0.anchor`); `VALUE` is parsed as JSON and
/// taken as a string if that fails.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "expected KEY=VALUE"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(invalid(assignment, "empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if !doc.is_object() {
        *doc = Value::Object(Default::default());
    }
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (n, part) in parts.iter().enumerate() {
        let last = n + 1 == parts.len();
        if let Value::Array(items) = node {
            let len = items.len();
            let slot = part
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(|| invalid(key, format!("`{part}` is not an index below {len}")))?;
            if last {
                *slot = value;
                return Ok(());
            }
            node = slot;
            continue;
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| invalid(key, format!("`{part}` is not inside an object")))?;
        if last {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one part")
}
