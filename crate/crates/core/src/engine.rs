//! Scenario assembly and the fixed-step simulation loop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csbez::{csbez_control, heading_command, GuidanceConfig, GuidanceError};
use crate::dynamics::{rk4_step, AcpState, Role, Status};
use crate::geom::{bearing, Interceptor, Pose2, Vec2};
use crate::threats::{
    check_capture, nearest_active, patrol_step, pure_pursuit_step, CaptureRules, CaptureState, Policy, PursuerParams,
    TargetAssignment, ThreatError,
};
use crate::wez_risk::{pair_risk, WezConstants, WezError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Direct,
    SingleCsbez,
    MultiAcp,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::Direct, CaseId::SingleCsbez, CaseId::MultiAcp];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Direct => "direct",
            CaseId::SingleCsbez => "single_csbez",
            CaseId::MultiAcp => "multi_acp",
        }
    }

    pub fn uses_csbez(self) -> bool {
        self != CaseId::Direct
    }
}

impl std::str::FromStr for CaseId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(CaseId::Direct),
            "single_csbez" => Ok(CaseId::SingleCsbez),
            "multi_acp" => Ok(CaseId::MultiAcp),
            other => Err(format!("unknown case `{other}` (expected direct, single_csbez or multi_acp)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for FieldBounds {
    fn default() -> Self {
        FieldBounds {
            x_min: -6.0,
            x_max: 6.0,
            y_min: -2.5,
            y_max: 2.5,
        }
    }
}

impl FieldBounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }
}

/// Start, goal and role of one friendly vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcpSpec {
    pub start: Vec2,
    pub goal: Vec2,
    pub role: Role,
    pub weight: f64,
    /// Initial heading; defaults to the bearing of the goal.
    pub heading: Option<f64>,
}

impl AcpSpec {
    pub fn new(start: Vec2, goal: Vec2, role: Role) -> Self {
        AcpSpec {
            start,
            goal,
            role,
            weight: role.default_weight(),
            heading: None,
        }
    }

    fn initial_state(&self, speed: f64) -> AcpState {
        let psi = self.heading.unwrap_or_else(|| bearing(self.start, self.goal).angle);
        AcpState::new(Pose2::at(self.start, psi), speed, self.role, self.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub case_id: CaseId,
    pub acps: Vec<AcpSpec>,
    pub threats: Vec<PursuerParams>,
    pub wez: WezConstants,
    pub guidance: GuidanceConfig,
    pub capture: CaptureRules,
    pub dt: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    /// Vehicle speed.
    pub v_e: f64,
    pub omega_max: f64,
    pub field: FieldBounds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid time step: dt = {dt}, t_max = {t_max}")]
    Timing { dt: f64, t_max: f64 },
    #[error("scenario has no vehicles")]
    NoVehicles,
    #[error("vehicle {index}: {what} {point:?} outside field bounds")]
    OutOfBounds { index: usize, what: &'static str, point: Vec2 },
    #[error("vehicle {index}: role weight must be > 0, got {weight}")]
    Weight { index: usize, weight: f64 },
    #[error("{name} must be > 0, got {value}")]
    Positive { name: &'static str, value: f64 },
    #[error("threat {index}: {source}")]
    Threat { index: usize, source: ThreatError },
    #[error(transparent)]
    Wez(#[from] WezError),
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
}

impl Scenario {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.dt > 0.0) || !(self.t_max >= self.dt) || !self.t_max.is_finite() {
            return Err(EngineError::Timing {
                dt: self.dt,
                t_max: self.t_max,
            });
        }
        for (name, value) in [("v_e", self.v_e), ("omega_max", self.omega_max), ("goal_radius", self.goal_radius)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(EngineError::Positive { name, value });
            }
        }
        if self.acps.is_empty() {
            return Err(EngineError::NoVehicles);
        }
        for (index, a) in self.acps.iter().enumerate() {
            for (what, point) in [("start", a.start), ("goal", a.goal)] {
                if !point.is_finite() || !self.field.contains(point) {
                    return Err(EngineError::OutOfBounds { index, what, point });
                }
            }
            if !(a.weight > 0.0) {
                return Err(EngineError::Weight { index, weight: a.weight });
            }
        }
        for (index, t) in self.threats.iter().enumerate() {
            t.validate().map_err(|source| EngineError::Threat { index, source })?;
        }
        self.wez.validate()?;
        self.guidance.validate()?;
        Ok(())
    }

    /// Number of integration steps after t = 0.
    pub fn step_count(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcpSnapshot {
    pub pose: Pose2,
    pub status: Status,
    /// Worst-case margin seen by the CSBEZ law this step.
    pub z_min: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreatSnapshot {
    pub pose: Pose2,
    pub state: CaptureState,
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSample {
    pub acp: usize,
    pub threat: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub acps: Vec<AcpSnapshot>,
    pub threats: Vec<ThreatSnapshot>,
    /// One entry per (active vehicle, hunting pursuer) pair.
    pub risks: Vec<RiskSample>,
}

impl StepRecord {
    /// Largest risk on vehicle `acp` this step, if any pursuer was hunting.
    pub fn max_risk(&self, acp: usize) -> Option<f64> {
        self.risks.iter().filter(|r| r.acp == acp).map(|r| r.p).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Capture,
    Goal,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Capture => "capture",
            EventKind::Goal => "goal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub acp_index: usize,
    pub threat_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcpInfo {
    pub role: Role,
    pub weight: f64,
    pub start: Vec2,
    pub goal: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub case_id: CaseId,
    pub acps: Vec<AcpInfo>,
    pub n_threats: usize,
    pub dt: f64,
    pub steps: Vec<StepRecord>,
    pub events: Vec<Event>,
    pub assignments: Vec<TargetAssignment>,
    /// Set when the run was aborted before finishing.
    pub timed_out: bool,
}

impl TrajectoryRecord {
    pub fn final_status(&self) -> Vec<Status> {
        self.steps
            .last()
            .map(|s| s.acps.iter().map(|a| a.status).collect())
            .unwrap_or_default()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.acps.iter().map(|a| a.weight).collect()
    }

    pub fn capture_time(&self, acp: usize) -> Option<f64> {
        self.find_event(acp, EventKind::Capture)
    }

    pub fn success_time(&self, acp: usize) -> Option<f64> {
        self.find_event(acp, EventKind::Goal)
    }

    fn find_event(&self, acp: usize, kind: EventKind) -> Option<f64> {
        self.events.iter().find(|e| e.acp_index == acp && e.kind == kind).map(|e| e.t)
    }
}

/// Proportional goal tracking with no threat information.
pub fn direct_control(acp: &AcpState, goal: Vec2, heading_gain: f64, omega_max: f64) -> f64 {
    let b = bearing(acp.position(), goal);
    heading_command(b.angle, acp.pose.psi(), heading_gain, omega_max)
}

/// Team outcome: `s_team` is set iff at least one vehicle reached its goal.
pub fn team_outcome(record: &TrajectoryRecord) -> (bool, Vec<bool>) {
    let per: Vec<bool> = record.final_status().iter().map(|s| *s == Status::Succeeded).collect();
    (per.iter().any(|s| *s), per)
}

struct Sim<'a> {
    sc: &'a Scenario,
    acps: Vec<AcpState>,
    threats: Vec<PursuerParams>,
    targets: Vec<Option<usize>>,
    record: TrajectoryRecord,
}

impl<'a> Sim<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let acps: Vec<AcpState> = sc.acps.iter().map(|a| a.initial_state(sc.v_e)).collect();
        let info = sc
            .acps
            .iter()
            .map(|a| AcpInfo {
                role: a.role,
                weight: a.weight,
                start: a.start,
                goal: a.goal,
            })
            .collect();
        Sim {
            sc,
            acps,
            threats: sc.threats.clone(),
            targets: vec![None; sc.threats.len()],
            record: TrajectoryRecord {
                case_id: sc.case_id,
                acps: info,
                n_threats: sc.threats.len(),
                dt: sc.dt,
                steps: Vec::with_capacity(sc.step_count() + 1),
                events: Vec::new(),
                assignments: Vec::new(),
                timed_out: false,
            },
        }
    }

    fn advance_threats(&mut self, t: f64) {
        for j in 0..self.threats.len() {
            let p = &self.threats[j];
            if !p.is_hunting() {
                self.targets[j] = None;
                continue;
            }
            match p.policy {
                Policy::PatrolSweep => {
                    self.threats[j].pose = patrol_step(p, t);
                    self.targets[j] = None;
                }
                Policy::PurePursuit => {
                    let (pose, target) = pure_pursuit_step(p, &self.acps, self.sc.dt);
                    self.threats[j].pose = pose;
                    self.log_target(t, j, target);
                }
            }
        }
    }

    fn log_target(&mut self, t: f64, j: usize, target: Option<usize>) {
        self.targets[j] = target;
        self.record.assignments.push(TargetAssignment {
            time: t,
            threat_index: j,
            target_acp_index: target,
        });
    }

    fn hunting(&self) -> Vec<Interceptor> {
        self.threats.iter().filter(|p| p.is_hunting()).map(|p| p.interceptor()).collect()
    }

    fn controls(&self) -> Vec<(f64, Option<f64>)> {
        let sc = self.sc;
        let hunters = self.hunting();
        self.acps
            .iter()
            .zip(&sc.acps)
            .map(|(a, spec)| {
                if !a.is_active() {
                    return (0.0, None);
                }
                if sc.case_id.uses_csbez() {
                    let out = csbez_control(a, spec.goal, &hunters, &sc.guidance, sc.omega_max);
                    (out.u, out.worst.map(|(_, s)| s.z_min))
                } else {
                    (direct_control(a, spec.goal, sc.guidance.heading_gain, sc.omega_max), None)
                }
            })
            .collect()
    }

    fn risks(&self) -> Vec<RiskSample> {
        let mut out = Vec::new();
        for (i, a) in self.acps.iter().enumerate().filter(|(_, a)| a.is_active()) {
            for (j, p) in self.threats.iter().enumerate().filter(|(_, p)| p.is_hunting()) {
                out.push(RiskSample {
                    acp: i,
                    threat: j,
                    p: pair_risk(a.position(), p.pose, p.range, &self.sc.wez),
                });
            }
        }
        out
    }

    /// Risk, capture and goal phases followed by the step record.
    fn resolve(&mut self, t: f64, z: Vec<Option<f64>>) {
        let risks = self.risks();
        let lookup = |i: usize, j: usize| risks.iter().find(|r| r.acp == i && r.threat == j).map(|r| r.p);
        let captures = check_capture(&self.threats, &self.acps, &self.sc.capture, lookup);
        for c in captures {
            if self.acps[c.acp_index].mark_captured(t) {
                self.threats[c.threat_index].capture_state = CaptureState::Expended;
                self.record.events.push(Event {
                    t,
                    kind: EventKind::Capture,
                    acp_index: c.acp_index,
                    threat_index: Some(c.threat_index),
                });
            }
        }
        for (i, (a, spec)) in self.acps.iter_mut().zip(&self.sc.acps).enumerate() {
            if a.is_active() && a.position().distance(spec.goal) <= self.sc.goal_radius && a.mark_succeeded(t) {
                self.record.events.push(Event {
                    t,
                    kind: EventKind::Goal,
                    acp_index: i,
                    threat_index: None,
                });
            }
        }
        let step = StepRecord {
            t,
            acps: self
                .acps
                .iter()
                .zip(z)
                .map(|(a, z_min)| AcpSnapshot {
                    pose: a.pose,
                    status: a.status(),
                    z_min,
                })
                .collect(),
            threats: self
                .threats
                .iter()
                .zip(&self.targets)
                .map(|(p, target)| ThreatSnapshot {
                    pose: p.pose,
                    state: p.capture_state,
                    target: *target,
                })
                .collect(),
            risks,
        };
        self.record.steps.push(step);
    }

    fn any_active(&self) -> bool {
        self.acps.iter().any(|a| a.is_active())
    }
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<TrajectoryRecord, EngineError> {
    run_with_abort(scenario, |_| false)
}

/// Runs a scenario, polling `abort(step)` before each step. An aborted run
/// returns the partial record with `timed_out` set.
pub fn run_with_abort<F>(scenario: &Scenario, mut abort: F) -> Result<TrajectoryRecord, EngineError>
where
    F: FnMut(usize) -> bool,
{
    scenario.validate()?;
    let mut sim = Sim::new(scenario);

    // initial lock-on of pursuit threats, without motion
    for j in 0..sim.threats.len() {
        let p = &sim.threats[j];
        if p.is_hunting() && p.policy == Policy::PurePursuit {
            let target = nearest_active(p.pose.position(), &sim.acps);
            sim.log_target(0.0, j, target);
        }
    }
    let n = sim.acps.len();
    sim.resolve(0.0, vec![None; n]);

    for k in 1..=scenario.step_count() {
        if !sim.any_active() {
            break;
        }
        if abort(k) {
            sim.record.timed_out = true;
            break;
        }
        let t = k as f64 * scenario.dt;
        sim.advance_threats(t);
        let controls = sim.controls();
        for (a, (u, _)) in sim.acps.iter_mut().zip(&controls) {
            *a = rk4_step(a, *u, scenario.dt);
        }
        sim.resolve(t, controls.into_iter().map(|(_, z)| z).collect());
    }
    Ok(sim.record)
}
