//! Unicycle kinematics with turn-rate saturation, advanced by fixed-step
//! fourth-order Runge-Kutta.

use serde::{Deserialize, Serialize};

use crate::geom::{Pose2, Vec2};

/// Mission role of a friendly vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PrimaryIntercept,
    EscortSupport,
    DecoyAlternate,
    Solo,
}

impl Role {
    /// Mission-value weight used by the exposure metric.
    pub fn default_weight(self) -> f64 {
        match self {
            Role::PrimaryIntercept => 2.0,
            Role::EscortSupport => 1.0,
            Role::DecoyAlternate => 0.5,
            Role::Solo => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::PrimaryIntercept => "primary_intercept",
            Role::EscortSupport => "escort_support",
            Role::DecoyAlternate => "decoy_alternate",
            Role::Solo => "solo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    Captured,
    Succeeded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Active => "active",
            Status::Captured => "captured",
            Status::Succeeded => "succeeded",
        }
    }
}

/// State of one friendly vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct AcpState {
    pub pose: Pose2,
    pub speed: f64,
    pub role: Role,
    pub role_weight: f64,
    status: Status,
    capture_time: Option<f64>,
    success_time: Option<f64>,
}

impl AcpState {
    pub fn new(pose: Pose2, speed: f64, role: Role, role_weight: f64) -> Self {
        AcpState {
            pose,
            speed,
            role,
            role_weight,
            status: Status::Active,
            capture_time: None,
            success_time: None,
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    pub fn capture_time(&self) -> Option<f64> {
        self.capture_time
    }

    pub fn success_time(&self) -> Option<f64> {
        self.success_time
    }

    pub fn position(&self) -> Vec2 {
        self.pose.position()
    }

    /// Marks the vehicle captured. Returns false (and changes nothing) if
    /// it already left the active state.
    pub fn mark_captured(&mut self, t: f64) -> bool {
        if !self.is_active() {
            return false;
        }
        self.status = Status::Captured;
        self.capture_time = Some(t);
        true
    }

    /// Marks the vehicle as having reached its goal. Same rules as
    /// [`AcpState::mark_captured`].
    pub fn mark_succeeded(&mut self, t: f64) -> bool {
        if !self.is_active() {
            return false;
        }
        self.status = Status::Succeeded;
        self.success_time = Some(t);
        true
    }
}

#[inline]
pub fn saturate_turn(u_cmd: f64, omega_max: f64) -> f64 {
    u_cmd.clamp(-omega_max, omega_max)
}

#[inline]
fn unicycle_rate(psi: f64, speed: f64, u: f64) -> [f64; 3] {
    let (s, c) = psi.sin_cos();
    [speed * c, speed * s, u]
}

/// Advances a unicycle pose one RK4 step with the turn rate held constant.
/// The heading is normalized only after the step.
pub fn rk4_pose(pose: Pose2, speed: f64, u: f64, dt: f64) -> Pose2 {
    let (x, y, psi) = (pose.x, pose.y, pose.psi());
    let k1 = unicycle_rate(psi, speed, u);
    let k2 = unicycle_rate(psi + 0.5 * dt * k1[2], speed, u);
    let k3 = unicycle_rate(psi + 0.5 * dt * k2[2], speed, u);
    let k4 = unicycle_rate(psi + dt * k3[2], speed, u);
    let w = dt / 6.0;
    Pose2::new(
        x + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        psi + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
}

/// One RK4 step of an active vehicle. Inactive vehicles are returned
/// unchanged.
pub fn rk4_step(state: &AcpState, u: f64, dt: f64) -> AcpState {
    let mut next = state.clone();
    if state.is_active() {
        next.pose = rk4_pose(state.pose, state.speed, u, dt);
    }
    next
}
