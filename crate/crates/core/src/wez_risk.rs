//! Logistic, heading-dependent engagement-zone risk.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{bearing, wrap_to_pi, Pose2, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WezError {
    #[error("logistic steepness k must be > 0, got {0}")]
    Steepness(f64),
    #[error("frontal asymmetry beta must be in [0, 1), got {0}")]
    Asymmetry(f64),
    #[error("risk threshold epsilon must be in (0, 1), got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WezConstants {
    pub k: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for WezConstants {
    fn default() -> Self {
        WezConstants {
            k: 2.5,
            beta: 0.35,
            epsilon: 0.35,
        }
    }
}

impl WezConstants {
    pub fn validate(&self) -> Result<(), WezError> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(WezError::Steepness(self.k));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(WezError::Asymmetry(self.beta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(WezError::Threshold(self.epsilon));
        }
        Ok(())
    }
}

/// Bearing of the vehicle relative to the pursuer's heading, and whether
/// the two positions coincided.
pub fn bearing_phi(acp_pos: Vec2, pursuer_pose: Pose2) -> (f64, bool) {
    let b = bearing(pursuer_pose.position(), acp_pos);
    if b.degenerate {
        return (0.0, true);
    }
    (wrap_to_pi(b.angle - pursuer_pose.psi()), false)
}

#[inline]
pub fn effective_range(range: f64, beta: f64, phi: f64) -> f64 {
    range * (1.0 + beta * phi.cos())
}

/// Logistic function evaluated without overflow for large |z|.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn instantaneous_risk(distance: f64, r_eff: f64, k: f64) -> f64 {
    logistic(k * (r_eff - distance))
}

/// Risk that a pursuer with engagement range `range` poses to a vehicle at
/// `acp_pos`.
pub fn pair_risk(acp_pos: Vec2, pursuer_pose: Pose2, range: f64, wez: &WezConstants) -> f64 {
    let (phi, _) = bearing_phi(acp_pos, pursuer_pose);
    let d = acp_pos.distance(pursuer_pose.position());
    instantaneous_risk(d, effective_range(range, wez.beta, phi), wez.k)
}
