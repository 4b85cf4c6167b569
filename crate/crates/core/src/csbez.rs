//! CSBEZ reactive guidance.
//!
//! The scalar safety field is `z = v_P * t* - R`, where `t*` is the
//! earliest time a turn-constrained pursuer can reach the evader flying a
//! straight line at constant speed. `z <= 0` means capture is feasible
//! inside the engagement range. The controller takes the worst case over a
//! sweep of evader headings, differentiates it numerically and blends the
//! gradient into the goal direction.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{saturate_turn, AcpState};
use crate::geom::{bearing, intercept_time, wrap_to_pi, Interceptor, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuidanceError {
    #[error("n_theta must be >= 8, got {0}")]
    Sweep(usize),
    #[error("alpha must be >= 0, got {0}")]
    Alpha(f64),
    #[error("heading_gain must be > 0, got {0}")]
    Gain(f64),
    #[error("fd_step must be > 0, got {0}")]
    FdStep(f64),
    #[error("z_cap must be > 0, got {0}")]
    Cap(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceConfig {
    pub n_theta: usize,
    pub alpha: f64,
    pub heading_gain: f64,
    pub fd_step: f64,
    /// Saturation value of the field; `None` uses the pursuer's range.
    pub z_cap: Option<f64>,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        GuidanceConfig {
            n_theta: 72,
            alpha: 2.0,
            heading_gain: 3.0,
            fd_step: 0.05,
            z_cap: None,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<(), GuidanceError> {
        if self.n_theta < 8 {
            return Err(GuidanceError::Sweep(self.n_theta));
        }
        if !(self.alpha >= 0.0) {
            return Err(GuidanceError::Alpha(self.alpha));
        }
        if !(self.heading_gain > 0.0) {
            return Err(GuidanceError::Gain(self.heading_gain));
        }
        if !(self.fd_step > 0.0) {
            return Err(GuidanceError::FdStep(self.fd_step));
        }
        if let Some(c) = self.z_cap {
            if !(c > 0.0) {
                return Err(GuidanceError::Cap(c));
            }
        }
        Ok(())
    }

    fn cap_for(&self, pursuer: &Interceptor) -> f64 {
        self.z_cap.unwrap_or(pursuer.range)
    }
}

/// Safety margin for one evader heading, clamped to `[-R, z_cap]`.
pub fn z_field(evader_pos: Vec2, evader_heading: f64, evader_speed: f64, pursuer: &Interceptor, z_cap: f64) -> f64 {
    match intercept_time(pursuer, evader_pos, evader_heading, evader_speed) {
        Some(t) => (pursuer.speed * t - pursuer.range).clamp(-pursuer.range, z_cap),
        None => z_cap,
    }
}

/// Worst-case margin over the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMin {
    pub z_min: f64,
    pub index: usize,
    pub heading: f64,
}

/// Minimum of [`z_field`] over `n_theta` evenly spaced headings starting
/// at 0. Ties go to the lowest heading index.
pub fn z_min_over_headings(evader_pos: Vec2, evader_speed: f64, pursuer: &Interceptor, n_theta: usize, z_cap: f64) -> SweepMin {
    let mut best = SweepMin {
        z_min: f64::INFINITY,
        index: 0,
        heading: 0.0,
    };
    for m in 0..n_theta {
        let heading = TAU * m as f64 / n_theta as f64;
        let z = z_field(evader_pos, heading, evader_speed, pursuer, z_cap);
        if z < best.z_min {
            best = SweepMin { z_min: z, index: m, heading };
        }
    }
    best
}

/// Central-difference gradient of the worst-case margin.
pub fn grad_z_min(evader_pos: Vec2, evader_speed: f64, pursuer: &Interceptor, n_theta: usize, z_cap: f64, fd_step: f64) -> Vec2 {
    let f = |p: Vec2| z_min_over_headings(p, evader_speed, pursuer, n_theta, z_cap).z_min;
    let h = fd_step;
    let ex = Vec2::new(h, 0.0);
    let ey = Vec2::new(0.0, h);
    Vec2::new(
        (f(evader_pos + ex) - f(evader_pos - ex)) / (2.0 * h),
        (f(evader_pos + ey) - f(evader_pos - ey)) / (2.0 * h),
    )
}

const DEGENERATE_BLEND: f64 = 1e-9;

/// Desired heading from the goal offset plus `alpha` times the safety
/// gradient. A vanishing blended vector falls back to the goal bearing.
pub fn blended_heading(evader_pos: Vec2, goal: Vec2, grad: Vec2, alpha: f64) -> f64 {
    let dg = goal - evader_pos;
    let v = dg + grad * alpha;
    if v.norm() < DEGENERATE_BLEND {
        return bearing(evader_pos, goal).angle;
    }
    wrap_to_pi(v.y.atan2(v.x))
}

/// Heading-error controller shared by the direct and CSBEZ laws.
#[inline]
pub fn heading_command(desired: f64, current: f64, gain: f64, omega_max: f64) -> f64 {
    saturate_turn(gain * wrap_to_pi(desired - current), omega_max)
}

/// Everything the CSBEZ law computed on one call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    pub u: f64,
    pub desired_heading: f64,
    /// Worst pursuer and its sweep minimum; `None` without pursuers.
    pub worst: Option<(usize, SweepMin)>,
    pub gradient: Vec2,
}

/// Turn-rate command of the CSBEZ reactive law. The pursuer with the
/// smallest worst-case margin (lowest index on ties) drives the blend.
/// With no pursuers the law reduces to pure goal tracking.
pub fn csbez_control(acp: &AcpState, goal: Vec2, pursuers: &[Interceptor], cfg: &GuidanceConfig, omega_max: f64) -> GuidanceOutput {
    let pos = acp.position();
    let mut worst: Option<(usize, SweepMin)> = None;
    for (j, p) in pursuers.iter().enumerate() {
        let s = z_min_over_headings(pos, acp.speed, p, cfg.n_theta, cfg.cap_for(p));
        if worst.is_none_or(|(_, w)| s.z_min < w.z_min) {
            worst = Some((j, s));
        }
    }
    let gradient = match worst {
        Some((j, _)) => {
            let p = &pursuers[j];
            grad_z_min(pos, acp.speed, p, cfg.n_theta, cfg.cap_for(p), cfg.fd_step)
        }
        None => Vec2::ZERO,
    };
    let desired = blended_heading(pos, goal, gradient, cfg.alpha);
    GuidanceOutput {
        u: heading_command(desired, acp.pose.psi(), cfg.heading_gain, omega_max),
        desired_heading: desired,
        worst,
        gradient,
    }
}
