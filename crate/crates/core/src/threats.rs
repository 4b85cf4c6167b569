//! Threat motion policies and capture rules.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::AcpState;
use crate::geom::{bearing, GeomError, Interceptor, Pose2, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThreatError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("patrol speed must be > 0, got {0}")]
    PatrolSpeed(f64),
    #[error("sweep half-amplitude must be > 0, got {0}")]
    Amplitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    PatrolSweep,
    PurePursuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureState {
    Hunting,
    Expended,
}

/// Direction of travel through the sweep center at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPhase {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuerParams {
    pub pose: Pose2,
    pub v_intercept: f64,
    pub v_patrol: f64,
    pub turn_radius: f64,
    pub range: f64,
    pub policy: Policy,
    /// Abscissa of the patrol line.
    pub anchor_x: f64,
    /// Ordinate of the sweep center.
    pub anchor_y: f64,
    pub sweep_half_amplitude: f64,
    pub phase: SweepPhase,
    /// Distance already travelled along the sweep cycle at t = 0.
    pub sweep_offset: f64,
    pub capture_state: CaptureState,
}

impl PursuerParams {
    /// A patrolling pursuer placed at its t = 0 sweep position.
    #[allow(clippy::too_many_arguments)]
    pub fn patrol(
        anchor: Vec2,
        half_amplitude: f64,
        phase: SweepPhase,
        v_patrol: f64,
        v_intercept: f64,
        turn_radius: f64,
        range: f64,
    ) -> Result<Self, ThreatError> {
        let mut p = PursuerParams {
            pose: Pose2::new(anchor.x, anchor.y, 0.0),
            v_intercept,
            v_patrol,
            turn_radius,
            range,
            policy: Policy::PatrolSweep,
            anchor_x: anchor.x,
            anchor_y: anchor.y,
            sweep_half_amplitude: half_amplitude,
            phase,
            sweep_offset: 0.0,
            capture_state: CaptureState::Hunting,
        };
        p.validate()?;
        p.pose = patrol_step(&p, 0.0);
        Ok(p)
    }

    /// A pure-pursuit interceptor starting at `pose`.
    pub fn pursuit(pose: Pose2, v_intercept: f64, turn_radius: f64, range: f64) -> Result<Self, ThreatError> {
        let p = PursuerParams {
            pose,
            v_intercept,
            v_patrol: 0.0,
            turn_radius,
            range,
            policy: Policy::PurePursuit,
            anchor_x: pose.x,
            anchor_y: pose.y,
            sweep_half_amplitude: 0.0,
            phase: SweepPhase::Ascending,
            sweep_offset: 0.0,
            capture_state: CaptureState::Hunting,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ThreatError> {
        Interceptor::new(self.pose, self.v_intercept, self.turn_radius, self.range)?;
        if self.policy == Policy::PatrolSweep {
            if !(self.v_patrol > 0.0) {
                return Err(ThreatError::PatrolSpeed(self.v_patrol));
            }
            if !(self.sweep_half_amplitude > 0.0) {
                return Err(ThreatError::Amplitude(self.sweep_half_amplitude));
            }
        }
        Ok(())
    }

    /// Starts the patrol `offset` meters into its sweep cycle.
    pub fn with_sweep_offset(mut self, offset: f64) -> Self {
        self.sweep_offset = offset;
        if self.policy == Policy::PatrolSweep {
            self.pose = patrol_step(&self, 0.0);
        }
        self
    }

    pub fn is_hunting(&self) -> bool {
        self.capture_state == CaptureState::Hunting
    }

    /// Kinematic tuple used by the intercept model.
    pub fn interceptor(&self) -> Interceptor {
        Interceptor {
            pose: self.pose,
            speed: self.v_intercept,
            turn_radius: self.turn_radius,
            range: self.range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetAssignment {
    pub time: f64,
    pub threat_index: usize,
    pub target_acp_index: Option<usize>,
}

/// Pose on the vertical sweep at time `t`: a constant-speed triangle wave
/// through the sweep center. Exactly at a turn-around instant the heading
/// already points along the return stroke.
pub fn patrol_step(pursuer: &PursuerParams, t: f64) -> Pose2 {
    let a = pursuer.sweep_half_amplitude;
    let s = (pursuer.v_patrol * t + pursuer.sweep_offset).rem_euclid(4.0 * a);
    // offset and direction for an ascending start
    let (offset, up) = if s < a {
        (s, true)
    } else if s < 3.0 * a {
        (2.0 * a - s, false)
    } else {
        (s - 4.0 * a, true)
    };
    let (offset, up) = match pursuer.phase {
        SweepPhase::Ascending => (offset, up),
        SweepPhase::Descending => (-offset, !up),
    };
    let psi = if up { FRAC_PI_2 } else { -FRAC_PI_2 };
    Pose2::new(pursuer.anchor_x, pursuer.anchor_y + offset, psi)
}

/// Index of the nearest active vehicle, lowest index on ties.
pub fn nearest_active(from: Vec2, acps: &[AcpState]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, a) in acps.iter().enumerate().filter(|(_, a)| a.is_active()) {
        let d = from.distance(a.position());
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// One pure-pursuit step: re-aim at the nearest active vehicle and advance
/// along the new heading. Expended pursuers, and pursuers left without a
/// target, hold their pose and report no target.
pub fn pure_pursuit_step(pursuer: &PursuerParams, acps: &[AcpState], dt: f64) -> (Pose2, Option<usize>) {
    if !pursuer.is_hunting() {
        return (pursuer.pose, None);
    }
    let here = pursuer.pose.position();
    let Some(target) = nearest_active(here, acps) else {
        return (pursuer.pose, None);
    };
    let b = bearing(here, acps[target].position());
    let psi = if b.degenerate { pursuer.pose.psi() } else { b.angle };
    let next = here + Vec2::from_angle(psi) * (pursuer.v_intercept * dt);
    (Pose2::at(next, psi), Some(target))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaptureRules {
    /// Risk at or above which a patrolling pursuer captures.
    pub p_capture: f64,
    /// Distance at or below which a pure-pursuit interceptor captures.
    pub r_capture: f64,
}

impl Default for CaptureRules {
    fn default() -> Self {
        CaptureRules {
            p_capture: 0.95,
            r_capture: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureEvent {
    pub acp_index: usize,
    pub threat_index: usize,
}

/// Capture decisions for one step. `risk(i, j)` returns the risk computed
/// this step for active vehicle `i` and hunting pursuer `j`.
///
/// Each hunting pursuer captures at most one vehicle per step (the
/// nearest qualifying one), pursuers are processed in index order, and a
/// vehicle taken by an earlier pursuer is not available to later ones.
pub fn check_capture<F>(pursuers: &[PursuerParams], acps: &[AcpState], rules: &CaptureRules, risk: F) -> Vec<CaptureEvent>
where
    F: Fn(usize, usize) -> Option<f64>,
{
    let mut taken = vec![false; acps.len()];
    let mut events = Vec::new();
    for (j, p) in pursuers.iter().enumerate() {
        if !p.is_hunting() {
            continue;
        }
        let here = p.pose.position();
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in acps.iter().enumerate() {
            if !a.is_active() || taken[i] {
                continue;
            }
            let d = here.distance(a.position());
            let qualifies = match p.policy {
                Policy::PatrolSweep => risk(i, j).is_some_and(|r| r >= rules.p_capture),
                Policy::PurePursuit => d <= rules.r_capture,
            };
            if qualifies && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        if let Some((i, _)) = best {
            taken[i] = true;
            events.push(CaptureEvent {
                acp_index: i,
                threat_index: j,
            });
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Role;
    use approx::assert_abs_diff_eq;

    fn p1() -> PursuerParams {
        PursuerParams::patrol(Vec2::new(-0.5, 0.0), 1.5, SweepPhase::Ascending, 0.5, 2.0, 0.6, 3.0).unwrap()
    }

    fn acp_at(x: f64, y: f64) -> AcpState {
        AcpState::new(Pose2::new(x, y, 0.0), 1.0, Role::Solo, 1.0)
    }

    #[test]
    fn patrol_examples() {
        let p = p1();
        assert_eq!(patrol_step(&p, 0.0), Pose2::new(-0.5, 0.0, FRAC_PI_2));
        let q = patrol_step(&p, 12.0);
        assert_abs_diff_eq!(q.x, -0.5);
        assert_abs_diff_eq!(q.y, 0.0, epsilon = 1e-12);
        assert_eq!(q.psi(), FRAC_PI_2);
        assert_abs_diff_eq!(patrol_step(&p, 3.0).y, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(patrol_step(&p, 4.0).y, 1.0, epsilon = 1e-12);
        assert_eq!(patrol_step(&p, 4.0).psi(), -FRAC_PI_2);
        assert_abs_diff_eq!(patrol_step(&p, 9.5).y, -1.25, epsilon = 1e-12);
        assert_eq!(patrol_step(&p, 9.5).psi(), FRAC_PI_2);
    }

    #[test]
    fn descending_is_mirrored() {
        let mut p = p1();
        p.phase = SweepPhase::Descending;
        let q = patrol_step(&p, 1.0);
        assert_abs_diff_eq!(q.y, -0.5, epsilon = 1e-12);
        assert_eq!(q.psi(), -FRAC_PI_2);
    }

    #[test]
    fn pursuit_targets_nearest_with_low_index_ties() {
        let p = PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, 3.0).unwrap();
        let acps = [acp_at(3.0, 0.0), acp_at(0.0, 1.0)];
        let (pose, t) = pure_pursuit_step(&p, &acps, 0.05);
        assert_eq!(t, Some(1));
        assert_abs_diff_eq!(pose.psi(), FRAC_PI_2);
        assert_abs_diff_eq!(pose.y, 0.1, epsilon = 1e-15);

        let acps = [acp_at(5.0, 0.0), acp_at(0.0, 2.0), acp_at(0.0, -2.0)];
        assert_eq!(pure_pursuit_step(&p, &acps, 0.05).1, Some(1));
    }

    #[test]
    fn pursuit_skips_inactive_and_expended_holds() {
        let mut p = PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, 3.0).unwrap();
        let mut acps = [acp_at(1.0, 0.0), acp_at(4.0, 0.0)];
        acps[0].mark_captured(0.0);
        assert_eq!(pure_pursuit_step(&p, &acps, 0.05).1, Some(1));
        acps[1].mark_succeeded(0.0);
        assert_eq!(pure_pursuit_step(&p, &acps, 0.05), (p.pose, None));
        p.capture_state = CaptureState::Expended;
        let acps = [acp_at(1.0, 0.0)];
        assert_eq!(pure_pursuit_step(&p, &acps, 0.05), (p.pose, None));
    }

    #[test]
    fn capture_rules_by_policy() {
        let rules = CaptureRules::default();
        let patrol = [p1()];
        let acps = [acp_at(-2.0, 0.0)];
        assert_eq!(check_capture(&patrol, &acps, &rules, |_, _| Some(0.97)).len(), 1);
        assert!(check_capture(&patrol, &acps, &rules, |_, _| Some(0.50)).is_empty());

        let hunter = [PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, 3.0).unwrap()];
        let near = [acp_at(0.10, 0.0)];
        let ev = check_capture(&hunter, &near, &rules, |_, _| None);
        assert_eq!(ev, vec![CaptureEvent { acp_index: 0, threat_index: 0 }]);
        assert!(check_capture(&hunter, &[acp_at(0.3, 0.0)], &rules, |_, _| None).is_empty());
    }

    #[test]
    fn one_capture_per_pursuer_nearest_first() {
        let rules = CaptureRules::default();
        let hunters = [
            PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, 3.0).unwrap(),
            PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, 3.0).unwrap(),
        ];
        let acps = [acp_at(0.2, 0.0), acp_at(0.1, 0.0), acp_at(0.15, 0.0)];
        let ev = check_capture(&hunters, &acps, &rules, |_, _| None);
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].acp_index, 1);
        assert_eq!(ev[1].acp_index, 2);
    }

    #[test]
    fn validation() {
        assert!(PursuerParams::patrol(Vec2::ZERO, 0.0, SweepPhase::Ascending, 0.5, 2.0, 0.6, 3.0).is_err());
        assert!(PursuerParams::patrol(Vec2::ZERO, 1.5, SweepPhase::Ascending, 0.0, 2.0, 0.6, 3.0).is_err());
        assert!(PursuerParams::pursuit(Pose2::new(0.0, 0.0, 0.0), 2.0, 0.6, -3.0).is_err());
    }
}
