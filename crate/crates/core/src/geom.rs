//! Planar geometry: angles, bearings and the arc-plus-straight intercept
//! path of a turn-constrained pursuer.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("non-finite heading {0}")]
    NonFiniteHeading(f64),
    #[error("turn radius must be positive, got {0}")]
    TurnRadius(f64),
    #[error("interceptor {name} must be positive, got {value}")]
    Interceptor { name: &'static str, value: f64 },
}

/// Wraps an angle to the half-open interval (-pi, pi].
///
/// Values already inside the interval are returned unchanged, which makes
/// the function exactly idempotent.
#[inline]
pub fn wrap_to_pi(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Planar vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() {
            Ok(Vec2 { x, y })
        } else {
            Err(GeomError::NonFinite { x, y })
        }
    }

    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (o - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar pose. The heading is measured counterclockwise from +x and is
/// kept normalized to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    psi: f64,
}

impl Pose2 {
    #[inline]
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Pose2 {
            x,
            y,
            psi: wrap_to_pi(psi),
        }
    }

    pub fn try_new(x: f64, y: f64, psi: f64) -> Result<Self, GeomError> {
        Vec2::try_new(x, y)?;
        if !psi.is_finite() {
            return Err(GeomError::NonFiniteHeading(psi));
        }
        Ok(Self::new(x, y, psi))
    }

    #[inline]
    pub fn at(position: Vec2, psi: f64) -> Self {
        Self::new(position.x, position.y, psi)
    }

    #[inline]
    pub fn psi(&self) -> f64 {
        self.psi
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    #[inline]
    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_angle(self.psi)
    }
}

/// Result of [`bearing`]; `degenerate` is set when the two points coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing {
    pub angle: f64,
    pub degenerate: bool,
}

/// Angle of `to - from` in (-pi, pi]. Coincident points give angle 0 with
/// the degenerate flag raised.
#[inline]
pub fn bearing(from: Vec2, to: Vec2) -> Bearing {
    let d = to - from;
    if d.x == 0.0 && d.y == 0.0 {
        return Bearing {
            angle: 0.0,
            degenerate: true,
        };
    }
    Bearing {
        angle: wrap_to_pi(d.y.atan2(d.x)),
        degenerate: false,
    }
}

/// Direction of the single turn in an arc-plus-straight path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Right,
}

/// One arc-plus-straight path from a pose to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcStraightPath {
    pub turn: Turn,
    /// Swept arc angle in [0, 2pi).
    pub arc: f64,
    /// Length of the straight tangent leg.
    pub straight: f64,
    pub turn_radius: f64,
}

impl ArcStraightPath {
    pub fn length(&self) -> f64 {
        self.turn_radius * self.arc + self.straight
    }
}

// Arc sweeps that land within this of a full turn are numerically the
// zero-arc (straight ahead) case.
const FULL_TURN_SNAP: f64 = 1e-9;

#[inline]
fn arc_straight_on_circle(start: Pose2, r: f64, target: Vec2, turn: Turn) -> Option<ArcStraightPath> {
    let (s, c) = start.psi.sin_cos();
    // unit normal from start toward the turn center
    let n = match turn {
        Turn::Left => Vec2::new(-s, c),
        Turn::Right => Vec2::new(s, -c),
    };
    let center = start.position() + n * r;
    let rel = target - center;
    let d2 = rel.norm_sq();
    let r2 = r * r;
    if d2 < r2 {
        return None;
    }
    let straight = (d2 - r2).max(0.0).sqrt();
    // tangent point relative to center: rotate rel by -gamma (left) or
    // +gamma (right), cos(gamma) = r/d, sin(gamma) = l/d, then scale by r/d
    let (cg, sg) = (r, straight);
    let tp = match turn {
        Turn::Left => Vec2::new(rel.x * cg + rel.y * sg, -rel.x * sg + rel.y * cg),
        Turn::Right => Vec2::new(rel.x * cg - rel.y * sg, rel.x * sg + rel.y * cg),
    };
    let from = -n;
    let signed = match turn {
        Turn::Left => from.cross(tp).atan2(from.dot(tp)),
        Turn::Right => tp.cross(from).atan2(from.dot(tp)),
    };
    let mut arc = if signed < 0.0 { signed + TAU } else { signed };
    if arc >= TAU - FULL_TURN_SNAP {
        arc = 0.0;
    }
    Some(ArcStraightPath {
        turn,
        arc,
        straight,
        turn_radius: r,
    })
}

/// Shortest arc-plus-straight path over both turn directions, or `None`
/// when the target lies strictly inside both turning circles.
pub fn shortest_arc_straight(start: Pose2, turn_radius: f64, target: Vec2) -> Option<ArcStraightPath> {
    let left = arc_straight_on_circle(start, turn_radius, target, Turn::Left);
    let right = arc_straight_on_circle(start, turn_radius, target, Turn::Right);
    match (left, right) {
        (Some(l), Some(r)) => Some(if r.length() < l.length() { r } else { l }),
        (l, r) => l.or(r),
    }
}

#[inline]
pub(crate) fn point_length_unchecked(start: Pose2, turn_radius: f64, target: Vec2) -> f64 {
    shortest_arc_straight(start, turn_radius, target).map_or(f64::INFINITY, |p| p.length())
}

/// Length of the shortest single-arc-then-straight path from `start` to
/// `target` with free terminal heading. Targets strictly inside both
/// turning circles are unreachable by this path class and return
/// `f64::INFINITY`.
pub fn dubins_point_length(start: Pose2, turn_radius: f64, target: Vec2) -> Result<f64, GeomError> {
    if !(turn_radius > 0.0) || !turn_radius.is_finite() {
        return Err(GeomError::TurnRadius(turn_radius));
    }
    Ok(point_length_unchecked(start, turn_radius, target))
}

/// Kinematic parameters of a turn-constrained interceptor: pose, intercept
/// speed, minimum turn radius and engagement range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interceptor {
    pub pose: Pose2,
    pub speed: f64,
    pub turn_radius: f64,
    pub range: f64,
}

impl Interceptor {
    pub fn new(pose: Pose2, speed: f64, turn_radius: f64, range: f64) -> Result<Self, GeomError> {
        for (name, value) in [("speed", speed), ("turn_radius", turn_radius), ("range", range)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GeomError::Interceptor { name, value });
            }
        }
        Ok(Interceptor {
            pose,
            speed,
            turn_radius,
            range,
        })
    }

    /// Search horizon of the intercept solver, `2R / v`.
    pub fn horizon(&self) -> f64 {
        2.0 * self.range / self.speed
    }
}

/// Number of uniform grid cells the intercept scan uses over the horizon.
pub const INTERCEPT_GRID_CELLS: usize = 400;
/// Bisection tolerance on the intercept time, seconds.
pub const INTERCEPT_TOL: f64 = 1e-6;

/// Interval of t (possibly empty) during which a point moving as
/// `p0 + t * vel` is strictly inside the circle `(center, r)`.
fn inside_interval(p0: Vec2, vel: Vec2, center: Vec2, r: f64) -> Option<(f64, f64)> {
    let rel = p0 - center;
    let a = vel.norm_sq();
    let b = 2.0 * rel.dot(vel);
    let c = rel.norm_sq() - r * r;
    if a == 0.0 {
        return if c < 0.0 { Some((f64::NEG_INFINITY, f64::INFINITY)) } else { None };
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
}

/// Bisects a bracket with `g(lo) > 0 >= g(hi)` down to `INTERCEPT_TOL`,
/// then places the root by linear interpolation inside the final bracket.
/// The interpolation keeps the result a continuous function of the inputs
/// so finite differences of it are not dominated by bisection steps.
fn refine_root<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, g_hi: f64) -> f64 {
    let mut g_lo = g(lo);
    let mut g_hi = g_hi;
    while hi - lo > INTERCEPT_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm <= 0.0 {
            hi = mid;
            g_hi = gm;
        } else {
            lo = mid;
            g_lo = gm;
        }
    }
    if g_lo.is_finite() && g_hi.is_finite() && g_lo > g_hi {
        lo + (hi - lo) * g_lo / (g_lo - g_hi)
    } else {
        hi
    }
}

/// Earliest time at which the interceptor, flying a shortest
/// arc-plus-straight path at constant speed, can reach a constant-velocity
/// evader. Returns `None` when no such time exists within
/// [`Interceptor::horizon`].
///
/// The feasibility residual `g(t) = L(p_E(t)) - v_P t` is scanned on a
/// uniform grid of `INTERCEPT_GRID_CELLS` cells and the first sign change
/// is refined by bisection. Grid points are skipped only when they are
/// provably infeasible: the path length is 1-Lipschitz in the target
/// position except where the target leaves a turning circle, so
/// `g(t + s) > 0` for `s < g(t) / (v_P + v_E)` up to the next circle exit.
/// The returned time is therefore the same as a full scan.
pub fn intercept_time(pursuer: &Interceptor, evader_pos: Vec2, evader_heading: f64, evader_speed: f64) -> Option<f64> {
    let vel = Vec2::from_angle(evader_heading) * evader_speed;
    let start = pursuer.pose;
    let r = pursuer.turn_radius;
    let vp = pursuer.speed;
    let horizon = pursuer.horizon();
    let step = horizon / INTERCEPT_GRID_CELLS as f64;
    let closing = vp + evader_speed;

    let (s, c) = start.psi.sin_cos();
    let p = start.position();
    let exits: [Option<(f64, f64)>; 2] = [
        inside_interval(evader_pos, vel, p + Vec2::new(-s, c) * r, r),
        inside_interval(evader_pos, vel, p + Vec2::new(s, -c) * r, r),
    ];
    let next_exit = |t: f64| -> f64 {
        exits
            .iter()
            .flatten()
            .filter(|(lo, hi)| *lo <= t && *hi > t)
            .map(|(_, hi)| *hi)
            .fold(f64::INFINITY, f64::min)
    };

    let g = |t: f64| point_length_unchecked(start, r, evader_pos + vel * t) - vp * t;

    let mut k = 0usize;
    let mut prev: Option<usize> = None;
    loop {
        if k > INTERCEPT_GRID_CELLS {
            return None;
        }
        let t = k as f64 * step;
        let gk = g(t);
        if gk <= 0.0 {
            let Some(pk) = prev else {
                return Some(t);
            };
            return Some(refine_root(g, pk as f64 * step, t, gk));
        }
        // every grid point strictly before `bound` is infeasible
        let exit = next_exit(t);
        let safe = if gk.is_finite() { t + 0.999 * gk / closing } else { f64::INFINITY };
        let bound = safe.min(exit);
        let mut next = k + 1;
        if bound.is_finite() {
            let jump = (bound / step).ceil();
            if jump > next as f64 {
                next = if jump > INTERCEPT_GRID_CELLS as f64 + 1.0 {
                    INTERCEPT_GRID_CELLS + 1
                } else {
                    jump as usize
                };
            }
        } else {
            next = INTERCEPT_GRID_CELLS + 1;
        }
        // the bracket for bisection must start at the last infeasible grid
        // point, which is the one just before `next`
        prev = Some(next - 1);
        k = next;
    }
}

/// Plain uniform-grid variant of [`intercept_time`] with no skipping.
/// Kept as a reference implementation for tests and benchmarks.
pub fn intercept_time_full_scan(pursuer: &Interceptor, evader_pos: Vec2, evader_heading: f64, evader_speed: f64) -> Option<f64> {
    let vel = Vec2::from_angle(evader_heading) * evader_speed;
    let step = pursuer.horizon() / INTERCEPT_GRID_CELLS as f64;
    let g = |t: f64| point_length_unchecked(pursuer.pose, pursuer.turn_radius, evader_pos + vel * t) - pursuer.speed * t;
    if g(0.0) <= 0.0 {
        return Some(0.0);
    }
    for k in 1..=INTERCEPT_GRID_CELLS {
        let t = k as f64 * step;
        if g(t) <= 0.0 {
            return Some(refine_root(g, t - step, t, g(t)));
        }
    }
    None
}
