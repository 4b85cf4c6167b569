//! Brute-force oracles and the randomized checks built on them. Shared by
//! the property tests and the acceptance suite.

use std::f64::consts::{PI, TAU};

use gauntlet_core::csbez::{grad_z_min, z_field, z_min_over_headings};
use gauntlet_core::dynamics::rk4_pose;
use gauntlet_core::geom::{dubins_point_length, intercept_time, Interceptor, Pose2, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const V_P: f64 = 2.0;
pub const V_E: f64 = 1.0;
pub const A: f64 = 0.6;
pub const R: f64 = 3.0;

pub fn random_pose(rng: &mut ChaCha8Rng) -> Pose2 {
    Pose2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-PI..PI))
}

/// Point and heading after sweeping `arc` radians on a turning circle.
pub fn arc_end(start: Pose2, r: f64, arc: f64, left: bool) -> (Vec2, f64) {
    let sgn = if left { 1.0 } else { -1.0 };
    let psi0 = start.psi();
    let psi = psi0 + sgn * arc;
    let p = Vec2::new(
        start.x + sgn * r * (psi.sin() - psi0.sin()),
        start.y - sgn * r * (psi.cos() - psi0.cos()),
    );
    (p, psi)
}

/// Shortest single-turn path found by scanning the arc angle for the
/// tangency condition and refining each sign change by bisection.
pub fn arc_grid_length(start: Pose2, r: f64, target: Vec2) -> f64 {
    const N: usize = 20_000;
    let mut best = f64::INFINITY;
    for left in [true, false] {
        let miss = |arc: f64| {
            let (q, psi) = arc_end(start, r, arc, left);
            let h = Vec2::from_angle(psi);
            let rel = target - q;
            (h.cross(rel), h.dot(rel), rel.norm())
        };
        // zero arc: the target is dead ahead
        let (c0, d0, n0) = miss(0.0);
        if c0.abs() < 1e-12 && d0 > 0.0 {
            best = best.min(n0);
        }
        let mut prev = c0;
        for i in 1..=N {
            let hi = TAU * i as f64 / N as f64;
            let (c, _, _) = miss(hi);
            if prev == 0.0 || prev.signum() != c.signum() {
                let (mut lo, mut up) = (TAU * (i - 1) as f64 / N as f64, hi);
                let c_lo = prev;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + up);
                    let (cm, _, _) = miss(mid);
                    if cm.signum() == c_lo.signum() && cm != 0.0 {
                        lo = mid;
                    } else {
                        up = mid;
                    }
                }
                let arc = 0.5 * (lo + up);
                let (_, dot, dist) = miss(arc);
                if dot > 0.0 {
                    best = best.min(r * arc + dist);
                }
            }
            prev = c;
        }
    }
    best
}


macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Solver length against the arc-grid oracle on 1,000 feasible instances.
pub fn check_dubins() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let start = random_pose(&mut rng);
        let r = rng.random_range(0.2..1.5);
        let target = Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
        let got = dubins_point_length(start, r, target).map_err(|e| e.to_string())?;
        let want = arc_grid_length(start, r, target);
        if !got.is_finite() {
            ensure!(!want.is_finite(), "solver infeasible but oracle found {want}");
            continue;
        }
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() < 1e-4, "start {start:?} r {r} target {target:?}: {got} vs {want}");
        checked += 1;
    }
    Ok(format!("1000 instances, worst |error| {worst:.2e} m"))
}

/// One RK4 step against the closed-form constant-turn arc.
pub fn check_rk4() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let pose = random_pose(&mut rng);
        let u = rng.random_range(-1.2..1.2);
        let dt = 0.05;
        let next = rk4_pose(pose, V_E, u, dt);
        let (exact, psi) = if u.abs() < 1e-12 {
            (pose.position() + pose.heading_vec() * (V_E * dt), pose.psi())
        } else {
            arc_end(pose, V_E / u.abs(), u.abs() * dt, u > 0.0)
        };
        let err = next.position().distance(exact);
        worst = worst.max(err);
        ensure!(err < 1e-6, "pose {pose:?} u {u}: {err}");
        ensure!((next.psi() - psi).sin().abs() < 1e-12, "heading drift at {pose:?}");
    }
    Ok(format!("2000 steps, worst {worst:.2e} m"))
}

/// min over x in [lo, hi] of |c + x w|.
fn seg_min(c: Vec2, w: Vec2, lo: f64, hi: f64) -> f64 {
    let x = if w.norm_sq() > 0.0 { (-c.dot(w) / w.norm_sq()).clamp(lo, hi) } else { lo };
    (c + w * x).norm()
}

/// Whether some single-turn pursuer path passes within a small distance
/// of a point of the evader's straight track no later than the evader
/// gets there, within `R / v_P`.
pub fn fan_capture(p: Pose2, e0: Vec2, heading: f64) -> bool {
    const N_ARC: usize = 40_000;
    const DELTA: f64 = 1e-3;
    let horizon = R / V_P;
    let u = Vec2::from_angle(heading);
    for left in [true, false] {
        for i in 0..N_ARC {
            let arc = TAU * i as f64 / N_ARC as f64;
            let t0 = A * arc / V_P;
            if t0 > horizon {
                break;
            }
            let (q, psi) = arc_end(p, A, arc, left);
            // pursuer at time s minus evader at time t, for t0 <= s <= t <= horizon
            let a = Vec2::from_angle(psi) * V_P;
            let b = u * -V_E;
            let c = q - a * t0 - e0;
            let mut best = seg_min(c + a * t0, b, t0, horizon)
                .min(seg_min(c + b * horizon, a, t0, horizon))
                .min(seg_min(c, a + b, t0, horizon));
            let det = a.norm_sq() * b.norm_sq() - a.dot(b).powi(2);
            if det > 1e-12 {
                let s = (-c.dot(a) * b.norm_sq() + c.dot(b) * a.dot(b)) / det;
                let t = (-c.dot(b) * a.norm_sq() + c.dot(a) * a.dot(b)) / det;
                if t0 <= s && s <= t && t <= horizon {
                    best = best.min((c + a * s + b * t).norm());
                }
            }
            if best <= DELTA {
                return true;
            }
        }
    }
    false
}


/// Sign of z at the worst sweep heading against the capture fan.
pub fn check_z_sign() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    let (mut inside, mut outside) = (0, 0);
    while checked < 200 {
        let p = Pose2::new(0.0, 0.0, rng.random_range(-PI..PI));
        let e = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        if e.norm() < 0.5 {
            continue;
        }
        let pursuer = Interceptor::new(p, V_P, A, R).map_err(|e| e.to_string())?;
        let worst = z_min_over_headings(e, V_E, &pursuer, 72, R);
        let z = z_field(e, worst.heading, V_E, &pursuer, R);
        if z.abs() < 0.05 {
            continue;
        }
        let captured = fan_capture(p, e, worst.heading);
        ensure!(captured == (z <= 0.0), "pose {p:?} evader {e:?} z {z}");
        if captured {
            inside += 1;
        } else {
            outside += 1;
        }
        checked += 1;
    }
    ensure!(inside > 20 && outside > 20, "sample misses one side: {inside} / {outside}");
    Ok(format!("200 states, {inside} inside / {outside} outside"))
}

/// Error ratio of the central-difference gradient when halving the step.
pub fn check_richardson() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pursuer = Interceptor::new(Pose2::new(0.0, 0.0, 0.0), V_P, A, R).map_err(|e| e.to_string())?;
    let steps = [0.1, 0.05, 0.025];
    let mut ratios = Vec::new();
    let mut tries = 0;
    while ratios.len() < 20 {
        tries += 1;
        ensure!(tries < 2000, "not enough smooth states");
        let e = Vec2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let sweep = z_min_over_headings(e, V_E, &pursuer, 72, R);
        if sweep.z_min.abs() > R - 0.01 {
            continue;
        }
        // keep states where one sweep heading is the minimizer on every stencil point
        let smooth = steps.iter().all(|&h| {
            [Vec2::new(h, 0.0), Vec2::new(-h, 0.0), Vec2::new(0.0, h), Vec2::new(0.0, -h)]
                .iter()
                .all(|o| z_min_over_headings(e + *o, V_E, &pursuer, 72, R).index == sweep.index)
        });
        if !smooth {
            continue;
        }
        let g: Vec<Vec2> = steps.iter().map(|&h| grad_z_min(e, V_E, &pursuer, 72, R, h)).collect();
        let den = (g[1] - g[2]).norm();
        if den < 1e-7 {
            // locally linear field, nothing to extrapolate
            continue;
        }
        ratios.push((g[0] - g[1]).norm() / den);
    }
    ensure!(ratios.iter().all(|r| (3.0..=5.0).contains(r)), "ratios {ratios:?}");
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), r| (a.min(*r), b.max(*r)));
    Ok(format!("20 states, ratios in [{lo:.3}, {hi:.3}]"))
}

/// Straight flee and head-on chases along the pursuer's heading.
pub fn check_collinear() -> Result<String, String> {
    let pursuer = Interceptor::new(Pose2::new(0.0, 0.0, 0.0), V_P, A, R).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for d in [0.5, 1.0, 1.7, 2.5] {
        let flee = intercept_time(&pursuer, Vec2::new(d, 0.0), 0.0, V_E).ok_or("flee: no intercept")?;
        let head_on = intercept_time(&pursuer, Vec2::new(d, 0.0), PI, V_E).ok_or("head-on: no intercept")?;
        let (ef, eh) = ((flee - d / (V_P - V_E)).abs(), (head_on - d / (V_P + V_E)).abs());
        ensure!(ef < 1e-5, "flee d={d}: {flee}");
        ensure!(eh < 1e-5, "head-on d={d}: {head_on}");
        worst = worst.max(ef).max(eh);
    }
    Ok(format!("4 distances, worst {worst:.2e} s"))
}
