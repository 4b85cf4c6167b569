//! Seeded Monte Carlo over perturbed threat parameters.
//!
//! Trial `s` draws from a ChaCha8 generator seeded with `master_seed` and
//! switched to stream `s`, so every trial is reproducible on its own and
//! independent of execution order. Uniforms are the generator's 53-bit
//! `f64` in [0, 1); normals use the basic Box-Muller transform
//! `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`, one normal per pair of uniforms.
//! For each threat, in index order, the draws are: range, anchor x,
//! anchor y, patrol speed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{j_wez, m_team, p_mission_analytical, rolling_success, v_wez, wald_ci_half_width, Outcome};
use crate::config::{ConfigError, SimConfig};
use crate::engine::{run_with_abort, team_outcome, CaseId, FieldBounds, Scenario};
use crate::geom::{Pose2, Vec2};
use crate::threats::{patrol_step, Policy, PursuerParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("n_trials must be >= 1")]
    Trials,
    #[error("{0} must be >= 0")]
    Sigma(&'static str),
    #[error("clip interval {name} = [{lo}, {hi}] must be non-empty and contain the nominal mean")]
    Clip { name: &'static str, lo: f64, hi: f64 },
    #[error("trial_timeout_s must be > 0")]
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_trials: usize,
    pub master_seed: u64,
    pub sigma_r: f64,
    pub sigma_pos: f64,
    pub sigma_v: f64,
    pub clip_r: [f64; 2],
    pub clip_v: [f64; 2],
    /// Wall-clock guard per case run, seconds.
    pub trial_timeout_s: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_trials: 100,
            master_seed: 42,
            sigma_r: 0.35,
            sigma_pos: 0.30,
            sigma_v: 0.05,
            clip_r: [0.5, 5.5],
            clip_v: [0.05, 1.5],
            trial_timeout_s: 120.0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.n_trials == 0 {
            return Err(McError::Trials);
        }
        for (name, s) in [("sigma_r", self.sigma_r), ("sigma_pos", self.sigma_pos), ("sigma_v", self.sigma_v)] {
            if !(s >= 0.0) {
                return Err(McError::Sigma(name));
            }
        }
        for (name, [lo, hi], mean) in [("clip_r", self.clip_r, 3.0), ("clip_v", self.clip_v, 0.5)] {
            if !(lo <= mean && mean <= hi) {
                return Err(McError::Clip { name, lo, hi });
            }
        }
        if !(self.trial_timeout_s > 0.0) {
            return Err(McError::Timeout);
        }
        Ok(())
    }
}

/// Generator for trial `trial_index`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Standard normal draw by Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Perturbed parameters of one threat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledThreat {
    pub range: f64,
    pub anchor_x: f64,
    pub anchor_y: f64,
    pub v_patrol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrial {
    pub trial_index: usize,
    pub threats: Vec<SampledThreat>,
    /// Number of draws that hit a clip bound.
    pub clipped: usize,
    pub draws: usize,
}

fn clip(x: f64, lo: f64, hi: f64, clipped: &mut usize) -> f64 {
    if x < lo || x > hi {
        *clipped += 1;
    }
    x.clamp(lo, hi)
}

/// Draws the perturbed threat set for one trial.
pub fn sample_threats(cfg: &McConfig, trial_index: usize, nominal: &[PursuerParams], field: &FieldBounds) -> (Vec<PursuerParams>, SampledTrial) {
    let mut rng = trial_rng(cfg.master_seed, trial_index as u64);
    let mut clipped = 0;
    let mut out = Vec::with_capacity(nominal.len());
    let mut sampled = Vec::with_capacity(nominal.len());
    for p in nominal {
        let range = clip(p.range + cfg.sigma_r * standard_normal(&mut rng), cfg.clip_r[0], cfg.clip_r[1], &mut clipped);
        let ax = clip(p.anchor_x + cfg.sigma_pos * standard_normal(&mut rng), field.x_min, field.x_max, &mut clipped);
        let ay = clip(p.anchor_y + cfg.sigma_pos * standard_normal(&mut rng), field.y_min, field.y_max, &mut clipped);
        let dv = cfg.sigma_v * standard_normal(&mut rng);
        let mut q = p.clone();
        q.range = range;
        q.anchor_x = ax;
        q.anchor_y = ay;
        match q.policy {
            Policy::PatrolSweep => {
                q.v_patrol = clip(p.v_patrol + dv, cfg.clip_v[0], cfg.clip_v[1], &mut clipped);
                q.pose = patrol_step(&q, 0.0);
            }
            Policy::PurePursuit => {
                q.pose = Pose2::at(Vec2::new(ax, ay), p.pose.psi());
            }
        }
        sampled.push(SampledThreat {
            range: q.range,
            anchor_x: ax,
            anchor_y: ay,
            v_patrol: q.v_patrol,
        });
        out.push(q);
    }
    let draws = 4 * nominal.len();
    (
        out,
        SampledTrial {
            trial_index,
            threats: sampled,
            clipped,
            draws,
        },
    )
}

/// The nominal scenario with its threats replaced by trial `trial_index`'s
/// perturbed set.
pub fn sample_trial(cfg: &McConfig, trial_index: usize, nominal: &Scenario) -> Scenario {
    let (threats, _) = sample_threats(cfg, trial_index, &nominal.threats, &nominal.field);
    Scenario {
        threats,
        ..nominal.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_index: usize,
    pub case_id: CaseId,
    pub sampled: SampledTrial,
    pub s_team: bool,
    pub outcomes: Vec<Outcome>,
    pub j_wez: f64,
    pub v_wez: f64,
    pub m_team: f64,
    /// The run hit the wall-clock guard; counted as a failure.
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: CaseId,
    pub trials: usize,
    pub successes: usize,
    pub p_empirical: f64,
    pub ci_half_width: f64,
    /// Redundancy bound from the empirical single-vehicle rate and this
    /// case's roster size; absent for the direct case.
    pub p_analytical: Option<f64>,
    pub rolling: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub trials: Vec<TrialOutcome>,
    pub summaries: Vec<CaseSummary>,
    pub clipped_fraction: f64,
    pub timeouts: usize,
}

/// Window of the rolling success curves.
pub const ROLLING_WINDOW: usize = 20;

fn run_trial(cfg: &McConfig, nominal: &[Scenario], cases: &[CaseId], s: usize, epsilon: f64) -> Vec<TrialOutcome> {
    let (threats, sampled) = sample_threats(cfg, s, &nominal[0].threats, &nominal[0].field);
    let guard = Duration::from_secs_f64(cfg.trial_timeout_s);
    cases
        .iter()
        .zip(nominal)
        .map(|(case, base)| {
            let sc = Scenario {
                threats: threats.clone(),
                ..base.clone()
            };
            let started = Instant::now();
            let rec = run_with_abort(&sc, |k| k % 20 == 0 && started.elapsed() > guard).expect("validated scenario");
            let (s_team, _) = team_outcome(&rec);
            let s_team = s_team && !rec.timed_out;
            TrialOutcome {
                trial_index: s,
                case_id: *case,
                sampled: sampled.clone(),
                s_team,
                outcomes: rec.final_status().into_iter().map(Outcome::from_status).collect(),
                j_wez: j_wez(&rec, &rec.weights()),
                v_wez: v_wez(&rec, epsilon),
                m_team: m_team(&rec, epsilon),
                timed_out: rec.timed_out,
            }
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn map_trials<F>(n: usize, threads: usize, f: F) -> Vec<Vec<TrialOutcome>>
where
    F: Fn(usize) -> Vec<TrialOutcome> + Sync + Send,
{
    use rayon::prelude::*;
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_trials<F>(n: usize, _threads: usize, f: F) -> Vec<Vec<TrialOutcome>>
where
    F: Fn(usize) -> Vec<TrialOutcome>,
{
    (0..n).map(f).collect()
}

/// Runs every case on every trial with paired threat samples and
/// aggregates the results. `threads` only affects speed, never output.
pub fn run_ensemble(cfg: &McConfig, nominal: &SimConfig, cases: &[CaseId], threads: usize) -> Result<EnsembleResult, ConfigError> {
    cfg.validate().map_err(|e| ConfigError::Invalid {
        key: "mc".into(),
        reason: e.to_string(),
    })?;
    let bases = cases.iter().map(|c| nominal.scenario(*c)).collect::<Result<Vec<_>, _>>()?;
    if bases.is_empty() {
        return Ok(EnsembleResult {
            trials: vec![],
            summaries: vec![],
            clipped_fraction: 0.0,
            timeouts: 0,
        });
    }
    let epsilon = nominal.epsilon;
    let per_trial = map_trials(cfg.n_trials, threads, |s| run_trial(cfg, &bases, cases, s, epsilon));

    let (clipped, draws) = per_trial
        .iter()
        .filter_map(|t| t.first())
        .fold((0, 0), |(c, d), t| (c + t.sampled.clipped, d + t.sampled.draws));
    let trials: Vec<TrialOutcome> = per_trial.into_iter().flatten().collect();

    let rate = |case: CaseId| -> Option<f64> {
        let xs: Vec<bool> = trials.iter().filter(|t| t.case_id == case).map(|t| t.s_team).collect();
        (!xs.is_empty()).then(|| xs.iter().filter(|s| **s).count() as f64 / xs.len() as f64)
    };
    let p_single = rate(CaseId::SingleCsbez);

    let summaries = cases
        .iter()
        .zip(&bases)
        .map(|(case, base)| {
            let xs: Vec<bool> = trials.iter().filter(|t| t.case_id == *case).map(|t| t.s_team).collect();
            let successes = xs.iter().filter(|s| **s).count();
            CaseSummary {
                case_id: *case,
                trials: xs.len(),
                successes,
                p_empirical: successes as f64 / xs.len() as f64,
                ci_half_width: wald_ci_half_width(successes, xs.len()),
                p_analytical: match case {
                    CaseId::Direct => None,
                    _ => p_single.map(|p| p_mission_analytical(p, base.acps.len() as u32)),
                },
                rolling: rolling_success(&xs, ROLLING_WINDOW),
            }
        })
        .collect();
    let timeouts = trials.iter().filter(|t| t.timed_out).count();
    Ok(EnsembleResult {
        trials,
        summaries,
        clipped_fraction: if draws == 0 { 0.0 } else { clipped as f64 / draws as f64 },
        timeouts,
    })
}
