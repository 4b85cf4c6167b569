//! Team exposure metrics, mission-success statistics and confidence
//! intervals.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Role, Status};
use crate::engine::{team_outcome, CaseId, TrajectoryRecord};

/// Role-weighted cumulative exposure: sum of `w_i * p_ij` over every
/// recorded (active vehicle, hunting pursuer, step) triple.
pub fn j_wez(record: &TrajectoryRecord, weights: &[f64]) -> f64 {
    record
        .steps
        .iter()
        .flat_map(|s| &s.risks)
        .map(|r| weights[r.acp] * r.p)
        .fold(0.0, |acc, x| acc + x)
}

/// Exposure above the risk threshold.
pub fn v_wez(record: &TrajectoryRecord, epsilon: f64) -> f64 {
    record
        .steps
        .iter()
        .flat_map(|s| &s.risks)
        .map(|r| (r.p - epsilon).max(0.0))
        .fold(0.0, |acc, x| acc + x)
}

/// Smallest `epsilon - p_ij` over the run; `epsilon` when no risk was
/// ever recorded.
pub fn m_team(record: &TrajectoryRecord, epsilon: f64) -> f64 {
    epsilon - max_risk(record).unwrap_or(0.0)
}

fn max_risk(record: &TrajectoryRecord) -> Option<f64> {
    record.steps.iter().flat_map(|s| &s.risks).map(|r| r.p).reduce(f64::max)
}

/// Peak risk on each vehicle (0 when it was never exposed).
pub fn peak_risk_per_acp(record: &TrajectoryRecord) -> Vec<f64> {
    let mut peak = vec![0.0_f64; record.acps.len()];
    for r in record.steps.iter().flat_map(|s| &s.risks) {
        peak[r.acp] = peak[r.acp].max(r.p);
    }
    peak
}

/// Distance flown by each vehicle over the recorded steps.
pub fn path_lengths(record: &TrajectoryRecord) -> Vec<f64> {
    let mut len = vec![0.0_f64; record.acps.len()];
    for w in record.steps.windows(2) {
        for (i, (a, b)) in w[0].acps.iter().zip(&w[1].acps).enumerate() {
            len[i] += a.pose.position().distance(b.pose.position());
        }
    }
    len
}

/// Analytical redundancy bound `1 - (1 - p)^n` for independent outcomes.
pub fn p_mission_analytical(p_indiv: f64, n: u32) -> f64 {
    1.0 - (1.0 - p_indiv).powi(n as i32)
}

/// Two-sided z value of the 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Wald (normal approximation) half-width at 95% confidence.
pub fn wald_ci_half_width(successes: usize, trials: usize) -> f64 {
    assert!(trials >= 1, "at least one trial");
    let p = successes as f64 / trials as f64;
    Z_95 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Trailing-window success rate; empty when the sequence is shorter than
/// the window.
pub fn rolling_success(outcomes: &[bool], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be >= 1");
    if outcomes.len() < window {
        return Vec::new();
    }
    let mut count = outcomes[..window].iter().filter(|s| **s).count();
    let mut out = Vec::with_capacity(outcomes.len() - window + 1);
    out.push(count as f64 / window as f64);
    for k in window..outcomes.len() {
        count += outcomes[k] as usize;
        count -= outcomes[k - window] as usize;
        out.push(count as f64 / window as f64);
    }
    out
}

/// Terminal outcome of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Success,
    Captured,
    /// Still active when the run ended.
    Timeout,
}

impl Outcome {
    pub fn from_status(s: Status) -> Self {
        match s {
            Status::Succeeded => Outcome::Success,
            Status::Captured => Outcome::Captured,
            Status::Active => Outcome::Timeout,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "SUCCESS",
            Outcome::Captured => "CAPTURED",
            Outcome::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcpMetrics {
    pub index: usize,
    pub role: Role,
    pub weight: f64,
    pub outcome: Outcome,
    pub peak_risk: f64,
    pub path_length: f64,
    pub capture_time: Option<f64>,
    pub success_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub case_id: CaseId,
    /// Mission summary: a single vehicle's outcome, or `k/N SUCCESS` /
    /// `FAILED` for a team.
    pub outcome: String,
    pub s_team: bool,
    pub epsilon: f64,
    pub j_wez: f64,
    pub v_wez: f64,
    pub m_team: f64,
    pub per_acp: Vec<AcpMetrics>,
    pub p_mission_empirical: f64,
    /// Redundancy bound for the roster size; absent for the direct case.
    pub p_mission_analytical: Option<f64>,
    pub ci_half_width: f64,
    pub timed_out: bool,
}

impl MetricsReport {
    pub fn from_record(record: &TrajectoryRecord, epsilon: f64, p_indiv: f64) -> Self {
        let weights = record.weights();
        let peaks = peak_risk_per_acp(record);
        let lengths = path_lengths(record);
        let (s_team, _) = team_outcome(record);
        let per_acp: Vec<AcpMetrics> = record
            .final_status()
            .into_iter()
            .enumerate()
            .map(|(i, st)| AcpMetrics {
                index: i,
                role: record.acps[i].role,
                weight: weights[i],
                outcome: Outcome::from_status(st),
                peak_risk: peaks[i],
                path_length: lengths[i],
                capture_time: record.capture_time(i),
                success_time: record.success_time(i),
            })
            .collect();
        let outcome = summarize_outcomes(&per_acp.iter().map(|a| a.outcome).collect::<Vec<_>>());
        let n = per_acp.len() as u32;
        MetricsReport {
            case_id: record.case_id,
            outcome,
            s_team,
            epsilon,
            j_wez: j_wez(record, &weights),
            v_wez: v_wez(record, epsilon),
            m_team: m_team(record, epsilon),
            per_acp,
            p_mission_empirical: if s_team { 1.0 } else { 0.0 },
            p_mission_analytical: record.case_id.uses_csbez().then(|| p_mission_analytical(p_indiv, n)),
            ci_half_width: wald_ci_half_width(s_team as usize, 1),
            timed_out: record.timed_out,
        }
    }
}

/// `SUCCESS`/`CAPTURED`/`TIMEOUT` for one vehicle, `k/N SUCCESS` or
/// `FAILED` for a team.
pub fn summarize_outcomes(outcomes: &[Outcome]) -> String {
    if outcomes.len() == 1 {
        return outcomes[0].as_str().to_string();
    }
    let k = outcomes.iter().filter(|o| **o == Outcome::Success).count();
    if k == 0 {
        "FAILED".to_string()
    } else {
        format!("{k}/{} SUCCESS", outcomes.len())
    }
}
