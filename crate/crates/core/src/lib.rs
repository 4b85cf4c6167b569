//! Threat-aware guidance for teams of unmanned vehicles crossing patrolled
//! engagement zones.
//!
//! Each vehicle steers with a reactive law built on a turn-constrained
//! intercept model of every pursuer. The crate covers the full study:
//! geometry and dynamics, the logistic risk model, the guidance law,
//! threat behaviours, the simulation loop, team metrics and a seeded
//! Monte Carlo harness.

pub mod analysis;
pub mod config;
pub mod csbez;
pub mod dynamics;
pub mod engine;
pub mod geom;
pub mod montecarlo;
pub mod threats;
pub mod wez_risk;

pub use analysis::{MetricsReport, Outcome};
pub use config::{ConfigError, SimConfig};
pub use engine::{run, CaseId, Scenario, TrajectoryRecord};
pub use geom::{Pose2, Vec2};
