//! Receding-horizon harness: truth traffic, episodes and batch experiments.

pub mod config;
pub mod episode;
pub mod experiment;
pub mod planner;
pub mod report;
pub mod truth;

pub use config::{PlannerKind, ScenarioConfig, TruthMode, VehicleSpec};
pub use episode::{run_episode, run_episode_with, EpisodeTrace, Outcome};
pub use experiment::{compare_planners, run_experiment, run_monte_carlo, ExperimentReport, MonteCarloStats, Perturbation, PlannerStats};
pub use planner::{analyze, plan_cycle, Choice, ChoiceKind, CyclePlan};
pub use report::{render_plan, write_report_json, write_trace_csv};
pub use truth::truth_sv_accel;
