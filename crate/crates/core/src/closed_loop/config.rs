//! Scenario configuration, loaded from TOML. Every field has a default, so a file only
//! needs to list what it changes. All units are SI.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actions::{default_forbidden_transitions, EgoDecision};
use crate::belief::Belief;
use crate::cost::CostWeights;
use crate::dynamics::{VehicleParams, VehicleState};
use crate::error::{Error, Result};
use crate::game::BeliefTable;
use crate::rollout::{PlannerParams, SimConfig};
use crate::world::{Lane, LaneGeometry, Vehicle, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    /// Lowest-social-cost Nash equilibrium with SV-leader Stackelberg fallback.
    Nash,
    StackelbergEv,
    /// Column with the lowest belief-expected ego cost.
    LowestCost,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Nash, PlannerKind::StackelbergEv, PlannerKind::LowestCost];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Nash => "nash",
            PlannerKind::StackelbergEv => "stackelberg-ev",
            PlannerKind::LowestCost => "lowest-cost",
        }
    }
}

/// How a surrounding vehicle actually behaves in the closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthMode {
    Polite,
    Selfish,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: usize,
    pub lane: Lane,
    pub x: f64,
    pub v: f64,
    /// Defaults to the lane's desired speed.
    #[serde(default)]
    pub desired_speed: Option<f64>,
    #[serde(default = "default_mode")]
    pub mode: TruthMode,
    #[serde(default)]
    pub params: VehicleParams,
}

fn default_mode() -> TruthMode {
    TruthMode::Selfish
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneSettings {
    pub max_decision_changes: usize,
    /// Forbid switching gaps while changing lanes.
    pub forbid_gap_switch_during_change: bool,
}

impl Default for PruneSettings {
    fn default() -> Self {
        Self {
            max_decision_changes: 2,
            forbid_gap_switch_during_change: true,
        }
    }
}

impl PruneSettings {
    pub fn forbidden(&self) -> Vec<(EgoDecision, EgoDecision)> {
        if self.forbid_gap_switch_during_change {
            default_forbidden_transitions()
        } else {
            Vec::new()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeliefSettings {
    /// Initial probability that each interaction partner asserts.
    pub initial_assert: f64,
    /// Acceleration observation noise (m/s^2).
    pub sigma_a: f64,
}

impl Default for BeliefSettings {
    fn default() -> Self {
        Self {
            initial_assert: 0.5,
            sigma_a: 0.8,
        }
    }
}

/// Ground-truth reaction thresholds, as fractions of the lane width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthParams {
    pub polite_reaction: f64,
    pub selfish_reaction: f64,
}

impl Default for TruthParams {
    fn default() -> Self {
        Self {
            polite_reaction: 0.75,
            selfish_reaction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeLimits {
    pub max_cycles: usize,
    /// Heading tolerance for a completed merge (rad).
    pub theta_tol: f64,
    /// Lateral tolerance around the target-lane center (m).
    pub lateral_tol: f64,
}

impl Default for EpisodeLimits {
    fn default() -> Self {
        Self {
            max_cycles: 60,
            theta_tol: 0.05,
            lateral_tol: 0.5,
        }
    }
}

/// Uniform initial-state jitter, seeded per episode. Speed jitter applies to every
/// surrounding vehicle; position jitter only to target-lane vehicles, so the phase of
/// the passing traffic relative to the ego varies between episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Jitter {
    pub position: f64,
    pub speed: f64,
    /// When set, every target-lane vehicle is redrawn Polite with this probability
    /// each episode; otherwise the roster modes are used as given.
    pub polite_probability: Option<f64>,
}

impl Default for Jitter {
    fn default() -> Self {
        Self {
            position: 10.0,
            speed: 0.5,
            polite_probability: None,
        }
    }
}

/// Open-loop Monte Carlo protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    /// Ego position perturbation half-width (m).
    pub position_perturbation: f64,
    /// Ego speed perturbation half-width (m/s).
    pub speed_perturbation: f64,
    /// `b(Assert)` settings, applied to every interaction partner.
    pub belief_settings: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            position_perturbation: 10.0,
            speed_perturbation: 5.0,
            belief_settings: vec![0.5, 0.7, 0.9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub planner: PlannerKind,
    pub lanes: LaneGeometry,
    pub sim: SimConfig,
    pub controllers: PlannerParams,
    pub weights: CostWeights,
    pub prune: PruneSettings,
    pub belief: BeliefSettings,
    pub truth: TruthParams,
    pub limits: EpisodeLimits,
    pub jitter: Jitter,
    pub experiment: ExperimentSpec,
    pub ego: VehicleSpec,
    pub vehicles: Vec<VehicleSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::merge_scenario(10.0)
    }
}

impl ScenarioConfig {
    /// The ego is stuck behind a slow truck at the truck's speed; three target-lane
    /// vehicles pass at `traffic_speed`, spaced at their car-following equilibrium.
    pub fn merge_scenario(traffic_speed: f64) -> Self {
        let v = traffic_speed;
        let controllers = PlannerParams::default();
        let spacing = controllers.idm.s0 + controllers.idm.time_headway * v + VehicleParams::default().length;
        let sv = |id, lane, x, speed, mode| VehicleSpec {
            id,
            lane,
            x,
            v: speed,
            desired_speed: Some(speed),
            mode,
            params: VehicleParams::default(),
        };
        Self {
            seed: 0,
            planner: PlannerKind::Nash,
            lanes: LaneGeometry {
                origin_speed: v,
                target_speed: v,
                ..LaneGeometry::default()
            },
            sim: SimConfig::default(),
            controllers,
            weights: CostWeights::default(),
            prune: PruneSettings::default(),
            belief: BeliefSettings::default(),
            truth: TruthParams::default(),
            limits: EpisodeLimits::default(),
            // the prior b = 0.5 matches a traffic mix that is half polite
            jitter: Jitter {
                polite_probability: Some(0.5),
                ..Jitter::default()
            },
            experiment: ExperimentSpec::default(),
            ego: VehicleSpec {
                desired_speed: Some(v),
                ..sv(0, Lane::Origin, 0.0, 0.5 * v, TruthMode::Selfish)
            },
            vehicles: vec![
                sv(1, Lane::Origin, 5.0 + v, 0.5 * v, TruthMode::Polite),
                sv(2, Lane::Target, 0.5 * spacing, v, TruthMode::Selfish),
                sv(3, Lane::Target, -0.5 * spacing, v, TruthMode::Selfish),
                sv(4, Lane::Target, -1.5 * spacing, v, TruthMode::Selfish),
            ],
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.vehicles.is_empty() {
            return Err(Error::Config("at least one surrounding vehicle is required".into()));
        }
        if !positive(self.lanes.merge_length) || !positive(self.lanes.lane_width) {
            return Err(Error::Config("merge length and lane width must be positive".into()));
        }
        if !self.weights.validate() {
            return Err(Error::Config("cost weights need w_saf1 > w_saf2 > 0 and 0 <= d_lo < d_hi".into()));
        }
        let c = &self.controllers;
        if !(c.beta_assert > c.beta_yield && c.beta_yield >= 1.0) {
            return Err(Error::Config("need beta_assert > beta_yield >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.belief.initial_assert) || !positive(self.belief.sigma_a) {
            return Err(Error::Config("initial belief must lie in [0, 1] and sigma_a must be positive".into()));
        }
        if let Some(p) = self.jitter.polite_probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config("polite_probability must lie in [0, 1]".into()));
            }
        }
        let mut ids: Vec<usize> = self.vehicles.iter().map(|v| v.id).chain([self.ego.id]).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("vehicle ids must be unique".into()));
        }
        for spec in self.vehicles.iter().chain([&self.ego]) {
            if !spec.params.validate() || spec.v < 0.0 {
                return Err(Error::Config(format!("vehicle {} has invalid parameters", spec.id)));
            }
        }
        Ok(())
    }

    fn vehicle(&self, spec: &VehicleSpec) -> Vehicle {
        Vehicle {
            id: spec.id,
            state: VehicleState::new(spec.x, self.lanes.center(spec.lane), 0.0, spec.v),
            params: spec.params,
            lane: spec.lane,
            desired_speed: spec.desired_speed.unwrap_or_else(|| self.lanes.speed(spec.lane)),
        }
    }

    /// The nominal initial world, without jitter.
    pub fn world(&self) -> World {
        World {
            lanes: self.lanes,
            ego: self.vehicle(&self.ego),
            svs: self.vehicles.iter().map(|s| self.vehicle(s)).collect(),
        }
    }

    pub fn truth_modes(&self) -> Vec<TruthMode> {
        self.vehicles.iter().map(|v| v.mode).collect()
    }

    /// One belief per target-lane vehicle.
    pub fn initial_beliefs(&self, p_assert: f64) -> BeliefTable {
        self.vehicles
            .iter()
            .filter(|v| v.lane == Lane::Target)
            .map(|v| (v.id, Belief::from_assert(p_assert)))
            .collect::<BTreeMap<_, _>>()
    }

    /// Fixes every target-lane vehicle to `mode` and disables the per-episode draw.
    pub fn set_all_modes(&mut self, mode: TruthMode) {
        self.jitter.polite_probability = None;
        for v in self.vehicles.iter_mut().filter(|v| v.lane == Lane::Target) {
            v.mode = mode;
        }
    }
}

/// False for NaN as well as for non-positive values.
fn positive(x: f64) -> bool {
    x > 0.0
}
