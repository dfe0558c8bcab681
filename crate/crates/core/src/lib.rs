//! Game-theoretic lane-merge planning.
//!
//! The ego vehicle and the group of surrounding vehicles play a two-player game each
//! planning cycle. Ego strategies are pruned sequences of semantic decisions (which gap,
//! which lateral maneuver); the group either asserts or yields. Every pair is rolled out
//! with a kinematic bicycle model, scored, weighted by the ego's belief about the
//! interaction partner, and solved for pure Nash or Stackelberg equilibria.

pub mod actions;
pub mod belief;
pub mod closed_loop;
pub mod control;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod footprint;
pub mod game;
pub mod rollout;
pub mod solver;
pub mod world;

pub use actions::{
    build_action_tuples, enumerate_ego_sequences, ActionTuple, DecisionSequence, EgoDecision, GapChoice,
    LateralDecision, PruneRules, SvAction,
};
pub use belief::{update_belief, Belief};
pub use control::{idm_accel, virtual_gap_distance, IdmLeader, IdmParams};
pub use cost::{CostBreakdown, CostWeights};
pub use dynamics::{step_bicycle, ControlInput, VehicleParams, VehicleState};
pub use error::{Error, Result};
pub use footprint::{rect_distance, FootprintRect};
pub use game::{build_game, BeliefTable, GameMatrix, GameOptions};
pub use rollout::{simulate_tuple, PlannerParams, RolloutContext, SimConfig, TrajectorySet};
pub use solver::{find_pure_nash, select_action, stackelberg, CostMatrix, Equilibrium, EquilibriumKind, Player, Selection};
pub use world::{Lane, LaneGeometry, Vehicle, World};
