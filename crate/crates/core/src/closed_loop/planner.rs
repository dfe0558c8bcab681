//! One planning cycle: enumerate, roll out, score, solve, select.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{build_action_tuples, enumerate_ego_sequences, DecisionSequence, EgoDecision, PruneRules, SvAction};
use crate::closed_loop::config::{PlannerKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::game::{build_game, BeliefTable, GameMatrix, GameOptions};
use crate::rollout::{RolloutContext, TrajectorySet};
use crate::solver::{find_pure_nash, select_action, stackelberg, Equilibrium, Player, Selection};
use crate::world::World;

/// How the executed cell was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceKind {
    Nash,
    /// No pure Nash equilibrium; the SV-leader Stackelberg equilibrium was used.
    SvLeaderFallback,
    StackelbergEv,
    LowestCost,
}

impl ChoiceKind {
    pub fn name(self) -> &'static str {
        match self {
            ChoiceKind::Nash => "nash",
            ChoiceKind::SvLeaderFallback => "sv-leader-fallback",
            ChoiceKind::StackelbergEv => "stackelberg-ev",
            ChoiceKind::LowestCost => "lowest-cost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub row: usize,
    pub col: usize,
    pub kind: ChoiceKind,
}

/// Every solution concept evaluated on one game.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub nash: Vec<Equilibrium>,
    pub selection: Selection,
    pub se_ev: Equilibrium,
    pub se_sv: Equilibrium,
}

pub fn analyze(game: &GameMatrix) -> Analysis {
    Analysis {
        nash: find_pure_nash(&game.costs),
        selection: select_action(&game.costs),
        se_ev: stackelberg(&game.costs, Player::Ev),
        se_sv: stackelberg(&game.costs, Player::Sv),
    }
}

#[derive(Debug, Clone)]
pub struct CyclePlan {
    pub game: GameMatrix,
    /// Row-major, one per action tuple.
    pub trajectories: Vec<TrajectorySet>,
    pub choice: Choice,
}

impl CyclePlan {
    pub fn chosen(&self) -> &TrajectorySet {
        &self.trajectories[self.choice.row * self.game.columns.len() + self.choice.col]
    }

    pub fn sequence(&self) -> &DecisionSequence {
        &self.game.columns[self.choice.col]
    }
}

/// Column minimising the belief-expected ego cost; the row is the more likely group
/// action (Assert on ties).
pub fn lowest_cost_choice(game: &GameMatrix) -> Choice {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..game.columns.len() {
        let b = game.beliefs[j];
        let expected: f64 = game
            .rows
            .iter()
            .enumerate()
            .map(|(i, &a)| b.get(a) * game.raw.ev(i, j))
            .sum();
        if best.is_none_or(|(_, c)| expected < c) {
            best = Some((j, expected));
        }
    }
    let col = best.expect("at least one column").0;
    let b = game.beliefs[col];
    let likely = if b.get(SvAction::Yield) > b.get(SvAction::Assert) {
        SvAction::Yield
    } else {
        SvAction::Assert
    };
    let row = game.rows.iter().position(|&a| a == likely).unwrap_or(0);
    Choice {
        row,
        col,
        kind: ChoiceKind::LowestCost,
    }
}

pub fn choose(game: &GameMatrix, kind: PlannerKind) -> Choice {
    match kind {
        PlannerKind::Nash => {
            let s = select_action(&game.costs);
            Choice {
                row: s.equilibrium.row,
                col: s.equilibrium.col,
                kind: if s.fallback_used {
                    ChoiceKind::SvLeaderFallback
                } else {
                    ChoiceKind::Nash
                },
            }
        }
        PlannerKind::StackelbergEv => {
            let e = stackelberg(&game.costs, Player::Ev);
            Choice {
                row: e.row,
                col: e.col,
                kind: ChoiceKind::StackelbergEv,
            }
        }
        PlannerKind::LowestCost => lowest_cost_choice(game),
    }
}

/// Pruning rules for a cycle. A root whose gap has vanished from the scene restarts
/// from the default decision.
pub fn prune_rules(cfg: &ScenarioConfig, ctx: &RolloutContext, root: EgoDecision) -> PruneRules {
    let available = ctx.layout().available();
    let root = if available.contains(&root.gap) {
        root
    } else {
        EgoDecision::default()
    };
    PruneRules {
        max_decision_changes: cfg.prune.max_decision_changes,
        forbidden_transitions: cfg.prune.forbidden(),
        root,
        available_gaps: available,
    }
}

/// Builds and scores the full game for `world` without choosing a cell.
pub fn build_cycle_game(
    world: &World,
    beliefs: &BeliefTable,
    root: EgoDecision,
    cfg: &ScenarioConfig,
) -> Result<(GameMatrix, Vec<TrajectorySet>)> {
    let ctx = RolloutContext::new(world, &cfg.sim, &cfg.controllers);
    let rules = prune_rules(cfg, &ctx, root);
    let columns = enumerate_ego_sequences(&rules, cfg.sim.decision_horizon);
    if columns.is_empty() {
        return Err(Error::Inconsistent("no admissible ego decision sequence".into()));
    }
    let rows = SvAction::ALL.to_vec();
    let tuples = build_action_tuples(&columns, &rows);
    let trajectories: Vec<TrajectorySet> = tuples.par_iter().map(|t| ctx.simulate(t)).collect();
    let options = GameOptions {
        sigma_a: cfg.belief.sigma_a,
    };
    let game = build_game(&rows, &columns, &trajectories, beliefs, &cfg.weights, &options)?;
    Ok((game, trajectories))
}

pub fn plan_cycle(
    world: &World,
    beliefs: &BeliefTable,
    root: EgoDecision,
    cfg: &ScenarioConfig,
    kind: PlannerKind,
) -> Result<CyclePlan> {
    let (game, trajectories) = build_cycle_game(world, beliefs, root, cfg)?;
    let choice = choose(&game, kind);
    Ok(CyclePlan {
        game,
        trajectories,
        choice,
    })
}
