//! Cost-matrix construction from evaluated rollouts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::actions::{DecisionSequence, SvAction};
use crate::belief::{update_belief, Belief};
use crate::cost::{evaluate, CostBreakdown, CostWeights};
use crate::error::{Error, Result};
use crate::rollout::TrajectorySet;
use crate::solver::CostMatrix;

/// Beliefs keyed by surrounding-vehicle id.
pub type BeliefTable = BTreeMap<usize, Belief>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMatrix {
    pub rows: Vec<SvAction>,
    pub columns: Vec<DecisionSequence>,
    /// Vehicle id of each column's interaction partner.
    pub partners: Vec<Option<usize>>,
    /// Belief applied to each column's SV entries.
    pub beliefs: Vec<Belief>,
    /// Unweighted `(J_SV, J_EV)`.
    pub raw: CostMatrix,
    /// `J_SV` scaled by `1 - b(row)`; the game that is actually solved.
    pub costs: CostMatrix,
    /// Whether each tuple's rollout is free of footprint overlap (row-major).
    pub collision_free: Vec<bool>,
    /// Ego cost breakdown per tuple (row-major).
    pub ego_breakdown: Vec<CostBreakdown>,
}

impl GameMatrix {
    pub fn is_collision_free(&self, i: usize, j: usize) -> bool {
        self.collision_free[i * self.columns.len() + j]
    }

    /// Columns whose tuples are collision-free for every row.
    pub fn feasible_columns(&self) -> Vec<bool> {
        (0..self.columns.len())
            .map(|j| (0..self.rows.len()).all(|i| self.is_collision_free(i, j)))
            .collect()
    }
}

/// Options that do not belong to the cost weights themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOptions {
    /// Observation noise for the information-gain term (m/s^2).
    pub sigma_a: f64,
}

impl Default for GameOptions {
    fn default() -> Self {
        Self { sigma_a: 0.8 }
    }
}

/// Assembles the belief-weighted game from one rollout per action tuple.
///
/// Entry `(i, j)` is `((1 - b(row i)) * sum of SV costs, J_EV)`, where `b` is the belief
/// about column `j`'s interaction partner (uniform when the column has none).
pub fn build_game(
    rows: &[SvAction],
    columns: &[DecisionSequence],
    trajectories: &[TrajectorySet],
    beliefs: &BeliefTable,
    weights: &CostWeights,
    options: &GameOptions,
) -> Result<GameMatrix> {
    let (m, n) = (rows.len(), columns.len());
    let mut slots: Vec<Option<&TrajectorySet>> = vec![None; m * n];
    for t in trajectories {
        let (i, j) = (t.tuple.row, t.tuple.col);
        if i >= m || j >= n || rows[i] != t.tuple.sv || columns[j] != t.tuple.ego {
            return Err(Error::Inconsistent(format!("trajectory for tuple ({i}, {j}) does not match the action lists")));
        }
        slots[i * n + j] = Some(t);
    }
    let cells: Vec<&TrajectorySet> = slots
        .iter()
        .enumerate()
        .map(|(k, s)| s.ok_or_else(|| Error::Inconsistent(format!("missing trajectory for tuple ({}, {})", k / n, k % n))))
        .collect::<Result<_>>()?;

    let mut sv = vec![0.0; m * n];
    let mut ev = vec![0.0; m * n];
    let mut collision_free = vec![true; m * n];
    let mut ego_breakdown = vec![CostBreakdown::default(); m * n];
    for (k, traj) in cells.iter().enumerate() {
        let (per_vehicle, free) = evaluate(traj, weights);
        ego_breakdown[k] = per_vehicle[0];
        ev[k] = per_vehicle[0].total();
        sv[k] = per_vehicle[1..].iter().map(CostBreakdown::total).sum();
        collision_free[k] = free;
    }

    let partners: Vec<Option<usize>> = (0..n)
        .map(|j| cells[j].partner.map(|p| cells[j].meta[p].id))
        .collect();
    let col_beliefs: Vec<Belief> = partners
        .iter()
        .map(|p| p.and_then(|id| beliefs.get(&id).copied()).unwrap_or_default())
        .collect();

    if weights.w_info != 0.0 && m == 2 {
        for j in 0..n {
            let Some(p) = cells[j].partner else { continue };
            let prior = col_beliefs[j];
            let pred = [cells[j].accelerations(p), cells[n + j].accelerations(p)];
            for i in 0..m {
                let observed = cells[i * n + j].accelerations(p);
                let post = update_belief(&prior, &observed, [&pred[0], &pred[1]], options.sigma_a);
                let info = weights.w_info * (post.entropy() - prior.entropy());
                ego_breakdown[i * n + j].info = info;
                ev[i * n + j] += info;
            }
        }
    }

    let raw = CostMatrix::new(m, n, sv.clone(), ev.clone());
    let mut costs = raw.clone();
    for (i, &row) in rows.iter().enumerate() {
        for (j, b) in col_beliefs.iter().enumerate() {
            *costs.sv_mut(i, j) *= 1.0 - b.get(row);
        }
    }
    if !costs.is_finite() {
        return Err(Error::Inconsistent("non-finite cost entry".into()));
    }

    Ok(GameMatrix {
        rows: rows.to_vec(),
        columns: columns.to_vec(),
        partners,
        beliefs: col_beliefs,
        raw,
        costs,
        collision_free,
        ego_breakdown,
    })
}
