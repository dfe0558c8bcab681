//! Pure-strategy equilibria of two-player cost matrices.
//!
//! Rows are the surrounding-vehicle group's actions, columns the ego's decision
//! sequences. Every entry carries a cost pair `(J_SV, J_EV)`; both players minimize.

use serde::{Deserialize, Serialize};

/// Dense row-major cost pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    sv: Vec<f64>,
    ev: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, sv: Vec<f64>, ev: Vec<f64>) -> Self {
        assert_eq!(sv.len(), rows * cols);
        assert_eq!(ev.len(), rows * cols);
        Self { rows, cols, sv, ev }
    }

    /// Builds from per-row vectors. Panics on ragged input.
    pub fn from_rows(sv: &[Vec<f64>], ev: &[Vec<f64>]) -> Self {
        let rows = sv.len();
        let cols = sv.first().map_or(0, Vec::len);
        assert_eq!(ev.len(), rows);
        Self::new(rows, cols, sv.concat(), ev.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sv(&self, i: usize, j: usize) -> f64 {
        self.sv[i * self.cols + j]
    }

    pub fn ev(&self, i: usize, j: usize) -> f64 {
        self.ev[i * self.cols + j]
    }

    pub fn social(&self, i: usize, j: usize) -> f64 {
        self.sv(i, j) + self.ev(i, j)
    }

    pub fn is_finite(&self) -> bool {
        self.sv.iter().chain(&self.ev).all(|c| c.is_finite())
    }

    /// Scales the SV costs of row `i`.
    pub fn scale_sv_row(&mut self, i: usize, factor: f64) {
        let c = self.cols;
        self.sv[i * c..(i + 1) * c].iter_mut().for_each(|x| *x *= factor);
    }

    pub fn sv_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.sv[i * self.cols + j]
    }

    pub fn ev_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.ev[i * self.cols + j]
    }

    /// Whether `(i, j)` is a mutual best response.
    pub fn is_nash(&self, i: usize, j: usize) -> bool {
        let sv = self.sv(i, j);
        let ev = self.ev(i, j);
        (0..self.rows).all(|r| sv <= self.sv(r, j)) && (0..self.cols).all(|c| ev <= self.ev(i, c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Sv,
    Ev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Nash,
    StackelbergEvLeader,
    StackelbergSvLeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub row: usize,
    pub col: usize,
    pub kind: EquilibriumKind,
    pub social_cost: f64,
}

impl Equilibrium {
    fn at(game: &CostMatrix, row: usize, col: usize, kind: EquilibriumKind) -> Self {
        Self {
            row,
            col,
            kind,
            social_cost: game.social(row, col),
        }
    }

    pub fn cell(&self) -> (usize, usize) {
        (self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub equilibrium: Equilibrium,
    /// Set when no pure Nash equilibrium exists and the SV-leader Stackelberg
    /// equilibrium was used instead.
    pub fallback_used: bool,
}

/// Every pure-strategy Nash equilibrium, in row-major order.
pub fn find_pure_nash(game: &CostMatrix) -> Vec<Equilibrium> {
    // column minima of J_SV and row minima of J_EV, then one pass over the cells
    let col_min: Vec<f64> = (0..game.cols())
        .map(|j| (0..game.rows()).map(|i| game.sv(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let row_min: Vec<f64> = (0..game.rows())
        .map(|i| (0..game.cols()).map(|j| game.ev(i, j)).fold(f64::INFINITY, f64::min))
        .collect();

    let mut out = Vec::new();
    for (i, &ev_min) in row_min.iter().enumerate() {
        for (j, &sv_min) in col_min.iter().enumerate() {
            if game.sv(i, j) <= sv_min && game.ev(i, j) <= ev_min {
                out.push(Equilibrium::at(game, i, j, EquilibriumKind::Nash));
            }
        }
    }
    out
}

/// Follower's best response to a fixed leader action.
///
/// Ties are broken in the leader's favour, then by lower index.
fn best_response<'a>(
    candidates: impl Iterator<Item = usize>,
    follower_cost: impl Fn(usize) -> f64 + 'a,
    leader_cost: impl Fn(usize) -> f64 + 'a,
) -> usize {
    let mut best: Option<(usize, f64, f64)> = None;
    for k in candidates {
        let (f, l) = (follower_cost(k), leader_cost(k));
        let better = match best {
            None => true,
            Some((_, bf, bl)) => f < bf || (f == bf && l < bl),
        };
        if better {
            best = Some((k, f, l));
        }
    }
    best.expect("non-empty action set").0
}

/// Stackelberg equilibrium with `leader` committing first.
pub fn stackelberg(game: &CostMatrix, leader: Player) -> Equilibrium {
    assert!(game.rows() > 0 && game.cols() > 0, "empty game");
    match leader {
        Player::Ev => {
            let mut best: Option<(usize, usize, f64)> = None;
            for j in 0..game.cols() {
                let i = best_response(0..game.rows(), |i| game.sv(i, j), |i| game.ev(i, j));
                let cost = game.ev(i, j);
                if best.is_none_or(|(_, _, c)| cost < c) {
                    best = Some((i, j, cost));
                }
            }
            let (i, j, _) = best.unwrap();
            Equilibrium::at(game, i, j, EquilibriumKind::StackelbergEvLeader)
        }
        Player::Sv => {
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..game.rows() {
                let j = best_response(0..game.cols(), |j| game.ev(i, j), |j| game.sv(i, j));
                let cost = game.sv(i, j);
                if best.is_none_or(|(_, _, c)| cost < c) {
                    best = Some((i, j, cost));
                }
            }
            let (i, j, _) = best.unwrap();
            Equilibrium::at(game, i, j, EquilibriumKind::StackelbergSvLeader)
        }
    }
}

/// Lowest-social-cost Nash equilibrium, or the SV-leader Stackelberg equilibrium
/// when none exists.
pub fn select_action(game: &CostMatrix) -> Selection {
    let nash = find_pure_nash(game);
    let mut best: Option<Equilibrium> = None;
    for e in nash {
        if best.is_none_or(|b| e.social_cost < b.social_cost) {
            best = Some(e);
        }
    }
    match best {
        Some(e) => Selection {
            equilibrium: e,
            fallback_used: false,
        },
        None => Selection {
            equilibrium: stackelberg(game, Player::Sv),
            fallback_used: true,
        },
    }
}

/// Checks the monotonicity assumptions under which an Assert-row Nash equilibrium is
/// guaranteed: in every considered column `0 <= J_SV(A) <= J_SV(Y)` and
/// `J_EV(A) >= J_EV(Y) >= 0` on the raw (unweighted) costs, and `b(Assert) >= 0.5`.
///
/// Row 0 must be Assert and row 1 Yield. `feasible` masks columns to check.
pub fn check_monotone_assumptions_masked(raw: &CostMatrix, b_assert: f64, feasible: &[bool]) -> bool {
    if raw.rows() != 2 || b_assert < 0.5 {
        return false;
    }
    (0..raw.cols()).filter(|&j| feasible.get(j).copied().unwrap_or(true)).all(|j| {
        0.0 <= raw.sv(0, j) && raw.sv(0, j) <= raw.sv(1, j) && raw.ev(0, j) >= raw.ev(1, j) && raw.ev(1, j) >= 0.0
    })
}

pub fn check_monotone_assumptions(raw: &CostMatrix, b_assert: f64) -> bool {
    check_monotone_assumptions_masked(raw, b_assert, &[])
}

/// Applies `(1 - b(row)) * J_SV` with `b(Assert) = b_assert` to a two-row matrix.
pub fn weight_by_belief(raw: &CostMatrix, b_assert: f64) -> CostMatrix {
    let mut m = raw.clone();
    m.scale_sv_row(0, 1.0 - b_assert);
    if m.rows() > 1 {
        m.scale_sv_row(1, b_assert);
    }
    m
}
