//! Trajectory cost terms: safety, efficiency, comfort and navigation.

use serde::{Deserialize, Serialize};

use crate::footprint::{FootprintRect, PlacedRect};
use crate::rollout::TrajectorySet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    /// Penalty per step and vehicle pair closer than `d_lo`.
    pub w_saf1: f64,
    /// Penalty per step and vehicle pair within `[d_lo, d_hi]`.
    pub w_saf2: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub w_eff: f64,
    pub w_com: f64,
    pub w_nav: f64,
    /// Weight on the expected entropy change of the partner belief (ego only).
    pub w_info: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w_saf1: 1000.0,
            w_saf2: 20.0,
            d_lo: 0.5,
            d_hi: 3.0,
            w_eff: 1.0,
            w_com: 0.05,
            w_nav: 1.0,
            w_info: 0.0,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> bool {
        self.w_saf1 > self.w_saf2 && self.w_saf2 > 0.0 && 0.0 <= self.d_lo && self.d_lo < self.d_hi
    }

    pub fn proximity_penalty(&self, d: f64) -> f64 {
        if d < self.d_lo {
            self.w_saf1
        } else if d <= self.d_hi {
            self.w_saf2
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub safety: f64,
    pub efficiency: f64,
    pub comfort: f64,
    pub navigation: f64,
    pub info: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.safety + self.efficiency + self.comfort + self.navigation + self.info
    }
}

/// Safety cost of every vehicle plus whether the rollout is free of footprint overlap.
pub fn safety_costs(traj: &TrajectorySet, weights: &CostWeights) -> (Vec<f64>, bool) {
    let n = traj.vehicle_count();
    let mut costs = vec![0.0; n];
    let mut collision_free = true;
    let mut rects = Vec::with_capacity(n);
    for t in 0..=traj.steps() {
        rects.clear();
        rects.extend((0..n).map(|i| PlacedRect::new(&FootprintRect::of(&traj.states[i][t], &traj.meta[i].params))));
        for i in 0..n {
            for j in i + 1..n {
                // pairs beyond d_hi contribute nothing
                if let Some(d) = rects[i].distance_within(&rects[j], weights.d_hi) {
                    let p = weights.proximity_penalty(d);
                    costs[i] += p;
                    costs[j] += p;
                    collision_free &= d > 0.0;
                }
            }
        }
    }
    (costs, collision_free)
}

pub fn safety_cost(traj: &TrajectorySet, vehicle: usize, weights: &CostWeights) -> f64 {
    safety_costs(traj, weights).0[vehicle]
}

pub fn efficiency_cost(traj: &TrajectorySet, vehicle: usize, weights: &CostWeights) -> f64 {
    let v_des = traj.meta[vehicle].desired_speed;
    weights.w_eff * traj.states[vehicle].iter().map(|s| (s.v - v_des).powi(2)).sum::<f64>()
}

pub fn comfort_cost(traj: &TrajectorySet, vehicle: usize, weights: &CostWeights) -> f64 {
    let dt2 = traj.dt * traj.dt;
    weights.w_com
        * traj.inputs[vehicle]
            .windows(2)
            .map(|w| (w[1].a - w[0].a).powi(2) / dt2)
            .sum::<f64>()
}

pub fn navigation_cost(traj: &TrajectorySet, vehicle: usize, weights: &CostWeights) -> f64 {
    let y_des = traj.meta[vehicle].desired_y;
    weights.w_nav * traj.states[vehicle].iter().map(|s| (s.y - y_des).powi(2)).sum::<f64>()
}

/// Cost breakdowns for every vehicle in the rollout (ego first).
pub fn evaluate(traj: &TrajectorySet, weights: &CostWeights) -> (Vec<CostBreakdown>, bool) {
    let (safety, collision_free) = safety_costs(traj, weights);
    let out = safety
        .into_iter()
        .enumerate()
        .map(|(i, s)| CostBreakdown {
            safety: s,
            efficiency: efficiency_cost(traj, i, weights),
            comfort: comfort_cost(traj, i, weights),
            navigation: navigation_cost(traj, i, weights),
            info: 0.0,
        })
        .collect();
    (out, collision_free)
}
