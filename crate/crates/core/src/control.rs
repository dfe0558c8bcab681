//! Low-level policies that turn semantic decisions into continuous controls.
//!
//! The ego tracks a gap reference with a PD law and a target line with pure pursuit;
//! surrounding vehicles follow an IDM whose spacing input is inflated for leaders that
//! are laterally offset (mergers projected onto the follower's lane).

use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleState;

/// Longitudinal state of a vehicle bounding a gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBound {
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GapRefParams {
    /// Minimum center spacing to either gap boundary (m).
    pub d_safe: f64,
    /// Extra following distance per unit of front-vehicle speed (s).
    pub follow_headway: f64,
}

impl Default for GapRefParams {
    fn default() -> Self {
        Self {
            d_safe: 6.0,
            follow_headway: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReference {
    /// Absent when only speed tracking applies (no front vehicle).
    pub x_target: Option<f64>,
    pub v_target: f64,
    /// False when the boundaries are closer than `2 * d_safe`.
    pub feasible: bool,
}

/// Rule-based target inside a gap.
///
/// With both boundaries the target is the midpoint of the safe interval; with only a
/// front vehicle it is a follow point behind it; without a front vehicle only the
/// lane's desired speed is tracked.
pub fn gap_reference(
    front: Option<GapBound>,
    rear: Option<GapBound>,
    lane_speed: f64,
    params: &GapRefParams,
) -> GapReference {
    let v_target = match front {
        Some(f) => f.v.min(lane_speed).max(0.0),
        None => lane_speed.max(0.0),
    };
    match (front, rear) {
        (Some(f), Some(r)) => {
            let lo = r.x + params.d_safe;
            let hi = f.x - params.d_safe;
            GapReference {
                x_target: Some(0.5 * (lo + hi)),
                v_target,
                feasible: hi >= lo,
            }
        }
        (Some(f), None) => GapReference {
            x_target: Some(f.x - params.d_safe - params.follow_headway * f.v.max(0.0)),
            v_target,
            feasible: true,
        },
        (None, _) => GapReference {
            x_target: None,
            v_target,
            feasible: true,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdGains {
    pub kp_pos: f64,
    pub kd_pos: f64,
    pub kp_vel: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self {
            kp_pos: 0.3,
            kd_pos: 1.2,
            kp_vel: 1.0,
        }
    }
}

pub fn pd_longitudinal(state: &VehicleState, reference: &GapReference, gains: &PdGains, a_max: f64) -> f64 {
    let speed_err = reference.v_target - state.v;
    let a = match reference.x_target {
        Some(x) => gains.kp_pos * (x - state.x) + gains.kd_pos * speed_err,
        None => gains.kp_vel * speed_err,
    };
    a.clamp(-a_max, a_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PurePursuitParams {
    /// Lookahead gain (s); the lookahead distance is `kpp * v`.
    pub kpp: f64,
    pub wheelbase: f64,
    pub min_lookahead: f64,
}

impl Default for PurePursuitParams {
    fn default() -> Self {
        Self {
            kpp: 2.0,
            wheelbase: 2.7,
            min_lookahead: 3.0,
        }
    }
}

/// Steering toward a straight line `y = target_line_y` parallel to the x axis.
pub fn pure_pursuit(state: &VehicleState, target_line_y: f64, params: &PurePursuitParams, delta_max: f64) -> f64 {
    let lookahead = (params.kpp * state.v).max(params.min_lookahead);
    let dy = target_line_y - state.y;
    let dx = (lookahead * lookahead - dy * dy).max(0.0).sqrt();
    let gamma = dy.atan2(dx) - state.theta;
    let delta = (2.0 * params.wheelbase * gamma.sin() / lookahead).atan();
    delta.clamp(-delta_max, delta_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdmParams {
    pub v0: f64,
    pub time_headway: f64,
    pub s0: f64,
    pub a_acc: f64,
    pub b_dec: f64,
    /// Hardest braking the model may command.
    pub b_emergency: f64,
    /// Willingness-to-yield parameter; 1 ignores lateral offset entirely.
    pub beta: f64,
    pub lane_width: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v0: 10.0,
            time_headway: 1.5,
            s0: 2.0,
            a_acc: 1.5,
            b_dec: 2.0,
            b_emergency: 8.0,
            beta: 6.0,
            lane_width: 3.5,
        }
    }
}

impl IdmParams {
    pub fn kappa(&self) -> f64 {
        2.0 * self.beta.ln() / self.lane_width
    }
}

/// `|x_l - x_f| * exp(kappa |y_l - y_f|)` with `kappa = 2 ln(beta) / w_lane`.
pub fn virtual_gap_distance(leader: &VehicleState, follower: &VehicleState, params: &IdmParams) -> f64 {
    (leader.x - follower.x).abs() * (params.kappa() * (leader.y - follower.y).abs()).exp()
}

/// What the follower sees of its (possibly virtual) leader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmLeader {
    /// Bumper-to-bumper spacing input (m).
    pub gap: f64,
    /// Leader's longitudinal speed (m/s).
    pub v: f64,
}

/// IDM acceleration, saturated to `[-b_emergency, a_acc]`.
pub fn idm_accel(follower_v: f64, leader: Option<IdmLeader>, params: &IdmParams) -> f64 {
    let free = if params.v0 > 0.0 {
        1.0 - (follower_v / params.v0).powi(4)
    } else {
        // parked vehicle: only allow braking to a stop
        if follower_v > 0.0 { -1.0 } else { 0.0 }
    };
    let interaction = match leader {
        None => 0.0,
        Some(l) if l.gap <= 0.0 => return -params.b_emergency,
        Some(l) => {
            let dv = follower_v - l.v;
            let s_star = params.s0
                + follower_v * params.time_headway
                + follower_v * dv / (2.0 * (params.a_acc * params.b_dec).sqrt());
            (s_star.max(0.0) / l.gap).powi(2)
        }
    };
    (params.a_acc * (free - interaction)).clamp(-params.b_emergency, params.a_acc)
}
