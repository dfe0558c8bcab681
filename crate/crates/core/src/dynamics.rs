//! Kinematic bicycle model integrated with Kutta's third-order Runge-Kutta scheme.
//!
//! ```text
//! x' = v cos(theta)    y' = v sin(theta)
//! theta' = v tan(delta) / wheelbase
//! v' = a
//! ```
//!
//! Inputs are saturated to the vehicle's actuation limits rather than rejected, and
//! speed is clamped at zero after every step (no reversing).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Pose and speed of one vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self { x, y, theta, v }
    }

    /// Speed along the lane direction.
    pub fn longitudinal_speed(&self) -> f64 {
        self.v * self.theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Acceleration (m/s^2).
    pub a: f64,
    /// Steering angle (rad).
    pub delta: f64,
}

impl ControlInput {
    pub fn new(a: f64, delta: f64) -> Self {
        Self { a, delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    /// Inter-axle distance, also used as the pure-pursuit wheelbase.
    pub wheelbase: f64,
    pub length: f64,
    pub width: f64,
    pub a_max: f64,
    pub delta_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.7,
            length: 4.5,
            width: 1.8,
            a_max: 4.0,
            delta_max: 0.5,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> bool {
        [self.wheelbase, self.length, self.width, self.a_max, self.delta_max]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }

    pub fn saturate(&self, input: ControlInput) -> ControlInput {
        ControlInput {
            a: input.a.clamp(-self.a_max, self.a_max),
            delta: input.delta.clamp(-self.delta_max, self.delta_max),
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[derive(Clone, Copy)]
struct Deriv([f64; 4]);

fn bicycle_rhs(s: [f64; 4], u: ControlInput, wheelbase: f64) -> Deriv {
    let [_, _, theta, v] = s;
    // straight-line fast path; exact, since sin(0) = tan(0) = 0 and cos(0) = 1
    let (sin, cos) = if theta == 0.0 { (0.0, 1.0) } else { theta.sin_cos() };
    let yaw_rate = if u.delta == 0.0 { 0.0 } else { v / wheelbase * u.delta.tan() };
    Deriv([v * cos, v * sin, yaw_rate, u.a])
}

fn axpy(s: [f64; 4], h: f64, d: Deriv) -> [f64; 4] {
    [
        s[0] + h * d.0[0],
        s[1] + h * d.0[1],
        s[2] + h * d.0[2],
        s[3] + h * d.0[3],
    ]
}

/// One RK3 step where the input may vary inside the step.
///
/// `input(tau)` is sampled at the stage offsets `0`, `dt/2` and `dt`, which keeps the
/// scheme third-order for smooth input profiles.
pub fn step_bicycle_with<F>(
    state: VehicleState,
    mut input: F,
    dt: f64,
    params: &VehicleParams,
) -> VehicleState
where
    F: FnMut(f64) -> ControlInput,
{
    let s0 = [state.x, state.y, state.theta, state.v];
    let l = params.wheelbase;

    let k1 = bicycle_rhs(s0, params.saturate(input(0.0)), l);
    let k2 = bicycle_rhs(axpy(s0, 0.5 * dt, k1), params.saturate(input(0.5 * dt)), l);
    let s3 = axpy(axpy(s0, -dt, k1), 2.0 * dt, k2);
    let k3 = bicycle_rhs(s3, params.saturate(input(dt)), l);

    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = s0[i] + dt / 6.0 * (k1.0[i] + 4.0 * k2.0[i] + k3.0[i]);
    }

    VehicleState {
        x: out[0],
        y: out[1],
        theta: wrap_angle(out[2]),
        v: out[3].max(0.0),
    }
}

/// Advances `state` by `dt` under a zero-order-hold input.
pub fn step_bicycle(
    state: VehicleState,
    input: ControlInput,
    dt: f64,
    params: &VehicleParams,
) -> VehicleState {
    let u = params.saturate(input);
    step_bicycle_with(state, |_| u, dt, params)
}
