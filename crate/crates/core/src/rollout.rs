//! Multi-vehicle forward simulation of one action tuple over the planning horizon.
//!
//! The ego executes its decision sequence through the gap reference, PD and pure-pursuit
//! controllers, switching decisions every decision period. Surrounding vehicles keep
//! their lanes and follow the modified IDM; the interaction partner's willingness to
//! yield is set by the group action, everyone else asserts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::actions::{ActionTuple, EgoDecision, GapChoice, LateralDecision, SvAction};
use crate::control::{
    gap_reference, idm_accel, pd_longitudinal, pure_pursuit, virtual_gap_distance, GapBound,
    GapRefParams, IdmLeader, IdmParams, PdGains, PurePursuitParams,
};
use crate::dynamics::{step_bicycle, ControlInput, VehicleParams, VehicleState};
use crate::error::{Error, Result};
use crate::world::{GapLayout, Lane, LaneGeometry, World};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Trajectory steps T.
    pub steps: usize,
    pub dt: f64,
    /// Decision slots H.
    pub decision_horizon: usize,
    /// Decision period (s).
    pub decision_period: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 25,
            dt: 0.2,
            decision_horizon: 5,
            decision_period: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.decision_period > 0.0) || self.steps == 0 || self.decision_horizon == 0 {
            return Err(Error::Config("sim steps, dt, horizon and period must be positive".into()));
        }
        let ratio = self.decision_period / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::Config(format!(
                "decision period {} is not a positive multiple of dt {}",
                self.decision_period, self.dt
            )));
        }
        let span = self.decision_horizon as f64 * self.decision_period;
        if (span - self.steps as f64 * self.dt).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "decision horizon spans {span} s but the trajectory spans {} s",
                self.steps as f64 * self.dt
            )));
        }
        Ok(())
    }

    pub fn steps_per_decision(&self) -> usize {
        (self.decision_period / self.dt).round() as usize
    }

    /// Active decision slot at trajectory step `t`.
    pub fn decision_index(&self, t: usize) -> usize {
        (t / self.steps_per_decision()).min(self.decision_horizon - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub gap: GapRefParams,
    pub pd: PdGains,
    pub pursuit: PurePursuitParams,
    /// IDM template for surrounding vehicles; `v0`, `beta` and `lane_width` are
    /// filled in per vehicle.
    pub idm: IdmParams,
    pub beta_assert: f64,
    pub beta_yield: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            gap: GapRefParams::default(),
            pd: PdGains::default(),
            pursuit: PurePursuitParams::default(),
            idm: IdmParams::default(),
            beta_assert: 6.0,
            beta_yield: 1.5,
        }
    }
}

impl PlannerParams {
    pub fn beta(&self, action: SvAction) -> f64 {
        match action {
            SvAction::Assert => self.beta_assert,
            SvAction::Yield => self.beta_yield,
        }
    }
}

/// Static per-vehicle data shared by every rollout of one planning cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleMeta {
    pub id: usize,
    pub params: VehicleParams,
    pub lane: Lane,
    pub desired_speed: f64,
    pub desired_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub tuple: ActionTuple,
    /// Index 0 is the ego.
    pub meta: Arc<[VehicleMeta]>,
    /// `states[vehicle][t]` for `t = 0..=T`.
    pub states: Vec<Vec<VehicleState>>,
    /// `inputs[vehicle][t]` for `t = 0..T`.
    pub inputs: Vec<Vec<ControlInput>>,
    /// Vehicle index of the interaction partner.
    pub partner: Option<usize>,
    /// False if any targeted gap was narrower than twice the safe distance.
    pub gap_feasible: bool,
    pub dt: f64,
}

impl TrajectorySet {
    pub fn vehicle_count(&self) -> usize {
        self.states.len()
    }

    pub fn steps(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn accelerations(&self, vehicle: usize) -> Vec<f64> {
        self.inputs[vehicle].iter().map(|u| u.a).collect()
    }
}

/// Everything a cycle's rollouts share: the initial world and its gap layout.
#[derive(Debug, Clone)]
pub struct RolloutContext {
    world: World,
    layout: GapLayout,
    meta: Arc<[VehicleMeta]>,
    cfg: SimConfig,
    params: PlannerParams,
}

impl RolloutContext {
    pub fn new(world: &World, cfg: &SimConfig, params: &PlannerParams) -> Self {
        let lanes = &world.lanes;
        let meta: Vec<VehicleMeta> = std::iter::once(VehicleMeta {
            id: world.ego.id,
            params: world.ego.params,
            lane: world.ego.lane,
            desired_speed: world.ego.desired_speed,
            desired_y: lanes.target_center,
        })
        .chain(world.svs.iter().map(|sv| VehicleMeta {
            id: sv.id,
            params: sv.params,
            lane: sv.lane,
            desired_speed: sv.desired_speed,
            desired_y: lanes.center(sv.lane),
        }))
        .collect();
        Self {
            world: world.clone(),
            layout: world.gap_layout(),
            meta: meta.into(),
            cfg: *cfg,
            params: *params,
        }
    }

    pub fn layout(&self) -> &GapLayout {
        &self.layout
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// Vehicle index (ego = 0) of the partner implied by a sequence.
    pub fn partner_of(&self, seq: &crate::actions::DecisionSequence) -> Option<usize> {
        seq.committed_gap()
            .and_then(|g| self.layout.partner(g))
            .map(|sv| sv + 1)
    }

    pub fn simulate(&self, tuple: &ActionTuple) -> TrajectorySet {
        let n = self.meta.len();
        let steps = self.cfg.steps;
        let partner = self.partner_of(&tuple.ego);

        let mut betas = vec![self.params.beta_assert; n];
        if let Some(p) = partner {
            betas[p] = self.params.beta(tuple.sv);
        }

        let mut states: Vec<Vec<VehicleState>> = self
            .world
            .vehicles()
            .map(|v| {
                let mut s = Vec::with_capacity(steps + 1);
                s.push(v.state);
                s
            })
            .collect();
        let mut inputs: Vec<Vec<ControlInput>> = (0..n).map(|_| Vec::with_capacity(steps)).collect();
        let mut gap_feasible = true;
        let mut current: Vec<VehicleState> = states.iter().map(|s| s[0]).collect();
        let mut controls = vec![ControlInput::default(); n];

        for t in 0..steps {
            let decision = tuple.ego.steps[self.cfg.decision_index(t)];
            let (ego_u, feasible) = self.ego_control(&current, decision.gap, decision.lateral);
            gap_feasible &= feasible;
            controls[0] = ego_u;
            for k in 1..n {
                let a = sv_accel(&self.world.lanes, &self.meta, &current, k, betas[k], decision.lateral.is_leftward(), &self.params.idm);
                controls[k] = ControlInput::new(a, 0.0);
            }
            for k in 0..n {
                let p = &self.meta[k].params;
                let u = p.saturate(controls[k]);
                current[k] = step_bicycle(current[k], u, self.cfg.dt, p);
                inputs[k].push(u);
                states[k].push(current[k]);
            }
        }

        TrajectorySet {
            tuple: tuple.clone(),
            meta: self.meta.clone(),
            states,
            inputs,
            partner,
            gap_feasible,
            dt: self.cfg.dt,
        }
    }

    /// Saturated ego input for `decision` given the current states (ego first).
    pub fn ego_input(&self, current: &[VehicleState], decision: EgoDecision) -> ControlInput {
        let (u, _) = self.ego_control(current, decision.gap, decision.lateral);
        self.meta[0].params.saturate(u)
    }

    fn bound(&self, current: &[VehicleState], sv: Option<usize>) -> Option<GapBound> {
        sv.map(|i| {
            let s = current[i + 1];
            GapBound { x: s.x, v: s.longitudinal_speed() }
        })
    }

    fn ego_control(&self, current: &[VehicleState], gap: GapChoice, lateral: LateralDecision) -> (ControlInput, bool) {
        let lanes = &self.world.lanes;
        let ego = current[0];
        let ego_params = &self.meta[0].params;
        let p = &self.params;

        let bounds = self.layout.get(gap).unwrap_or(self.layout.gap0);
        let lane_speed = match gap {
            GapChoice::Gap0 => lanes.origin_speed,
            _ => lanes.target_speed,
        };
        let reference = gap_reference(
            self.bound(current, bounds.front),
            self.bound(current, bounds.rear),
            lane_speed,
            &p.gap,
        );
        let mut a = pd_longitudinal(&ego, &reference, &p.pd, ego_params.a_max);

        // never drive into the own-lane leader while still on the origin lane
        let on_origin = lanes.lane_of(ego.y) == Lane::Origin;
        if gap != GapChoice::Gap0 && on_origin && self.layout.gap0.front.is_some() {
            let follow = gap_reference(self.bound(current, self.layout.gap0.front), None, lanes.origin_speed, &p.gap);
            a = a.min(pd_longitudinal(&ego, &follow, &p.pd, ego_params.a_max));
        }

        let line = match lateral {
            LateralDecision::LaneKeep => lanes.center(lanes.lane_of(ego.y)),
            LateralDecision::LeftProbe => lanes.probe_line(),
            LateralDecision::LeftChange => lanes.target_center,
        };
        let pursuit = PurePursuitParams {
            wheelbase: ego_params.wheelbase,
            ..p.pursuit
        };
        let delta = pure_pursuit(&ego, line, &pursuit, ego_params.delta_max);
        (ControlInput::new(a, delta), reference.feasible)
    }
}

/// Modified-IDM acceleration of surrounding vehicle `k` (index into `current`).
///
/// The leader is the nearer, in virtual distance, of the physical leader on the same
/// lane and the ego. The ego counts when it occupies the lane, or when it is heading
/// for the target lane and `k` drives there.
pub fn sv_accel(
    lanes: &LaneGeometry,
    meta: &[VehicleMeta],
    current: &[VehicleState],
    k: usize,
    beta: f64,
    ego_leftward: bool,
    template: &IdmParams,
) -> f64 {
    let me = current[k];
    let lane = meta[k].lane;
    let idm = IdmParams {
        v0: meta[k].desired_speed,
        beta,
        lane_width: lanes.lane_width,
        ..*template
    };
    let half = |j: usize| 0.5 * (meta[j].params.length + meta[k].params.length);

    let mut leader: Option<IdmLeader> = None;
    let mut consider = |gap: f64, v: f64| {
        if leader.is_none_or(|l| gap < l.gap) {
            leader = Some(IdmLeader { gap, v });
        }
    };

    for j in 1..meta.len() {
        if j != k && meta[j].lane == lane && current[j].x > me.x {
            consider(current[j].x - me.x - half(j), current[j].longitudinal_speed());
        }
    }

    let ego = current[0];
    let ego_lane = lanes.lane_of(ego.y);
    if ego.x > me.x && (ego_lane == lane || (lane == Lane::Target && ego_leftward)) {
        let d = virtual_gap_distance(&ego, &me, &idm);
        consider(d - half(0), ego.longitudinal_speed());
    }

    idm_accel(me.v, leader, &idm)
}

pub fn simulate_tuple(world: &World, tuple: &ActionTuple, cfg: &SimConfig, params: &PlannerParams) -> TrajectorySet {
    RolloutContext::new(world, cfg, params).simulate(tuple)
}

/// Replays known ego inputs against surrounding vehicles that all use `beta`.
///
/// Returns each surrounding vehicle's acceleration trace (outer index = position in
/// `world.svs`). Used to predict how the traffic would have reacted under one mode.
pub fn replay_sv_response(
    world: &World,
    ego_inputs: &[ControlInput],
    ego_leftward: &[bool],
    beta: f64,
    params: &PlannerParams,
    dt: f64,
) -> Vec<Vec<f64>> {
    let ctx = RolloutContext::new(world, &SimConfig::default(), params);
    let meta = &ctx.meta;
    let n = meta.len();
    let mut current: Vec<VehicleState> = world.vehicles().map(|v| v.state).collect();
    let mut out = vec![Vec::with_capacity(ego_inputs.len()); n - 1];
    for (t, u) in ego_inputs.iter().enumerate() {
        let leftward = ego_leftward.get(t).copied().unwrap_or(false);
        let acc: Vec<f64> = (1..n)
            .map(|k| {
                let a = sv_accel(&world.lanes, meta, &current, k, beta, leftward, &params.idm);
                meta[k].params.saturate(ControlInput::new(a, 0.0)).a
            })
            .collect();
        current[0] = step_bicycle(current[0], *u, dt, &meta[0].params);
        for k in 1..n {
            current[k] = step_bicycle(current[k], ControlInput::new(acc[k - 1], 0.0), dt, &meta[k].params);
            out[k - 1].push(acc[k - 1]);
        }
    }
    out
}
