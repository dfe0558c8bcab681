//! Receding-horizon episodes against the ground-truth traffic model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actions::{DecisionSequence, EgoDecision};
use crate::belief::update_belief;
use crate::closed_loop::config::{PlannerKind, ScenarioConfig, TruthMode};
use crate::closed_loop::planner::{plan_cycle, ChoiceKind};
use crate::closed_loop::truth::truth_sv_accel;
use crate::dynamics::{step_bicycle, ControlInput, VehicleState};
use crate::error::{Error, Result};
use crate::game::BeliefTable;
use crate::rollout::{replay_sv_response, RolloutContext};
use crate::world::{Lane, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

/// Truth states and applied inputs after one step, in world order (ego first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub cycle: usize,
    pub t: f64,
    pub states: Vec<VehicleState>,
    /// Inputs that led to `states`; zero for the initial record.
    pub inputs: Vec<ControlInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub t: f64,
    /// Beliefs used for this cycle's game.
    pub beliefs: BeliefTable,
    pub sequence: DecisionSequence,
    pub row: usize,
    pub col: usize,
    pub kind: ChoiceKind,
    pub partner: Option<usize>,
    pub rows: usize,
    pub columns: usize,
    pub nash_count: usize,
    /// Best-response conditions re-checked on the stored matrix. Only meaningful for
    /// [`ChoiceKind::Nash`].
    pub nash_verified: bool,
    pub sv_cost: f64,
    pub ev_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub planner: PlannerKind,
    pub vehicle_ids: Vec<usize>,
    pub steps: Vec<StepRecord>,
    pub cycles: Vec<CycleRecord>,
    pub outcome: Outcome,
    /// Set only on success.
    pub time_to_merge: Option<f64>,
}

/// Initial truth world: the nominal roster with seeded uniform jitter, resampled until
/// no footprints overlap.
pub fn initial_world(cfg: &ScenarioConfig) -> Result<World> {
    let nominal = cfg.world();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (dp, dv) = (cfg.jitter.position, cfg.jitter.speed);
    for _ in 0..1000 {
        let mut w = nominal.clone();
        for sv in &mut w.svs {
            if dp > 0.0 && sv.lane == Lane::Target {
                sv.state.x += rng.gen_range(-dp..=dp);
            }
            if dv > 0.0 {
                sv.state.v = (sv.state.v + rng.gen_range(-dv..=dv)).max(0.0);
            }
        }
        if w.min_separation() > 0.0 {
            return Ok(w);
        }
    }
    Err(Error::Config("could not place vehicles without overlap".into()))
}

/// Truth modes for this episode. Drawn from an rng stream separate from the
/// placement jitter, so toggling the draw leaves the initial states unchanged.
pub fn episode_modes(cfg: &ScenarioConfig) -> Vec<TruthMode> {
    let mut modes = cfg.truth_modes();
    let Some(p) = cfg.jitter.polite_probability else { return modes };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    for (mode, spec) in modes.iter_mut().zip(&cfg.vehicles) {
        if spec.lane == Lane::Target {
            *mode = if rng.gen_bool(p) { TruthMode::Polite } else { TruthMode::Selfish };
        }
    }
    modes
}

fn merged(world: &World, cfg: &ScenarioConfig) -> bool {
    let s = world.ego.state;
    (s.y - world.lanes.target_center).abs() <= cfg.limits.lateral_tol && s.theta.abs() <= cfg.limits.theta_tol
}

fn collided(world: &World) -> bool {
    world.min_separation() <= 0.0
}

fn past_merge_limit(world: &World) -> bool {
    world.ego.state.x > world.lanes.merge_length && world.lanes.lane_of(world.ego.state.y) == Lane::Origin
}

/// Window of executed ego inputs and the truth it produced, kept for the next
/// belief update.
struct Window {
    start: World,
    ego_inputs: Vec<ControlInput>,
    leftward: Vec<bool>,
    observed: Vec<Vec<f64>>,
}

fn update_beliefs(beliefs: &mut BeliefTable, window: &Window, cfg: &ScenarioConfig) {
    let predict = |beta| {
        replay_sv_response(&window.start, &window.ego_inputs, &window.leftward, beta, &cfg.controllers, cfg.sim.dt)
    };
    let assert = predict(cfg.controllers.beta_assert);
    let yield_ = predict(cfg.controllers.beta_yield);
    for (id, b) in beliefs.iter_mut() {
        let Some(k) = window.start.sv_index(*id) else { continue };
        *b = update_belief(b, &window.observed[k], [&assert[k], &yield_[k]], cfg.belief.sigma_a);
    }
}

pub fn run_episode(cfg: &ScenarioConfig) -> Result<EpisodeTrace> {
    run_episode_with(cfg, cfg.planner)
}

pub fn run_episode_with(cfg: &ScenarioConfig, planner: PlannerKind) -> Result<EpisodeTrace> {
    cfg.validate()?;
    let modes = episode_modes(cfg);
    let mut world = initial_world(cfg)?;
    let mut beliefs = cfg.initial_beliefs(cfg.belief.initial_assert);
    let dt = cfg.sim.dt;
    let spd = cfg.sim.steps_per_decision();
    let n = world.svs.len() + 1;

    let mut steps = vec![StepRecord {
        cycle: 0,
        t: 0.0,
        states: world.vehicles().map(|v| v.state).collect(),
        inputs: vec![ControlInput::default(); n],
    }];
    let mut cycles = Vec::new();
    let mut root = EgoDecision::default();
    let mut window: Option<Window> = None;
    let mut step = 0usize;

    let finish = |steps, cycles, outcome, time_to_merge| EpisodeTrace {
        seed: cfg.seed,
        planner,
        vehicle_ids: cfg.world().vehicles().map(|v| v.id).collect(),
        steps,
        cycles,
        outcome,
        time_to_merge,
    };

    if collided(&world) {
        return Ok(finish(steps, cycles, Outcome::Collision, None));
    }

    for cycle in 0..cfg.limits.max_cycles {
        if let Some(w) = window.take() {
            update_beliefs(&mut beliefs, &w, cfg);
        }

        let plan = plan_cycle(&world, &beliefs, root, cfg, planner)?;
        let (row, col) = (plan.choice.row, plan.choice.col);
        let sequence = plan.sequence().clone();
        let decision = sequence.first();
        cycles.push(CycleRecord {
            cycle,
            t: step as f64 * dt,
            beliefs: beliefs.clone(),
            sequence: sequence.clone(),
            row,
            col,
            kind: plan.choice.kind,
            partner: plan.game.partners[col],
            rows: plan.game.rows.len(),
            columns: plan.game.columns.len(),
            nash_count: crate::solver::find_pure_nash(&plan.game.costs).len(),
            nash_verified: plan.game.costs.is_nash(row, col),
            sv_cost: plan.game.costs.sv(row, col),
            ev_cost: plan.game.costs.ev(row, col),
        });
        root = decision;

        let ctx = RolloutContext::new(&world, &cfg.sim, &cfg.controllers);
        let mut w = Window {
            start: world.clone(),
            ego_inputs: Vec::with_capacity(spd),
            leftward: Vec::with_capacity(spd),
            observed: vec![Vec::with_capacity(spd); n - 1],
        };

        for _ in 0..spd {
            let current: Vec<VehicleState> = world.vehicles().map(|v| v.state).collect();
            let ego_u = ctx.ego_input(&current, decision);
            let sv_a: Vec<f64> = (0..n - 1)
                .map(|k| truth_sv_accel(&world, k, modes[k], &cfg.truth, &cfg.controllers.idm))
                .collect();

            world.ego.state = step_bicycle(world.ego.state, ego_u, dt, &world.ego.params);
            let mut inputs = vec![ego_u];
            for (k, sv) in world.svs.iter_mut().enumerate() {
                let u = ControlInput::new(sv_a[k], 0.0);
                sv.state = step_bicycle(sv.state, u, dt, &sv.params);
                w.observed[k].push(sv_a[k]);
                inputs.push(u);
            }
            w.ego_inputs.push(ego_u);
            w.leftward.push(decision.lateral.is_leftward());
            step += 1;
            let t = step as f64 * dt;
            steps.push(StepRecord {
                cycle,
                t,
                states: world.vehicles().map(|v| v.state).collect(),
                inputs,
            });

            if collided(&world) {
                return Ok(finish(steps, cycles, Outcome::Collision, None));
            }
            if merged(&world, cfg) {
                return Ok(finish(steps, cycles, Outcome::Success, Some(t)));
            }
            if past_merge_limit(&world) {
                return Ok(finish(steps, cycles, Outcome::Timeout, None));
            }
        }
        window = Some(w);
    }
    Ok(finish(steps, cycles, Outcome::Timeout, None))
}
