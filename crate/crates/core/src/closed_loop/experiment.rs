//! Batch experiments: the open-loop equilibrium study and the closed-loop planner
//! comparison. Both are seeded per instance and run in parallel, so results do not
//! depend on thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{EgoDecision, SvAction};
use crate::closed_loop::config::{PlannerKind, ScenarioConfig};
use crate::closed_loop::episode::{initial_world, run_episode_with, Outcome};
use crate::closed_loop::planner::{analyze, build_cycle_game};
use crate::error::{Error, Result};
use crate::world::World;

/// Per-instance seed, decorrelated from neighbouring indices.
pub fn instance_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub position: f64,
    pub speed: f64,
}

/// Outcome of one open-loop instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub resamples: usize,
    pub nash_exists: bool,
    pub selected: (usize, usize),
    pub se_ev: (usize, usize),
    pub se_sv: (usize, usize),
    pub selected_yields: bool,
    pub se_ev_yields: bool,
    pub se_sv_yields: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub belief_assert: f64,
    pub instances: usize,
    pub resampled: usize,
    pub nash_found: f64,
    pub coincides_se_ev: f64,
    pub coincides_se_sv: f64,
    pub coincides_either: f64,
    pub yield_nash: f64,
    pub yield_se_ev: f64,
    pub yield_se_sv: f64,
}

fn perturbed_world(cfg: &ScenarioConfig, p: Perturbation, rng: &mut ChaCha8Rng) -> Result<(World, usize)> {
    let base = cfg.world();
    for resamples in 0..1000 {
        let mut w = base.clone();
        if p.position > 0.0 {
            w.ego.state.x += rng.gen_range(-p.position..=p.position);
        }
        if p.speed > 0.0 {
            w.ego.state.v = (w.ego.state.v + rng.gen_range(-p.speed..=p.speed)).max(0.0);
        }
        if w.min_separation() > 0.0 {
            return Ok((w, resamples));
        }
    }
    Err(Error::Config("perturbation keeps producing overlapping vehicles".into()))
}

pub fn run_instance(cfg: &ScenarioConfig, b_assert: f64, p: Perturbation, seed: u64) -> Result<InstanceResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (world, resamples) = perturbed_world(cfg, p, &mut rng)?;
    let beliefs = cfg.initial_beliefs(b_assert);
    let (game, _) = build_cycle_game(&world, &beliefs, EgoDecision::default(), cfg)?;
    let a = analyze(&game);
    let yields = |row: usize| game.rows[row] == SvAction::Yield;
    let sel = a.selection.equilibrium;
    Ok(InstanceResult {
        resamples,
        nash_exists: !a.nash.is_empty(),
        selected: sel.cell(),
        se_ev: a.se_ev.cell(),
        se_sv: a.se_sv.cell(),
        selected_yields: yields(sel.row),
        se_ev_yields: yields(a.se_ev.row),
        se_sv_yields: yields(a.se_sv.row),
    })
}

fn fraction(items: &[InstanceResult], f: impl Fn(&InstanceResult) -> bool) -> f64 {
    items.iter().filter(|r| f(r)).count() as f64 / items.len() as f64
}

/// Open-loop study for one belief setting: `n` perturbed starts, one game each.
pub fn run_monte_carlo(base: &ScenarioConfig, n: usize, b_assert: f64, p: Perturbation) -> Result<MonteCarloStats> {
    if n == 0 {
        return Err(Error::Config("monte carlo needs at least one instance".into()));
    }
    base.validate()?;
    let results: Vec<InstanceResult> = (0..n as u64)
        .into_par_iter()
        .map(|i| run_instance(base, b_assert, p, instance_seed(base.seed, i)))
        .collect::<Result<_>>()?;
    Ok(MonteCarloStats {
        belief_assert: b_assert,
        instances: n,
        resampled: results.iter().map(|r| r.resamples).sum(),
        nash_found: fraction(&results, |r| r.nash_exists),
        coincides_se_ev: fraction(&results, |r| r.nash_exists && r.selected == r.se_ev),
        coincides_se_sv: fraction(&results, |r| r.nash_exists && r.selected == r.se_sv),
        coincides_either: fraction(&results, |r| r.nash_exists && (r.selected == r.se_ev || r.selected == r.se_sv)),
        yield_nash: fraction(&results, |r| r.selected_yields),
        yield_se_ev: fraction(&results, |r| r.se_ev_yields),
        yield_se_sv: fraction(&results, |r| r.se_sv_yields),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub outcome: Outcome,
    pub time_to_merge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerStats {
    pub planner: PlannerKind,
    pub episodes: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    /// Mean over successful episodes.
    pub mean_time_to_merge: Option<f64>,
}

impl PlannerStats {
    pub fn from_summaries(planner: PlannerKind, runs: &[EpisodeSummary]) -> Self {
        let n = runs.len().max(1) as f64;
        let rate = |o| runs.iter().filter(|r| r.outcome == o).count() as f64 / n;
        let ttm: Vec<f64> = runs.iter().filter_map(|r| r.time_to_merge).collect();
        Self {
            planner,
            episodes: runs.len(),
            success_rate: rate(Outcome::Success),
            collision_rate: rate(Outcome::Collision),
            timeout_rate: rate(Outcome::Timeout),
            mean_time_to_merge: (!ttm.is_empty()).then(|| ttm.iter().sum::<f64>() / ttm.len() as f64),
        }
    }
}

/// Runs `n` closed-loop episodes with seeds derived from `base.seed`.
pub fn run_episodes(base: &ScenarioConfig, n: usize, planner: PlannerKind) -> Result<Vec<EpisodeSummary>> {
    base.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut cfg = base.clone();
            cfg.seed = instance_seed(base.seed, i);
            let trace = run_episode_with(&cfg, planner)?;
            Ok(EpisodeSummary {
                seed: cfg.seed,
                outcome: trace.outcome,
                time_to_merge: trace.time_to_merge,
            })
        })
        .collect()
}

pub fn compare_planners(base: &ScenarioConfig, n: usize, planners: &[PlannerKind]) -> Result<Vec<PlannerStats>> {
    planners
        .iter()
        .map(|&p| Ok(PlannerStats::from_summaries(p, &run_episodes(base, n, p)?)))
        .collect()
}

/// Everything the `montecarlo` command reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub n: usize,
    pub perturbation: Perturbation,
    pub open_loop: Vec<MonteCarloStats>,
    pub closed_loop: BTreeMap<String, PlannerStats>,
}

pub fn run_experiment(base: &ScenarioConfig, n: usize, planners: &[PlannerKind]) -> Result<ExperimentReport> {
    let p = Perturbation {
        position: base.experiment.position_perturbation,
        speed: base.experiment.speed_perturbation,
    };
    let open_loop = base
        .experiment
        .belief_settings
        .iter()
        .map(|&b| run_monte_carlo(base, n, b, p))
        .collect::<Result<Vec<_>>>()?;
    let closed_loop = compare_planners(base, n, planners)?
        .into_iter()
        .map(|s| (s.planner.name().to_string(), s))
        .collect();
    Ok(ExperimentReport {
        seed: base.seed,
        n,
        perturbation: p,
        open_loop,
        closed_loop,
    })
}

/// Initial world of episode `i` in a batch seeded from `base`, for replaying one run.
pub fn episode_world(base: &ScenarioConfig, i: u64) -> Result<World> {
    let mut cfg = base.clone();
    cfg.seed = instance_seed(base.seed, i);
    initial_world(&cfg)
}
