use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lanemerge_bench::{merge_fixture, uniform_game};
use lanemerge_core::closed_loop::plan_cycle;
use lanemerge_core::closed_loop::planner::prune_rules;
use lanemerge_core::{
    build_action_tuples, enumerate_ego_sequences, find_pure_nash, select_action, stackelberg, EgoDecision, LateralDecision, Player,
    RolloutContext, SvAction,
};
use std::hint::black_box;

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    for cols in [50, 250, 1000] {
        let game = uniform_game(cols, 7);
        group.bench_with_input(BenchmarkId::new("find_pure_nash", cols), &game, |b, g| {
            b.iter(|| find_pure_nash(black_box(g)))
        });
        group.bench_with_input(BenchmarkId::new("stackelberg_ev", cols), &game, |b, g| {
            b.iter(|| stackelberg(black_box(g), Player::Ev))
        });
        group.bench_with_input(BenchmarkId::new("select_action", cols), &game, |b, g| {
            b.iter(|| select_action(black_box(g)))
        });
    }
    group.finish();
}

fn rollout(c: &mut Criterion) {
    let (cfg, world) = merge_fixture(10.0);
    let ctx = RolloutContext::new(&world, &cfg.sim, &cfg.controllers);
    let columns = enumerate_ego_sequences(&prune_rules(&cfg, &ctx, EgoDecision::default()), cfg.sim.decision_horizon);
    let tuples = build_action_tuples(&columns, &SvAction::ALL);
    let merge = tuples
        .iter()
        .find(|t| t.ego.steps.iter().any(|d| d.lateral == LateralDecision::LeftChange))
        .expect("a lane-change sequence exists");
    c.bench_function("simulate_tuple", |b| b.iter(|| ctx.simulate(black_box(merge))));
}

fn cycle(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan_cycle");
    group.sample_size(10);
    for speed in [5.0, 10.0] {
        let (cfg, world) = merge_fixture(speed);
        let beliefs = cfg.initial_beliefs(cfg.belief.initial_assert);
        group.bench_function(BenchmarkId::from_parameter(speed), |b| {
            b.iter(|| plan_cycle(&world, &beliefs, EgoDecision::default(), &cfg, cfg.planner).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solver, rollout, cycle);
criterion_main!(benches);
