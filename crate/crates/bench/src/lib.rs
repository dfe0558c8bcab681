//! Benchmark fixtures shared by the criterion benches.

use lanemerge_core::closed_loop::episode::initial_world;
use lanemerge_core::closed_loop::ScenarioConfig;
use lanemerge_core::{CostMatrix, World};

/// A two-row game with costs drawn uniformly from `[0, 100)` by a small LCG, so the
/// fixture needs no rng dependency.
pub fn uniform_game(cols: usize, seed: u64) -> CostMatrix {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 100.0
    };
    let sv = (0..2 * cols).map(|_| next()).collect();
    let ev = (0..2 * cols).map(|_| next()).collect();
    CostMatrix::new(2, cols, sv, ev)
}

/// The default merge scenario at `speed` with its seeded initial world.
pub fn merge_fixture(speed: f64) -> (ScenarioConfig, World) {
    let cfg = ScenarioConfig::merge_scenario(speed);
    let world = initial_world(&cfg).expect("default scenario places its vehicles");
    (cfg, world)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_game_is_reproducible_and_in_range() {
        let a = uniform_game(20, 3);
        assert_eq!(a, uniform_game(20, 3));
        assert_ne!(a, uniform_game(20, 4));
        for i in 0..2 {
            for j in 0..20 {
                assert!((0.0..100.0).contains(&a.sv(i, j)) && (0.0..100.0).contains(&a.ev(i, j)));
            }
        }
    }

    #[test]
    fn merge_fixture_has_the_four_vehicle_roster() {
        let (_, world) = merge_fixture(10.0);
        assert_eq!(world.svs.len(), 4);
        assert!(world.min_separation() > 0.0);
    }
}
