//! Ground-truth behaviour of surrounding vehicles in the closed loop.

use crate::closed_loop::config::{TruthMode, TruthParams};
use crate::control::{idm_accel, IdmLeader, IdmParams};
use crate::dynamics::ControlInput;
use crate::world::World;

/// Acceleration of `world.svs[k]` under its true driving style.
///
/// Plain IDM against the physical same-lane leader. Once the ego is ahead of the
/// vehicle and laterally within the mode's reaction distance of its lane center, the
/// ego, projected onto that lane at its current longitudinal speed, also counts as a
/// leader; the nearer of the two is followed.
pub fn truth_sv_accel(world: &World, k: usize, mode: TruthMode, truth: &TruthParams, template: &IdmParams) -> f64 {
    let sv = &world.svs[k];
    let me = sv.state;
    let idm = IdmParams {
        v0: sv.desired_speed,
        lane_width: world.lanes.lane_width,
        ..*template
    };
    let half = |len: f64| 0.5 * (len + sv.params.length);

    let mut leader: Option<IdmLeader> = None;
    if let Some(j) = world.leader_on(sv.lane, me.x, Some(k)) {
        let l = &world.svs[j];
        leader = Some(IdmLeader {
            gap: l.state.x - me.x - half(l.params.length),
            v: l.state.longitudinal_speed(),
        });
    }

    let ego = &world.ego;
    let threshold = match mode {
        TruthMode::Polite => truth.polite_reaction,
        TruthMode::Selfish => truth.selfish_reaction,
    } * world.lanes.lane_width;
    let lateral = (ego.state.y - world.lanes.center(sv.lane)).abs();
    if ego.state.x > me.x && lateral < threshold {
        let gap = ego.state.x - me.x - half(ego.params.length);
        if leader.is_none_or(|l| gap < l.gap) {
            leader = Some(IdmLeader {
                gap,
                v: ego.state.longitudinal_speed(),
            });
        }
    }

    let a = idm_accel(me.v, leader, &idm);
    sv.params.saturate(ControlInput::new(a, 0.0)).a
}
