//! Two-lane road geometry, the vehicle roster and gap resolution.

use serde::{Deserialize, Serialize};

use crate::actions::GapChoice;
use crate::dynamics::{VehicleParams, VehicleState};
use crate::footprint::FootprintRect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    /// The ego's starting lane, which ends at the merge limit.
    Origin,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaneGeometry {
    pub lane_width: f64,
    pub origin_center: f64,
    pub target_center: f64,
    /// Desired speed on each lane (m/s).
    pub origin_speed: f64,
    pub target_speed: f64,
    /// Longitudinal position where the origin lane ends (m).
    pub merge_length: f64,
}

impl Default for LaneGeometry {
    fn default() -> Self {
        Self {
            lane_width: 3.5,
            origin_center: 0.0,
            target_center: 3.5,
            origin_speed: 10.0,
            target_speed: 10.0,
            merge_length: 100.0,
        }
    }
}

impl LaneGeometry {
    pub fn center(&self, lane: Lane) -> f64 {
        match lane {
            Lane::Origin => self.origin_center,
            Lane::Target => self.target_center,
        }
    }

    pub fn speed(&self, lane: Lane) -> f64 {
        match lane {
            Lane::Origin => self.origin_speed,
            Lane::Target => self.target_speed,
        }
    }

    /// The lane boundary between the two lanes, used for probing.
    pub fn probe_line(&self) -> f64 {
        0.5 * (self.origin_center + self.target_center)
    }

    /// Lane whose half-width band contains `y`; the boundary itself belongs to the
    /// origin lane.
    pub fn lane_of(&self, y: f64) -> Lane {
        if (y - self.target_center).abs() < (y - self.origin_center).abs() {
            Lane::Target
        } else {
            Lane::Origin
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: usize,
    pub state: VehicleState,
    pub params: VehicleParams,
    /// Lane the vehicle drives in. Surrounding vehicles never leave it.
    pub lane: Lane,
    pub desired_speed: f64,
}

impl Vehicle {
    pub fn footprint(&self) -> FootprintRect {
        FootprintRect::of(&self.state, &self.params)
    }
}

/// Vehicles bounding one gap, as indices into [`World::svs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GapBounds {
    pub front: Option<usize>,
    pub rear: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapLayout {
    pub gap0: GapBounds,
    pub gap1: GapBounds,
    /// Absent when no target-lane vehicle is behind the ego.
    pub gap2: Option<GapBounds>,
}

impl GapLayout {
    pub fn get(&self, gap: GapChoice) -> Option<GapBounds> {
        match gap {
            GapChoice::Gap0 => Some(self.gap0),
            GapChoice::Gap1 => Some(self.gap1),
            GapChoice::Gap2 => self.gap2,
        }
    }

    pub fn available(&self) -> Vec<GapChoice> {
        GapChoice::ALL
            .iter()
            .copied()
            .filter(|&g| self.get(g).is_some())
            .collect()
    }

    /// The vehicle that must open the gap, if any.
    pub fn partner(&self, gap: GapChoice) -> Option<usize> {
        match gap {
            GapChoice::Gap0 => None,
            g => self.get(g).and_then(|b| b.rear),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub lanes: LaneGeometry,
    pub ego: Vehicle,
    pub svs: Vec<Vehicle>,
}

impl World {
    /// Nearest vehicle strictly ahead of `x` on `lane`, excluding `skip`.
    pub fn leader_on(&self, lane: Lane, x: f64, skip: Option<usize>) -> Option<usize> {
        self.svs
            .iter()
            .enumerate()
            .filter(|(i, sv)| Some(*i) != skip && sv.lane == lane && sv.state.x > x)
            .min_by(|a, b| a.1.state.x.total_cmp(&b.1.state.x))
            .map(|(i, _)| i)
    }

    /// Gaps labelled relative to the ego's current position.
    pub fn gap_layout(&self) -> GapLayout {
        let ego_x = self.ego.state.x;
        let mut target: Vec<usize> = (0..self.svs.len())
            .filter(|&i| self.svs[i].lane == Lane::Target)
            .collect();
        // front to back
        target.sort_by(|&a, &b| self.svs[b].state.x.total_cmp(&self.svs[a].state.x).then(a.cmp(&b)));

        let split = target.iter().take_while(|&&i| self.svs[i].state.x > ego_x).count();
        let ahead = split.checked_sub(1).map(|k| target[k]);
        let behind: Vec<usize> = target[split..].to_vec();

        GapLayout {
            gap0: GapBounds {
                front: self.leader_on(Lane::Origin, ego_x, None),
                rear: None,
            },
            gap1: GapBounds {
                front: ahead,
                rear: behind.first().copied(),
            },
            gap2: behind.first().map(|&f| GapBounds {
                front: Some(f),
                rear: behind.get(1).copied(),
            }),
        }
    }

    /// All vehicles with the ego first, matching trajectory indexing.
    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        std::iter::once(&self.ego).chain(self.svs.iter())
    }

    /// Minimum footprint distance between any two vehicles.
    pub fn min_separation(&self) -> f64 {
        let all: Vec<&Vehicle> = self.vehicles().collect();
        let mut best = f64::INFINITY;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                best = best.min(crate::footprint::rect_distance(&all[i].footprint(), &all[j].footprint()));
            }
        }
        best
    }

    pub fn sv_index(&self, id: usize) -> Option<usize> {
        self.svs.iter().position(|v| v.id == id)
    }
}
