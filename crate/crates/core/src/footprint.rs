//! Rectangular vehicle footprints and the separation distance between them.

use serde::{Deserialize, Serialize};

use crate::dynamics::{VehicleParams, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintRect {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub half_length: f64,
    pub half_width: f64,
}

type Point = [f64; 2];

impl FootprintRect {
    pub fn new(x: f64, y: f64, theta: f64, half_length: f64, half_width: f64) -> Self {
        debug_assert!(half_length > 0.0 && half_width > 0.0);
        Self {
            x,
            y,
            theta,
            half_length,
            half_width,
        }
    }

    /// Footprint centered on the vehicle's reference point.
    pub fn of(state: &VehicleState, params: &VehicleParams) -> Self {
        Self::new(
            state.x,
            state.y,
            state.theta,
            0.5 * params.length,
            0.5 * params.width,
        )
    }

    pub fn circumradius(&self) -> f64 {
        (self.half_length * self.half_length + self.half_width * self.half_width).sqrt()
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        self.corners_rotated(self.sin_cos())
    }

    fn sin_cos(&self) -> (f64, f64) {
        // lane-aligned vehicles are the common case
        if self.theta == 0.0 {
            (0.0, 1.0)
        } else {
            self.theta.sin_cos()
        }
    }

    fn corners_rotated(&self, (s, c): (f64, f64)) -> [Point; 4] {
        let (l, w) = (self.half_length, self.half_width);
        [(l, w), (-l, w), (-l, -w), (l, -w)].map(|(dx, dy)| {
            [self.x + c * dx - s * dy, self.y + s * dx + c * dy]
        })
    }

}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn project(corners: &[Point; 4], axis: Point) -> (f64, f64) {
    corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = dot(*p, axis);
        (lo.min(d), hi.max(d))
    })
}

fn point_segment_distance_sq(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(ap, ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [p[0] - a[0] - t * ab[0], p[1] - a[1] - t * ab[1]];
    dot(d, d)
}

/// A footprint with its corners and edge normals resolved, for repeated queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedRect {
    center: Point,
    radius: f64,
    corners: [Point; 4],
    axes: [Point; 2],
}

impl PlacedRect {
    pub fn new(r: &FootprintRect) -> Self {
        let (s, c) = r.sin_cos();
        Self {
            center: [r.x, r.y],
            radius: r.circumradius(),
            corners: r.corners_rotated((s, c)),
            axes: [[c, s], [-s, c]],
        }
    }

    /// Largest projection gap over the four edge normals; positive iff separated.
    /// Every projection gap is a lower bound on the Euclidean distance.
    fn axis_gap(&self, other: &PlacedRect) -> f64 {
        let mut gap = f64::NEG_INFINITY;
        for &axis in self.axes.iter().chain(other.axes.iter()) {
            let (alo, ahi) = project(&self.corners, axis);
            let (blo, bhi) = project(&other.corners, axis);
            gap = gap.max(blo - ahi).max(alo - bhi);
        }
        gap
    }

    pub fn distance(&self, other: &PlacedRect) -> f64 {
        self.distance_within(other, f64::INFINITY).unwrap_or(f64::INFINITY)
    }

    /// Distance to `other`, or `None` when it provably exceeds `cutoff`.
    pub fn distance_within(&self, other: &PlacedRect, cutoff: f64) -> Option<f64> {
        let (dx, dy) = (self.center[0] - other.center[0], self.center[1] - other.center[1]);
        let reach = cutoff + self.radius + other.radius;
        if dx * dx + dy * dy > reach * reach {
            return None;
        }
        let gap = self.axis_gap(other);
        if gap <= 0.0 {
            return Some(0.0);
        }
        if gap > cutoff {
            return None;
        }
        let mut best = f64::INFINITY;
        for (pts, edges) in [(&self.corners, &other.corners), (&other.corners, &self.corners)] {
            for p in pts.iter() {
                for i in 0..4 {
                    best = best.min(point_segment_distance_sq(*p, edges[i], edges[(i + 1) % 4]));
                }
            }
        }
        let best = best.sqrt();
        (best <= cutoff).then_some(best)
    }
}

/// Euclidean separation between two rectangles; zero when they touch or overlap.
///
/// Overlap is decided with the separating-axis test over the four edge normals. For
/// disjoint convex polygons the closest pair always involves a vertex of one and an
/// edge of the other, so the distance is the minimum over those 32 pairs.
pub fn rect_distance(a: &FootprintRect, b: &FootprintRect) -> f64 {
    PlacedRect::new(a).distance(&PlacedRect::new(b))
}

/// Cheap lower bound on [`rect_distance`] from the bounding circles.
pub fn distance_lower_bound(a: &FootprintRect, b: &FootprintRect) -> f64 {
    ((a.x - b.x).hypot(a.y - b.y) - a.circumradius() - b.circumradius()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    /// Dense boundary sampling: min distance between sampled perimeter points, zero if
    /// any sampled point of one lies inside the other.
    fn sampled_distance(a: &FootprintRect, b: &FootprintRect, n: usize) -> f64 {
        let sample = |r: &FootprintRect| -> Vec<Point> {
            let c = r.corners();
            (0..4)
                .flat_map(|e| {
                    let (p, q) = (c[e], c[(e + 1) % 4]);
                    (0..n).map(move |k| {
                        let t = k as f64 / n as f64;
                        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
                    })
                })
                .collect()
        };
        let inside = |r: &FootprintRect, p: Point| {
            let (s, c) = r.theta.sin_cos();
            let dx = p[0] - r.x;
            let dy = p[1] - r.y;
            (c * dx + s * dy).abs() <= r.half_length && (-s * dx + c * dy).abs() <= r.half_width
        };
        let pa = sample(a);
        let pb = sample(b);
        if pa.iter().any(|p| inside(b, *p)) || pb.iter().any(|p| inside(a, *p)) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for p in &pa {
            for q in &pb {
                best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        best
    }

    #[test]
    fn identical_rectangles_overlap() {
        let r = FootprintRect::new(1.0, 2.0, 0.3, 2.0, 1.0);
        assert_eq!(rect_distance(&r, &r), 0.0);
    }

    #[test]
    fn axis_aligned_gap() {
        let a = FootprintRect::new(0.0, 0.0, 0.0, 2.0, 1.0);
        let b = FootprintRect::new(10.0, 0.0, 0.0, 2.0, 1.0);
        assert!((rect_distance(&a, &b) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn touching_is_zero() {
        let a = FootprintRect::new(0.0, 0.0, 0.0, 2.0, 1.0);
        let b = FootprintRect::new(4.0, 0.0, 0.0, 2.0, 1.0);
        assert_eq!(rect_distance(&a, &b), 0.0);
    }

    #[test]
    fn rotated_matches_sampling_oracle() {
        let a = FootprintRect::new(0.0, 0.0, FRAC_PI_4, 2.0, 1.0);
        let b = FootprintRect::new(4.0, 3.5, 0.0, 2.0, 1.0);
        let exact = rect_distance(&a, &b);
        let oracle = sampled_distance(&a, &b, 2000);
        assert!(exact > 0.0);
        assert!((exact - oracle).abs() < 1e-3, "{exact} vs {oracle}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rect() -> impl Strategy<Value = FootprintRect> {
            (-20.0..20.0f64, -20.0..20.0f64, -3.1..3.1f64, 0.2..4.0f64, 0.2..2.0f64)
                .prop_map(|(x, y, t, l, w)| FootprintRect::new(x, y, t, l, w))
        }

        proptest! {
            #[test]
            fn symmetric(a in rect(), b in rect()) {
                prop_assert_eq!(rect_distance(&a, &b), rect_distance(&b, &a));
            }

            #[test]
            fn translation_invariant(a in rect(), b in rect(), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
                let shift = |r: FootprintRect| FootprintRect { x: r.x + dx, y: r.y + dy, ..r };
                let d0 = rect_distance(&a, &b);
                let d1 = rect_distance(&shift(a), &shift(b));
                prop_assert!((d0 - d1).abs() < 1e-9);
            }

            #[test]
            fn circle_bound_is_lower_bound(a in rect(), b in rect()) {
                prop_assert!(distance_lower_bound(&a, &b) <= rect_distance(&a, &b) + 1e-12);
            }

            #[test]
            fn agrees_with_sampling(a in rect(), b in rect()) {
                let exact = rect_distance(&a, &b);
                let oracle = sampled_distance(&a, &b, 200);
                // sampling overestimates separation by at most one sample spacing
                prop_assert!(oracle + 1e-9 >= exact - 0.05);
                prop_assert!(oracle <= exact + 0.1);
            }
        }
    }
}
