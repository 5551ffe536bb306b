use std::collections::HashMap;

use crate::geom::TriangleMesh;
use crate::{Real, Vec3};

/// Segments of the mesh edges that have exactly one incident triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdges<T> {
    segments: Vec<[Vec3<T>; 2]>,
}

impl<T: Real> BoundaryEdges<T> {
    pub fn new(mesh: &TriangleMesh<T>) -> Self {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in mesh.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut edges: Vec<(usize, usize)> = counts.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
        edges.sort_unstable();
        let v = mesh.vertices();
        Self {
            segments: edges.into_iter().map(|(a, b)| [v[a], v[b]]).collect(),
        }
    }

    pub fn segments(&self) -> &[[Vec3<T>; 2]] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.segments.is_empty()
    }

    /// Distance to the nearest boundary segment; `+inf` for a closed mesh.
    pub fn distance(&self, p: Vec3<T>) -> T {
        self.segments
            .iter()
            .map(|s| point_segment_distance(p, s[0], s[1]))
            .fold(T::infinity(), T::min)
    }
}

pub(crate) fn point_segment_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

/// Euclidean distance from `point` to the mesh boundary, `+inf` if there is none.
///
/// Rebuilds the boundary on every call; use [`BoundaryEdges`] for batches.
pub fn distance_to_boundary<T: Real>(mesh: &TriangleMesh<T>, point: Vec3<T>) -> T {
    BoundaryEdges::new(mesh).distance(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_square_grid() {
        let m = shapes::planar_grid::<f64>(11, 11, 0.1);
        let b = BoundaryEdges::new(&m);
        assert_eq!(b.segments().len(), 40);
        assert!((distance_to_boundary(&m, Vec3::new(0.5, 0.5, 0.0)) - 0.5).abs() < 1e-12);
        assert_eq!(distance_to_boundary(&m, Vec3::new(1.0, 0.3, 0.0)), 0.0);
        assert_eq!(distance_to_boundary(&m, m.vertices()[0]), 0.0);
    }

    #[test]
    fn closed_mesh_is_infinitely_far() {
        let m = shapes::icosphere::<f64>(2, 1.0);
        assert!(BoundaryEdges::new(&m).is_closed());
        assert_eq!(distance_to_boundary(&m, Vec3::zeros()), f64::INFINITY);
    }

    /// Independent oracle: densely sample each boundary segment and refine the
    /// closest sample by ternary search.
    fn sampled_distance(p: Vec3<f64>, segs: &[[Vec3<f64>; 2]]) -> f64 {
        let mut best = f64::INFINITY;
        for s in segs {
            let f = |t: f64| p.distance(s[0] + (s[1] - s[0]) * t);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if f(m1) < f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(f(0.5 * (lo + hi))).min(f(0.0)).min(f(1.0));
        }
        best
    }

    #[test]
    fn interior_points_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = shapes::planar_grid::<f64>(15, 9, 0.2);
        let b = BoundaryEdges::new(&m);
        for _ in 0..200 {
            let p = Vec3::new(rng.random_range(-0.5..3.5), rng.random_range(-0.5..2.0), rng.random_range(-0.3..0.3));
            let d = b.distance(p);
            assert!((d - sampled_distance(p, b.segments())).abs() < 1e-12, "{p:?}");
        }
    }
}
