use crate::lrf::orient_by;
use crate::{Real, Vec3};

/// Points `v` towards the side of the neighbor centroid: the sign of `v · Σ(p_i - p)`.
pub fn disambiguate_points_mean<T: Real>(v: Vec3<T>, keypoint: Vec3<T>, neighbors: &[Vec3<T>]) -> Vec3<T> {
    let s: Vec3<T> = neighbors.iter().map(|&p| p - keypoint).sum();
    orient_by(v, v.dot(s))
}

/// Points `v` towards the mean neighbor normal: the sign of `Σ v · n_i`.
pub fn disambiguate_normal_mean<T: Real>(v: Vec3<T>, neighbor_normals: &[Vec3<T>]) -> Vec3<T> {
    let s: T = neighbor_normals.iter().map(|&n| v.dot(n)).sum();
    orient_by(v, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn points_mean_examples() {
        let e3 = v(0.0, 0.0, 1.0);
        let o = v(0.0, 0.0, 0.0);
        assert_eq!(disambiguate_points_mean(e3, o, &[v(0.0, 0.0, 5.0)]), e3);
        assert_eq!(disambiguate_points_mean(e3, o, &[v(0.0, 0.0, -5.0)]), -e3);
        // Sum (2, 0, 0) is orthogonal to v.
        let w = v(0.0, -0.6, 0.8);
        let out = disambiguate_points_mean(w, o, &[v(1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)]);
        assert_eq!(out, v(0.0, 0.6, -0.8));
    }

    #[test]
    fn normal_mean_examples() {
        let e3 = v(0.0, 0.0, 1.0);
        assert_eq!(disambiguate_normal_mean(e3, &[e3, e3]), e3);
        assert_eq!(disambiguate_normal_mean(-e3, &[e3, e3]), e3);
        let tie = disambiguate_normal_mean(-e3, &[v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)]);
        assert_eq!(tie, e3);
    }

    proptest! {
        #[test]
        fn disambiguation_is_idempotent(
            a in prop::array::uniform3(-1.0f64..1.0),
            pts in prop::collection::vec(prop::array::uniform3(-3.0f64..3.0), 1..20),
        ) {
            let a = v(a[0], a[1], a[2]);
            prop_assume!(a.norm() > 1e-3);
            let a = a.normalize();
            let pts: Vec<_> = pts.iter().map(|p| v(p[0], p[1], p[2])).collect();
            let o = v(0.1, -0.2, 0.3);
            let once = disambiguate_points_mean(a, o, &pts);
            prop_assert_eq!(disambiguate_points_mean(once, o, &pts), once);
            let normals: Vec<_> = pts.iter().filter_map(|p| p.try_normalize()).collect();
            prop_assume!(!normals.is_empty());
            let once = disambiguate_normal_mean(a, &normals);
            prop_assert_eq!(disambiguate_normal_mean(once, &normals), once);
        }
    }
}
