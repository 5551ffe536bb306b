use serde::{Deserialize, Serialize};

use crate::geom::RigidTransform;
use crate::lrf::Frame;
use crate::{Real, Vec3};

/// A pose is correct when both errors are below this (degrees and mr).
pub const POSE_THRESHOLD: f64 = 5.0;

/// The rigid motion carrying `model` onto `scene`.
pub fn transform_from_frames<T: Real>(model: &Frame<T>, scene: &Frame<T>) -> RigidTransform<T> {
    let r = scene.rotation() * model.rotation().transpose();
    let t = scene.origin - r * model.origin;
    RigidTransform::orthonormalized(r, t, 1e-3).expect("product of two frame rotations is a rotation")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseErrorResult {
    pub rotation_deg: f64,
    /// Translation error in mr.
    pub translation_mr: f64,
    pub correct: bool,
}

/// Rotation and translation errors of `estimate` against `gt`, the latter
/// measured at the model center and expressed in mr.
pub fn pose_errors<T: Real>(
    estimate: &RigidTransform<T>,
    gt: &RigidTransform<T>,
    model_center: Vec3<T>,
    mr: T,
) -> PoseErrorResult {
    let (rg, re) = (*gt.rotation(), *estimate.rotation());
    let rel = (rg * re.transpose()).m.map(|r| r.map(|x| x.as_f64()));
    // atan2 of the sine and cosine of the relative angle agrees with the
    // clamped arccos of the trace but keeps full precision near 0 and 180.
    let c = (rel[0][0] + rel[1][1] + rel[2][2] - 1.0) / 2.0;
    let s = 0.5
        * ((rel[2][1] - rel[1][2]).powi(2) + (rel[0][2] - rel[2][0]).powi(2) + (rel[1][0] - rel[0][1]).powi(2)).sqrt();
    let rotation_deg = s.atan2(c.clamp(-1.0, 1.0)).to_degrees();
    let dt = gt.translation() - estimate.translation() + (rg * model_center - re * model_center);
    let translation_mr = (dt.norm() / mr).as_f64();
    PoseErrorResult {
        rotation_deg,
        translation_mr,
        correct: rotation_deg < POSE_THRESHOLD && translation_mr < POSE_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrf::assemble_frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_transforms_have_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = RigidTransform::<f64>::random(&mut rng, 10.0);
            let e = pose_errors(&t, &t, Vec3::new(1.0, -2.0, 0.5), 0.01);
            assert_eq!((e.rotation_deg, e.translation_mr), (0.0, 0.0));
            assert!(e.correct);
        }
    }

    #[test]
    fn ten_degree_rotation() {
        let e = RigidTransform::from_axis_angle(Vec3::unit_z(), 10f64.to_radians(), Vec3::zeros());
        let r = pose_errors(&e, &RigidTransform::identity(), Vec3::zeros(), 1.0);
        assert!((r.rotation_deg - 10.0).abs() < 1e-6);
        assert_eq!(r.translation_mr, 0.0);
        assert!(!r.correct);
    }

    fn quaternion(r: &crate::Mat3<f64>) -> [f64; 4] {
        // Shepperd's method on the largest diagonal combination.
        let m = &r.m;
        let t = m[0][0] + m[1][1] + m[2][2];
        let q = if t > m[0][0].max(m[1][1]).max(m[2][2]) {
            let s = (1.0 + t).sqrt() * 2.0;
            [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] >= m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
        };
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.map(|x| x / n)
    }

    #[test]
    fn rotation_error_matches_quaternion_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let a = RigidTransform::<f64>::random(&mut rng, 1.0);
            let b = RigidTransform::<f64>::random(&mut rng, 1.0);
            let (qa, qb) = (quaternion(a.rotation()), quaternion(b.rotation()));
            // conj(qa) * qb
            let w = qa.iter().zip(&qb).map(|(x, y)| x * y).sum::<f64>();
            let (av, bv) = (Vec3::new(qa[1], qa[2], qa[3]), Vec3::new(qb[1], qb[2], qb[3]));
            let v = bv * qa[0] - av * qb[0] - av.cross(bv);
            let expected = (2.0 * v.norm().atan2(w.abs())).to_degrees();
            let got = pose_errors(&b, &a, Vec3::zeros(), 1.0).rotation_deg;
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    #[test]
    fn frames_recover_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let z = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let x = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let Some(z) = z.try_normalize() else { continue };
            let o = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let Ok(fm) = assemble_frame(o, z, x) else { continue };
            let gt = RigidTransform::<f64>::random(&mut rng, 10.0);
            let fs = fm.transformed(&gt);
            let est = transform_from_frames(&fm, &fs);
            assert!((*est.rotation() - *gt.rotation()).max_abs() < 1e-9);
            assert!((est.translation() - gt.translation()).max_abs() < 1e-9);
            let same = transform_from_frames(&fm, &fm);
            assert!((*same.rotation() - crate::Mat3::identity()).max_abs() < 1e-12);
            assert!(same.translation().max_abs() < 1e-12);
        }
    }
}
