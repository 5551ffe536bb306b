use rand::Rng;
use rand_distr::StandardNormal;

use crate::geom::{GeomError, PointCloud, TriangleMesh};
use crate::{Mat3, Real, Vec3};

fn rigid_tolerance<T: Real>() -> f64 {
    (64.0 * T::epsilon().as_f64()).max(1e-9)
}

/// Largest absolute entry of `RᵀR - I`.
pub(crate) fn orthonormality_drift<T: Real>(r: &Mat3<T>) -> T {
    (r.transpose() * *r - Mat3::identity()).max_abs()
}

fn inverse_transpose<T: Real>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let det = m.determinant();
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    // cofactor matrix / det == inverse transpose
    let c0 = m.row(1).cross(m.row(2));
    let c1 = m.row(2).cross(m.row(0));
    let c2 = m.row(0).cross(m.row(1));
    Some(Mat3::from_rows([
        [c0.x, c0.y, c0.z],
        [c1.x, c1.y, c1.z],
        [c2.x, c2.y, c2.z],
    ])
    .scale(T::one() / det))
}

/// Closest rotation (Frobenius norm) to a near-orthogonal matrix with positive determinant.
///
/// Newton iteration on the polar factor: `X ← (X + X⁻ᵀ) / 2`.
pub(crate) fn nearest_rotation<T: Real>(m: &Mat3<T>) -> Option<Mat3<T>> {
    if m.determinant() <= T::zero() {
        return None;
    }
    let mut x = *m;
    for _ in 0..50 {
        let next = (x + inverse_transpose(&x)?).scale(T::lit(0.5));
        let delta = (next - x).max_abs();
        x = next;
        if delta <= T::epsilon() * T::lit(4.0) {
            break;
        }
    }
    Some(x)
}

/// A proper rigid motion `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform<T> {
    rotation: Mat3<T>,
    translation: Vec3<T>,
}

impl<T: Real> RigidTransform<T> {
    /// Validates `RᵀR = I` and `det R = +1` within the scalar's rigid tolerance.
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self, GeomError> {
        let tol = T::lit(rigid_tolerance::<T>());
        if !rotation.is_finite() || !translation.is_finite() {
            return Err(GeomError::NotARigidTransform("non-finite entries".into()));
        }
        let drift = orthonormality_drift(&rotation);
        if drift > tol {
            return Err(GeomError::NotARigidTransform(format!(
                "orthonormality drift {drift}"
            )));
        }
        let det = rotation.determinant();
        if (det - T::one()).abs() > tol {
            return Err(GeomError::NotARigidTransform(format!("determinant {det}")));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Re-projects `rotation` onto SO(3) when its drift is at most `max_drift`.
    pub fn orthonormalized(
        rotation: Mat3<T>,
        translation: Vec3<T>,
        max_drift: f64,
    ) -> Result<Self, GeomError> {
        let det = rotation.determinant();
        if !(det > T::zero()) {
            return Err(GeomError::NotARigidTransform(format!("determinant {det}")));
        }
        let drift = orthonormality_drift(&rotation);
        if !(drift.as_f64() <= max_drift) {
            return Err(GeomError::NotARigidTransform(format!(
                "orthonormality drift {drift} exceeds {max_drift}"
            )));
        }
        let r = nearest_rotation(&rotation)
            .ok_or_else(|| GeomError::NotARigidTransform("singular rotation block".into()))?;
        Self::new(r, translation)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally), then translation.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T, translation: Vec3<T>) -> Self {
        let k = axis.normalize();
        let (s, c) = angle.sin_cos();
        let kx = Mat3::from_rows([
            [T::zero(), -k.z, k.y],
            [k.z, T::zero(), -k.x],
            [-k.y, k.x, T::zero()],
        ]);
        let rotation = Mat3::identity() + kx.scale(s) + (kx * kx).scale(T::one() - c);
        Self {
            rotation,
            translation,
        }
    }

    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(w: T, x: T, y: T, z: T, translation: Vec3<T>) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        let two = T::lit(2.0);
        let one = T::one();
        let rotation = Mat3::from_rows([
            [
                one - two * (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                one - two * (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                one - two * (x * x + y * y),
            ],
        ]);
        Self {
            rotation,
            translation,
        }
    }

    /// Uniformly random rotation with translation uniform in `[-extent, extent]³`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, extent: f64) -> Self {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let t = Vec3::from_f64([
            rng.random_range(-1.0..=1.0) * extent,
            rng.random_range(-1.0..=1.0) * extent,
            rng.random_range(-1.0..=1.0) * extent,
        ]);
        Self::from_quaternion(T::lit(q[0]), T::lit(q[1]), T::lit(q[2]), T::lit(q[3]), t)
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == Mat3::identity() && self.translation == Vec3::zeros()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    #[inline]
    pub fn apply_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn apply_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.rotation * v
    }

    /// Row-major 4x4 homogeneous matrix.
    pub fn to_matrix4(&self) -> [[T; 4]; 4] {
        let r = &self.rotation.m;
        let t = self.translation;
        let (z, o) = (T::zero(), T::one());
        [
            [r[0][0], r[0][1], r[0][2], t.x],
            [r[1][0], r[1][1], r[1][2], t.y],
            [r[2][0], r[2][1], r[2][2], t.z],
            [z, z, z, o],
        ]
    }

    pub fn cast<U: Real>(&self) -> RigidTransform<U> {
        RigidTransform {
            rotation: self.rotation.cast(),
            translation: self.translation.cast(),
        }
    }
}

/// Geometry that can be moved by a rigid transform.
pub trait Transformable<T: Real>: Sized {
    fn transformed(&self, t: &RigidTransform<T>) -> Self;
}

fn rotate_normals<T: Real>(normals: &[Vec3<T>], t: &RigidTransform<T>) -> Vec<Vec3<T>> {
    normals.iter().map(|&n| t.apply_vector(n)).collect()
}

impl<T: Real> Transformable<T> for PointCloud<T> {
    fn transformed(&self, t: &RigidTransform<T>) -> Self {
        if t.is_identity() {
            return self.clone();
        }
        let points = self.points().iter().map(|&p| t.apply_point(p)).collect();
        match self.normals() {
            Some(n) => PointCloud::with_normals(points, rotate_normals(n, t))
                .expect("rotation preserves unit normals"),
            None => PointCloud::new(points),
        }
    }
}

impl<T: Real> Transformable<T> for TriangleMesh<T> {
    fn transformed(&self, t: &RigidTransform<T>) -> Self {
        if t.is_identity() {
            return self.clone();
        }
        let vertices = self.vertices().iter().map(|&p| t.apply_point(p)).collect();
        let mut mesh = TriangleMesh::new(vertices, self.triangles().to_vec())
            .expect("connectivity unchanged");
        if let Some(n) = self.normals() {
            mesh.set_normals(rotate_normals(n, t))
                .expect("rotation preserves unit normals");
        }
        mesh
    }
}

impl<T: Real> Transformable<T> for Vec3<T> {
    fn transformed(&self, t: &RigidTransform<T>) -> Self {
        t.apply_point(*self)
    }
}

/// Applies `t` to a cloud, mesh or point.
pub fn apply_transform<T: Real, G: Transformable<T>>(geometry: &G, t: &RigidTransform<T>) -> G {
    geometry.transformed(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_transforms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let t = RigidTransform::<f64>::random(&mut rng, 10.0);
            assert!(RigidTransform::new(*t.rotation(), t.translation()).is_ok());
        }
    }

    #[test]
    fn reflection_rejected() {
        let m = Mat3::diag(1.0, 1.0, -1.0);
        assert!(RigidTransform::new(m, Vec3::zeros()).is_err());
        assert!(RigidTransform::orthonormalized(m, Vec3::zeros(), 1e-3).is_err());
    }

    #[test]
    fn nearest_rotation_repairs_small_drift() {
        let t = RigidTransform::<f64>::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7, Vec3::zeros());
        let mut m = *t.rotation();
        m.m[0][1] += 1e-5;
        m.m[2][0] -= 1e-5;
        assert!(RigidTransform::new(m, Vec3::zeros()).is_err());
        let fixed = RigidTransform::orthonormalized(m, Vec3::zeros(), 1e-3).unwrap();
        assert!(orthonormality_drift(fixed.rotation()) < 1e-14);
        assert!((*fixed.rotation() - *t.rotation()).max_abs() < 2e-5);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let t = RigidTransform::<f64>::random(&mut rng, 50.0);
            let p = Vec3::new(1.5, -2.0, 7.25);
            let back = t.inverse().apply_point(t.apply_point(p));
            assert!((back - p).max_abs() < 1e-10);
        }
    }

    #[test]
    fn identity_is_bit_exact() {
        let cloud = PointCloud::new(vec![Vec3::new(-0.0, 1e-300, -7.5f64)]);
        let moved = apply_transform(&cloud, &RigidTransform::identity());
        assert_eq!(moved.points()[0].x.to_bits(), (-0.0f64).to_bits());
        assert_eq!(moved, cloud);
    }

    #[test]
    fn translation_preserves_distances_exactly() {
        let cloud = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 4.0, 0.0)]);
        let t = RigidTransform::from_translation(Vec3::new(2.0, 2.0, 2.0));
        let moved = cloud.transformed(&t);
        assert_eq!(moved.points()[0].distance(moved.points()[1]), 5.0);
    }

    #[test]
    fn random_rotation_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec3<f64>> = (0..50)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let cloud = PointCloud::new(pts);
        let t = RigidTransform::random(&mut rng, 1.0);
        let moved = cloud.transformed(&t);
        for i in 0..50 {
            for j in (i + 1)..50 {
                let a = cloud.points()[i].distance(cloud.points()[j]);
                let b = moved.points()[i].distance(moved.points()[j]);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
