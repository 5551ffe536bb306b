use crate::geom::RigidTransform;
use crate::lrf::AxisError;
use crate::{Mat3, Real, Vec3};

const PARALLEL_TOLERANCE: f64 = 1e-9;

/// A right-handed orthonormal frame attached to a keypoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame<T> {
    pub origin: Vec3<T>,
    pub x: Vec3<T>,
    pub y: Vec3<T>,
    pub z: Vec3<T>,
}

impl<T: Real> Frame<T> {
    /// Rotation whose columns are the axes `[x y z]`.
    pub fn rotation(&self) -> Mat3<T> {
        Mat3::from_cols(self.x, self.y, self.z)
    }

    /// Maps the frame by a rigid motion.
    pub fn transformed(&self, t: &RigidTransform<T>) -> Self {
        Self {
            origin: t.apply_point(self.origin),
            x: t.apply_vector(self.x),
            y: t.apply_vector(self.y),
            z: t.apply_vector(self.z),
        }
    }

    /// Orthonormality, `y = z × x` and unit determinant, each within `tol`.
    pub fn is_valid(&self, tol: T) -> bool {
        let (x, y, z) = (self.x, self.y, self.z);
        let unit = |v: Vec3<T>| (v.norm() - T::one()).abs() <= tol;
        unit(x)
            && unit(y)
            && unit(z)
            && x.dot(y).abs() <= tol
            && y.dot(z).abs() <= tol
            && x.dot(z).abs() <= tol
            && (z.cross(x) - y).max_abs() <= tol
            && (self.rotation().determinant() - T::one()).abs() <= tol
    }
}

/// Gram-Schmidt `x_raw` against `z` and complete with `y = z × x`.
pub fn assemble_frame<T: Real>(keypoint: Vec3<T>, z: Vec3<T>, x_raw: Vec3<T>) -> Result<Frame<T>, AxisError> {
    let c = x_raw.dot(z);
    let len = x_raw.norm();
    if !(len > T::zero()) || (c / len).abs() >= T::one() - T::lit(PARALLEL_TOLERANCE) {
        return Err(AxisError::ParallelAxes);
    }
    let x = (x_raw - z * c).try_normalize().ok_or(AxisError::ParallelAxes)?;
    let y = z.cross(x);
    Ok(Frame {
        origin: keypoint,
        x,
        y,
        z,
    })
}
