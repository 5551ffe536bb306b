//! Closed-form eigenanalysis of symmetric 3x3 matrices.
//!
//! Eigenvalues come from the trigonometric solution of the characteristic
//! cubic. The eigenvector of the most isolated eigenvalue is the null
//! direction of `C - λI` (largest cross product of two rows), polished by
//! Rayleigh-quotient iteration; the other two follow from an exact 2x2 solve
//! on its orthogonal complement.

use thiserror::Error;

use crate::{Mat3, Real, Vec3};

/// Relative eigengap below which an extremal axis is reported as undefined.
pub const DEGENERATE_EIGENGAP: f64 = 1e-9;

const SYMMETRY_TOLERANCE: f64 = 1e-9;
const REFINEMENT_STEPS: usize = 2;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EigenError {
    #[error("degenerate spectrum: relative eigengap {eigengap:e}")]
    DegenerateSpectrum { eigengap: f64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
}

/// An extremal eigenpair with its normalized separation from the adjacent eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremalEigen<T> {
    /// Unit eigenvector; its sign is arbitrary.
    pub vector: Vec3<T>,
    pub value: T,
    /// `|λ_extremal - λ_adjacent| / Σ|λ_i|` (equal to the trace for PSD input).
    pub eigengap: T,
}

fn trigonometric_eigenvalues<T: Real>(c: &Mat3<T>) -> Option<[T; 3]> {
    let m = &c.m;
    let q = c.trace() / T::lit(3.0);
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let d0 = m[0][0] - q;
    let d1 = m[1][1] - q;
    let d2 = m[2][2] - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + T::lit(2.0) * p1;
    if p2 <= T::zero() {
        return None;
    }
    let p = (p2 / T::lit(6.0)).sqrt();
    let b = (*c - Mat3::identity().scale(q)).scale(T::one() / p);
    let r = (b.determinant() / T::lit(2.0)).max(-T::one()).min(T::one());
    let phi = r.acos() / T::lit(3.0);
    let two_thirds_pi = T::lit(2.0) * T::PI() / T::lit(3.0);
    let hi = q + T::lit(2.0) * p * phi.cos();
    let lo = q + T::lit(2.0) * p * (phi + two_thirds_pi).cos();
    let mid = T::lit(3.0) * q - hi - lo;
    let mut vals = [lo, mid, hi];
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(vals)
}

/// Unit vector spanning the null space of `c - λI`, if that space is one-dimensional.
fn null_direction<T: Real>(c: &Mat3<T>, lambda: T) -> Option<Vec3<T>> {
    let shifted = *c - Mat3::identity().scale(lambda);
    let r0 = shifted.row(0);
    let r1 = shifted.row(1);
    let r2 = shifted.row(2);
    let candidates = [r0.cross(r1), r0.cross(r2), r1.cross(r2)];
    let best = candidates
        .iter()
        .copied()
        .max_by(|a, b| {
            a.norm_squared()
                .partial_cmp(&b.norm_squared())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("three candidates");
    best.try_normalize()
}

/// Some unit vector orthogonal to the unit vector `v`.
fn orthogonal_unit<T: Real>(v: Vec3<T>) -> Vec3<T> {
    let ax = [v.x.abs(), v.y.abs(), v.z.abs()];
    let e = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        Vec3::unit_x()
    } else if ax[1] <= ax[2] {
        Vec3::unit_y()
    } else {
        Vec3::unit_z()
    };
    v.cross(e).normalize()
}

/// Full eigendecomposition of a symmetric matrix: eigenvalues ascending and
/// matching unit eigenvectors.
///
/// The trigonometric eigenvalues locate the most isolated eigenvalue, whose
/// eigenvector is well conditioned and is polished by Rayleigh iteration. The
/// remaining pair is solved exactly on the orthogonal plane, which keeps
/// (near-)double eigenvalues accurate to rounding.
pub fn symmetric_eigen<T: Real>(c: &Mat3<T>) -> ([T; 3], [Vec3<T>; 3]) {
    let c = symmetrized(c);
    let basis = [Vec3::unit_x(), Vec3::unit_y(), Vec3::unit_z()];
    let Some(vals) = trigonometric_eigenvalues(&c) else {
        let q = c.trace() / T::lit(3.0);
        return ([q, q, q], basis);
    };
    let iso = if vals[1] - vals[0] < vals[2] - vals[1] { 2 } else { 0 };
    let Some(mut v) = null_direction(&c, vals[iso]) else {
        return (vals, basis);
    };
    let mut lambda = v.dot(c * v);
    for _ in 0..REFINEMENT_STEPS {
        match null_direction(&c, lambda) {
            Some(next) => v = next,
            None => break,
        }
        let rayleigh = v.dot(c * v);
        if rayleigh == lambda {
            break;
        }
        lambda = rayleigh;
    }
    let u = orthogonal_unit(v);
    let w = v.cross(u);
    let a = u.dot(c * u);
    let b = u.dot(c * w);
    let d = w.dot(c * w);
    let mean = (a + d) * T::lit(0.5);
    let half = (a - d) * T::lit(0.5);
    let rad = half.hypot(b);
    let theta = b.atan2(half) * T::lit(0.5);
    let (s, co) = theta.sin_cos();
    let e_hi = u * co + w * s;
    let e_lo = w * co - u * s;
    let mut pairs = [(lambda, v), (mean - rad, e_lo), (mean + rad, e_hi)];
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    (
        [pairs[0].0, pairs[1].0, pairs[2].0],
        [pairs[0].1, pairs[1].1, pairs[2].1],
    )
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues<T: Real>(c: &Mat3<T>) -> [T; 3] {
    symmetric_eigen(c).0
}

fn check_symmetric<T: Real>(c: &Mat3<T>) -> Result<(), EigenError> {
    let scale = c.max_abs().max(T::one());
    let tol = T::lit(SYMMETRY_TOLERANCE) * scale;
    let m = &c.m;
    if !c.is_finite() {
        return Err(EigenError::NotSymmetric);
    }
    if (m[0][1] - m[1][0]).abs() > tol
        || (m[0][2] - m[2][0]).abs() > tol
        || (m[1][2] - m[2][1]).abs() > tol
    {
        return Err(EigenError::NotSymmetric);
    }
    Ok(())
}

fn symmetrized<T: Real>(c: &Mat3<T>) -> Mat3<T> {
    let half = T::lit(0.5);
    let mut s = *c;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let v = (c.m[i][j] + c.m[j][i]) * half;
            s.m[i][j] = v;
            s.m[j][i] = v;
        }
    }
    s
}

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

fn extremal<T: Real>(
    c: &Mat3<T>,
    which: Extremum,
    min_gap: f64,
) -> Result<ExtremalEigen<T>, EigenError> {
    check_symmetric(c)?;
    let (vals, vecs) = symmetric_eigen(c);
    let scale = vals[0].abs() + vals[1].abs() + vals[2].abs();
    let scale = scale.max(T::min_positive_value());
    let (k, adjacent) = match which {
        Extremum::Min => (0, vals[1]),
        Extremum::Max => (2, vals[1]),
    };
    let eigengap = (vals[k] - adjacent).abs() / scale;
    if !(eigengap >= T::lit(min_gap)) {
        return Err(EigenError::DegenerateSpectrum {
            eigengap: eigengap.as_f64(),
        });
    }
    Ok(ExtremalEigen {
        vector: vecs[k],
        value: vals[k],
        eigengap,
    })
}

/// Eigenvector of the smallest eigenvalue.
pub fn min_eigvec<T: Real>(c: &Mat3<T>) -> Result<ExtremalEigen<T>, EigenError> {
    extremal(c, Extremum::Min, DEGENERATE_EIGENGAP)
}

/// [`min_eigvec`] with a caller-chosen degeneracy threshold on the relative eigengap.
pub fn min_eigvec_with_gap<T: Real>(
    c: &Mat3<T>,
    min_gap: f64,
) -> Result<ExtremalEigen<T>, EigenError> {
    extremal(c, Extremum::Min, min_gap)
}

/// Eigenvector of the largest eigenvalue.
pub fn max_eigvec<T: Real>(c: &Mat3<T>) -> Result<ExtremalEigen<T>, EigenError> {
    extremal(c, Extremum::Max, DEGENERATE_EIGENGAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_parallel(v: Vec3<f64>, e: Vec3<f64>) {
        assert!((v.dot(e).abs() - 1.0).abs() < 1e-12, "{v:?} vs {e:?}");
    }

    #[test]
    fn diagonal_extremes() {
        let c = Mat3::diag(3.0, 2.0, 1.0);
        let lo = min_eigvec(&c).unwrap();
        let hi = max_eigvec(&c).unwrap();
        assert_parallel(lo.vector, Vec3::unit_z());
        assert_parallel(hi.vector, Vec3::unit_x());
        assert!((lo.value - 1.0).abs() < 1e-14);
        assert!((hi.value - 3.0).abs() < 1e-14);
        assert!((lo.eigengap - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_degenerate() {
        let c = Mat3::<f64>::identity();
        assert!(matches!(
            min_eigvec(&c),
            Err(EigenError::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            max_eigvec(&c),
            Err(EigenError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(min_eigvec(&Mat3::<f64>::zeros()).is_err());
    }

    #[test]
    fn double_smallest_eigenvalue_only_blocks_min_axis() {
        let c = Mat3::diag(5.0, 1.0, 1.0);
        assert!(min_eigvec(&c).is_err());
        assert_parallel(max_eigvec(&c).unwrap().vector, Vec3::unit_x());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut c = Mat3::diag(3.0, 2.0, 1.0);
        c.m[0][1] = 0.5;
        assert_eq!(min_eigvec(&c), Err(EigenError::NotSymmetric));
    }

    #[test]
    fn planar_scatter_has_normal_as_min_axis() {
        let c = Mat3::from_rows([[2.0, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let lo = min_eigvec(&c).unwrap();
        assert_parallel(lo.vector, Vec3::unit_z());
        assert!(lo.value.abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let c = Mat3::<f32>::diag(3.0, 2.0, 1.0);
        let lo = min_eigvec(&c).unwrap();
        assert!((lo.vector.z.abs() - 1.0).abs() < 1e-6);
    }
}
