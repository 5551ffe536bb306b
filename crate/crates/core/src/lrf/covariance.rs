use crate::geom::TriangleMesh;
use crate::lrf::AxisError;
use crate::{Mat3, Real, Vec3};

/// A weighted second-moment matrix and the total weight that went into it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceAccumulator<T> {
    pub matrix: Mat3<T>,
    pub total_weight: T,
}

#[inline]
fn add_outer<T: Real>(m: &mut Mat3<T>, d: Vec3<T>, w: T) {
    let wd = d * w;
    for r in 0..3 {
        for s in r..3 {
            m.m[r][s] += wd[r] * d[s];
        }
    }
}

#[inline]
fn mirror<T: Real>(m: &mut Mat3<T>) {
    m.m[1][0] = m.m[0][1];
    m.m[2][0] = m.m[0][2];
    m.m[2][1] = m.m[1][2];
}

fn check_weights<T: Real>(weights: &[T]) -> Result<T, AxisError> {
    let total: T = weights.iter().copied().sum();
    if weights.iter().all(|w| *w == T::zero()) {
        return Err(AxisError::AllZeroWeights);
    }
    Ok(total)
}

/// `(1/|N|) Σ w_i (p_i - c)(p_i - c)ᵀ`.
pub fn covariance_of_points<T: Real>(
    points: &[Vec3<T>],
    center: Vec3<T>,
    weights: &[T],
) -> Result<CovarianceAccumulator<T>, AxisError> {
    assert_eq!(points.len(), weights.len(), "one weight per point");
    if points.is_empty() {
        return Err(AxisError::EmptyRegion);
    }
    let total_weight = check_weights(weights)?;
    let mut m = Mat3::zeros();
    for (&p, &w) in points.iter().zip(weights) {
        add_outer(&mut m, p - center, w);
    }
    let n = T::from_usize(points.len()).expect("count fits scalar");
    for r in 0..3 {
        for s in r..3 {
            m.m[r][s] = m.m[r][s] / n;
        }
    }
    mirror(&mut m);
    Ok(CovarianceAccumulator {
        matrix: m,
        total_weight,
    })
}

/// Arithmetic mean of a non-empty point list.
pub fn barycenter<T: Real>(points: &[Vec3<T>]) -> Vec3<T> {
    assert!(!points.is_empty(), "barycenter of an empty set");
    let n = T::from_usize(points.len()).expect("count fits scalar");
    let s: Vec3<T> = points.iter().copied().sum();
    Vec3::new(s.x / n, s.y / n, s.z / n)
}

/// Area-normalized second moment of a triangle about `center`:
/// `(1/12) [(Σ d_m)(Σ d_n)ᵀ + Σ d_m d_mᵀ]` with `d_m = v_m - center`.
pub fn triangle_covariance<T: Real>(vertices: &[Vec3<T>; 3], center: Vec3<T>) -> Mat3<T> {
    let mut m = Mat3::zeros();
    accumulate_triangle(&mut m, vertices, center, T::one());
    mirror(&mut m);
    m
}

#[inline]
fn accumulate_triangle<T: Real>(m: &mut Mat3<T>, t: &[Vec3<T>; 3], center: Vec3<T>, w: T) {
    let d0 = t[0] - center;
    let d1 = t[1] - center;
    let d2 = t[2] - center;
    let s = d0 + d1 + d2;
    let k = w / T::lit(12.0);
    for r in 0..3 {
        for c in r..3 {
            m.m[r][c] += k * (s[r] * s[c] + d0[r] * d0[c] + d1[r] * d1[c] + d2[r] * d2[c]);
        }
    }
}

/// `Σ w_i C(s_i)` over triangle positions.
pub(crate) fn triangles_covariance<T: Real>(
    triangles: &[[Vec3<T>; 3]],
    center: Vec3<T>,
    weights: &[T],
) -> Result<CovarianceAccumulator<T>, AxisError> {
    assert_eq!(triangles.len(), weights.len(), "one weight per triangle");
    if triangles.is_empty() {
        return Err(AxisError::EmptyRegion);
    }
    let total_weight = check_weights(weights)?;
    let mut m = Mat3::zeros();
    for (t, &w) in triangles.iter().zip(weights) {
        accumulate_triangle(&mut m, t, center, w);
    }
    mirror(&mut m);
    Ok(CovarianceAccumulator {
        matrix: m,
        total_weight,
    })
}

/// `Σ w_i C(s_i)` over the triangles of a local mesh.
pub fn mesh_covariance<T: Real>(
    local_mesh: &TriangleMesh<T>,
    center: Vec3<T>,
    weights: &[T],
) -> Result<CovarianceAccumulator<T>, AxisError> {
    let tris: Vec<[Vec3<T>; 3]> = local_mesh.triangle_positions().collect();
    triangles_covariance(&tris, center, weights)
}

/// Orthogonal projection onto the plane through `keypoint` with unit normal `z`.
pub fn project_to_plane<T: Real>(points: &[Vec3<T>], keypoint: Vec3<T>, z: Vec3<T>) -> Vec<Vec3<T>> {
    points
        .iter()
        .map(|&p| p - z * (p - keypoint).dot(z))
        .collect()
}
