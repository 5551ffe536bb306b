use crate::eigen::min_eigvec_with_gap;
use crate::geom::{GeomError, KdTree, PointCloud};
use crate::lrf::tie_break_sign;
use crate::{Mat3, Real, Vec3};

pub const DEFAULT_NORMAL_K: usize = 10;

/// Two smallest covariance eigenvalues closer than this (relative) leave the normal undefined.
const NORMAL_DEGENERACY_GAP: f64 = 1e-12;

/// Result of [`estimate_normals`].
#[derive(Clone, Debug)]
pub struct NormalEstimate<T> {
    pub cloud: PointCloud<T>,
    /// Points whose neighborhood did not define a normal. They carry a
    /// deterministic placeholder normal and should not be trusted.
    pub degenerate: Vec<usize>,
}

fn knn_covariance<T: Real>(points: &[Vec3<T>], ids: &[usize]) -> Mat3<T> {
    let n = T::from_usize(ids.len()).expect("count fits scalar");
    let mean = ids.iter().map(|&i| points[i]).sum::<Vec3<T>>() * (T::one() / n);
    let mut c = Mat3::zeros();
    for &i in ids {
        let d = points[i] - mean;
        c += d.outer(d);
    }
    c.scale(T::one() / n)
}

fn orient<T: Real>(
    normal: Vec3<T>,
    at: Vec3<T>,
    neighbors: &[usize],
    points: &[Vec3<T>],
    viewpoint: Option<Vec3<T>>,
) -> Vec3<T> {
    match viewpoint {
        Some(vp) => {
            if normal.dot(vp - at) < T::zero() {
                -normal
            } else {
                normal
            }
        }
        None => {
            // Away from the local centroid.
            let spread: Vec3<T> = neighbors.iter().map(|&i| points[i] - at).sum();
            let s = normal.dot(spread);
            if s > T::zero() {
                -normal
            } else if s < T::zero() {
                normal
            } else {
                tie_break_sign(normal)
            }
        }
    }
}

/// Normal of `cloud.points()[index]` from its `k` nearest points (itself included).
pub fn estimate_normal_at<T: Real>(
    cloud: &PointCloud<T>,
    tree: &KdTree<T>,
    index: usize,
    k: usize,
    viewpoint: Option<Vec3<T>>,
) -> Result<Vec3<T>, GeomError> {
    let p = cloud.points()[index];
    let ids: Vec<usize> = tree.knn(p, k).into_iter().map(|(i, _)| i).collect();
    let c = knn_covariance(cloud.points(), &ids);
    let axis = min_eigvec_with_gap(&c, NORMAL_DEGENERACY_GAP)
        .map_err(|_| GeomError::DegenerateNeighborhood { index })?;
    Ok(orient(axis.vector, p, &ids, cloud.points(), viewpoint))
}

/// Per-point normals from k-nearest-neighbor covariance.
///
/// With a viewpoint, normals face it. Without one, each normal points away
/// from the centroid of its neighborhood.
pub fn estimate_normals<T: Real>(
    cloud: &PointCloud<T>,
    k: usize,
    viewpoint: Option<Vec3<T>>,
) -> Result<NormalEstimate<T>, GeomError> {
    if k < 3 {
        return Err(GeomError::TooFewElements { needed: 3, have: k });
    }
    if cloud.len() < k {
        return Err(GeomError::TooFewElements {
            needed: k,
            have: cloud.len(),
        });
    }
    let tree = KdTree::new(cloud.points().to_vec());
    let mut normals = Vec::with_capacity(cloud.len());
    let mut degenerate = Vec::new();
    for i in 0..cloud.len() {
        match estimate_normal_at(cloud, &tree, i, k, viewpoint) {
            Ok(n) => normals.push(n),
            Err(_) => {
                degenerate.push(i);
                let p = cloud.points()[i];
                let ids: Vec<usize> = tree.knn(p, k).into_iter().map(|(j, _)| j).collect();
                let c = knn_covariance(cloud.points(), &ids);
                let fallback = min_eigvec_with_gap(&c, 0.0)
                    .map(|e| e.vector)
                    .unwrap_or_else(|_| Vec3::unit_z());
                normals.push(orient(fallback, p, &ids, cloud.points(), viewpoint));
            }
        }
    }
    let mut out = cloud.clone();
    out.set_normals(normals)?;
    Ok(NormalEstimate {
        cloud: out,
        degenerate,
    })
}
