use std::collections::{HashMap, HashSet};

use crate::geom::cloud::bounds_of;
use crate::geom::TriangleMesh;
use crate::nuisance::{NuisanceError, NuisanceKind};
use crate::{Real, Vec3};

const COUNT_TOLERANCE: f64 = 0.10;
const SEARCH_STEPS: usize = 80;

/// Cluster id per vertex (ids in order of first member) and the cluster count.
fn cluster<T: Real>(vertices: &[Vec3<T>], origin: Vec3<T>, cell: f64) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let labels = vertices
        .iter()
        .map(|&v| {
            let d = (v - origin).to_f64();
            let key = [
                (d[0] / cell).floor() as i64,
                (d[1] / cell).floor() as i64,
                (d[2] / cell).floor() as i64,
            ];
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();
    (labels, ids.len())
}

/// Grid vertex-clustering decimation to about `fraction·N` vertices.
///
/// The cell size is found by bisection on its logarithm so that the cluster
/// count lands within ±10% of the target. Each cluster is represented by its
/// member closest to the cluster mean; triangles that collapse are dropped and
/// duplicates removed. Vertex normals are recomputed from the new winding.
pub fn decimate_mesh<T: Real>(mesh: &TriangleMesh<T>, fraction: f64) -> Result<TriangleMesh<T>, NuisanceError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(NuisanceError::LevelOutOfRange {
            kind: NuisanceKind::MeshDecimation,
            level: fraction,
            range: "(0, 1]",
        });
    }
    if fraction == 1.0 {
        return Ok(mesh.clone());
    }
    let n = mesh.vertex_count();
    let target = fraction * n as f64;
    if target.round() < 4.0 {
        return Err(NuisanceError::TooFewVertices(target.round() as usize));
    }
    let vertices = mesh.vertices();
    let (lo, hi) = bounds_of(vertices).expect("non-empty mesh");
    let extent = (hi - lo).max_abs().as_f64();
    if extent <= 0.0 {
        return Err(NuisanceError::TooFewVertices(1));
    }

    let within = |count: usize| (count as f64 - target).abs() <= COUNT_TOLERANCE * target;
    // Coarser cells give fewer clusters; bracket the target in log space.
    let (mut log_fine, mut log_coarse) = ((extent * 1e-9).ln(), (extent * 4.0).ln());
    let mut best: Option<(f64, Vec<usize>, usize)> = None;
    for _ in 0..SEARCH_STEPS {
        let mid = 0.5 * (log_fine + log_coarse);
        let (labels, count) = cluster(vertices, lo, mid.exp());
        let err = (count as f64 - target).abs();
        if best.as_ref().is_none_or(|b| err < (b.2 as f64 - target).abs()) {
            best = Some((mid, labels, count));
        }
        if within(count) {
            break;
        }
        if (count as f64) > target {
            log_fine = mid;
        } else {
            log_coarse = mid;
        }
    }
    let (_, labels, count) = best.expect("at least one step");
    if count < 4 {
        return Err(NuisanceError::TooFewVertices(count));
    }

    let mut sums = vec![(Vec3::zeros(), 0usize); count];
    for (v, &c) in vertices.iter().zip(&labels) {
        sums[c].0 += *v;
        sums[c].1 += 1;
    }
    let means: Vec<Vec3<T>> = sums
        .iter()
        .map(|&(s, k)| s * (T::one() / T::from_usize(k).expect("count fits scalar")))
        .collect();
    let mut rep: Vec<Option<usize>> = vec![None; count];
    for (i, (&v, &c)) in vertices.iter().zip(&labels).enumerate() {
        let closer = match rep[c] {
            None => true,
            Some(j) => v.distance_squared(means[c]) < vertices[j].distance_squared(means[c]),
        };
        if closer {
            rep[c] = Some(i);
        }
    }
    let rep: Vec<usize> = rep.into_iter().map(|r| r.expect("every cluster has a member")).collect();

    let mut seen = HashSet::new();
    let mut triangles = Vec::new();
    for t in mesh.triangles() {
        let m = [labels[t[0]], labels[t[1]], labels[t[2]]];
        if m[0] == m[1] || m[1] == m[2] || m[0] == m[2] {
            continue;
        }
        let mut key = m;
        key.sort_unstable();
        if seen.insert(key) {
            triangles.push(m);
        }
    }
    let new_vertices: Vec<Vec3<T>> = rep.iter().map(|&i| vertices[i]).collect();
    let mut out = match mesh.normals() {
        Some(nrm) => TriangleMesh::with_normals(new_vertices, triangles, rep.iter().map(|&i| nrm[i]).collect()),
        None => TriangleMesh::new(new_vertices, triangles),
    }?;
    out.recompute_normals();
    Ok(out)
}
