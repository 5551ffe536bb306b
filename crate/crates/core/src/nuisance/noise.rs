use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::geom::{estimate_normals, KdTree, PointCloud, TriangleMesh, DEFAULT_NORMAL_K};
use crate::nuisance::NuisanceError;
use crate::{Real, Vec3};

fn jitter<T: Real>(points: &mut [Vec3<T>], sigma: f64, seed: u64) {
    if sigma <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite non-negative sigma");
    for p in points.iter_mut() {
        for k in 0..3 {
            p[k] += T::lit(normal.sample(&mut rng));
        }
    }
}

/// Re-estimated normals, each flipped to agree with the matching reference normal.
/// Falls back to the reference normals when the cloud is too small to estimate.
fn reestimated_normals<T: Real>(points: &[Vec3<T>], reference: &[Vec3<T>]) -> Vec<Vec3<T>> {
    let cloud = PointCloud::new(points.to_vec());
    match estimate_normals(&cloud, DEFAULT_NORMAL_K, None) {
        Ok(est) => est
            .cloud
            .normals()
            .expect("estimated")
            .iter()
            .zip(reference)
            .map(|(&n, &r)| if n.dot(r) < T::zero() { -n } else { n })
            .collect(),
        Err(_) => reference.to_vec(),
    }
}

fn with_fresh_normals<T: Real>(points: Vec<Vec3<T>>, previous: Option<&[Vec3<T>]>) -> PointCloud<T> {
    match previous {
        Some(prev) => {
            let normals = reestimated_normals(&points, prev);
            PointCloud::with_normals(points, normals).expect("lengths match")
        }
        None => PointCloud::new(points),
    }
}

/// Adds i.i.d. `N(0, (sigma_mr·mr)²)` noise to every coordinate.
///
/// When the input carries normals they are re-estimated on the noisy points
/// and oriented to agree with the originals.
pub fn add_gaussian_noise<T: Real>(cloud: &PointCloud<T>, sigma_mr: f64, mr: T, seed: u64) -> PointCloud<T> {
    if sigma_mr <= 0.0 {
        return cloud.clone();
    }
    let mut points = cloud.points().to_vec();
    jitter(&mut points, sigma_mr * mr.as_f64(), seed);
    with_fresh_normals(points, cloud.normals())
}

/// Mesh counterpart of [`add_gaussian_noise`]: perturbs vertices, keeps
/// connectivity and recomputes winding normals.
pub fn add_gaussian_noise_mesh<T: Real>(mesh: &TriangleMesh<T>, sigma_mr: f64, mr: T, seed: u64) -> TriangleMesh<T> {
    if sigma_mr <= 0.0 {
        return mesh.clone();
    }
    let mut vertices = mesh.vertices().to_vec();
    jitter(&mut vertices, sigma_mr * mr.as_f64(), seed);
    let mut out = TriangleMesh::new(vertices, mesh.triangles().to_vec()).expect("same connectivity");
    out.recompute_normals();
    out
}

/// The sorted indices that [`add_shot_noise`] displaces for `n` points.
pub fn shot_noise_indices(n: usize, ratio: f64, seed: u64) -> Vec<usize> {
    let count = ((ratio * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = index::sample(&mut rng, n, count).into_vec();
    ids.sort_unstable();
    ids
}

fn check_ratio(ratio: f64) -> Result<(), NuisanceError> {
    if (0.0..=1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(NuisanceError::LevelOutOfRange {
            kind: crate::nuisance::NuisanceKind::ShotNoise,
            level: ratio,
            range: "[0, 1]",
        })
    }
}

/// Moves `round(ratio·N)` points, chosen uniformly without replacement, by
/// `amplitude` along their normals. Normals are then re-estimated.
pub fn add_shot_noise<T: Real>(
    cloud: &PointCloud<T>,
    ratio: f64,
    amplitude: T,
    seed: u64,
) -> Result<PointCloud<T>, NuisanceError> {
    check_ratio(ratio)?;
    let normals = cloud.normals().ok_or(NuisanceError::MissingNormals)?;
    let ids = shot_noise_indices(cloud.len(), ratio, seed);
    if ids.is_empty() {
        return Ok(cloud.clone());
    }
    let mut points = cloud.points().to_vec();
    for &i in &ids {
        points[i] += normals[i] * amplitude;
    }
    Ok(with_fresh_normals(points, Some(normals)))
}

/// Mesh counterpart of [`add_shot_noise`] using vertex normals.
pub fn add_shot_noise_mesh<T: Real>(
    mesh: &TriangleMesh<T>,
    ratio: f64,
    amplitude: T,
    seed: u64,
) -> Result<TriangleMesh<T>, NuisanceError> {
    check_ratio(ratio)?;
    let normals = mesh.normals().ok_or(NuisanceError::MissingNormals)?;
    let ids = shot_noise_indices(mesh.vertex_count(), ratio, seed);
    if ids.is_empty() {
        return Ok(mesh.clone());
    }
    let mut vertices = mesh.vertices().to_vec();
    for &i in &ids {
        vertices[i] += normals[i] * amplitude;
    }
    let mut out = TriangleMesh::new(vertices, mesh.triangles().to_vec()).expect("same connectivity");
    out.recompute_normals();
    Ok(out)
}

fn random_direction<T: Real, R: Rng>(rng: &mut R, normal: Option<Vec3<T>>) -> Vec3<T> {
    loop {
        let mut v: Vec3<T> = Vec3::from_f64([
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ]);
        if let Some(n) = normal {
            v -= n * v.dot(n);
        }
        if let Some(u) = v.try_normalize() {
            return u;
        }
    }
}

/// Index-returning form of [`perturb_keypoints`].
pub fn perturb_keypoint_indices<T: Real>(
    keypoints: &[Vec3<T>],
    cloud: &PointCloud<T>,
    tree: &KdTree<T>,
    magnitude: T,
    seed: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keypoints
        .iter()
        .map(|&k| {
            let (home, _) = tree.nearest(k).expect("non-empty cloud");
            if magnitude <= T::zero() {
                return home;
            }
            let u = random_direction(&mut rng, cloud.normals().map(|n| n[home]));
            tree.nearest(k + u * magnitude).expect("non-empty cloud").0
        })
        .collect()
}

/// Replaces each keypoint by the cloud point nearest to `keypoint + magnitude·u`.
///
/// `u` is uniform on the unit circle of the tangent plane when the cloud has
/// normals and uniform on the sphere otherwise. Results are always cloud points.
pub fn perturb_keypoints<T: Real>(
    keypoints: &[Vec3<T>],
    cloud: &PointCloud<T>,
    magnitude: T,
    seed: u64,
) -> Vec<Vec3<T>> {
    if magnitude <= T::zero() {
        return keypoints.to_vec();
    }
    if cloud.is_empty() {
        return keypoints.to_vec();
    }
    let tree = KdTree::new(cloud.points().to_vec());
    perturb_keypoint_indices(keypoints, cloud, &tree, magnitude, seed)
        .into_iter()
        .map(|i| cloud.points()[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{grid_mesh, planar_grid_cloud};
    use std::collections::HashSet;

    fn unit_cloud(n: usize) -> PointCloud<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = (0..n)
            .map(|_| Vec3::new(rng.random::<f64>(), rng.random(), rng.random()))
            .collect();
        PointCloud::new(pts)
    }

    #[test]
    fn zero_sigma_is_identity_and_seeded_noise_is_deterministic() {
        let c = planar_grid_cloud(20, 1.0);
        assert_eq!(add_gaussian_noise(&c, 0.0, 1.0, 3), c);
        let a = add_gaussian_noise(&c, 0.4, 1.0, 3);
        let b = add_gaussian_noise(&c, 0.4, 1.0, 3);
        assert_eq!(a, b);
        assert_ne!(a, add_gaussian_noise(&c, 0.4, 1.0, 4));
        assert_eq!(a.len(), c.len());
    }

    #[test]
    fn per_axis_variance_matches_sigma() {
        let c = unit_cloud(100_000);
        let (mr, s) = (0.01, 0.5);
        let noisy = add_gaussian_noise(&c, s, mr, 11);
        let target = (s * mr) * (s * mr);
        for k in 0..3 {
            let d: Vec<f64> = noisy
                .points()
                .iter()
                .zip(c.points())
                .map(|(a, b)| a[k] - b[k])
                .collect();
            let m = d.iter().sum::<f64>() / d.len() as f64;
            let var = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (d.len() - 1) as f64;
            assert!((var / target - 1.0).abs() < 0.05, "axis {k}: {var} vs {target}");
        }
    }

    #[test]
    fn noisy_normals_agree_with_originals() {
        let c = planar_grid_cloud(30, 1.0);
        let c = estimate_normals(&c, 10, Some(Vec3::new(0.0, 0.0, 100.0))).unwrap().cloud;
        let noisy = add_gaussian_noise(&c, 0.05, 1.0, 5);
        for n in noisy.normals().unwrap() {
            assert!(n.z > 0.9);
        }
        let m = grid_mesh(10);
        let nm = add_gaussian_noise_mesh(&m, 0.01, 0.1, 5);
        assert_eq!(nm.triangles(), m.triangles());
        assert!(nm.normals().unwrap().iter().all(|n| n.z > 0.9));
    }

    #[test]
    fn shot_noise_contract() {
        let c = unit_cloud(1000);
        let normals: Vec<_> = (0..1000)
            .map(|i| Vec3::new((i as f64).sin(), (i as f64).cos(), 0.5).normalize())
            .collect();
        let c = PointCloud::with_normals(c.points().to_vec(), normals.clone()).unwrap();
        let amp = 0.2;
        let out = add_shot_noise(&c, 0.03, amp, 9).unwrap();
        assert_eq!(out.len(), 1000);
        let moved: Vec<usize> = (0..1000).filter(|&i| out.points()[i] != c.points()[i]).collect();
        assert_eq!(moved.len(), 30);
        assert_eq!(moved, shot_noise_indices(1000, 0.03, 9));
        for &i in &moved {
            let d = out.points()[i] - c.points()[i];
            assert!((d.norm() - amp).abs() < 1e-9);
            assert!((d - normals[i] * amp).max_abs() < 1e-12);
        }
        assert_eq!(add_shot_noise(&c, 0.0, amp, 9).unwrap(), c);
        assert_eq!(add_shot_noise(&unit_cloud(10), 0.1, amp, 9), Err(NuisanceError::MissingNormals));
        assert!(add_shot_noise(&c, 1.5, amp, 9).is_err());
    }

    #[test]
    fn shot_noise_indices_are_distinct_and_seeded() {
        let a = shot_noise_indices(500, 0.05, 1);
        assert_eq!(a.len(), 25);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 25);
        assert_eq!(a, shot_noise_indices(500, 0.05, 1));
        assert_eq!(shot_noise_indices(500, 1.0, 1), (0..500).collect::<Vec<_>>());
    }

    #[test]
    fn perturbed_keypoints_stay_on_cloud() {
        let c = planar_grid_cloud(40, 0.1);
        let keys: Vec<_> = c.points()[..50].to_vec();
        assert_eq!(perturb_keypoints(&keys, &c, 0.0, 1), keys);
        let members: HashSet<[u64; 3]> = c
            .points()
            .iter()
            .map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
            .collect();
        for p in perturb_keypoints(&keys, &c, 0.5, 1) {
            assert!(members.contains(&[p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]));
        }
    }

    #[test]
    fn mean_displacement_matches_magnitude_on_dense_grid() {
        let spacing = 0.01;
        let c = planar_grid_cloud(301, spacing);
        let c = estimate_normals(&c, 10, Some(Vec3::new(0.0, 0.0, 100.0))).unwrap().cloud;
        let center = c.points()[150 * 301 + 150];
        let keys = vec![center; 10_000];
        let magnitude = 0.4;
        let out = perturb_keypoints(&keys, &c, magnitude, 2);
        let mean = out.iter().map(|p| p.distance(center)).sum::<f64>() / out.len() as f64;
        assert!((mean / magnitude - 1.0).abs() < 0.15, "{mean}");
    }
}
