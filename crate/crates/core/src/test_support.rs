use rand::Rng;

use crate::geom::{PointCloud, TriangleMesh};
use crate::shapes;
use crate::Vec3;

/// `n` x `n` unit grid mesh in z = 0.
pub fn grid_mesh(n: usize) -> TriangleMesh<f64> {
    shapes::planar_grid(n, n, 1.0)
}

pub fn planar_grid_cloud(n: usize, spacing: f64) -> PointCloud<f64> {
    shapes::planar_grid::<f64>(n, n, spacing).to_cloud()
}

pub fn icosphere(subdivisions: u32, radius: f64) -> TriangleMesh<f64> {
    shapes::icosphere(subdivisions, radius)
}

/// Uniform random points on a sphere about the origin.
pub fn random_sphere_cloud<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> PointCloud<f64> {
    let pts = (0..n)
        .map(|_| loop {
            let p = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n2: f64 = p.norm_squared();
            if n2 > 1e-6 && n2 <= 1.0 {
                break p * (radius / n2.sqrt());
            }
        })
        .collect();
    PointCloud::new(pts)
}
