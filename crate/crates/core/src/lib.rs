//! Local reference frame (LRF) axis construction for 3D surfaces, with the
//! nuisance generators and evaluation harness used to benchmark the axes.
//!
//! Every kernel is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the harness and file
//! formats use.

pub mod eigen;
pub mod eval;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod lrf;
pub mod nuisance;
pub mod scalar;
pub mod shapes;

#[cfg(test)]
pub(crate) mod test_support;

pub use linalg::{Mat3, Vec3};
pub use scalar::Real;

pub type Point = Vec3<f64>;
pub type Cloud = geom::PointCloud<f64>;
pub type Mesh = geom::TriangleMesh<f64>;
pub type Transform = geom::RigidTransform<f64>;
pub type Frame = lrf::Frame<f64>;
pub type Surface = lrf::Surface<f64>;

pub type Point32 = Vec3<f32>;
pub type Cloud32 = geom::PointCloud<f32>;
pub type Mesh32 = geom::TriangleMesh<f32>;
pub type Transform32 = geom::RigidTransform<f32>;
pub type Frame32 = lrf::Frame<f32>;
pub type Surface32 = lrf::Surface<f32>;
