//! Geometric primitives: clouds, meshes, rigid transforms, spatial queries,
//! normal estimation and mesh resolution.

pub(crate) mod cloud;
mod kdtree;
mod mesh_index;
mod normals;
mod resolution;
pub(crate) mod transform;

use thiserror::Error;

pub use cloud::{local_mesh, PointCloud, TriangleMesh};
pub use kdtree::{radius_neighbors, KdTree};
pub use mesh_index::MeshIndex;
pub use normals::{estimate_normal_at, estimate_normals, NormalEstimate, DEFAULT_NORMAL_K};
pub use resolution::{mesh_resolution, MeshResolution};
pub use transform::{apply_transform, RigidTransform, Transformable};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("no triangle lies within the query region")]
    EmptyRegion,
    #[error("degenerate neighborhood at point {index}: normal direction undefined")]
    DegenerateNeighborhood { index: usize },
    #[error("not a rigid transform: {0}")]
    NotARigidTransform(String),
    #[error("too few elements: need {needed}, have {have}")]
    TooFewElements { needed: usize, have: usize },
}
