//! Scan files, pose files, dataset manifests and synthetic scene pairs.

mod manifest;
mod obj;
mod ply;
mod pose;
mod synthetic;

use std::path::PathBuf;

use thiserror::Error;

use crate::eval::EvalError;
use crate::geom::{GeomError, PointCloud, TriangleMesh};
use crate::nuisance::NuisanceError;
use crate::Real;

pub use manifest::{load_manifest, DatasetManifest, ManifestLoad, PairEntry, PoseSource};
pub use obj::{load_obj, parse_obj, save_obj, write_obj};
pub use ply::{load_ply, read_ply, save_ply, write_ply, PlyEncoding};
pub use pose::{
    load_pose, parse_pose, pose_from_values, save_pose, write_pose, PoseConvention, MAX_POSE_DRIFT,
};
pub use synthetic::{generate_synthetic, BaseShape, Crop, SyntheticSpec, MIN_SYNTHETIC_VERTICES};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: parse error at {location}: {message}")]
    Parse {
        context: String,
        location: String,
        message: String,
    },
    #[error("unsupported PLY encoding `{0}`")]
    UnsupportedEncoding(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("invalid synthetic spec: {0}")]
    Synthetic(String),
    #[error("every manifest entry failed; first error: {0}")]
    AllEntriesFailed(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Nuisance(#[from] NuisanceError),
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }
}

/// A scan as loaded from disk: bare points or a triangle mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry<T> {
    Cloud(PointCloud<T>),
    Mesh(TriangleMesh<T>),
}

impl<T: Real> Geometry<T> {
    pub fn points(&self) -> &[crate::Vec3<T>] {
        match self {
            Geometry::Cloud(c) => c.points(),
            Geometry::Mesh(m) => m.vertices(),
        }
    }

    pub fn normals(&self) -> Option<&[crate::Vec3<T>]> {
        match self {
            Geometry::Cloud(c) => c.normals(),
            Geometry::Mesh(m) => m.normals(),
        }
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        match self {
            Geometry::Cloud(_) => &[],
            Geometry::Mesh(m) => m.triangles(),
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    /// Uniformly rescales coordinates (normals are unaffected).
    pub fn scaled(self, s: T) -> Self {
        if s == T::one() {
            return self;
        }
        match self {
            Geometry::Cloud(c) => {
                let (p, n) = c.into_parts();
                let p = p.into_iter().map(|v| v * s).collect();
                Geometry::Cloud(match n {
                    Some(n) => PointCloud::with_normals(p, n).expect("lengths unchanged"),
                    None => PointCloud::new(p),
                })
            }
            Geometry::Mesh(m) => {
                let (v, t, n) = m.into_parts();
                let v = v.into_iter().map(|x| x * s).collect();
                Geometry::Mesh(match n {
                    Some(n) => TriangleMesh::with_normals(v, t, n).expect("lengths unchanged"),
                    None => TriangleMesh::new(v, t).expect("indices unchanged"),
                })
            }
        }
    }
}

impl<T> From<PointCloud<T>> for Geometry<T> {
    fn from(c: PointCloud<T>) -> Self {
        Geometry::Cloud(c)
    }
}

impl<T> From<TriangleMesh<T>> for Geometry<T> {
    fn from(m: TriangleMesh<T>) -> Self {
        Geometry::Mesh(m)
    }
}
