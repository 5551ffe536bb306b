use crate::geom::{GeomError, KdTree, PointCloud, TriangleMesh};
use crate::Real;

/// Geometry with a characteristic sampling length ("mesh resolution", mr).
pub trait MeshResolution<T: Real> {
    fn resolution(&self) -> Result<T, GeomError>;
}

/// Mean length over unique edges.
impl<T: Real> MeshResolution<T> for TriangleMesh<T> {
    fn resolution(&self) -> Result<T, GeomError> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles()
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        if edges.is_empty() {
            return Err(GeomError::TooFewElements { needed: 1, have: 0 });
        }
        let v = self.vertices();
        let total: T = edges.iter().map(|&(a, b)| v[a].distance(v[b])).sum();
        Ok(total / T::from_usize(edges.len()).expect("edge count fits scalar"))
    }
}

/// Mean nearest-neighbor distance.
impl<T: Real> MeshResolution<T> for PointCloud<T> {
    fn resolution(&self) -> Result<T, GeomError> {
        if self.len() < 2 {
            return Err(GeomError::TooFewElements {
                needed: 2,
                have: self.len(),
            });
        }
        let tree = KdTree::new(self.points().to_vec());
        let total: T = self
            .points()
            .iter()
            .enumerate()
            .map(|(i, &p)| tree.nearest_excluding(p, Some(i)).expect("≥ 2 points").1)
            .sum();
        Ok(total / T::from_usize(self.len()).expect("point count fits scalar"))
    }
}

/// Average mesh resolution of a mesh (mean edge length) or bare cloud (mean NN distance).
pub fn mesh_resolution<T: Real, G: MeshResolution<T>>(geometry: &G) -> Result<T, GeomError> {
    geometry.resolution()
}
