use crate::geom::GeomError;
use crate::{Real, Vec3};

const NORMAL_UNIT_TOLERANCE: f64 = 1e-6;

fn check_normals<T: Real>(n_points: usize, normals: &[Vec3<T>]) -> Result<(), String> {
    if normals.len() != n_points {
        return Err(format!(
            "{} normals for {} points",
            normals.len(),
            n_points
        ));
    }
    for (i, n) in normals.iter().enumerate() {
        let len = n.norm().as_f64();
        if !((len - 1.0).abs() <= NORMAL_UNIT_TOLERANCE) {
            return Err(format!("normal {i} has length {len}"));
        }
    }
    Ok(())
}

/// An ordered set of 3D points with optional unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec3<T>>,
    normals: Option<Vec<Vec3<T>>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        Self {
            points,
            normals: None,
        }
    }

    pub fn with_normals(points: Vec<Vec3<T>>, normals: Vec<Vec3<T>>) -> Result<Self, GeomError> {
        check_normals(points.len(), &normals).map_err(GeomError::InvalidCloud)?;
        Ok(Self {
            points,
            normals: Some(normals),
        })
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vec3<T>]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn set_normals(&mut self, normals: Vec<Vec3<T>>) -> Result<(), GeomError> {
        check_normals(self.points.len(), &normals).map_err(GeomError::InvalidCloud)?;
        self.normals = Some(normals);
        Ok(())
    }

    pub fn clear_normals(&mut self) {
        self.normals = None;
    }

    pub fn into_parts(self) -> (Vec<Vec3<T>>, Option<Vec<Vec3<T>>>) {
        (self.points, self.normals)
    }

    /// Axis-aligned bounding box `(min, max)`; `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        bounds_of(&self.points)
    }
}

pub(crate) fn bounds_of<T: Real>(points: &[Vec3<T>]) -> Option<(Vec3<T>, Vec3<T>)> {
    let first = *points.first()?;
    Some(
        points
            .iter()
            .fold((first, first), |(lo, hi), &p| (lo.inf(p), hi.sup(p))),
    )
}

/// An indexed triangle mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh<T> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    normals: Option<Vec<Vec3<T>>>,
}

impl<T: Real> TriangleMesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self, GeomError> {
        let n = vertices.len();
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(GeomError::InvalidMesh(format!(
                    "triangle {i} {t:?} references a vertex >= {n}"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeomError::InvalidMesh(format!(
                    "triangle {i} {t:?} repeats a vertex"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            normals: None,
        })
    }

    pub fn with_normals(
        vertices: Vec<Vec3<T>>,
        triangles: Vec<[usize; 3]>,
        normals: Vec<Vec3<T>>,
    ) -> Result<Self, GeomError> {
        let mut mesh = Self::new(vertices, triangles)?;
        mesh.set_normals(normals)?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> Option<&[Vec3<T>]> {
        self.normals.as_deref()
    }

    pub fn set_normals(&mut self, normals: Vec<Vec3<T>>) -> Result<(), GeomError> {
        check_normals(self.vertices.len(), &normals).map_err(GeomError::InvalidMesh)?;
        self.normals = Some(normals);
        Ok(())
    }

    pub fn clear_normals(&mut self) {
        self.normals = None;
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Vec3<T>; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn triangle_positions(&self) -> impl Iterator<Item = [Vec3<T>; 3]> + '_ {
        (0..self.triangles.len()).map(move |i| self.triangle(i))
    }

    /// Total surface area.
    pub fn area(&self) -> T {
        self.triangle_positions().map(|t| triangle_area(&t)).sum()
    }

    /// The vertex set (and normals) as a point cloud.
    pub fn to_cloud(&self) -> PointCloud<T> {
        PointCloud {
            points: self.vertices.clone(),
            normals: self.normals.clone(),
        }
    }

    /// Area-weighted face-normal average per vertex, following triangle winding.
    ///
    /// Vertices without a non-degenerate incident face get `None`.
    pub fn face_vertex_normals(&self) -> Vec<Option<Vec3<T>>> {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            let n = (b - a).cross(c - a);
            for &v in t {
                acc[v] += n;
            }
        }
        acc.into_iter().map(|n| n.try_normalize()).collect()
    }

    /// Replaces vertex normals with winding-consistent face normals.
    ///
    /// Isolated vertices keep their previous normal when there was one,
    /// otherwise they receive the normal of the closest vertex that has one.
    pub fn recompute_normals(&mut self) {
        let fresh = self.face_vertex_normals();
        let previous = self.normals.take();
        let mut out: Vec<Option<Vec3<T>>> = fresh
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.or_else(|| previous.as_ref().map(|p| p[i])))
            .collect();
        if out.iter().any(Option::is_none) {
            let known: Vec<usize> = (0..out.len()).filter(|&i| out[i].is_some()).collect();
            if known.is_empty() {
                out.iter_mut().for_each(|n| *n = Some(Vec3::unit_z()));
            } else {
                let tree = crate::geom::KdTree::new(
                    known.iter().map(|&i| self.vertices[i]).collect::<Vec<_>>(),
                );
                for i in 0..out.len() {
                    if out[i].is_none() {
                        let (j, _) = tree
                            .nearest(self.vertices[i])
                            .expect("non-empty tree");
                        out[i] = out[known[j]];
                    }
                }
            }
        }
        self.normals = Some(out.into_iter().map(|n| n.expect("filled")).collect());
    }

    pub fn into_parts(self) -> (Vec<Vec3<T>>, Vec<[usize; 3]>, Option<Vec<Vec3<T>>>) {
        (self.vertices, self.triangles, self.normals)
    }
}

/// `‖(b - a) × (c - a)‖`, twice the triangle area.
#[inline]
pub(crate) fn doubled_area<T: Real>(t: &[Vec3<T>; 3]) -> T {
    (t[1] - t[0]).cross(t[2] - t[0]).norm()
}

#[inline]
pub(crate) fn triangle_area<T: Real>(t: &[Vec3<T>; 3]) -> T {
    doubled_area(t) * T::lit(0.5)
}

/// Submesh of the triangles whose three vertices all lie within `radius` of `center`.
///
/// Vertices are reindexed compactly in order of first use.
pub fn local_mesh<T: Real>(
    mesh: &TriangleMesh<T>,
    center: Vec3<T>,
    radius: T,
) -> Result<TriangleMesh<T>, GeomError> {
    let r2 = radius * radius;
    let inside: Vec<bool> = mesh
        .vertices
        .iter()
        .map(|v| v.distance_squared(center) <= r2)
        .collect();
    let mut remap = vec![usize::MAX; mesh.vertices.len()];
    let mut vertices = Vec::new();
    let mut normals = mesh.normals.as_ref().map(|_| Vec::new());
    let mut triangles = Vec::new();
    for t in &mesh.triangles {
        if !t.iter().all(|&v| inside[v]) {
            continue;
        }
        let mut out = [0usize; 3];
        for (k, &v) in t.iter().enumerate() {
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(mesh.vertices[v]);
                if let (Some(dst), Some(src)) = (normals.as_mut(), mesh.normals.as_ref()) {
                    dst.push(src[v]);
                }
            }
            out[k] = remap[v];
        }
        triangles.push(out);
    }
    if triangles.is_empty() {
        return Err(GeomError::EmptyRegion);
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
        normals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::grid_mesh;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn rejects_out_of_range_and_repeated_indices() {
        let verts = vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)];
        assert!(TriangleMesh::new(verts.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriangleMesh::new(verts, vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn rejects_non_unit_normals() {
        let err = PointCloud::with_normals(vec![v(0.0, 0.0, 0.0)], vec![v(0.0, 0.0, 2.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn local_mesh_whole_grid() {
        let mesh = grid_mesh(6);
        let sub = local_mesh(&mesh, v(2.5, 2.5, 0.0), 100.0).unwrap();
        assert_eq!(sub.triangle_count(), mesh.triangle_count());
        assert_eq!(sub.vertex_count(), mesh.vertex_count());
    }

    #[test]
    fn local_mesh_isolated_corner_is_empty() {
        let mesh = grid_mesh(4);
        assert_eq!(
            local_mesh(&mesh, v(0.0, 0.0, 0.0), 0.5),
            Err(GeomError::EmptyRegion)
        );
    }

    #[test]
    fn face_normals_follow_winding() {
        let mesh = grid_mesh(3);
        for n in mesh.face_vertex_normals() {
            assert_eq!(n.unwrap(), v(0.0, 0.0, 1.0));
        }
    }
}
