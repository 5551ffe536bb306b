use crate::geom::{GeomError, KdTree, TriangleMesh};
use crate::{Real, Vec3};

/// A mesh with a vertex kd-tree and triangle lookup by lowest-slot vertex,
/// for repeated local-region extraction.
#[derive(Clone, Debug)]
pub struct MeshIndex<T> {
    mesh: TriangleMesh<T>,
    tree: KdTree<T>,
    /// CSR offsets into `by_first`, keyed by each triangle's first vertex.
    offsets: Vec<usize>,
    by_first: Vec<usize>,
}

impl<T: Real> MeshIndex<T> {
    pub fn new(mesh: TriangleMesh<T>) -> Self {
        let tree = KdTree::new(mesh.vertices().to_vec());
        Self::with_tree(mesh, tree)
    }

    /// Reuses a kd-tree already built over `mesh.vertices()`.
    pub fn with_tree(mesh: TriangleMesh<T>, tree: KdTree<T>) -> Self {
        let n = mesh.vertex_count();
        let mut counts = vec![0usize; n + 1];
        for t in mesh.triangles() {
            counts[t[0] + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut by_first = vec![0usize; mesh.triangle_count()];
        for (ti, t) in mesh.triangles().iter().enumerate() {
            by_first[fill[t[0]]] = ti;
            fill[t[0]] += 1;
        }
        Self {
            mesh,
            tree,
            offsets,
            by_first,
        }
    }

    pub fn mesh(&self) -> &TriangleMesh<T> {
        &self.mesh
    }

    pub fn tree(&self) -> &KdTree<T> {
        &self.tree
    }

    /// Indices of triangles whose three vertices lie within `radius` of `center`.
    pub fn local_triangles(&self, center: Vec3<T>, radius: T) -> Vec<usize> {
        let r2 = radius * radius;
        let verts = self.mesh.vertices();
        let mut out = Vec::new();
        for v in self.tree.radius_search(center, radius) {
            for &ti in &self.by_first[self.offsets[v]..self.offsets[v + 1]] {
                let t = self.mesh.triangles()[ti];
                if verts[t[1]].distance_squared(center) <= r2
                    && verts[t[2]].distance_squared(center) <= r2
                {
                    out.push(ti);
                }
            }
        }
        out
    }

    /// Vertex positions of the triangles returned by [`Self::local_triangles`].
    pub fn local_triangle_positions(&self, center: Vec3<T>, radius: T) -> Vec<[Vec3<T>; 3]> {
        self.local_triangles(center, radius)
            .into_iter()
            .map(|ti| self.mesh.triangle(ti))
            .collect()
    }

    /// Same result as [`crate::geom::local_mesh`], using the index.
    pub fn local_mesh(&self, center: Vec3<T>, radius: T) -> Result<TriangleMesh<T>, GeomError> {
        let mut tris = self.local_triangles(center, radius);
        if tris.is_empty() {
            return Err(GeomError::EmptyRegion);
        }
        tris.sort_unstable();
        let mut remap = std::collections::HashMap::new();
        let mut vertices = Vec::new();
        let mut normals = self.mesh.normals().map(|_| Vec::new());
        let mut triangles = Vec::with_capacity(tris.len());
        for ti in tris {
            let t = self.mesh.triangles()[ti];
            let mut out = [0usize; 3];
            for (k, &v) in t.iter().enumerate() {
                out[k] = *remap.entry(v).or_insert_with(|| {
                    vertices.push(self.mesh.vertices()[v]);
                    if let (Some(dst), Some(src)) = (normals.as_mut(), self.mesh.normals()) {
                        dst.push(src[v]);
                    }
                    vertices.len() - 1
                });
            }
            triangles.push(out);
        }
        let mesh = TriangleMesh::new(vertices, triangles)?;
        match normals {
            Some(n) => {
                let mut mesh = mesh;
                mesh.set_normals(n)?;
                Ok(mesh)
            }
            None => Ok(mesh),
        }
    }
}
