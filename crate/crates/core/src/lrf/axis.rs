use crate::eigen::{max_eigvec, min_eigvec};
use crate::geom::{
    estimate_normals, GeomError, KdTree, MeshIndex, PointCloud, TriangleMesh, DEFAULT_NORMAL_K,
};
use crate::lrf::covariance::{barycenter, covariance_of_points, triangles_covariance};
use crate::lrf::disambiguation::{disambiguate_normal_mean, disambiguate_points_mean};
use crate::lrf::ga::{ga_ma_axis, ga_mh_axis, ga_mpp_axis};
use crate::lrf::weights::{area_weights, HeightWeights};
use crate::lrf::{
    assemble_frame, AxisError, AxisKind, AxisMethodSpec, Direction, Disambiguation, Frame,
    WeightScheme, SMALL_RADIUS_FRACTION,
};
use crate::{Real, Vec3};

/// A scan prepared for axis queries: points with normals, a kd-tree, and
/// the triangle index when the scan is a mesh.
#[derive(Clone, Debug)]
pub struct Surface<T> {
    cloud: PointCloud<T>,
    tree: KdTree<T>,
    mesh: Option<MeshIndex<T>>,
    degenerate_normals: Vec<usize>,
}

impl<T: Real> Surface<T> {
    /// Uses the mesh's own vertex normals, or winding-consistent face normals when it has none.
    pub fn from_mesh(mut mesh: TriangleMesh<T>) -> Self {
        if mesh.normals().is_none() {
            mesh.recompute_normals();
        }
        let cloud = mesh.to_cloud();
        let tree = KdTree::new(cloud.points().to_vec());
        let index = MeshIndex::with_tree(mesh, tree.clone());
        Self {
            cloud,
            tree,
            mesh: Some(index),
            degenerate_normals: Vec::new(),
        }
    }

    /// Uses the cloud's normals, estimating them from `k` nearest neighbors when absent.
    pub fn from_cloud(cloud: PointCloud<T>, k: usize) -> Result<Self, GeomError> {
        let (cloud, degenerate_normals) = if cloud.normals().is_some() {
            (cloud, Vec::new())
        } else {
            let est = estimate_normals(&cloud, k.max(3), None)?;
            (est.cloud, est.degenerate)
        };
        let tree = KdTree::new(cloud.points().to_vec());
        Ok(Self {
            cloud,
            tree,
            mesh: None,
            degenerate_normals,
        })
    }

    /// [`Self::from_cloud`] with the default neighbor count.
    pub fn from_cloud_default(cloud: PointCloud<T>) -> Result<Self, GeomError> {
        Self::from_cloud(cloud, DEFAULT_NORMAL_K)
    }

    pub fn points(&self) -> &[Vec3<T>] {
        self.cloud.points()
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        self.cloud.normals().expect("surface always carries normals")
    }

    pub fn cloud(&self) -> &PointCloud<T> {
        &self.cloud
    }

    pub fn tree(&self) -> &KdTree<T> {
        &self.tree
    }

    pub fn mesh(&self) -> Option<&TriangleMesh<T>> {
        self.mesh.as_ref().map(MeshIndex::mesh)
    }

    pub fn mesh_index(&self) -> Option<&MeshIndex<T>> {
        self.mesh.as_ref()
    }

    /// Points whose estimated normal was ill-defined.
    pub fn degenerate_normals(&self) -> &[usize] {
        &self.degenerate_normals
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// Gathers `N(p)` at `radius` (the keypoint itself excluded) and, when
    /// `with_triangles`, the triangles lying entirely inside the ball.
    pub fn neighborhood(&self, keypoint: Vec3<T>, radius: T, with_triangles: bool) -> Result<Neighborhood<T>, AxisError> {
        let found = self.tree.radius_search_with_distances(keypoint, radius);
        let normals = self.normals();
        let pts = self.points();
        let mut nb = Neighborhood {
            keypoint,
            keypoint_normal: self.tree.nearest(keypoint).map(|(i, _)| normals[i]),
            radius,
            points: Vec::with_capacity(found.len()),
            normals: Vec::with_capacity(found.len()),
            dist_sq: Vec::with_capacity(found.len()),
            triangles: Vec::new(),
        };
        for (i, d2) in found {
            if d2 > T::zero() {
                nb.points.push(pts[i]);
                nb.normals.push(normals[i]);
                nb.dist_sq.push(d2);
            }
        }
        if with_triangles {
            let index = self.mesh.as_ref().ok_or(AxisError::MissingMesh)?;
            nb.triangles = index.local_triangle_positions(keypoint, radius);
        }
        Ok(nb)
    }
}

/// The local region `N(p)` (and `M(p)` when requested) around a keypoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood<T> {
    pub keypoint: Vec3<T>,
    pub keypoint_normal: Option<Vec3<T>>,
    /// Support radius `R` in model units.
    pub radius: T,
    pub points: Vec<Vec3<T>>,
    pub normals: Vec<Vec3<T>>,
    /// Squared distances of `points` to the keypoint.
    pub dist_sq: Vec<T>,
    pub triangles: Vec<[Vec3<T>; 3]>,
}

/// Per-evaluation details kept for failure attribution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxisDiagnostics {
    /// Points that entered the construction.
    pub neighbors: usize,
    pub triangles: usize,
    pub eigengap: Option<f64>,
    /// The height weights fell back to uniform.
    pub height_fallback: bool,
    /// Index of the salient neighbor for GA-mA / GA-mH.
    pub salient: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisOutcome<T> {
    pub axis: Vec3<T>,
    pub diagnostics: AxisDiagnostics,
}

fn radial_weights<T: Real>(dist_sq: &[T], radius: T) -> Vec<T> {
    dist_sq
        .iter()
        .map(|&d2| {
            let d = radius - d2.sqrt();
            d * d
        })
        .collect()
}

fn eigen_axis<T: Real>(
    c: &crate::Mat3<T>,
    kind: AxisKind,
    diag: &mut AxisDiagnostics,
) -> Result<Vec3<T>, AxisError> {
    let e = match kind {
        AxisKind::Z => min_eigvec(c),
        AxisKind::X => max_eigvec(c),
    }?;
    diag.eigengap = Some(e.eigengap.as_f64());
    Ok(e.vector)
}

fn disambiguate<T: Real>(spec: &AxisMethodSpec, v: Vec3<T>, nb: &Neighborhood<T>) -> Vec3<T> {
    match spec.disambiguation {
        Disambiguation::PointsMean => disambiguate_points_mean(v, nb.keypoint, &nb.points),
        Disambiguation::NormalMean => disambiguate_normal_mean(v, &nb.normals),
        Disambiguation::None => v,
    }
}

/// Radial (`wr`) and height (`wh`) weights of `N(p)` against `z`, multiplied as the scheme requires.
fn projected_weights<T: Real>(
    weight: WeightScheme,
    nb: &Neighborhood<T>,
    z: Vec3<T>,
    diag: &mut AxisDiagnostics,
) -> Vec<T> {
    let mut w = if weight.radial() {
        radial_weights(&nb.dist_sq, nb.radius)
    } else {
        vec![T::one(); nb.points.len()]
    };
    if weight.height() {
        let heights: Vec<T> = nb.points.iter().map(|&p| (p - nb.keypoint).dot(z)).collect();
        let hw = HeightWeights::from_heights(&heights);
        diag.height_fallback = hw.uniform_fallback;
        for (a, b) in w.iter_mut().zip(hw.weights) {
            *a = *a * b;
        }
    }
    w
}

/// Builds the axis of `spec` from a gathered neighborhood. `z` is required
/// by the z-dependent methods and ignored by the others.
pub fn axis_from_neighborhood<T: Real>(
    spec: &AxisMethodSpec,
    nb: &Neighborhood<T>,
    z: Option<Vec3<T>>,
) -> Result<AxisOutcome<T>, AxisError> {
    let mut diag = AxisDiagnostics::default();
    let r_big = nb.radius;
    let axis = match spec.direction {
        Direction::CaPK | Direction::CaPB | Direction::CaSPK | Direction::CaSPB => {
            let (points, dist_sq, radius) = if spec.direction.is_small() {
                let r = r_big * T::lit(SMALL_RADIUS_FRACTION);
                let r2 = r * r;
                let (p, d): (Vec<_>, Vec<_>) = nb
                    .points
                    .iter()
                    .zip(&nb.dist_sq)
                    .filter(|(_, &d2)| d2 <= r2)
                    .map(|(&p, &d2)| (p, d2))
                    .unzip();
                (std::borrow::Cow::Owned(p), std::borrow::Cow::Owned(d), r)
            } else {
                (
                    std::borrow::Cow::Borrowed(&nb.points[..]),
                    std::borrow::Cow::Borrowed(&nb.dist_sq[..]),
                    r_big,
                )
            };
            if points.is_empty() {
                return Err(AxisError::EmptyRegion);
            }
            diag.neighbors = points.len();
            let center = if spec.direction.is_barycentric() {
                barycenter(&points)
            } else {
                nb.keypoint
            };
            let w = if spec.weight.radial() {
                radial_weights(&dist_sq, radius)
            } else {
                vec![T::one(); points.len()]
            };
            let c = covariance_of_points(&points, center, &w)?;
            let v = eigen_axis(&c.matrix, spec.axis_kind, &mut diag)?;
            disambiguate(spec, v, nb)
        }
        Direction::CaMK | Direction::CaMB => {
            if nb.triangles.is_empty() {
                return Err(AxisError::EmptyRegion);
            }
            diag.neighbors = nb.points.len();
            diag.triangles = nb.triangles.len();
            let center = if spec.direction.is_barycentric() {
                if nb.points.is_empty() {
                    return Err(AxisError::EmptyRegion);
                }
                barycenter(&nb.points)
            } else {
                nb.keypoint
            };
            let mut w = if spec.weight.radial() {
                let third = T::one() / T::lit(3.0);
                nb.triangles
                    .iter()
                    .map(|t| {
                        let centroid = (t[0] + t[1] + t[2]) * third;
                        let d = r_big - centroid.distance(nb.keypoint);
                        d * d
                    })
                    .collect()
            } else {
                vec![T::one(); nb.triangles.len()]
            };
            if spec.weight.area() {
                for (a, b) in w.iter_mut().zip(area_weights(&nb.triangles)?) {
                    *a = *a * b;
                }
            }
            let c = triangles_covariance(&nb.triangles, center, &w)?;
            let v = eigen_axis(&c.matrix, spec.axis_kind, &mut diag)?;
            disambiguate(spec, v, nb)
        }
        Direction::CaPPK | Direction::GaMpP | Direction::GaMA | Direction::GaMH => {
            let z = z.ok_or(AxisError::MissingZAxis)?;
            if nb.points.is_empty() {
                return Err(AxisError::EmptyRegion);
            }
            diag.neighbors = nb.points.len();
            match spec.direction {
                Direction::CaPPK => {
                    let projected = super::project_to_plane(&nb.points, nb.keypoint, z);
                    let w = projected_weights(spec.weight, nb, z, &mut diag);
                    let c = covariance_of_points(&projected, nb.keypoint, &w)?;
                    let v = eigen_axis(&c.matrix, AxisKind::X, &mut diag)?;
                    disambiguate(spec, v, nb)
                }
                Direction::GaMpP => {
                    let projected = super::project_to_plane(&nb.points, nb.keypoint, z);
                    let w = projected_weights(spec.weight, nb, z, &mut diag);
                    ga_mpp_axis(&projected, nb.keypoint, &w, r_big)?
                }
                Direction::GaMA => {
                    let kn = nb.keypoint_normal.ok_or(AxisError::MissingNormals)?;
                    let s = ga_ma_axis(&nb.points, &nb.normals, nb.keypoint, kn, z, r_big)?;
                    diag.salient = Some(s.salient);
                    s.axis
                }
                _ => {
                    let s = ga_mh_axis(&nb.points, nb.keypoint, z, r_big)?;
                    diag.salient = Some(s.salient);
                    s.axis
                }
            }
        }
    };
    Ok(AxisOutcome {
        axis,
        diagnostics: diag,
    })
}

/// Computes the axis of `spec` at `keypoint`, first computing its z-axis
/// dependency when it has one. Radii are `support_radius_mr · mr`.
pub fn compute_axis<T: Real>(
    spec: &AxisMethodSpec,
    surface: &Surface<T>,
    keypoint: Vec3<T>,
    mr: T,
) -> Result<AxisOutcome<T>, AxisError> {
    spec.validate()?;
    let z = match &spec.z_dependency {
        Some(zs) => Some(compute_axis(zs, surface, keypoint, mr)?.axis),
        None => None,
    };
    let radius = T::lit(spec.support_radius_mr) * mr;
    let nb = surface.neighborhood(keypoint, radius, spec.direction.is_mesh())?;
    axis_from_neighborhood(spec, &nb, z)
}

/// A full frame from a z-axis recipe and an x-axis recipe. A z-dependent
/// x-axis is built on the frame's own z.
pub fn compute_frame<T: Real>(
    z_spec: &AxisMethodSpec,
    x_spec: &AxisMethodSpec,
    surface: &Surface<T>,
    keypoint: Vec3<T>,
    mr: T,
) -> Result<Frame<T>, AxisError> {
    if z_spec.axis_kind != AxisKind::Z || x_spec.axis_kind != AxisKind::X {
        return Err(AxisError::ParallelAxes);
    }
    let z = compute_axis(z_spec, surface, keypoint, mr)?.axis;
    let x = if x_spec.direction.needs_z() {
        x_spec.validate()?;
        let radius = T::lit(x_spec.support_radius_mr) * mr;
        let nb = surface.neighborhood(keypoint, radius, false)?;
        axis_from_neighborhood(x_spec, &nb, Some(z))?.axis
    } else {
        compute_axis(x_spec, surface, keypoint, mr)?.axis
    };
    assemble_frame(keypoint, z, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{RigidTransform, Transformable};
    use crate::lrf::{Dataset, Method};
    use crate::shapes::{bumpy_field, planar_grid, BumpPattern};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane_surface() -> Surface<f64> {
        Surface::from_mesh(planar_grid(41, 41, 1.0))
    }

    #[test]
    fn plane_z_axes_match_normal() {
        let s = plane_surface();
        let kp = Vec3::new(20.0, 20.0, 0.0);
        for m in Method::Z_AXES {
            let spec = m.preset(Dataset::B3R);
            let out = compute_axis(&spec, &s, kp, 1.0).unwrap();
            let angle = out.axis.dot(Vec3::unit_z()).clamp(-1.0, 1.0).acos().to_degrees();
            assert!(angle < 0.1, "{m}: {angle}");
        }
    }

    #[test]
    fn mesh_methods_need_a_mesh() {
        let s = Surface::from_cloud_default(planar_grid::<f64>(20, 20, 1.0).to_cloud()).unwrap();
        let spec = Method::CaMBZ.preset(Dataset::B3R);
        assert_eq!(
            compute_axis(&spec, &s, Vec3::new(10.0, 10.0, 0.0), 1.0),
            Err(AxisError::MissingMesh)
        );
    }

    #[test]
    fn z_dependent_needs_z() {
        let s = plane_surface();
        let nb = s.neighborhood(Vec3::new(20.0, 20.0, 0.0), 5.0, false).unwrap();
        let spec = Method::GaMHX.preset(Dataset::B3R);
        assert_eq!(axis_from_neighborhood(&spec, &nb, None), Err(AxisError::MissingZAxis));
    }

    #[test]
    fn keypoint_is_not_its_own_neighbor() {
        let s = plane_surface();
        let nb = s.neighborhood(Vec3::new(20.0, 20.0, 0.0), 1.05, false).unwrap();
        assert_eq!(nb.points.len(), 4);
    }

    #[test]
    fn all_methods_equivariant_on_bumpy_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pat = BumpPattern::random(&mut rng, 3.0, 0.15);
        let mesh: TriangleMesh<f64> = bumpy_field(&mut rng, 60, 1.0, 0.2, &pat);
        let t = RigidTransform::random(&mut rng, 50.0);
        let a = Surface::from_mesh(mesh.clone());
        let b = Surface::from_mesh(mesh.transformed(&t));
        let mr = crate::geom::mesh_resolution(&mesh).unwrap();
        let mut checked = 0;
        for idx in [610usize, 1234, 1830, 2222] {
            let kp = mesh.vertices()[idx];
            for m in Method::ALL {
                let spec = m.preset(Dataset::B3R).with_radius(10.0).unwrap();
                let (Ok(x), Ok(y)) = (
                    compute_axis(&spec, &a, kp, mr),
                    compute_axis(&spec, &b, t.apply_point(kp), mr),
                ) else {
                    continue;
                };
                let angle = t.apply_vector(x.axis).dot(y.axis).clamp(-1.0, 1.0).acos();
                assert!(angle < 1e-6, "{m} at {idx}: {angle}");
                checked += 1;
            }
        }
        assert!(checked >= 50);
    }

    #[test]
    fn frame_from_presets_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pat = BumpPattern::random(&mut rng, 3.0, 0.15);
        let mesh: TriangleMesh<f64> = bumpy_field(&mut rng, 50, 1.0, 0.2, &pat);
        let s = Surface::from_mesh(mesh.clone());
        let kp = mesh.vertices()[25 * 50 + 25];
        let f = compute_frame(
            &Method::CaMBZ.preset(Dataset::B3R),
            &Method::GaMHX.preset(Dataset::B3R),
            &s,
            kp,
            1.0,
        )
        .unwrap();
        assert!(f.is_valid(1e-9));
    }
}
