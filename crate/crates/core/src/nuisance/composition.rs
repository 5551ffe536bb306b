use serde::{Deserialize, Serialize};

use crate::geom::cloud::triangle_area;
use crate::geom::{KdTree, PointCloud, RigidTransform, TriangleMesh};
use crate::lrf::Surface;
use crate::{Real, Vec3};

/// Proximity threshold for composition tests, in mr.
pub const PROXIMITY_MR: f64 = 2.0;

/// Surface patches as (center, area) pairs. Meshes contribute triangles at
/// their centroids; bare clouds contribute one unit of area per point.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaElements<T> {
    pub centers: Vec<Vec3<T>>,
    pub areas: Vec<T>,
}

impl<T: Real> AreaElements<T> {
    pub fn total(&self) -> T {
        self.areas.iter().copied().sum()
    }
}

/// Geometry that scene-composition metrics can be computed on.
pub trait CompositionSurface<T: Real> {
    fn sample_points(&self) -> &[Vec3<T>];
    fn area_elements(&self) -> AreaElements<T>;
}

fn mesh_elements<T: Real>(m: &TriangleMesh<T>) -> AreaElements<T> {
    let third = T::one() / T::lit(3.0);
    let (centers, areas) = m
        .triangle_positions()
        .map(|t| ((t[0] + t[1] + t[2]) * third, triangle_area(&t)))
        .unzip();
    AreaElements { centers, areas }
}

fn cloud_elements<T: Real>(c: &PointCloud<T>) -> AreaElements<T> {
    AreaElements {
        centers: c.points().to_vec(),
        areas: vec![T::one(); c.len()],
    }
}

impl<T: Real> CompositionSurface<T> for TriangleMesh<T> {
    fn sample_points(&self) -> &[Vec3<T>] {
        self.vertices()
    }
    fn area_elements(&self) -> AreaElements<T> {
        mesh_elements(self)
    }
}

impl<T: Real> CompositionSurface<T> for PointCloud<T> {
    fn sample_points(&self) -> &[Vec3<T>] {
        self.points()
    }
    fn area_elements(&self) -> AreaElements<T> {
        cloud_elements(self)
    }
}

impl<T: Real> CompositionSurface<T> for Surface<T> {
    fn sample_points(&self) -> &[Vec3<T>] {
        self.points()
    }
    fn area_elements(&self) -> AreaElements<T> {
        match self.mesh() {
            Some(m) => mesh_elements(m),
            None => cloud_elements(self.cloud()),
        }
    }
}

/// Fraction of element area whose mapped center has a target point within `threshold`.
fn covered_fraction<T: Real>(elements: &AreaElements<T>, map: &RigidTransform<T>, target: &[Vec3<T>], threshold: T) -> T {
    let total = elements.total();
    if total <= T::zero() || target.is_empty() {
        return T::zero();
    }
    let tree = KdTree::new(target.to_vec());
    let covered: T = elements
        .centers
        .iter()
        .zip(&elements.areas)
        .filter(|&(&c, _)| tree.nearest(map.apply_point(c)).is_some_and(|(_, d)| d <= threshold))
        .map(|(_, &a)| a)
        .sum();
    (covered / total).min(T::one())
}

/// Fraction of model area not present in the scene.
///
/// A model element counts as visible when its center, mapped by `gt`, has a
/// scene point within `2·mr`.
pub fn occlusion<T: Real>(model: &impl CompositionSurface<T>, scene: &impl CompositionSurface<T>, gt: &RigidTransform<T>, mr: T) -> T {
    let visible = covered_fraction(&model.area_elements(), gt, scene.sample_points(), T::lit(PROXIMITY_MR) * mr);
    T::one() - visible
}

/// Fraction of scene area that does not belong to the model.
pub fn clutter<T: Real>(model: &impl CompositionSurface<T>, scene: &impl CompositionSurface<T>, gt: &RigidTransform<T>, mr: T) -> T {
    let from_model = covered_fraction(&scene.area_elements(), &gt.inverse(), model.sample_points(), T::lit(PROXIMITY_MR) * mr);
    T::one() - from_model
}

fn count_near<T: Real>(points: &[Vec3<T>], map: &RigidTransform<T>, tree: &KdTree<T>, threshold: T) -> usize {
    points
        .iter()
        .filter(|&&p| tree.nearest(map.apply_point(p)).is_some_and(|(_, d)| d <= threshold))
        .count()
}

/// Share of points in the overlap area: model points (after `gt`) with a scene
/// point within `2·mr` and scene points with such a model point, taking the
/// smaller count over the smaller cloud.
pub fn overlap<T: Real>(model: &impl CompositionSurface<T>, scene: &impl CompositionSurface<T>, gt: &RigidTransform<T>, mr: T) -> T {
    let (m, s) = (model.sample_points(), scene.sample_points());
    if m.is_empty() || s.is_empty() {
        return T::zero();
    }
    let threshold = T::lit(PROXIMITY_MR) * mr;
    let a = count_near(m, gt, &KdTree::new(s.to_vec()), threshold);
    let b = count_near(s, &gt.inverse(), &KdTree::new(m.to_vec()), threshold);
    let ratio = a.min(b) as f64 / m.len().min(s.len()) as f64;
    T::lit(ratio.min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneComposition {
    pub occlusion: f64,
    pub clutter: f64,
    pub overlap: f64,
}

impl SceneComposition {
    pub fn measure<T: Real>(
        model: &impl CompositionSurface<T>,
        scene: &impl CompositionSurface<T>,
        gt: &RigidTransform<T>,
        mr: T,
    ) -> Self {
        Self {
            occlusion: occlusion(model, scene, gt, mr).as_f64(),
            clutter: clutter(model, scene, gt, mr).as_f64(),
            overlap: overlap(model, scene, gt, mr).as_f64(),
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.occlusion, self.clutter, self.overlap]
            .iter()
            .all(|x| (0.0..=1.0).contains(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{apply_transform, mesh_resolution};
    use crate::shapes;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn crop(mesh: &TriangleMesh<f64>, keep: impl Fn(Vec3<f64>) -> bool) -> TriangleMesh<f64> {
        let v = mesh.vertices();
        let tris = mesh
            .triangles()
            .iter()
            .copied()
            .filter(|t| t.iter().all(|&i| keep(v[i])))
            .collect();
        TriangleMesh::new(v.to_vec(), tris).unwrap()
    }

    fn moved(mesh: &TriangleMesh<f64>, seed: u64) -> (TriangleMesh<f64>, RigidTransform<f64>) {
        let gt = RigidTransform::random(&mut ChaCha8Rng::seed_from_u64(seed), 5.0);
        (apply_transform(mesh, &gt), gt)
    }

    #[test]
    fn exact_copy_has_no_occlusion_or_clutter() {
        let m = shapes::icosphere::<f64>(3, 1.0);
        let mr = mesh_resolution(&m).unwrap();
        let (s, gt) = moved(&m, 1);
        let c = SceneComposition::measure(&m, &s, &gt, mr);
        assert_eq!(c.occlusion, 0.0);
        assert_eq!(c.clutter, 0.0);
        assert!((c.overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unrelated_scene_is_fully_occluded_and_cluttered() {
        let m = shapes::planar_grid::<f64>(10, 10, 0.1);
        let far = apply_transform(&m, &RigidTransform::from_translation(Vec3::new(50.0, 0.0, 0.0)));
        let id = RigidTransform::identity();
        assert_eq!(occlusion(&m, &far, &id, 0.1), 1.0);
        assert_eq!(clutter(&m, &far, &id, 0.1), 1.0);
        assert_eq!(overlap(&m, &far, &id, 0.1), 0.0);
    }

    #[test]
    fn half_crop_of_flat_model() {
        let m = shapes::planar_grid::<f64>(60, 60, 0.1);
        let mr = mesh_resolution(&m).unwrap();
        let half = crop(&m, |p| p.x <= 2.95);
        let half = TriangleMesh::new(half.vertices().to_vec(), half.triangles().to_vec()).unwrap();
        let scene_pts: Vec<_> = half
            .triangles()
            .iter()
            .flatten()
            .map(|&i| half.vertices()[i])
            .collect();
        let scene = PointCloud::new(scene_pts);
        let o = occlusion(&m, &scene, &RigidTransform::identity(), mr);
        assert!((o - 0.5).abs() < 0.05, "{o}");
    }

    #[test]
    fn distractor_of_equal_area_halves_clutter() {
        let m = shapes::planar_grid::<f64>(30, 30, 0.1);
        let mr = mesh_resolution(&m).unwrap();
        let mut verts = m.vertices().to_vec();
        let mut tris = m.triangles().to_vec();
        let off = verts.len();
        verts.extend(m.vertices().iter().map(|&p| p + Vec3::new(0.0, 0.0, 10.0)));
        tris.extend(m.triangles().iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        let scene = TriangleMesh::new(verts, tris).unwrap();
        let c = clutter(&m, &scene, &RigidTransform::identity(), mr);
        assert!((c - 0.5).abs() < 0.05, "{c}");
        assert_eq!(clutter(&m, &m, &RigidTransform::identity(), mr), 0.0);
    }

    #[test]
    fn grids_sharing_half_their_extent() {
        let a = shapes::planar_grid::<f64>(40, 40, 0.1).to_cloud();
        let b = apply_transform(&a, &RigidTransform::from_translation(Vec3::new(2.0, 0.0, 0.0)));
        let o = overlap(&a, &b, &RigidTransform::identity(), 0.01);
        assert!((o - 0.5).abs() < 0.02, "{o}");
        assert!((overlap(&a, &a, &RigidTransform::identity(), 0.1) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn fractions_stay_in_unit_interval(
            cut in -1.2f64..1.2,
            seed in 0u64..1000,
            shift in 0.0f64..3.0,
        ) {
            let m = shapes::icosphere::<f64>(2, 1.0);
            let mr = mesh_resolution(&m).unwrap();
            let cropped = crop(&m, |p| p.x <= cut);
            let mut verts = cropped.vertices().to_vec();
            verts.extend(m.vertices().iter().map(|&p| p + Vec3::new(shift, 2.5, 0.0)));
            let mut tris = cropped.triangles().to_vec();
            let off = cropped.vertex_count();
            tris.extend(m.triangles().iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
            let composite = TriangleMesh::new(verts, tris).unwrap();
            let (scene, gt) = moved(&composite, seed);
            let c = SceneComposition::measure(&m, &scene, &gt, mr);
            prop_assert!(c.is_valid(), "{c:?}");
            let visible = 1.0 - c.occlusion;
            prop_assert_eq!(c.occlusion + visible, 1.0);
        }
    }
}
