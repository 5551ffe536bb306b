use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::{nuisance_scene, RobustnessOptions, ScenePair};
use crate::geom::{apply_transform, mesh_resolution, RigidTransform, TriangleMesh};
use crate::io::IoError;
use crate::lrf::Surface;
use crate::nuisance::{NuisanceConfig, NuisanceKind};
use crate::shapes::{self, BumpPattern};
use crate::{Real, Vec3};

pub const MIN_SYNTHETIC_VERTICES: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseShape {
    Sphere,
    Superellipsoid { semi_axes: [f64; 3], exponent: f64 },
    BumpyField,
}

/// Partial-view crop applied to the scene, in the model frame, relative to the
/// model centroid. Lengths are in mesh resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Crop {
    /// Keeps the side `normal·(p - c) >= offset`.
    HalfSpace { normal: [f64; 3], offset: f64 },
    /// Keeps points whose direction from the centroid lies within the cone.
    ViewCone { direction: [f64; 3], half_angle_deg: f64 },
}

/// Recipe for a synthetic model/scene pair. Geometry is scaled so the model's
/// mesh resolution is 1, which makes all lengths here mr-valued.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub shape: BaseShape,
    /// Minimum vertex count of the base mesh.
    pub density: usize,
    pub bump_amplitude: f64,
    /// Angular frequency of the bumps, per mr.
    pub bump_frequency: f64,
    pub crop: Option<Crop>,
    pub seed: u64,
    /// Scene nuisances applied after the rigid motion, in order.
    pub nuisances: Vec<NuisanceConfig>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            shape: BaseShape::BumpyField,
            density: 10_000,
            bump_amplitude: 3.0,
            bump_frequency: 0.15,
            crop: None,
            seed: 0,
            nuisances: Vec::new(),
        }
    }
}

fn icosphere_subdivisions(vertices: usize) -> u32 {
    (0..12).find(|&s| 10 * 4usize.pow(s) + 2 >= vertices).unwrap_or(11)
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::Synthetic(m));
        if self.density < MIN_SYNTHETIC_VERTICES {
            return bad(format!("density {} is below {MIN_SYNTHETIC_VERTICES} vertices", self.density));
        }
        if self.density > 4_000_000 {
            return bad(format!("density {} is too large", self.density));
        }
        if !(self.bump_amplitude >= 0.0 && self.bump_amplitude.is_finite()) {
            return bad(format!("bump amplitude {} must be finite and >= 0", self.bump_amplitude));
        }
        if !(self.bump_frequency > 0.0 && self.bump_frequency.is_finite()) {
            return bad(format!("bump frequency {} must be positive", self.bump_frequency));
        }
        if let BaseShape::Superellipsoid { semi_axes, exponent } = &self.shape {
            if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) || !(*exponent > 0.0 && exponent.is_finite()) {
                return bad("superellipsoid needs positive semi-axes and exponent".into());
            }
        }
        match &self.crop {
            Some(Crop::HalfSpace { normal, offset }) if Vec3::<f64>::from_f64(*normal).norm() == 0.0 || !offset.is_finite() => {
                return bad("half-space crop needs a nonzero normal".into())
            }
            Some(Crop::ViewCone { direction, half_angle_deg })
                if Vec3::<f64>::from_f64(*direction).norm() == 0.0 || !(*half_angle_deg > 0.0 && *half_angle_deg <= 180.0) =>
            {
                return bad("view cone needs a nonzero direction and an angle in (0, 180]".into())
            }
            _ => {}
        }
        for n in &self.nuisances {
            n.validate()?;
            if !matches!(
                n.kind,
                NuisanceKind::GaussianNoise | NuisanceKind::MeshDecimation | NuisanceKind::ShotNoise
            ) {
                return bad(format!("{} does not alter a scene", n.kind));
            }
        }
        Ok(())
    }

    /// The base mesh at unit mesh resolution, centered on its centroid.
    fn base_mesh(&self, rng: &mut ChaCha8Rng) -> Result<TriangleMesh<f64>, IoError> {
        let pattern = BumpPattern::random(rng, self.bump_amplitude, self.bump_frequency);
        let mesh = match &self.shape {
            BaseShape::BumpyField => {
                let n = (self.density as f64).sqrt().ceil() as usize;
                shapes::bumpy_field::<f64, _>(rng, n, 1.0, 0.2, &pattern)
            }
            BaseShape::Sphere => radial_bumps(shapes::icosphere(icosphere_subdivisions(self.density), 1.0), &pattern)?,
            BaseShape::Superellipsoid { semi_axes, exponent } => {
                let s = icosphere_subdivisions(self.density);
                radial_bumps(shapes::superellipsoid(s, *semi_axes, *exponent), &pattern)?
            }
        };
        let (v, t, _) = mesh.into_parts();
        let c = v.iter().fold(Vec3::zeros(), |a, &p| a + p) * (1.0 / v.len() as f64);
        let centered = TriangleMesh::new(v.into_iter().map(|p| p - c).collect(), t)?;
        let mr = mesh_resolution(&centered)?;
        let (v, t, _) = centered.into_parts();
        Ok(TriangleMesh::new(v.into_iter().map(|p| p * (1.0 / mr)).collect(), t)?)
    }
}

/// Rescales a closed shape to roughly unit edge length and displaces each
/// vertex radially by the bump pattern.
fn radial_bumps(mesh: TriangleMesh<f64>, pattern: &BumpPattern) -> Result<TriangleMesh<f64>, IoError> {
    let scale = 1.0 / mesh_resolution(&mesh)?;
    let (v, t, _) = mesh.into_parts();
    let v = v
        .into_iter()
        .map(|p| {
            let q = p * scale;
            let dir = q.normalize();
            q + dir * pattern.eval(q.to_f64())
        })
        .collect();
    Ok(TriangleMesh::new(v, t)?)
}

/// Keeps triangles whose three vertices pass `keep`, dropping unreferenced vertices.
fn crop_mesh(mesh: &TriangleMesh<f64>, keep: impl Fn(Vec3<f64>) -> bool) -> TriangleMesh<f64> {
    let inside: Vec<bool> = mesh.vertices().iter().map(|&p| keep(p)).collect();
    let tris: Vec<[usize; 3]> = mesh.triangles().iter().filter(|t| t.iter().all(|&i| inside[i])).copied().collect();
    let mut remap = vec![usize::MAX; mesh.vertex_count()];
    let mut verts = Vec::new();
    for t in &tris {
        for &i in t {
            if remap[i] == usize::MAX {
                remap[i] = verts.len();
                verts.push(mesh.vertices()[i]);
            }
        }
    }
    let tris = tris.iter().map(|t| t.map(|i| remap[i])).collect();
    TriangleMesh::new(verts, tris).expect("remapped indices are valid")
}

fn apply_crop(mesh: &TriangleMesh<f64>, crop: &Crop) -> TriangleMesh<f64> {
    match crop {
        Crop::HalfSpace { normal, offset } => {
            let n = Vec3::from_f64(*normal).normalize();
            crop_mesh(mesh, |p| n.dot(p) >= *offset)
        }
        Crop::ViewCone { direction, half_angle_deg } => {
            let d = Vec3::from_f64(*direction).normalize();
            let cos = half_angle_deg.to_radians().cos();
            crop_mesh(mesh, |p| p.try_normalize().is_some_and(|u| u.dot(d) >= cos))
        }
    }
}

/// Builds a model, moves a copy by a seeded random pose, crops it and applies
/// the scene nuisances. The same spec always gives the same pair.
pub fn generate_synthetic<T: Real>(spec: &SyntheticSpec) -> Result<ScenePair<T>, IoError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let model = spec.base_mesh(&mut rng)?;
    let extent = model.vertices().iter().map(|p| p.norm()).fold(0.0, f64::max);
    let gt = RigidTransform::<f64>::random(&mut rng, extent);
    let visible = match &spec.crop {
        Some(c) => apply_crop(&model, c),
        None => model.clone(),
    };
    if visible.triangle_count() == 0 {
        return Err(IoError::Synthetic("crop removes the whole surface".into()));
    }
    let scene = apply_transform(&visible, &gt);
    let cast = |m: &TriangleMesh<f64>| {
        let v = m.vertices().iter().map(|p| p.cast::<T>()).collect();
        Surface::from_mesh(TriangleMesh::new(v, m.triangles().to_vec()).expect("same connectivity"))
    };
    let source = format!("synthetic:{}:seed={}", shape_name(&spec.shape), spec.seed);
    let mut pair = ScenePair::new(source, cast(&model), cast(&scene), gt.cast::<T>())?;
    let options = RobustnessOptions::default();
    for n in &spec.nuisances {
        if let Some(s) = nuisance_scene(&pair, n, &options)? {
            pair = pair.with_scene(s);
        }
    }
    Ok(pair)
}

fn shape_name(s: &BaseShape) -> &'static str {
    match s {
        BaseShape::Sphere => "sphere",
        BaseShape::Superellipsoid { .. } => "superellipsoid",
        BaseShape::BumpyField => "bumpy-field",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> SyntheticSpec {
        SyntheticSpec {
            shape: BaseShape::Sphere,
            density: 2000,
            bump_amplitude: 0.0,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn uncropped_sphere_is_a_rigid_copy() {
        let pair = generate_synthetic::<f64>(&sphere()).unwrap();
        assert!((pair.mr - 1.0).abs() < 1e-9, "{}", pair.mr);
        assert_eq!(pair.composition.overlap, 1.0);
        assert!(pair.composition.occlusion.abs() < 1e-12);
        let m = pair.model.mesh().unwrap();
        let s = pair.scene.mesh().unwrap();
        for (a, b) in m.vertices().iter().zip(s.vertices()) {
            assert!((pair.gt.apply_point(*a) - *b).norm() < 1e-9);
        }
    }

    #[test]
    fn half_space_through_centroid_occludes_half() {
        let spec = SyntheticSpec {
            crop: Some(Crop::HalfSpace {
                normal: [0.3, -1.0, 0.2],
                offset: 0.0,
            }),
            density: 10_000,
            ..sphere()
        };
        let pair = generate_synthetic::<f64>(&spec).unwrap();
        let c = pair.composition;
        assert!((c.occlusion - 0.5).abs() < 0.05, "{c:?}");
        assert!(c.overlap > 0.95, "{c:?}");
        assert!(c.clutter.abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSpec {
            density: 900,
            nuisances: vec![NuisanceConfig::new(NuisanceKind::GaussianNoise, 0.5, 3).unwrap()],
            ..Default::default()
        };
        let a = generate_synthetic::<f64>(&spec).unwrap();
        let b = generate_synthetic::<f64>(&spec).unwrap();
        assert_eq!(a.scene.points(), b.scene.points());
        assert_eq!(a.gt, b.gt);
        let c = generate_synthetic::<f64>(&SyntheticSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a.scene.points(), c.scene.points());
    }

    #[test]
    fn noisy_scene_stays_near_moved_model() {
        let spec = SyntheticSpec {
            density: 900,
            nuisances: vec![NuisanceConfig::new(NuisanceKind::GaussianNoise, 0.3, 1).unwrap()],
            ..Default::default()
        };
        let pair = generate_synthetic::<f64>(&spec).unwrap();
        let m = pair.model.points();
        let worst = m
            .iter()
            .zip(pair.scene.points())
            .map(|(a, b)| (pair.gt.apply_point(*a) - *b).norm())
            .fold(0.0, f64::max);
        assert!(worst > 0.0 && worst < 6.0 * 0.3 * 3f64.sqrt(), "{worst}");
    }

    #[test]
    fn view_cone_decimation_and_superellipsoid() {
        let spec = SyntheticSpec {
            shape: BaseShape::Superellipsoid {
                semi_axes: [1.0, 0.7, 0.5],
                exponent: 0.6,
            },
            density: 2500,
            crop: Some(Crop::ViewCone {
                direction: [0.0, 0.0, 1.0],
                half_angle_deg: 70.0,
            }),
            nuisances: vec![NuisanceConfig::new(NuisanceKind::MeshDecimation, 0.5, 0).unwrap()],
            ..Default::default()
        };
        let pair = generate_synthetic::<f32>(&spec).unwrap();
        assert!(pair.model.len() >= 2500);
        assert!(pair.scene.len() < pair.model.len() / 2);
        assert!(pair.composition.occlusion > 0.3);
    }

    #[test]
    fn invalid_specs() {
        let small = SyntheticSpec { density: 100, ..Default::default() };
        assert!(matches!(generate_synthetic::<f64>(&small), Err(IoError::Synthetic(_))));
        let neg = SyntheticSpec { bump_amplitude: -1.0, ..Default::default() };
        assert!(generate_synthetic::<f64>(&neg).is_err());
        let binning = SyntheticSpec {
            nuisances: vec![NuisanceConfig::new(NuisanceKind::OverlapBinning, 0.5, 0).unwrap()],
            ..Default::default()
        };
        assert!(generate_synthetic::<f64>(&binning).is_err());
    }

    #[test]
    fn spec_reads_from_toml() {
        let text = "density = 800\nseed = 4\n[shape]\nkind = \"sphere\"\n[crop]\nkind = \"half-space\"\nnormal = [0, 0, 1]\noffset = 0\n[[nuisances]]\nkind = \"gaussian-noise\"\nlevel = 0.2\n";
        let spec: SyntheticSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.shape, BaseShape::Sphere);
        assert_eq!(spec.nuisances[0].kind, NuisanceKind::GaussianNoise);
        assert_eq!(toml::from_str::<SyntheticSpec>(&toml::to_string(&spec).unwrap()).unwrap(), spec);
    }
}
