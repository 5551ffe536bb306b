use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::ScenePair;
use crate::geom::RigidTransform;
use crate::io::pose::{load_pose, pose_from_values, PoseConvention};
use crate::io::{load_obj, load_ply, Geometry, IoError};
use crate::lrf::{Dataset, Surface};
use crate::Real;

/// Where the ground-truth pose of a pair comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum PoseSource {
    File(PathBuf),
    Matrix(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixText {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

/// One `[[pair]]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub model: PathBuf,
    pub scene: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt_matrix: Option<MatrixText>,
    /// Precomputed overlap ratio; replaces the measured one when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    /// `ply` or `obj`; inferred from the extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl PairEntry {
    pub fn new(model: impl Into<PathBuf>, scene: impl Into<PathBuf>, gt: PoseSource) -> Self {
        let (gt, gt_matrix) = match gt {
            PoseSource::File(p) => (Some(p), None),
            PoseSource::Matrix(m) => (None, Some(MatrixText::Rows(m.chunks(4).map(<[f64]>::to_vec).collect()))),
        };
        Self {
            model: model.into(),
            scene: scene.into(),
            gt,
            gt_matrix,
            overlap: None,
            format: None,
        }
    }

    pub fn pose_source(&self) -> Result<PoseSource, IoError> {
        match (&self.gt, &self.gt_matrix) {
            (Some(p), None) => Ok(PoseSource::File(p.clone())),
            (None, Some(MatrixText::Flat(v))) => Ok(PoseSource::Matrix(v.clone())),
            (None, Some(MatrixText::Rows(r))) => Ok(PoseSource::Matrix(r.concat())),
            (Some(_), Some(_)) => Err(IoError::Manifest("pair sets both `gt` and `gt_matrix`".into())),
            (None, None) => Err(IoError::Manifest("pair needs `gt` or `gt_matrix`".into())),
        }
    }

    /// The entry as a TOML `[[pair]]` stanza.
    pub fn to_toml_stanza(&self) -> String {
        #[derive(Serialize)]
        struct Wrap<'a> {
            pair: [&'a PairEntry; 1],
        }
        toml::to_string(&Wrap { pair: [self] }).expect("pair entries serialize")
    }

    fn label(&self) -> String {
        format!("{} -> {}", self.model.display(), self.scene.display())
    }
}

fn one() -> f64 {
    1.0
}

/// A dataset described as a TOML file of model/scene/pose triples.
///
/// ```toml
/// name = "kinect-subset"
/// dataset = "K3R"          # optional, selects parameter presets
/// unit_scale = 1000.0      # multiplies scan coordinates and translations
/// pose_unit_scale = 1.0    # extra factor on pose translations only
/// transpose_poses = false  # pose files are column-major
///
/// [[pair]]
/// model = "models/bunny.ply"
/// scene = "scenes/scene_01.ply"
/// gt = "gt/bunny_01.txt"
///
/// [[pair]]
/// model = "models/dragon.obj"
/// scene = "scenes/scene_01.ply"
/// gt_matrix = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
/// overlap = 0.42
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<Dataset>,
    #[serde(default = "one")]
    pub unit_scale: f64,
    #[serde(default = "one")]
    pub pose_unit_scale: f64,
    #[serde(default)]
    pub transpose_poses: bool,
    /// Default for entries without their own `format`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, rename = "pair")]
    pub pairs: Vec<PairEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Result of loading a manifest: the pairs that loaded, per-entry failures
/// and the entries dropped by the overlap filter.
#[derive(Debug)]
pub struct ManifestLoad<T> {
    pub name: String,
    pub dataset: Option<Dataset>,
    pub pairs: Vec<ScenePair<T>>,
    pub errors: Vec<(String, IoError)>,
    pub filtered: Vec<String>,
}

impl DatasetManifest {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, IoError> {
        let mut m: Self = toml::from_str(text).map_err(|e| IoError::Manifest(e.to_string()))?;
        m.base_dir = base_dir.into();
        if !(m.unit_scale > 0.0 && m.unit_scale.is_finite()) || !(m.pose_unit_scale > 0.0 && m.pose_unit_scale.is_finite()) {
            return Err(IoError::Manifest("unit scales must be positive".into()));
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, dir)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn load_surface<T: Real>(&self, path: &Path, hint: Option<&str>) -> Result<Surface<T>, IoError> {
        let path = self.resolve(path);
        let format = hint
            .or(self.format.as_deref())
            .map(str::to_ascii_lowercase)
            .or_else(|| path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase()));
        let geometry: Geometry<T> = match format.as_deref() {
            Some("ply") => load_ply(&path)?,
            Some("obj") => load_obj(&path)?,
            other => return Err(IoError::Manifest(format!("{}: unknown scan format {other:?}", path.display()))),
        };
        Ok(match geometry.scaled(T::lit(self.unit_scale)) {
            Geometry::Mesh(m) => Surface::from_mesh(m),
            Geometry::Cloud(c) => Surface::from_cloud_default(c)?,
        })
    }

    fn load_pose<T: Real>(&self, entry: &PairEntry) -> Result<RigidTransform<T>, IoError> {
        let conv = PoseConvention {
            transpose: self.transpose_poses,
            unit_scale: self.unit_scale * self.pose_unit_scale,
        };
        match entry.pose_source()? {
            PoseSource::File(p) => load_pose(self.resolve(&p), conv),
            PoseSource::Matrix(v) => Ok(pose_from_values(&v, conv)?),
        }
    }

    /// Loads one entry into a scene pair.
    pub fn load_entry<T: Real>(&self, entry: &PairEntry) -> Result<ScenePair<T>, IoError> {
        let hint = entry.format.as_deref();
        let model = self.load_surface(&entry.model, hint)?;
        let scene = self.load_surface(&entry.scene, hint)?;
        let gt = self.load_pose(entry)?;
        let mut pair = ScenePair::new(entry.label(), model, scene, gt)?;
        if let Some(o) = entry.overlap {
            if !(0.0..=1.0).contains(&o) {
                return Err(IoError::Manifest(format!("overlap {o} outside [0, 1]")));
            }
            pair.composition.overlap = o;
        }
        Ok(pair)
    }

    /// Loads every entry in parallel, keeping pairs whose overlap is at least
    /// `overlap_min`. Fails only when no entry loads at all.
    pub fn load_pairs<T: Real>(&self, overlap_min: Option<f64>) -> Result<ManifestLoad<T>, IoError> {
        if self.pairs.is_empty() {
            return Err(IoError::Manifest(format!("manifest `{}` has no [[pair]] entries", self.name)));
        }
        let results: Vec<_> = self.pairs.par_iter().map(|e| (e.label(), self.load_entry::<T>(e))).collect();
        let mut out = ManifestLoad {
            name: self.name.clone(),
            dataset: self.dataset,
            pairs: Vec::new(),
            errors: Vec::new(),
            filtered: Vec::new(),
        };
        for (label, r) in results {
            match r {
                Ok(p) if overlap_min.is_some_and(|m| p.composition.overlap < m) => out.filtered.push(label),
                Ok(p) => out.pairs.push(p),
                Err(e) => {
                    log::warn!("{label}: {e}");
                    out.errors.push((label, e));
                }
            }
        }
        if out.pairs.is_empty() && out.filtered.is_empty() {
            let (label, first) = &out.errors[0];
            return Err(IoError::AllEntriesFailed(format!("{label}: {first}")));
        }
        Ok(out)
    }
}

pub fn load_manifest<T: Real>(path: impl AsRef<Path>, overlap_min: Option<f64>) -> Result<ManifestLoad<T>, IoError> {
    DatasetManifest::load(path)?.load_pairs(overlap_min)
}
