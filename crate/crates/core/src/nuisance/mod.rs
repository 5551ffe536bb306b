//! Seeded nuisance generators and scene-composition metrics.

mod boundary;
mod composition;
mod decimate;
mod noise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::GeomError;

pub use boundary::{distance_to_boundary, BoundaryEdges};
pub use composition::{
    clutter, occlusion, overlap, AreaElements, CompositionSurface, SceneComposition, PROXIMITY_MR,
};
pub use decimate::decimate_mesh;
pub use noise::{
    add_gaussian_noise, add_gaussian_noise_mesh, add_shot_noise, add_shot_noise_mesh,
    perturb_keypoint_indices, perturb_keypoints, shot_noise_indices,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NuisanceError {
    #[error("geometry has no normals")]
    MissingNormals,
    #[error("decimation would leave {0} vertices (need at least 4)")]
    TooFewVertices(usize),
    #[error("{kind} level {level} outside {range}")]
    LevelOutOfRange {
        kind: NuisanceKind,
        level: f64,
        range: &'static str,
    },
    #[error("unknown nuisance kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuisanceKind {
    GaussianNoise,
    MeshDecimation,
    ShotNoise,
    KeypointError,
    BoundaryBinning,
    OcclusionBinning,
    ClutterBinning,
    OverlapBinning,
}

impl NuisanceKind {
    pub const ALL: [NuisanceKind; 8] = [
        NuisanceKind::GaussianNoise,
        NuisanceKind::MeshDecimation,
        NuisanceKind::ShotNoise,
        NuisanceKind::KeypointError,
        NuisanceKind::BoundaryBinning,
        NuisanceKind::OcclusionBinning,
        NuisanceKind::ClutterBinning,
        NuisanceKind::OverlapBinning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NuisanceKind::GaussianNoise => "gaussian-noise",
            NuisanceKind::MeshDecimation => "mesh-decimation",
            NuisanceKind::ShotNoise => "shot-noise",
            NuisanceKind::KeypointError => "keypoint-error",
            NuisanceKind::BoundaryBinning => "boundary-binning",
            NuisanceKind::OcclusionBinning => "occlusion-binning",
            NuisanceKind::ClutterBinning => "clutter-binning",
            NuisanceKind::OverlapBinning => "overlap-binning",
        }
    }

    /// Binning kinds group measured keypoints or pairs instead of synthesizing a nuisance.
    pub fn is_binning(self) -> bool {
        matches!(
            self,
            NuisanceKind::BoundaryBinning
                | NuisanceKind::OcclusionBinning
                | NuisanceKind::ClutterBinning
                | NuisanceKind::OverlapBinning
        )
    }

    /// The default level schedule.
    ///
    /// Units: mr for noise, vertex fraction for decimation, outlier ratio for
    /// shot noise, multiples of `R` for keypoint error and boundary bins
    /// (lower bin edges), fractions for the composition bins (lower edges).
    pub fn default_schedule(self) -> Vec<f64> {
        match self {
            NuisanceKind::GaussianNoise => vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            NuisanceKind::MeshDecimation => vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125],
            NuisanceKind::ShotNoise => vec![0.001, 0.003, 0.005, 0.008, 0.01, 0.03, 0.05],
            NuisanceKind::KeypointError => vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            NuisanceKind::BoundaryBinning => vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            NuisanceKind::OcclusionBinning => vec![0.0, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90],
            NuisanceKind::ClutterBinning => vec![0.0, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90],
            NuisanceKind::OverlapBinning => vec![0.0, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90],
        }
    }

    fn range(self) -> (f64, f64, &'static str) {
        match self {
            NuisanceKind::GaussianNoise | NuisanceKind::KeypointError | NuisanceKind::BoundaryBinning => {
                (0.0, f64::INFINITY, "[0, inf)")
            }
            NuisanceKind::MeshDecimation => (f64::MIN_POSITIVE, 1.0, "(0, 1]"),
            NuisanceKind::ShotNoise
            | NuisanceKind::OcclusionBinning
            | NuisanceKind::ClutterBinning
            | NuisanceKind::OverlapBinning => (0.0, 1.0, "[0, 1]"),
        }
    }
}

impl fmt::Display for NuisanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NuisanceKind {
    type Err = NuisanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NuisanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| NuisanceError::UnknownKind(s.to_string()))
    }
}

/// One nuisance level with its seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuisanceConfig {
    pub kind: NuisanceKind,
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NuisanceConfig {
    pub fn new(kind: NuisanceKind, level: f64, seed: u64) -> Result<Self, NuisanceError> {
        let c = Self { kind, level, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), NuisanceError> {
        let (lo, hi, range) = self.kind.range();
        if !(self.level >= lo && self.level <= hi) {
            return Err(NuisanceError::LevelOutOfRange {
                kind: self.kind,
                level: self.level,
                range,
            });
        }
        Ok(())
    }

    /// Short condition label such as `gaussian-noise=0.4`.
    pub fn label(&self) -> String {
        format!("{}={}", self.kind, self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_ranges() {
        assert!(NuisanceConfig::new(NuisanceKind::MeshDecimation, 0.0, 1).is_err());
        assert!(NuisanceConfig::new(NuisanceKind::MeshDecimation, 1.0, 1).is_ok());
        assert!(NuisanceConfig::new(NuisanceKind::ShotNoise, 1.5, 1).is_err());
        assert!(NuisanceConfig::new(NuisanceKind::GaussianNoise, -0.1, 1).is_err());
        for k in NuisanceKind::ALL {
            for l in k.default_schedule() {
                assert!(NuisanceConfig::new(k, l, 0).is_ok(), "{k} {l}");
            }
            assert_eq!(k.name().parse::<NuisanceKind>().unwrap(), k);
        }
    }

    #[test]
    fn config_toml_round_trip() {
        let c = NuisanceConfig::new(NuisanceKind::ShotNoise, 0.03, 7).unwrap();
        let s = toml::to_string(&c).unwrap();
        assert!(s.contains("kind = \"shot-noise\""));
        assert_eq!(toml::from_str::<NuisanceConfig>(&s).unwrap(), c);
    }
}
