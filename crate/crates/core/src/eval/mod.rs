//! Evaluation protocol: keypoint correspondence, axis repeatability,
//! parameter sweeps, robustness schedules, pose errors and timing.

mod keypoints;
mod pose;
mod report;
mod repeatability;
mod robustness;
mod sweep;
mod timing;

use thiserror::Error;

use crate::geom::{mesh_resolution, GeomError, RigidTransform};
use crate::lrf::{AxisError, SpecError, Surface};
use crate::nuisance::{NuisanceError, SceneComposition};
use crate::Real;

pub use keypoints::{angle_error, correspond, sample_keypoints, KeypointCorrespondence, SNAP_MR};
pub use pose::{pose_errors, transform_from_frames, PoseErrorResult, POSE_THRESHOLD};
pub use report::{write_long_csv, write_reports_csv, LongRow, REPORT_HEADER};
pub use repeatability::{
    evaluate_correspondences, prepare_pairs, repeatability_run, AxisOutcomeKind, PreparedPair,
    RepeatabilityReport, RunOptions,
};
pub(crate) use robustness::nuisance_scene;
pub use robustness::{robustness_schedule, Bin, CurvePoint, RobustnessCurve, RobustnessOptions};
pub use sweep::{
    sweep_disambiguation, sweep_radius, sweep_weights, sweep_z_dependency, MatrixRow, ReportMatrix,
    SweepKind, DEFAULT_RADII,
};
pub use timing::{timing_run, TimingOptions, TimingRow};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("need {needed} points, surface has {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("{0} is GA-based and has no disambiguation step")]
    NotDisambiguable(String),
    #[error("{0} does not consume a z-axis")]
    NotZDependent(String),
    #[error("invalid scene pair: {0}")]
    InvalidPair(String),
    #[error("{0}")]
    Schedule(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Axis(#[from] AxisError),
    #[error(transparent)]
    Nuisance(#[from] NuisanceError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Model and scene surfaces with the ground-truth pose mapping model to scene.
#[derive(Clone, Debug)]
pub struct ScenePair<T> {
    pub model: Surface<T>,
    pub scene: Surface<T>,
    pub gt: RigidTransform<T>,
    /// Mesh resolution of the model, the length unit for radii and thresholds.
    pub mr: T,
    pub composition: SceneComposition,
    pub source: String,
}

/// Mesh resolution of a surface, from its triangles when it has them.
pub fn surface_resolution<T: Real>(s: &Surface<T>) -> Result<T, GeomError> {
    match s.mesh() {
        Some(m) => mesh_resolution(m),
        None => mesh_resolution(s.cloud()),
    }
}

impl<T: Real> ScenePair<T> {
    /// Measures `mr` on the model and the composition metrics at that `mr`.
    pub fn new(
        source: impl Into<String>,
        model: Surface<T>,
        scene: Surface<T>,
        gt: RigidTransform<T>,
    ) -> Result<Self, EvalError> {
        let mr = surface_resolution(&model)?;
        let composition = SceneComposition::measure(&model, &scene, &gt, mr);
        Self::with_parts(source, model, scene, gt, mr, composition)
    }

    pub fn with_parts(
        source: impl Into<String>,
        model: Surface<T>,
        scene: Surface<T>,
        gt: RigidTransform<T>,
        mr: T,
        composition: SceneComposition,
    ) -> Result<Self, EvalError> {
        if !(mr > T::zero() && mr.is_finite()) {
            return Err(EvalError::InvalidPair(format!("mesh resolution {mr} is not positive")));
        }
        if !composition.is_valid() {
            return Err(EvalError::InvalidPair(format!("composition out of range: {composition:?}")));
        }
        Ok(Self {
            model,
            scene,
            gt,
            mr,
            composition,
            source: source.into(),
        })
    }

    /// The same pair with a different scene, keeping `gt` and `mr` and
    /// re-measuring the composition.
    pub fn with_scene(&self, scene: Surface<T>) -> Self {
        let composition = SceneComposition::measure(&self.model, &scene, &self.gt, self.mr);
        Self {
            model: self.model.clone(),
            scene,
            gt: self.gt,
            mr: self.mr,
            composition,
            source: self.source.clone(),
        }
    }
}
