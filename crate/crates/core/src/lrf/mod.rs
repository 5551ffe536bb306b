//! The fourteen LRF axis methods, factored into direction estimators,
//! weight schemes and sign disambiguation, plus frame assembly.

mod axis;
mod covariance;
mod disambiguation;
mod frame;
mod ga;
mod spec;
mod weights;

use thiserror::Error;

use crate::eigen::EigenError;
use crate::geom::GeomError;
use crate::{Real, Vec3};

pub use axis::{
    axis_from_neighborhood, compute_axis, compute_frame, AxisDiagnostics, AxisOutcome,
    Neighborhood, Surface,
};
pub use covariance::{
    barycenter, covariance_of_points, mesh_covariance, project_to_plane, triangle_covariance,
    CovarianceAccumulator,
};
pub use disambiguation::{disambiguate_normal_mean, disambiguate_points_mean};
pub use frame::{assemble_frame, Frame};
pub use ga::{ga_ma_axis, ga_mh_axis, ga_mpp_axis, SalientAxis, BORDER_FRACTION};
pub use spec::{
    AxisKind, AxisMethodSpec, Dataset, Direction, Disambiguation, Method, SpecError, WeightScheme,
    SMALL_RADIUS_FRACTION,
};
pub use weights::{weight_area, weight_height, weight_radial, HeightWeights};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AxisError {
    #[error("no neighbors within the support radius")]
    EmptyRegion,
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("all triangles are degenerate")]
    ZeroTotalArea,
    #[error("neighbor heights are all at or below the keypoint")]
    DegenerateHeights,
    #[error("degenerate spectrum: relative eigengap {eigengap:e}")]
    DegenerateSpectrum { eigengap: f64 },
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("axis direction undefined: salient construction collapses onto the keypoint")]
    DegenerateAxis,
    #[error("no neighbor in the border annulus")]
    NoBorderPoints,
    #[error("z and x axes are parallel")]
    ParallelAxes,
    #[error("surface has no normals")]
    MissingNormals,
    #[error("method needs a mesh but the surface is a bare cloud")]
    MissingMesh,
    #[error("method needs a z-axis")]
    MissingZAxis,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl From<EigenError> for AxisError {
    fn from(e: EigenError) -> Self {
        match e {
            EigenError::DegenerateSpectrum { eigengap } => AxisError::DegenerateSpectrum { eigengap },
            EigenError::NotSymmetric => AxisError::NotSymmetric,
        }
    }
}

impl AxisError {
    /// Geometric degeneracy, as opposed to a misuse of the API.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            AxisError::EmptyRegion
                | AxisError::AllZeroWeights
                | AxisError::ZeroTotalArea
                | AxisError::DegenerateHeights
                | AxisError::DegenerateSpectrum { .. }
                | AxisError::DegenerateAxis
                | AxisError::NoBorderPoints
                | AxisError::ParallelAxes
        )
    }
}

/// The sign representative of `±v` whose first nonzero component is positive.
pub fn tie_break_sign<T: Real>(v: Vec3<T>) -> Vec3<T> {
    for i in 0..3 {
        if v[i] > T::zero() {
            return v;
        }
        if v[i] < T::zero() {
            return -v;
        }
    }
    v
}

/// `v` if `s > 0`, `-v` if `s < 0`, and the tie-break representative on an exact zero.
pub(crate) fn orient_by<T: Real>(v: Vec3<T>, s: T) -> Vec3<T> {
    if s > T::zero() {
        v
    } else if s < T::zero() {
        -v
    } else {
        tie_break_sign(v)
    }
}
