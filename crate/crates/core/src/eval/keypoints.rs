use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eval::{EvalError, ScenePair};
use crate::geom::RigidTransform;
use crate::{Real, Vec3};

/// Correspondence admission threshold, in mr.
pub const SNAP_MR: f64 = 2.0;

/// `n` distinct indices drawn uniformly without replacement from `0..len`.
pub fn sample_keypoints(len: usize, n: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if n > len {
        return Err(EvalError::TooFewPoints { needed: n, have: len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, len, n).into_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeypointCorrespondence {
    pub scene_index: usize,
    pub model_index: usize,
    pub snap_distance: f64,
}

/// Maps each scene keypoint into model space through `gt⁻¹` and snaps it to
/// the nearest model point. Keypoints farther than `2·mr` from the model are dropped.
pub fn correspond<T: Real>(scene_keypoints: &[usize], pair: &ScenePair<T>) -> Vec<KeypointCorrespondence> {
    let inv = pair.gt.inverse();
    let limit = T::lit(SNAP_MR) * pair.mr;
    let scene = pair.scene.points();
    scene_keypoints
        .iter()
        .filter_map(|&s| {
            let (m, d) = pair.model.tree().nearest(inv.apply_point(scene[s]))?;
            (d <= limit).then_some(KeypointCorrespondence {
                scene_index: s,
                model_index: m,
                snap_distance: d.as_f64(),
            })
        })
        .collect()
}

/// Angle in degrees between a model axis carried into the scene by `gt` and a scene axis.
pub fn angle_error<T: Real>(v_model: Vec3<T>, v_scene: Vec3<T>, gt: &RigidTransform<T>) -> f64 {
    let c = gt.apply_vector(v_model).dot(v_scene).as_f64();
    c.clamp(-1.0, 1.0).acos().to_degrees()
}
