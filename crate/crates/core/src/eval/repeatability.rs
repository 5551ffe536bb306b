use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::{angle_error, correspond, sample_keypoints, EvalError, KeypointCorrespondence, ScenePair};
use crate::lrf::{compute_axis, AxisError, AxisMethodSpec};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub keypoints: usize,
    pub threshold_deg: f64,
    pub seed: u64,
    /// Record mean wall time per axis. Off by default so reports stay reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            keypoints: 1000,
            threshold_deg: 5.0,
            seed: 0,
            timing: false,
        }
    }
}

/// Per-method, per-condition repeatability tally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatabilityReport {
    pub method: String,
    pub condition: String,
    pub n: usize,
    pub repeatable: usize,
    pub degenerate: usize,
    pub repeatability_pct: f64,
    pub mean_angle_deg: Option<f64>,
    pub ns_per_axis: Option<f64>,
}

impl RepeatabilityReport {
    pub fn non_repeatable(&self) -> usize {
        self.n - self.repeatable - self.degenerate
    }

    /// Repeatability among keypoints whose axes were defined on both sides.
    pub fn repeatability_excluding_degenerate(&self) -> f64 {
        let valid = self.n - self.degenerate;
        if valid == 0 {
            0.0
        } else {
            100.0 * self.repeatable as f64 / valid as f64
        }
    }

    /// Share of keypoints with a degenerate outcome, in percent.
    pub fn degenerate_pct(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            100.0 * self.degenerate as f64 / self.n as f64
        }
    }

    /// Sums the counts and takes the unweighted mean of per-pair percentages.
    pub fn aggregate(method: &str, condition: &str, reports: &[RepeatabilityReport]) -> Self {
        let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        Self {
            method: method.to_string(),
            condition: condition.to_string(),
            n: reports.iter().map(|r| r.n).sum(),
            repeatable: reports.iter().map(|r| r.repeatable).sum(),
            degenerate: reports.iter().map(|r| r.degenerate).sum(),
            repeatability_pct: mean(reports.iter().map(|r| r.repeatability_pct).collect()).unwrap_or(0.0),
            mean_angle_deg: mean(reports.iter().filter_map(|r| r.mean_angle_deg).collect()),
            ns_per_axis: mean(reports.iter().filter_map(|r| r.ns_per_axis).collect()),
        }
    }
}

/// A pair with its shared keypoint correspondences.
#[derive(Clone, Debug)]
pub struct PreparedPair<'a, T> {
    pub pair: &'a ScenePair<T>,
    pub correspondences: Vec<KeypointCorrespondence>,
}

pub(crate) fn pair_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Samples `n` scene keypoints per pair (one seeded draw per pair, shared by
/// every method evaluated on it) and builds their correspondences.
pub fn prepare_pairs<T: Real>(pairs: &[ScenePair<T>], n: usize, seed: u64) -> Result<Vec<PreparedPair<'_, T>>, EvalError> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let keys = sample_keypoints(pair.scene.len(), n, pair_seed(seed, i))?;
            Ok(PreparedPair {
                pair,
                correspondences: correspond(&keys, pair),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisOutcomeKind {
    Compared { angle_deg: f64 },
    Degenerate,
}

fn classify<T: Real>(r: Result<crate::lrf::AxisOutcome<T>, AxisError>) -> Result<Option<crate::Vec3<T>>, EvalError> {
    match r {
        Ok(o) => Ok(Some(o.axis)),
        Err(e) if e.is_degenerate() => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Computes `spec` on both sides of every correspondence and tallies the
/// angle errors against `threshold_deg`.
pub fn evaluate_correspondences<T: Real>(
    pair: &ScenePair<T>,
    spec: &AxisMethodSpec,
    correspondences: &[KeypointCorrespondence],
    threshold_deg: f64,
    condition: &str,
    timing: bool,
) -> Result<RepeatabilityReport, EvalError> {
    spec.validate()?;
    let (model, scene) = (pair.model.points(), pair.scene.points());
    let outcomes: Vec<(AxisOutcomeKind, u128)> = correspondences
        .par_iter()
        .map(|c| {
            let start = timing.then(Instant::now);
            let vm = classify(compute_axis(spec, &pair.model, model[c.model_index], pair.mr))?;
            let vs = classify(compute_axis(spec, &pair.scene, scene[c.scene_index], pair.mr))?;
            let ns = start.map_or(0, |s| s.elapsed().as_nanos());
            let kind = match (vm, vs) {
                (Some(a), Some(b)) => AxisOutcomeKind::Compared {
                    angle_deg: angle_error(a, b, &pair.gt),
                },
                _ => AxisOutcomeKind::Degenerate,
            };
            Ok((kind, ns))
        })
        .collect::<Result<_, EvalError>>()?;

    let mut repeatable = 0;
    let mut degenerate = 0;
    let mut angle_sum = 0.0;
    let mut compared = 0usize;
    for (kind, _) in &outcomes {
        match *kind {
            AxisOutcomeKind::Compared { angle_deg } => {
                compared += 1;
                angle_sum += angle_deg;
                if angle_deg < threshold_deg {
                    repeatable += 1;
                }
            }
            AxisOutcomeKind::Degenerate => degenerate += 1,
        }
    }
    let n = outcomes.len();
    let ns_per_axis = (timing && n > 0).then(|| outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / (2 * n) as f64);
    Ok(RepeatabilityReport {
        method: spec.name(),
        condition: condition.to_string(),
        n,
        repeatable,
        degenerate,
        repeatability_pct: if n == 0 { 0.0 } else { 100.0 * repeatable as f64 / n as f64 },
        mean_angle_deg: (compared > 0).then(|| angle_sum / compared as f64),
        ns_per_axis,
    })
}

/// Samples keypoints on the scene, corresponds them and tallies repeatability.
pub fn repeatability_run<T: Real>(
    pair: &ScenePair<T>,
    spec: &AxisMethodSpec,
    options: &RunOptions,
) -> Result<RepeatabilityReport, EvalError> {
    let keys = sample_keypoints(pair.scene.len(), options.keypoints, options.seed)?;
    let corr = correspond(&keys, pair);
    evaluate_correspondences(pair, spec, &corr, options.threshold_deg, "clean", options.timing)
}
