use serde::{Deserialize, Serialize};

use crate::eval::repeatability::pair_seed;
use crate::eval::{
    evaluate_correspondences, prepare_pairs, EvalError, KeypointCorrespondence, RepeatabilityReport, ScenePair,
};
use crate::lrf::{AxisMethodSpec, Surface};
use crate::nuisance::{
    add_gaussian_noise, add_gaussian_noise_mesh, add_shot_noise, add_shot_noise_mesh, decimate_mesh,
    perturb_keypoint_indices, BoundaryEdges, NuisanceConfig, NuisanceKind,
};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessOptions {
    pub keypoints: usize,
    pub threshold_deg: f64,
    pub seed: u64,
    /// Shot-noise displacement, in mr.
    pub shot_amplitude_mr: f64,
    /// The `R` of keypoint-error levels and boundary bins, in mr.
    pub reference_radius_mr: f64,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self {
            keypoints: 1000,
            threshold_deg: 5.0,
            seed: 0,
            shot_amplitude_mr: 20.0,
            reference_radius_mr: 20.0,
        }
    }
}

/// A measurement bin built from consecutive lower edges; the last bin is open above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub label: String,
    /// Boundary bins are closed on the right, composition bins on the left.
    pub right_closed: bool,
}

impl Bin {
    pub fn for_kind(kind: NuisanceKind, edges: &[f64]) -> Vec<Bin> {
        let boundary = kind == NuisanceKind::BoundaryBinning;
        let pct = |x: f64| format!("{}%", (x * 100.0).round());
        let n = edges.len();
        edges
            .iter()
            .enumerate()
            .map(|(i, &lo)| {
                let hi = edges.get(i + 1).copied().unwrap_or(f64::INFINITY);
                let label = match (boundary, i, i + 1 == n) {
                    (true, _, true) => format!(">{lo}R"),
                    (true, _, false) => format!("({lo}R,{hi}R]"),
                    (false, 0, false) if lo == 0.0 => format!("<{}", pct(hi)),
                    (false, _, true) => format!("[{},100%]", pct(lo)),
                    (false, _, false) => format!("[{},{})", pct(lo), pct(hi)),
                };
                Bin {
                    lower: lo,
                    upper: hi,
                    label,
                    right_closed: boundary,
                }
            })
            .collect()
    }

    pub fn contains(&self, v: f64) -> bool {
        if self.right_closed {
            (v > self.lower || (self.lower == 0.0 && v == 0.0)) && v <= self.upper
        } else {
            v >= self.lower && v < self.upper
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub level: f64,
    pub label: String,
    /// `None` when no pair or keypoint fell into this level.
    pub report: Option<RepeatabilityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCurve {
    pub kind: NuisanceKind,
    pub method: String,
    pub points: Vec<CurvePoint>,
}

pub(crate) fn nuisance_scene<T: Real>(
    pair: &ScenePair<T>,
    config: &NuisanceConfig,
    options: &RobustnessOptions,
) -> Result<Option<Surface<T>>, EvalError> {
    let (mr, level, seed) = (pair.mr, config.level, config.seed);
    let surface = match config.kind {
        NuisanceKind::GaussianNoise if level == 0.0 => return Ok(None),
        NuisanceKind::GaussianNoise => match pair.scene.mesh() {
            Some(m) => Surface::from_mesh(add_gaussian_noise_mesh(m, level, mr, seed)),
            None => Surface::from_cloud_default(add_gaussian_noise(pair.scene.cloud(), level, mr, seed))?,
        },
        NuisanceKind::MeshDecimation if level == 1.0 => return Ok(None),
        NuisanceKind::MeshDecimation => {
            let m = pair
                .scene
                .mesh()
                .ok_or_else(|| EvalError::Schedule(format!("{}: decimation needs a mesh scene", pair.source)))?;
            Surface::from_mesh(decimate_mesh(m, level)?)
        }
        NuisanceKind::ShotNoise if level == 0.0 => return Ok(None),
        NuisanceKind::ShotNoise => {
            let amp = T::lit(options.shot_amplitude_mr) * mr;
            match pair.scene.mesh() {
                Some(m) => Surface::from_mesh(add_shot_noise_mesh(m, level, amp, seed)?),
                None => Surface::from_cloud_default(add_shot_noise(pair.scene.cloud(), level, amp, seed)?)?,
            }
        }
        _ => return Ok(None),
    };
    Ok(Some(surface))
}

fn level_label(kind: NuisanceKind, level: f64) -> String {
    format!("{kind}={level}")
}

fn evaluate_level<T: Real>(
    pairs: &[ScenePair<T>],
    specs: &[AxisMethodSpec],
    kind: NuisanceKind,
    level_index: usize,
    level: f64,
    options: &RobustnessOptions,
) -> Result<Vec<RepeatabilityReport>, EvalError> {
    let label = level_label(kind, level);
    let mut per_spec: Vec<Vec<RepeatabilityReport>> = vec![Vec::new(); specs.len()];
    for (i, pair) in pairs.iter().enumerate() {
        let seed = pair_seed(options.seed, i) ^ (level_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let config = NuisanceConfig::new(kind, level, seed)?;
        let altered = nuisance_scene(pair, &config, options)?;
        let owned;
        let pair_ref = match altered {
            Some(scene) => {
                owned = ScenePair { scene, ..pair.clone() };
                &owned
            }
            None => pair,
        };
        let prepared = prepare_pairs(std::slice::from_ref(pair_ref), options.keypoints, pair_seed(options.seed, i))?;
        let mut corr = prepared.into_iter().next().expect("one pair").correspondences;
        if kind == NuisanceKind::KeypointError && level > 0.0 {
            let scene = pair_ref.scene.points();
            let keys: Vec<_> = corr.iter().map(|c| scene[c.scene_index]).collect();
            let magnitude = T::lit(level * options.reference_radius_mr) * pair_ref.mr;
            let moved = perturb_keypoint_indices(&keys, pair_ref.scene.cloud(), pair_ref.scene.tree(), magnitude, seed);
            for (c, m) in corr.iter_mut().zip(moved) {
                c.scene_index = m;
            }
        }
        for (s, spec) in specs.iter().enumerate() {
            per_spec[s].push(evaluate_correspondences(pair_ref, spec, &corr, options.threshold_deg, &label, false)?);
        }
    }
    Ok(specs
        .iter()
        .zip(per_spec)
        .map(|(spec, reps)| RepeatabilityReport::aggregate(&spec.name(), &label, &reps))
        .collect())
}

fn evaluate_bins<T: Real>(
    pairs: &[ScenePair<T>],
    specs: &[AxisMethodSpec],
    kind: NuisanceKind,
    bins: &[Bin],
    options: &RobustnessOptions,
) -> Result<Vec<Vec<Option<RepeatabilityReport>>>, EvalError> {
    let prepared = prepare_pairs(pairs, options.keypoints, options.seed)?;
    // groups[bin][pair] = correspondences of that pair falling in the bin
    let mut groups: Vec<Vec<(usize, Vec<KeypointCorrespondence>)>> = vec![Vec::new(); bins.len()];
    for (pi, p) in prepared.iter().enumerate() {
        if kind == NuisanceKind::BoundaryBinning {
            let mesh = p
                .pair
                .scene
                .mesh()
                .ok_or_else(|| EvalError::Schedule(format!("{}: boundary binning needs a mesh scene", p.pair.source)))?;
            let edges = BoundaryEdges::new(mesh);
            let unit = (T::lit(options.reference_radius_mr) * p.pair.mr).as_f64();
            let mut split: Vec<Vec<KeypointCorrespondence>> = vec![Vec::new(); bins.len()];
            for c in &p.correspondences {
                let d = edges.distance(p.pair.scene.points()[c.scene_index]).as_f64() / unit;
                if let Some(b) = bins.iter().position(|b| b.contains(d)) {
                    split[b].push(*c);
                }
            }
            for (b, cs) in split.into_iter().enumerate() {
                if !cs.is_empty() {
                    groups[b].push((pi, cs));
                }
            }
        } else {
            let comp = p.pair.composition;
            let v = match kind {
                NuisanceKind::OcclusionBinning => comp.occlusion,
                NuisanceKind::ClutterBinning => comp.clutter,
                _ => comp.overlap,
            };
            if let Some(b) = bins.iter().position(|b| b.contains(v)) {
                groups[b].push((pi, p.correspondences.clone()));
            }
        }
    }
    let mut out = vec![Vec::with_capacity(bins.len()); specs.len()];
    for (bin, group) in bins.iter().zip(&groups) {
        for (s, spec) in specs.iter().enumerate() {
            if group.is_empty() {
                out[s].push(None);
                continue;
            }
            let reps = group
                .iter()
                .map(|(pi, cs)| evaluate_correspondences(prepared[*pi].pair, spec, cs, options.threshold_deg, &bin.label, false))
                .collect::<Result<Vec<_>, _>>()?;
            out[s].push(Some(RepeatabilityReport::aggregate(&spec.name(), &bin.label, &reps)));
        }
    }
    Ok(out)
}

/// Repeatability curves of every spec over a nuisance schedule.
///
/// Synthesized kinds apply the nuisance to each scene at each level. Binning
/// kinds take `levels` as lower bin edges and group keypoints (boundary) or
/// pairs (occlusion, clutter, overlap) by their measured value; empty bins
/// yield points without a report.
pub fn robustness_schedule<T: Real>(
    pairs: &[ScenePair<T>],
    specs: &[AxisMethodSpec],
    kind: NuisanceKind,
    levels: &[f64],
    options: &RobustnessOptions,
) -> Result<Vec<RobustnessCurve>, EvalError> {
    if levels.is_empty() {
        return Err(EvalError::Schedule(format!("{kind}: empty schedule")));
    }
    let mut curves: Vec<RobustnessCurve> = specs
        .iter()
        .map(|s| RobustnessCurve {
            kind,
            method: s.name(),
            points: Vec::new(),
        })
        .collect();
    if kind.is_binning() {
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EvalError::Schedule(format!("{kind}: bin edges must increase")));
        }
        let bins = Bin::for_kind(kind, levels);
        let table = evaluate_bins(pairs, specs, kind, &bins, options)?;
        for (curve, row) in curves.iter_mut().zip(table) {
            for (bin, report) in bins.iter().zip(row) {
                curve.points.push(CurvePoint {
                    level: bin.lower,
                    label: bin.label.clone(),
                    report,
                });
            }
        }
    } else {
        for (li, &level) in levels.iter().enumerate() {
            let reports = evaluate_level(pairs, specs, kind, li, level, options)?;
            for (curve, r) in curves.iter_mut().zip(reports) {
                curve.points.push(CurvePoint {
                    level,
                    label: level_label(kind, level),
                    report: Some(r),
                });
            }
        }
    }
    Ok(curves)
}
