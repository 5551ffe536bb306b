use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eval::EvalError;
use crate::lrf::{axis_from_neighborhood, compute_axis, AxisMethodSpec, Neighborhood, Surface};
use crate::{Real, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingOptions {
    /// Minimum timed evaluations per (method, radius).
    pub min_evaluations: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        Self { min_evaluations: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: String,
    pub radius_mr: f64,
    pub median_ns_per_axis: f64,
    /// Neighbors (plus triangles for mesh methods) summed over the keypoints.
    pub workload: usize,
}

fn median(mut xs: Vec<u64>) -> f64 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}

/// Median wall time of the axis construction of each spec at each radius.
///
/// Neighborhoods and z-axes are gathered beforehand so only the axis
/// construction itself is timed. One warm-up pass runs over every keypoint,
/// then keypoints are cycled until `min_evaluations` timings are collected.
/// Runs on the calling thread.
pub fn timing_run<T: Real>(
    specs: &[AxisMethodSpec],
    surface: &Surface<T>,
    keypoints: &[Vec3<T>],
    radii: &[f64],
    mr: T,
    options: &TimingOptions,
) -> Result<Vec<TimingRow>, EvalError> {
    if keypoints.is_empty() {
        return Err(EvalError::TooFewPoints { needed: 1, have: 0 });
    }
    let mut rows = Vec::with_capacity(specs.len() * radii.len());
    for spec in specs {
        for &radius in radii {
            let spec = spec.clone().with_radius(radius)?;
            let r = T::lit(radius) * mr;
            let mut cases: Vec<(Neighborhood<T>, Option<Vec3<T>>)> = Vec::with_capacity(keypoints.len());
            for &k in keypoints {
                let z = match &spec.z_dependency {
                    Some(zs) => compute_axis(zs, surface, k, mr).ok().map(|o| o.axis),
                    None => None,
                };
                if spec.direction.needs_z() && z.is_none() {
                    continue;
                }
                cases.push((surface.neighborhood(k, r, spec.direction.is_mesh())?, z));
            }
            if cases.is_empty() {
                return Err(EvalError::TooFewPoints { needed: 1, have: 0 });
            }
            let workload = cases.iter().map(|(nb, _)| nb.points.len() + nb.triangles.len()).sum();
            for (nb, z) in &cases {
                let _ = std::hint::black_box(axis_from_neighborhood(&spec, nb, *z));
            }
            let count = options.min_evaluations.max(cases.len());
            let mut times = Vec::with_capacity(count);
            for i in 0..count {
                let (nb, z) = &cases[i % cases.len()];
                let start = Instant::now();
                let out = axis_from_neighborhood(&spec, std::hint::black_box(nb), *z);
                times.push(start.elapsed().as_nanos() as u64);
                std::hint::black_box(out).ok();
            }
            rows.push(TimingRow {
                method: spec.name(),
                radius_mr: radius,
                median_ns_per_axis: median(times),
                workload,
            });
        }
    }
    Ok(rows)
}
