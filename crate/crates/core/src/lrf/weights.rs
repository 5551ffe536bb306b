use crate::geom::cloud::doubled_area;
use crate::geom::TriangleMesh;
use crate::lrf::AxisError;
use crate::{Real, Vec3};

/// `max(H)` at or below this leaves the Gaussian height weight undefined.
const MIN_MAX_HEIGHT: f64 = 1e-12;

/// Radial weight `(R - ‖p_i - p‖)²`.
#[inline]
pub fn weight_radial<T: Real>(neighbor: Vec3<T>, keypoint: Vec3<T>, radius: T) -> T {
    let d = radius - neighbor.distance(keypoint);
    d * d
}

/// Area of `triangle` as a fraction of the total area of `local_mesh`.
pub fn weight_area<T: Real>(
    triangle: &[Vec3<T>; 3],
    local_mesh: &TriangleMesh<T>,
) -> Result<T, AxisError> {
    let total: T = local_mesh.triangle_positions().map(|t| doubled_area(&t)).sum();
    if total <= T::zero() {
        return Err(AxisError::ZeroTotalArea);
    }
    Ok(doubled_area(triangle) / total)
}

/// Area-ratio weights for a whole triangle list; they sum to one.
pub(crate) fn area_weights<T: Real>(triangles: &[[Vec3<T>; 3]]) -> Result<Vec<T>, AxisError> {
    let areas: Vec<T> = triangles.iter().map(doubled_area).collect();
    let total: T = areas.iter().copied().sum();
    if total <= T::zero() {
        return Err(AxisError::ZeroTotalArea);
    }
    Ok(areas.into_iter().map(|a| a / total).collect())
}

/// Gaussian height weight of `heights[i]` with `δ = max(H)/9`.
pub fn weight_height<T: Real>(heights: &[T], i: usize) -> Result<T, AxisError> {
    let max_h = max_height(heights.iter().copied());
    if max_h <= T::lit(MIN_MAX_HEIGHT) {
        return Err(AxisError::DegenerateHeights);
    }
    Ok(HeightKernel::with_max(max_h).weight(heights[i]))
}

fn max_height<T: Real>(heights: impl Iterator<Item = T>) -> T {
    heights.fold(T::neg_infinity(), |a, b| if b > a { b } else { a })
}

/// `exp(-(max(H) - h)² / 2δ²)` with `δ = max(H)/9`, set up once per neighborhood.
#[derive(Clone, Copy, Debug)]
struct HeightKernel<T> {
    max_h: T,
    two_delta_sq: T,
}

impl<T: Real> HeightKernel<T> {
    fn with_max(max_h: T) -> Self {
        let delta = max_h / T::lit(9.0);
        Self {
            max_h,
            two_delta_sq: T::lit(2.0) * delta * delta,
        }
    }

    /// `None` when `max(H)` is not positive and the weights fall back to uniform.
    fn new(heights: impl Iterator<Item = T>) -> Option<Self> {
        let max_h = max_height(heights);
        (max_h > T::lit(MIN_MAX_HEIGHT)).then(|| Self::with_max(max_h))
    }

    #[inline]
    fn weight(&self, h: T) -> T {
        let d = self.max_h - h;
        (-(d * d) / self.two_delta_sq).exp()
    }
}

/// Height weights for a neighborhood, falling back to uniform weights when
/// `max(H)` is not positive.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightWeights<T> {
    pub weights: Vec<T>,
    pub uniform_fallback: bool,
}

impl<T: Real> HeightWeights<T> {
    pub fn from_heights(heights: &[T]) -> Self {
        match HeightKernel::new(heights.iter().copied()) {
            Some(k) => Self {
                weights: heights.iter().map(|&h| k.weight(h)).collect(),
                uniform_fallback: false,
            },
            None => Self {
                weights: vec![T::one(); heights.len()],
                uniform_fallback: true,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::grid_mesh;
    use proptest::prelude::*;

    #[test]
    fn radial_weight_values() {
        let o = Vec3::new(0.0, 0.0, 0.0);
        assert_eq!(weight_radial(o, o, 3.0), 9.0);
        assert_eq!(weight_radial(Vec3::new(0.0, 3.0, 0.0), o, 3.0), 0.0);
        assert_eq!(weight_radial(Vec3::new(10.0, 0.0, 0.0), o, 20.0), 100.0);
    }

    #[test]
    fn congruent_triangles_share_area_equally() {
        let mesh = grid_mesh(5);
        let n = mesh.triangle_count() as f64;
        for t in mesh.triangle_positions() {
            assert!((weight_area(&t, &mesh).unwrap() - 1.0 / n).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_triangle_has_zero_area_weight() {
        let mesh = grid_mesh(3);
        let flat = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        assert_eq!(weight_area(&flat, &mesh).unwrap(), 0.0);
        assert_eq!(area_weights(&[flat]), Err(AxisError::ZeroTotalArea));
    }

    #[test]
    fn height_weight_values() {
        let h = [9.0, 0.0, 4.5];
        assert_eq!(weight_height(&h, 0).unwrap(), 1.0);
        let w = weight_height(&h, 1).unwrap();
        assert!((w - (-40.5f64).exp()).abs() < 1e-30);
        assert!((w - 2.57e-18).abs() < 0.01e-18);
        assert_eq!(
            HeightWeights::from_heights(&[2.0, 2.0, 2.0]).weights,
            vec![1.0; 3]
        );
    }

    #[test]
    fn non_positive_max_height_falls_back_to_uniform() {
        assert_eq!(weight_height(&[0.0, -1.0], 0), Err(AxisError::DegenerateHeights));
        let hw = HeightWeights::from_heights(&[0.0, -1.0, -2.0]);
        assert!(hw.uniform_fallback);
        assert_eq!(hw.weights, vec![1.0; 3]);
    }

    proptest! {
        #[test]
        fn area_weights_sum_to_one(coords in prop::collection::vec(-10.0f64..10.0, 9..=90)) {
            let tris: Vec<[Vec3<f64>; 3]> = coords
                .chunks_exact(9)
                .map(|c| [
                    Vec3::new(c[0], c[1], c[2]),
                    Vec3::new(c[3], c[4], c[5]),
                    Vec3::new(c[6], c[7], c[8]),
                ])
                .collect();
            if let Ok(w) = area_weights(&tris) {
                let s: f64 = w.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn height_weights_in_unit_interval(h in prop::collection::vec(-5.0f64..5.0, 1..50)) {
            let hw = HeightWeights::from_heights(&h);
            for w in &hw.weights {
                prop_assert!(*w >= 0.0 && *w <= 1.0);
            }
        }
    }
}
