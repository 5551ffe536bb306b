use crate::lrf::AxisError;
use crate::{Real, Vec3};

/// Neighbors farther than this fraction of `R` form the border annulus.
pub const BORDER_FRACTION: f64 = 0.85;

/// Relative length (in units of `R`) below which a constructed x direction is undefined.
const MIN_AXIS_LENGTH: f64 = 1e-9;

/// An x-axis built from one salient neighbor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SalientAxis<T> {
    pub axis: Vec3<T>,
    /// Index of the salient neighbor in the input list.
    pub salient: usize,
}

/// Normalized weighted mean of `p'_i - p` over projected neighbors.
pub fn ga_mpp_axis<T: Real>(
    projected: &[Vec3<T>],
    keypoint: Vec3<T>,
    weights: &[T],
    radius: T,
) -> Result<Vec3<T>, AxisError> {
    assert_eq!(projected.len(), weights.len(), "one weight per point");
    let s: Vec3<T> = projected
        .iter()
        .zip(weights)
        .map(|(&p, &w)| (p - keypoint) * w)
        .sum();
    if !(s.norm() >= T::lit(MIN_AXIS_LENGTH) * radius) {
        return Err(AxisError::DegenerateAxis);
    }
    Ok(s.normalize())
}

fn finish_salient<T: Real>(
    salient: Vec3<T>,
    index: usize,
    keypoint: Vec3<T>,
    z: Vec3<T>,
    radius: T,
) -> Result<SalientAxis<T>, AxisError> {
    let d = salient - keypoint;
    let in_plane = d - z * d.dot(z);
    if !(in_plane.norm() >= T::lit(MIN_AXIS_LENGTH) * radius) {
        return Err(AxisError::DegenerateAxis);
    }
    Ok(SalientAxis {
        axis: in_plane.normalize(),
        salient: index,
    })
}

fn border_threshold_sq<T: Real>(radius: T) -> T {
    let b = T::lit(BORDER_FRACTION) * radius;
    b * b
}

/// x-axis towards the border neighbor whose normal deviates most from the keypoint normal.
pub fn ga_ma_axis<T: Real>(
    neighbors: &[Vec3<T>],
    normals: &[Vec3<T>],
    keypoint: Vec3<T>,
    keypoint_normal: Vec3<T>,
    z: Vec3<T>,
    radius: T,
) -> Result<SalientAxis<T>, AxisError> {
    assert_eq!(neighbors.len(), normals.len(), "one normal per neighbor");
    let b2 = border_threshold_sq(radius);
    let mut best: Option<(usize, T)> = None;
    for (i, (&p, &n)) in neighbors.iter().zip(normals).enumerate() {
        if p.distance_squared(keypoint) <= b2 {
            continue;
        }
        // Largest angle means smallest cosine.
        let c = n.dot(keypoint_normal);
        if best.is_none_or(|(_, bc)| c < bc) {
            best = Some((i, c));
        }
    }
    let (i, _) = best.ok_or(AxisError::NoBorderPoints)?;
    finish_salient(neighbors[i], i, keypoint, z, radius)
}

/// x-axis towards the border neighbor with the largest height `(p_i - p) · z`.
pub fn ga_mh_axis<T: Real>(
    neighbors: &[Vec3<T>],
    keypoint: Vec3<T>,
    z: Vec3<T>,
    radius: T,
) -> Result<SalientAxis<T>, AxisError> {
    let b2 = border_threshold_sq(radius);
    let tie = T::lit(1e-12) * radius;
    let mut best: Option<(usize, T)> = None;
    for (i, &p) in neighbors.iter().enumerate() {
        if p.distance_squared(keypoint) <= b2 {
            continue;
        }
        let h = (p - keypoint).dot(z);
        if best.is_none_or(|(_, bh)| h > bh + tie) {
            best = Some((i, h));
        }
    }
    let (i, _) = best.ok_or(AxisError::NoBorderPoints)?;
    finish_salient(neighbors[i], i, keypoint, z, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    const E3: Vec3<f64> = Vec3::new(0.0, 0.0, 1.0);
    const O: Vec3<f64> = Vec3::new(0.0, 0.0, 0.0);

    #[test]
    fn mpp_examples() {
        assert_eq!(ga_mpp_axis(&[v(2.0, 0.0, 0.0)], O, &[1.0], 5.0).unwrap(), v(1.0, 0.0, 0.0));
        assert_eq!(
            ga_mpp_axis(&[v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)], O, &[1.0, 1.0], 5.0),
            Err(AxisError::DegenerateAxis)
        );
        let a = v(1.0, 0.0, 0.0);
        let b = v(0.0, 1.0, 0.0);
        let x = ga_mpp_axis(&[a, b], O, &[1.0, (-40.5f64).exp()], 5.0).unwrap();
        assert!(x.distance(a) < 1e-8);
    }

    #[test]
    fn ma_picks_largest_normal_angle() {
        let r = 10.0;
        let tilt = |deg: f64| v(deg.to_radians().sin(), 0.0, deg.to_radians().cos());
        let pts = [v(9.0, 0.0, 0.0), v(0.0, 9.0, 0.0), v(1.0, 1.0, 0.0)];
        let normals = [tilt(10.0), tilt(30.0), tilt(80.0)];
        let out = ga_ma_axis(&pts, &normals, O, E3, E3, r).unwrap();
        assert_eq!(out.salient, 1);
        assert_eq!(out.axis, v(0.0, 1.0, 0.0));
    }

    #[test]
    fn no_border_points() {
        let pts = [v(1.0, 0.0, 0.0), v(0.0, 8.5, 0.0)];
        assert_eq!(
            ga_ma_axis(&pts, &[E3, E3], O, E3, E3, 10.0),
            Err(AxisError::NoBorderPoints)
        );
        assert_eq!(ga_mh_axis(&pts, O, E3, 10.0), Err(AxisError::NoBorderPoints));
    }

    #[test]
    fn mh_picks_highest_and_breaks_ties_by_index() {
        let r = 10.0;
        let pts = [v(9.0, 0.0, 1.0), v(0.0, 9.0, 5.0), v(-9.0, 0.0, 3.0)];
        assert_eq!(ga_mh_axis(&pts, O, E3, r).unwrap().salient, 1);
        let tied = [v(9.0, 0.0, 5.0), v(0.0, 9.0, 5.0 + 1e-13)];
        let out = ga_mh_axis(&tied, O, E3, r).unwrap();
        assert_eq!(out.salient, 0);
        assert_eq!(out.axis, v(1.0, 0.0, 0.0));
    }

    #[test]
    fn salient_point_on_axis_is_degenerate() {
        let pts = [v(0.0, 0.0, 9.0)];
        assert_eq!(ga_mh_axis(&pts, O, E3, 10.0), Err(AxisError::DegenerateAxis));
    }
}
