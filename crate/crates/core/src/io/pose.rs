use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::geom::{GeomError, RigidTransform};
use crate::io::IoError;
use crate::{Mat3, Real, Vec3};

/// Largest orthonormality drift of a stored rotation block that is still
/// projected back onto SO(3) rather than rejected.
pub const MAX_POSE_DRIFT: f64 = 1e-3;

/// How a publisher stores its pose files.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseConvention {
    /// Values are column-major.
    pub transpose: bool,
    /// Multiplies the translation, e.g. 1000 for metres to millimetres.
    pub unit_scale: f64,
}

impl Default for PoseConvention {
    fn default() -> Self {
        Self {
            transpose: false,
            unit_scale: 1.0,
        }
    }
}

/// Builds a pose from 16 (4×4) or 12 (3×4) numbers.
pub fn pose_from_values<T: Real>(values: &[f64], conv: PoseConvention) -> Result<RigidTransform<T>, GeomError> {
    let cols = 4;
    let rows = match values.len() {
        16 => 4,
        12 => 3,
        n => return Err(GeomError::NotARigidTransform(format!("expected 12 or 16 values, got {n}"))),
    };
    let at = |r: usize, c: usize| {
        if conv.transpose {
            values[c * rows + r]
        } else {
            values[r * cols + c]
        }
    };
    if rows == 4 {
        let last = [at(3, 0), at(3, 1), at(3, 2), at(3, 3)];
        let expected = [0.0, 0.0, 0.0, 1.0];
        if last.iter().zip(expected).any(|(a, b)| (a - b).abs() > 1e-6) {
            return Err(GeomError::NotARigidTransform(format!("bottom row {last:?} is not [0 0 0 1]")));
        }
    }
    let rot = Mat3::from_rows([
        [at(0, 0), at(0, 1), at(0, 2)],
        [at(1, 0), at(1, 1), at(1, 2)],
        [at(2, 0), at(2, 1), at(2, 2)],
    ]);
    let t = Vec3::new(at(0, 3), at(1, 3), at(2, 3)) * conv.unit_scale;
    if !rot.is_finite() || !t.is_finite() {
        return Err(GeomError::NotARigidTransform("non-finite entries".into()));
    }
    RigidTransform::<f64>::orthonormalized(rot, t, MAX_POSE_DRIFT).map(|p| p.cast())
}

/// Parses whitespace-separated pose text. `context` names the source in errors.
pub fn parse_pose<T: Real>(text: &str, context: &str, conv: PoseConvention) -> Result<RigidTransform<T>, IoError> {
    let mut values = Vec::with_capacity(16);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| IoError::Parse {
                context: context.to_string(),
                location: format!("line {}", i + 1),
                message: format!("bad number `{tok}`"),
            })?;
            values.push(v);
        }
    }
    if values.len() != 16 && values.len() != 12 {
        return Err(IoError::Parse {
            context: context.to_string(),
            location: "end of file".into(),
            message: format!("expected 12 or 16 numbers, found {}", values.len()),
        });
    }
    Ok(pose_from_values(&values, conv)?)
}

pub fn load_pose<T: Real>(path: impl AsRef<Path>, conv: PoseConvention) -> Result<RigidTransform<T>, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_pose(&text, &path.display().to_string(), conv)
}

/// Writes a row-major 4×4 matrix.
pub fn write_pose<T: Real, W: Write>(mut w: W, pose: &RigidTransform<T>) -> std::io::Result<()> {
    for row in pose.to_matrix4() {
        let row: Vec<String> = row.iter().map(|v| v.as_f64().to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()
}

pub fn save_pose<T: Real>(path: impl AsRef<Path>, pose: &RigidTransform<T>) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    write_pose(BufWriter::new(file), pose).map_err(|e| IoError::io(path, e))
}
