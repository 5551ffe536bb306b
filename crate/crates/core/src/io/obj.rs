use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::geom::{PointCloud, TriangleMesh};
use crate::io::{Geometry, IoError};
use crate::{Real, Vec3};

fn resolve(token: &str, count: usize, context: &str, line: usize) -> Result<usize, IoError> {
    let err = |m: String| IoError::Parse {
        context: context.to_string(),
        location: format!("line {line}"),
        message: m,
    };
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| err(format!("bad face index `{token}`")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        return Err(err("face index 0 is invalid".into()));
    };
    if idx < 0 || idx as usize >= count {
        return Err(err(format!("face index {raw} out of range for {count} vertices")));
    }
    Ok(idx as usize)
}

/// Parses the `v`/`vn`/`f` subset of Wavefront OBJ. Polygons are fanned into
/// triangles; normals are kept only when there is exactly one per vertex.
pub fn parse_obj<T: Real>(text: &str, context: &str) -> Result<Geometry<T>, IoError> {
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    let mut has_faces = false;
    let mut warned = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(key) = tok.next() else { continue };
        let err = |m: String| IoError::Parse {
            context: context.to_string(),
            location: format!("line {line_no}"),
            message: m,
        };
        match key {
            "v" | "vn" => {
                let xyz: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse().map_err(|_| err(format!("bad number `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if xyz.len() < 3 {
                    return Err(err(format!("`{key}` needs three coordinates")));
                }
                let v = Vec3::from_f64([xyz[0], xyz[1], xyz[2]]);
                if key == "v" {
                    vertices.push(v);
                } else {
                    normals.push(v);
                }
            }
            "f" => {
                has_faces = true;
                let poly: Vec<usize> = tok
                    .map(|t| resolve(t, vertices.len(), context, line_no))
                    .collect::<Result<_, _>>()?;
                if poly.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..poly.len() - 1 {
                    triangles.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {
                if !warned {
                    log::warn!("{context}: ignoring unsupported OBJ keyword `{key}` (line {line_no})");
                    warned = true;
                }
            }
        }
    }
    let normals = (!normals.is_empty() && normals.len() == vertices.len()).then_some(normals);
    Ok(if has_faces {
        Geometry::Mesh(match normals {
            Some(n) => TriangleMesh::with_normals(vertices, triangles, n)?,
            None => TriangleMesh::new(vertices, triangles)?,
        })
    } else {
        Geometry::Cloud(match normals {
            Some(n) => PointCloud::with_normals(vertices, n)?,
            None => PointCloud::new(vertices),
        })
    })
}

pub fn load_obj<T: Real>(path: impl AsRef<Path>) -> Result<Geometry<T>, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_obj(&text, &path.display().to_string())
}

pub fn write_obj<T: Real, W: Write>(mut w: W, geometry: &Geometry<T>) -> std::io::Result<()> {
    for p in geometry.points() {
        let [x, y, z] = p.to_f64();
        writeln!(w, "v {x} {y} {z}")?;
    }
    if let Some(ns) = geometry.normals() {
        for n in ns {
            let [x, y, z] = n.to_f64();
            writeln!(w, "vn {x} {y} {z}")?;
        }
    }
    let with_normals = geometry.normals().is_some();
    for t in geometry.triangles() {
        let [a, b, c] = t.map(|i| i + 1);
        if with_normals {
            writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
        } else {
            writeln!(w, "f {a} {b} {c}")?;
        }
    }
    w.flush()
}

pub fn save_obj<T: Real>(path: impl AsRef<Path>, geometry: &Geometry<T>) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    write_obj(BufWriter::new(file), geometry).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn parses_slashes_negative_indices_and_quads() {
        let src = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/2/1 -2//1 -1\ns off\n";
        let Geometry::Mesh(m) = parse_obj::<f64>(src, "quad").unwrap() else { panic!() };
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert!(m.normals().is_none());
    }

    #[test]
    fn vertices_only_is_a_cloud() {
        let g = parse_obj::<f32>("v 1 2 3\nv 4 5 6\n", "pts").unwrap();
        assert!(matches!(g, Geometry::Cloud(ref c) if c.len() == 2));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_obj::<f64>("v 0 0 0\nv 1 0 0\nf 1 2 7\n", "bad").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(parse_obj::<f64>("v 0 zero 0\n", "bad").is_err());
        assert!(parse_obj::<f64>("v 0 0 0\nf 0 1 1\n", "bad").is_err());
    }

    #[test]
    fn round_trip() {
        let mut m = shapes::icosphere::<f64>(2, 1.7);
        m.recompute_normals();
        let g = Geometry::Mesh(m);
        let mut buf = Vec::new();
        write_obj(&mut buf, &g).unwrap();
        let back: Geometry<f64> = parse_obj(std::str::from_utf8(&buf).unwrap(), "rt").unwrap();
        assert_eq!(back, g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        save_obj(&path, &g).unwrap();
        assert_eq!(load_obj::<f64>(&path).unwrap(), g);
    }
}
