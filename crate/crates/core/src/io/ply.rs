use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::geom::{PointCloud, TriangleMesh};
use crate::io::{Geometry, IoError};
use crate::{Real, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Clone, Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar { name, .. } | Property::List { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_start: usize,
    lines: usize,
}

fn parse_err(context: &str, location: String, message: impl Into<String>) -> IoError {
    IoError::Parse {
        context: context.to_string(),
        location,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8], context: &str) -> Result<Header, IoError> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some(rel) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(parse_err(context, format!("line {}", line_no + 1), "header ended without end_header"));
        };
        line_no += 1;
        let raw = &bytes[pos..pos + rel];
        pos += rel + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| parse_err(context, format!("line {line_no}"), "header is not valid text"))?
            .trim();
        let at = || format!("line {line_no}");
        let mut tok = line.split_whitespace();
        let Some(key) = tok.next() else { continue };
        match key {
            "ply" if line_no == 1 => {}
            _ if line_no == 1 => return Err(parse_err(context, at(), "missing `ply` magic")),
            "format" => {
                let f = tok.next().ok_or_else(|| parse_err(context, at(), "format without encoding"))?;
                encoding = Some(match f {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => return Err(IoError::UnsupportedEncoding(other.to_string())),
                });
            }
            "comment" | "obj_info" => {}
            "element" => {
                let name = tok.next().ok_or_else(|| parse_err(context, at(), "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(context, at(), "element without a valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            "property" => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(context, at(), "property before any element"))?;
                let words: Vec<&str> = tok.collect();
                let prop = match words.as_slice() {
                    ["list", c, i, name] => Property::List {
                        name: name.to_string(),
                        count: Scalar::parse(c).ok_or_else(|| parse_err(context, at(), format!("unknown type `{c}`")))?,
                        item: Scalar::parse(i).ok_or_else(|| parse_err(context, at(), format!("unknown type `{i}`")))?,
                    },
                    [ty, name] => Property::Scalar {
                        name: name.to_string(),
                        ty: Scalar::parse(ty).ok_or_else(|| parse_err(context, at(), format!("unknown type `{ty}`")))?,
                    },
                    _ => return Err(parse_err(context, at(), "malformed property line")),
                };
                el.props.push(prop);
            }
            "end_header" => {
                let encoding = encoding.ok_or_else(|| parse_err(context, at(), "header has no format line"))?;
                return Ok(Header {
                    encoding,
                    elements,
                    body_start: pos,
                    lines: line_no,
                });
            }
            other => return Err(parse_err(context, at(), format!("unexpected header keyword `{other}`"))),
        }
    }
}

trait Body {
    fn begin(&mut self) -> Result<(), IoError>;
    fn scalar(&mut self, ty: Scalar) -> Result<f64, IoError>;
}

struct AsciiBody<'a> {
    context: &'a str,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    first_line: usize,
    current: Vec<&'a str>,
    cursor: usize,
    line_no: usize,
}

impl Body for AsciiBody<'_> {
    fn begin(&mut self) -> Result<(), IoError> {
        loop {
            let Some((i, line)) = self.lines.next() else {
                return Err(parse_err(self.context, format!("line {}", self.line_no + 1), "unexpected end of data"));
            };
            self.line_no = self.first_line + i;
            if !line.trim().is_empty() {
                self.current = line.split_whitespace().collect();
                self.cursor = 0;
                return Ok(());
            }
        }
    }

    fn scalar(&mut self, _ty: Scalar) -> Result<f64, IoError> {
        let tok = self
            .current
            .get(self.cursor)
            .ok_or_else(|| parse_err(self.context, format!("line {}", self.line_no), "too few values"))?;
        self.cursor += 1;
        tok.parse()
            .map_err(|_| parse_err(self.context, format!("line {}", self.line_no), format!("bad number `{tok}`")))
    }
}

struct BinaryBody<'a> {
    context: &'a str,
    bytes: &'a [u8],
    offset: usize,
    base: usize,
}

impl Body for BinaryBody<'_> {
    fn begin(&mut self) -> Result<(), IoError> {
        Ok(())
    }

    fn scalar(&mut self, ty: Scalar) -> Result<f64, IoError> {
        let n = ty.size();
        let b = self
            .bytes
            .get(self.offset..self.offset + n)
            .ok_or_else(|| parse_err(self.context, format!("byte {}", self.base + self.offset), "unexpected end of data"))?;
        self.offset += n;
        Ok(match ty {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b.try_into().expect("8 bytes")),
        })
    }
}

fn read_body<T: Real>(header: &Header, body: &mut dyn Body, context: &str) -> Result<Geometry<T>, IoError> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    let mut has_normals = false;
    let mut has_faces = false;
    for el in &header.elements {
        let slot = |n: &str| el.props.iter().position(|p| p.name() == n);
        let xyz = [slot("x"), slot("y"), slot("z")];
        let nxyz = [slot("nx"), slot("ny"), slot("nz")];
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        if is_vertex {
            if xyz.iter().any(Option::is_none) {
                return Err(parse_err(context, "header".into(), "vertex element lacks x/y/z"));
            }
            has_normals = nxyz.iter().all(Option::is_some);
            points.reserve(el.count);
        }
        let face_list = el
            .props
            .iter()
            .position(|p| matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index"));
        has_faces |= is_face && face_list.is_some();
        let mut values = vec![0.0f64; el.props.len()];
        for _ in 0..el.count {
            body.begin()?;
            let mut polygon = Vec::new();
            for (k, p) in el.props.iter().enumerate() {
                match p {
                    Property::Scalar { ty, .. } => values[k] = body.scalar(*ty)?,
                    Property::List { count, item, .. } => {
                        let len = body.scalar(*count)? as usize;
                        let keep = is_face && Some(k) == face_list;
                        for _ in 0..len {
                            let v = body.scalar(*item)?;
                            if keep {
                                polygon.push(v as usize);
                            }
                        }
                    }
                }
            }
            if is_vertex {
                let get = |s: [Option<usize>; 3]| Vec3::new(values[s[0].unwrap()], values[s[1].unwrap()], values[s[2].unwrap()]);
                points.push(get(xyz).cast::<T>());
                if has_normals {
                    normals.push(get(nxyz).cast::<T>());
                }
            }
            if polygon.len() >= 3 {
                for i in 1..polygon.len() - 1 {
                    triangles.push([polygon[0], polygon[i], polygon[i + 1]]);
                }
            } else if !polygon.is_empty() {
                log::warn!("{context}: skipping face with {} vertices", polygon.len());
            }
        }
    }
    let normals = has_normals.then_some(normals);
    Ok(if has_faces {
        Geometry::Mesh(match normals {
            Some(n) => TriangleMesh::with_normals(points, triangles, n)?,
            None => TriangleMesh::new(points, triangles)?,
        })
    } else {
        Geometry::Cloud(match normals {
            Some(n) => PointCloud::with_normals(points, n)?,
            None => PointCloud::new(points),
        })
    })
}

/// Parses PLY bytes (ASCII or binary little-endian). `context` names the
/// source in error messages.
pub fn read_ply<T: Real>(bytes: &[u8], context: &str) -> Result<Geometry<T>, IoError> {
    let header = parse_header(bytes, context)?;
    let data = &bytes[header.body_start..];
    match header.encoding {
        PlyEncoding::Ascii => {
            let text = std::str::from_utf8(data).map_err(|e| {
                parse_err(context, format!("byte {}", header.body_start + e.valid_up_to()), "body is not valid text")
            })?;
            let mut body = AsciiBody {
                context,
                lines: text.lines().enumerate(),
                first_line: header.lines + 1,
                current: Vec::new(),
                cursor: 0,
                line_no: header.lines,
            };
            read_body(&header, &mut body, context)
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut body = BinaryBody {
                context,
                bytes: data,
                offset: 0,
                base: header.body_start,
            };
            read_body(&header, &mut body, context)
        }
    }
}

pub fn load_ply<T: Real>(path: impl AsRef<Path>) -> Result<Geometry<T>, IoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    read_ply(&bytes, &path.display().to_string())
}

/// Writes coordinates (and normals) as doubles and faces as `uchar`/`int` lists.
pub fn write_ply<T: Real, W: Write>(mut w: W, geometry: &Geometry<T>, encoding: PlyEncoding) -> std::io::Result<()> {
    let normals = geometry.normals();
    let mesh = matches!(geometry, Geometry::Mesh(_));
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(w, "ply\nformat {format} 1.0\nelement vertex {}", geometry.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if normals.is_some() {
        writeln!(w, "property double nx\nproperty double ny\nproperty double nz")?;
    }
    if mesh {
        writeln!(w, "element face {}\nproperty list uchar int vertex_indices", geometry.triangles().len())?;
    }
    writeln!(w, "end_header")?;
    for (i, p) in geometry.points().iter().enumerate() {
        let mut vals = p.to_f64().to_vec();
        if let Some(n) = normals {
            vals.extend(n[i].to_f64());
        }
        match encoding {
            PlyEncoding::Ascii => {
                let line: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            PlyEncoding::BinaryLittleEndian => {
                for v in vals {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    for t in geometry.triangles() {
        match encoding {
            PlyEncoding::Ascii => writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?,
            PlyEncoding::BinaryLittleEndian => {
                w.write_all(&[3u8])?;
                for &i in t {
                    let i = i32::try_from(i).map_err(|_| std::io::Error::other("vertex index exceeds int range"))?;
                    w.write_all(&i.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()
}

pub fn save_ply<T: Real>(path: impl AsRef<Path>, geometry: &Geometry<T>, encoding: PlyEncoding) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| IoError::io(path, e))?;
    write_ply(BufWriter::new(file), geometry, encoding).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TETRA: &str = "ply
format ascii 1.0
comment hand-written tetrahedron
element vertex 4
property float x
property float y
property float z
element face 4
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
";

    #[test]
    fn ascii_tetrahedron() {
        let g: Geometry<f64> = read_ply(TETRA.as_bytes(), "tetra").unwrap();
        let Geometry::Mesh(m) = g else { panic!("expected a mesh") };
        assert_eq!((m.vertex_count(), m.triangle_count()), (4, 4));
        assert_eq!(m.vertices()[3], Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(m.triangles()[3], [1, 2, 3]);
    }

    #[test]
    fn truncated_header_names_end_header() {
        let cut = &TETRA[..TETRA.find("end_header").unwrap()];
        let err = read_ply::<f64>(cut.as_bytes(), "cut").unwrap_err();
        assert!(err.to_string().contains("end_header"), "{err}");
    }

    #[test]
    fn big_endian_is_rejected() {
        let src = TETRA.replace("ascii", "binary_big_endian");
        assert!(matches!(read_ply::<f64>(src.as_bytes(), "be"), Err(IoError::UnsupportedEncoding(_))));
    }

    #[test]
    fn short_body_reports_location() {
        let src = TETRA.replace("0 0 1\n", "0 0\n");
        let err = read_ply::<f64>(src.as_bytes(), "short").unwrap_err();
        assert!(err.to_string().contains("line 14"), "{err}");
        let mut bin = Vec::new();
        write_ply(&mut bin, &Geometry::Mesh(shapes::icosphere::<f64>(1, 1.0)), PlyEncoding::BinaryLittleEndian).unwrap();
        bin.truncate(bin.len() - 3);
        let err = read_ply::<f64>(&bin, "bin").unwrap_err();
        assert!(err.to_string().contains("byte"), "{err}");
    }

    fn random_geometry(seed: u64, mesh: bool) -> Geometry<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = shapes::icosphere::<f64>(2, 1.0);
        let v: Vec<_> = m
            .vertices()
            .iter()
            .map(|&p| p * rng.random_range(0.5..2.0) + Vec3::new(1e-7, -3.3, 1e5))
            .collect();
        m = TriangleMesh::new(v, m.triangles().to_vec()).unwrap();
        m.recompute_normals();
        if mesh {
            Geometry::Mesh(m)
        } else {
            Geometry::Cloud(m.to_cloud())
        }
    }

    #[test]
    fn round_trips_are_exact() {
        for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
            for mesh in [true, false] {
                let g = random_geometry(3, mesh);
                let mut buf = Vec::new();
                write_ply(&mut buf, &g, enc).unwrap();
                let back: Geometry<f64> = read_ply(&buf, "rt").unwrap();
                assert_eq!(back, g, "{enc:?} mesh={mesh}");
            }
        }
    }

    #[test]
    fn file_round_trip_and_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ply");
        let g = random_geometry(4, true);
        save_ply(&path, &g, PlyEncoding::BinaryLittleEndian).unwrap();
        assert_eq!(load_ply::<f64>(&path).unwrap(), g);
        let g32: Geometry<f32> = load_ply(&path).unwrap();
        assert_eq!(g32.len(), g.len());
        assert!(load_ply::<f64>(dir.path().join("missing.ply")).is_err());
    }

    #[test]
    fn quads_are_fanned_and_extra_properties_skipped() {
        let src = "ply\nformat ascii 1.0\nelement vertex 4\nproperty double x\nproperty double y\nproperty double z\nproperty uchar red\nelement face 1\nproperty list uchar uint vertex_indices\nproperty float quality\nend_header\n0 0 0 1\n1 0 0 2\n1 1 0 3\n0 1 0 4\n4 0 1 2 3 0.5\n";
        let Geometry::Mesh(m) = read_ply::<f64>(src.as_bytes(), "quad").unwrap() else { panic!() };
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }
}
