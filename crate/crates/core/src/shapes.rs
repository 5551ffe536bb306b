//! Procedural test surfaces: planar grids, icospheres, bumpy height fields,
//! bumpy spheres and superellipsoids.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::TriangleMesh;
use crate::{Real, Vec3};

fn v<T: Real>(x: f64, y: f64, z: f64) -> Vec3<T> {
    Vec3::new(T::lit(x), T::lit(y), T::lit(z))
}

fn grid_triangles(nx: usize, ny: usize) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = a + nx + 1;
            let d = a + nx;
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    tris
}

/// `nx` x `ny` vertex grid in the plane z = 0, one diagonal per cell, faces wound towards +z.
pub fn planar_grid<T: Real>(nx: usize, ny: usize, spacing: f64) -> TriangleMesh<T> {
    assert!(nx >= 2 && ny >= 2, "grid needs at least 2x2 vertices");
    let verts = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| v(i as f64 * spacing, j as f64 * spacing, 0.0)))
        .collect();
    TriangleMesh::new(verts, grid_triangles(nx, ny)).expect("grid indices are valid")
}

/// Unit-normal outward icosphere with `subdivisions` rounds of 4:1 splitting.
pub fn icosphere<T: Real>(subdivisions: u32, radius: f64) -> TriangleMesh<T> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    };
    verts.iter_mut().for_each(|p| *p = unit(*p));
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (pa, pb) = (verts[a], verts[b]);
                verts.push(unit([
                    (pa[0] + pb[0]) / 2.0,
                    (pa[1] + pb[1]) / 2.0,
                    (pa[2] + pb[2]) / 2.0,
                ]));
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut verts);
            let bc = midpoint(f[1], f[2], &mut verts);
            let ca = midpoint(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|p| v(p[0] * radius, p[1] * radius, p[2] * radius))
        .collect();
    TriangleMesh::new(verts, faces).expect("icosphere indices are valid")
}

/// One product-of-sines term of a bump pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTerm {
    pub amplitude: f64,
    pub freq: [f64; 3],
    pub phase: [f64; 3],
}

impl BumpTerm {
    fn eval(&self, p: [f64; 3]) -> f64 {
        self.amplitude
            * (self.freq[0] * p[0] + self.phase[0]).sin()
            * (self.freq[1] * p[1] + self.phase[1]).sin()
            * (self.freq[2] * p[2] + self.phase[2]).cos()
    }
}

/// A sum of bump terms with pairwise incommensurate frequencies, so that no
/// local patch is mirror- or rotation-symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpPattern {
    pub terms: Vec<BumpTerm>,
}

impl BumpPattern {
    /// Random pattern with total amplitude `amplitude` and base spatial frequency `frequency`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, amplitude: f64, frequency: f64) -> Self {
        // Irrational ratios keep the terms from sharing a period.
        const RATIOS: [f64; 4] = [1.0, 1.618_033_988_7, 2.414_213_562_4, 0.732_050_807_6];
        let weights = [0.45, 0.25, 0.2, 0.1];
        let terms = RATIOS
            .iter()
            .zip(weights)
            .map(|(&k, w)| {
                let f = frequency * k;
                let mut jitter = || f * rng.random_range(0.8..1.25);
                let freq = [jitter(), jitter(), jitter()];
                let phase = [
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                ];
                BumpTerm {
                    amplitude: amplitude * w,
                    freq,
                    phase,
                }
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms.iter().map(|t| t.eval(p)).sum()
    }
}

/// Height field `z = pattern(x, y, 0)` over an `n` x `n` grid of the given
/// spacing, with vertices jittered in the plane by up to `jitter`·spacing.
pub fn bumpy_field<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    spacing: f64,
    jitter: f64,
    pattern: &BumpPattern,
) -> TriangleMesh<T> {
    assert!(n >= 2, "field needs at least 2x2 vertices");
    assert!((0.0..0.5).contains(&jitter), "jitter must stay below half a cell");
    let mut verts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = (i as f64 + rng.random_range(-jitter..=jitter)) * spacing;
            let y = (j as f64 + rng.random_range(-jitter..=jitter)) * spacing;
            verts.push(v(x, y, pattern.eval([x, y, 0.0])));
        }
    }
    TriangleMesh::new(verts, grid_triangles(n, n)).expect("grid indices are valid")
}

/// Icosphere of the given radius with radial displacement `radius·pattern(p̂)`.
pub fn bumpy_sphere<T: Real>(subdivisions: u32, radius: f64, pattern: &BumpPattern) -> TriangleMesh<T> {
    let base = icosphere::<f64>(subdivisions, 1.0);
    let (verts, tris, _) = base.into_parts();
    let verts = verts
        .into_iter()
        .map(|p| {
            let r = radius * (1.0 + pattern.eval([p.x, p.y, p.z]));
            v(p.x * r, p.y * r, p.z * r)
        })
        .collect();
    TriangleMesh::new(verts, tris).expect("icosphere indices are valid")
}

/// Superellipsoid `|x/a|^(2/e) + |y/b|^(2/e) + |z/c|^(2/e) = 1` obtained by
/// radially pushing an icosphere onto the implicit surface.
pub fn superellipsoid<T: Real>(subdivisions: u32, semi_axes: [f64; 3], exponent: f64) -> TriangleMesh<T> {
    assert!(exponent > 0.0, "exponent must be positive");
    let base = icosphere::<f64>(subdivisions, 1.0);
    let (verts, tris, _) = base.into_parts();
    let q = 2.0 / exponent;
    let verts = verts
        .into_iter()
        .map(|p| {
            let f = (p.x / semi_axes[0]).abs().powf(q)
                + (p.y / semi_axes[1]).abs().powf(q)
                + (p.z / semi_axes[2]).abs().powf(q);
            let s = f.powf(-1.0 / q);
            v(p.x * s, p.y * s, p.z * s)
        })
        .collect();
    TriangleMesh::new(verts, tris).expect("icosphere indices are valid")
}
