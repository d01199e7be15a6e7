//! Triangle meshes and symmetric mesh construction.

use alloc::vec::Vec;

use super::SceneError;
use crate::geometry::SymmetryTransform;
use crate::math::{cos, sin, Vec3};

/// Minimum triangle area accepted by [`TriangleMesh::new`].
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;
/// Tolerance for vertex-set symmetry checks.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Indexed triangle mesh in object space.
///
/// `tex_coords` holds one material coordinate per vertex; procedural
/// textures are evaluated at the interpolated material coordinate, so two
/// vertices sharing a material coordinate share appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    tex_coords: Vec<Vec3>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>, tex_coords: Vec<Vec3>) -> Result<Self, SceneError> {
        if tex_coords.len() != vertices.len() {
            return Err(SceneError::TexCoordCount { vertices: vertices.len(), tex_coords: tex_coords.len() });
        }
        if vertices.iter().chain(tex_coords.iter()).any(|v| !v.is_finite()) {
            return Err(SceneError::NonFiniteVertex);
        }
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&k| k as usize >= vertices.len()) {
                return Err(SceneError::IndexOutOfRange { triangle: i });
            }
            let [a, b, c] = t.map(|k| vertices[k as usize]);
            if (b - a).cross(c - a).norm() * 0.5 <= MIN_TRIANGLE_AREA {
                return Err(SceneError::DegenerateTriangle { triangle: i });
            }
        }
        Ok(TriangleMesh { vertices, triangles, tex_coords })
    }

    /// Mesh whose material coordinates equal its vertex positions.
    pub fn with_positional_texture(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, SceneError> {
        let tex = vertices.clone();
        TriangleMesh::new(vertices, triangles, tex)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn tex_coords(&self) -> &[Vec3] {
        &self.tex_coords
    }

    /// Replaces material coordinates, folding them with `fold`.
    pub fn map_tex_coords(mut self, fold: impl Fn(Vec3) -> Vec3) -> Self {
        for t in self.tex_coords.iter_mut() {
            *t = fold(*t);
        }
        self
    }

    /// Uniformly scales positions; material coordinates are unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| v.scale(c)).collect(),
            triangles: self.triangles.clone(),
            tex_coords: self.tex_coords.clone(),
        }
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for v in &self.vertices {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    /// Appends the image of the mesh under `transform` with reversed winding
    /// and the same material coordinates.
    fn union_with_mirror(&self, transform: &SymmetryTransform) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend(self.vertices.iter().map(|v| transform.apply(*v)));
        let mut tex_coords = self.tex_coords.clone();
        tex_coords.extend_from_slice(&self.tex_coords);
        let mut triangles = self.triangles.clone();
        triangles.extend(self.triangles.iter().map(|t| [t[0] + offset, t[2] + offset, t[1] + offset]));
        TriangleMesh { vertices, triangles, tex_coords }
    }

    /// True when every vertex maps onto some vertex under `transform`.
    pub fn is_invariant_under(&self, transform: &SymmetryTransform) -> bool {
        let mut sorted: Vec<Vec3> = self.vertices.clone();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
        self.vertices.iter().all(|v| {
            let m = transform.apply(*v);
            let start = sorted.partition_point(|p| p.x < m.x - SYMMETRY_TOLERANCE);
            sorted[start..]
                .iter()
                .take_while(|p| p.x <= m.x + SYMMETRY_TOLERANCE)
                .any(|p| (*p - m).max_abs() <= SYMMETRY_TOLERANCE)
        })
    }
}

/// Closes a half mesh (x ≥ 0) under the x-mirror, and optionally under the
/// y-mirror as well. Mirrored vertices keep their material coordinates.
pub fn make_symmetric_mesh(half: &TriangleMesh, extra_symmetry: bool) -> Result<TriangleMesh, SceneError> {
    if let Some(i) = half.vertices.iter().position(|v| v.x < -SYMMETRY_TOLERANCE) {
        return Err(SceneError::HalfCrossesPlane { vertex: i });
    }
    let mut full = half.union_with_mirror(&SymmetryTransform::m2());
    if extra_symmetry {
        full = full.union_with_mirror(&SymmetryTransform::m3());
    }
    Ok(full)
}

/// Parameters of the closed "blob" primitive: a star-shaped surface around
/// the origin with smooth bumps, symmetric about x = 0 (and y = 0 when
/// `doubly`).
#[derive(Debug, Clone, PartialEq)]
pub struct BlobParams {
    pub radii: [f64; 3],
    pub bump_centers: Vec<Vec3>,
    pub bump_amplitude: f64,
    pub bump_width: f64,
    pub rings: usize,
    pub segments: usize,
    pub doubly: bool,
}

impl BlobParams {
    fn radius_scale(&self, dir: Vec3) -> f64 {
        let folded = Vec3::new(dir.x.abs(), if self.doubly { dir.y.abs() } else { dir.y }, dir.z);
        let mut s = 1.0;
        for c in &self.bump_centers {
            let d2 = (folded - *c).norm_squared();
            s += self.bump_amplitude * crate::math::exp(-d2 / (self.bump_width * self.bump_width));
        }
        s
    }
}

/// Builds the x ≥ 0 half (or the x, y ≥ 0 quarter when `doubly`) of a blob.
/// Rings run from the +x pole (ring 0) to the x = 0 seam (last ring).
pub fn blob_half(p: &BlobParams) -> Result<TriangleMesh, SceneError> {
    let rings = p.rings.max(2);
    let segments = p.segments.max(3);
    let span = if p.doubly { core::f64::consts::PI } else { 2.0 * core::f64::consts::PI };
    let columns = if p.doubly { segments + 1 } else { segments };
    let mut vertices = alloc::vec![Vec3::new(p.radii[0] * p.radius_scale(Vec3::X), 0.0, 0.0)];
    for r in 1..=rings {
        let alpha = core::f64::consts::FRAC_PI_2 * r as f64 / rings as f64;
        let (ca, sa) = if r == rings { (0.0, 1.0) } else { (cos(alpha), sin(alpha)) };
        for s in 0..columns {
            let beta = span * s as f64 / segments as f64;
            let (mut sb, cb) = (sin(beta), cos(beta));
            if p.doubly && (s == 0 || s == segments) {
                sb = 0.0;
            }
            let dir = Vec3::new(ca, sa * sb, sa * cb);
            let k = p.radius_scale(dir);
            vertices.push(Vec3::new(p.radii[0] * dir.x * k, p.radii[1] * dir.y * k, p.radii[2] * dir.z * k));
        }
    }
    let idx = |r: usize, s: usize| -> u32 { (1 + (r - 1) * columns + s) as u32 };
    let mut triangles = Vec::new();
    let wrap = |s: usize| if p.doubly { s + 1 } else { (s + 1) % segments };
    for s in 0..segments {
        triangles.push([0, idx(1, s), idx(1, wrap(s))]);
    }
    for r in 1..rings {
        for s in 0..segments {
            let (a, b) = (idx(r, s), idx(r, wrap(s)));
            let (c, d) = (idx(r + 1, s), idx(r + 1, wrap(s)));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    TriangleMesh::with_positional_texture(vertices, triangles)
}

/// Height-field sheet `z = −h(x, y)` over `x ∈ [0, half_width]`,
/// `y ∈ [−half_height, half_height]` (bulging toward −z).
#[derive(Debug, Clone, PartialEq)]
pub struct ReliefParams {
    pub half_width: f64,
    pub half_height: f64,
    pub depth: f64,
    pub bump_centers: Vec<Vec3>,
    pub bump_amplitude: f64,
    pub bump_width: f64,
    pub cells: usize,
}

pub fn relief_half(p: &ReliefParams) -> Result<TriangleMesh, SceneError> {
    let n = p.cells.max(2);
    let height = |x: f64, y: f64| -> f64 {
        let u = x / p.half_width;
        let v = y / p.half_height;
        let mut h = p.depth * (1.0 - 0.5 * (u * u + v * v));
        for c in &p.bump_centers {
            let d2 = (u - c.x) * (u - c.x) + (v - c.y) * (v - c.y);
            h += p.bump_amplitude * crate::math::exp(-d2 / (p.bump_width * p.bump_width));
        }
        h
    };
    let nx = n / 2;
    let mut vertices = Vec::with_capacity((nx + 1) * (n + 1));
    for j in 0..=n {
        let y = -p.half_height + 2.0 * p.half_height * j as f64 / n as f64;
        for i in 0..=nx {
            let x = p.half_width * i as f64 / nx as f64;
            vertices.push(Vec3::new(x, y, -height(x, y)));
        }
    }
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..nx {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriangleMesh::with_positional_texture(vertices, triangles)
}

/// Axis-aligned box `[lo, hi]` as 12 outward-facing triangles.
pub fn box_mesh(lo: Vec3, hi: Vec3) -> Result<TriangleMesh, SceneError> {
    let v = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        )
    };
    let vertices: Vec<Vec3> = (0..8).map(v).collect();
    let triangles = alloc::vec![
        [0, 2, 3],
        [0, 3, 1], // z = lo
        [4, 5, 7],
        [4, 7, 6], // z = hi
        [0, 1, 5],
        [0, 5, 4], // y = lo
        [2, 6, 7],
        [2, 7, 3], // y = hi
        [0, 4, 6],
        [0, 6, 2], // x = lo
        [1, 3, 7],
        [1, 7, 5], // x = hi
    ];
    TriangleMesh::with_positional_texture(vertices, triangles)
}

/// Concatenates meshes.
pub fn merge(meshes: &[TriangleMesh]) -> TriangleMesh {
    let mut out = TriangleMesh { vertices: Vec::new(), triangles: Vec::new(), tex_coords: Vec::new() };
    for m in meshes {
        let offset = out.vertices.len() as u32;
        out.vertices.extend_from_slice(&m.vertices);
        out.tex_coords.extend_from_slice(&m.tex_coords);
        out.triangles.extend(m.triangles.iter().map(|t| t.map(|k| k + offset)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_triangle() -> TriangleMesh {
        TriangleMesh::with_positional_texture(
            alloc::vec![Vec3::new(0.1, 0.0, 1.0), Vec3::new(0.5, 0.0, 1.0), Vec3::new(0.3, 0.4, 1.2)],
            alloc::vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_doubles() {
        let full = make_symmetric_mesh(&single_triangle(), false).unwrap();
        assert_eq!(full.triangles().len(), 2);
        assert_eq!(full.vertices().len(), 6);
        assert!(full.is_invariant_under(&SymmetryTransform::m2()));
        for i in 0..3 {
            assert_eq!(full.tex_coords()[i], full.tex_coords()[i + 3]);
        }
    }

    #[test]
    fn extra_symmetry_closes_under_both_mirrors() {
        let full = make_symmetric_mesh(&single_triangle(), true).unwrap();
        assert_eq!(full.triangles().len(), 4);
        for t in [SymmetryTransform::m2(), SymmetryTransform::m3(), SymmetryTransform::m4()] {
            assert!(full.is_invariant_under(&t));
        }
    }

    #[test]
    fn half_crossing_plane_is_rejected() {
        let m = TriangleMesh::with_positional_texture(
            alloc::vec![Vec3::new(-0.1, 0.0, 1.0), Vec3::new(0.5, 0.0, 1.0), Vec3::new(0.3, 0.4, 1.2)],
            alloc::vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(make_symmetric_mesh(&m, false), Err(SceneError::HalfCrossesPlane { vertex: 0 }));
    }

    #[test]
    fn invalid_meshes_are_rejected() {
        let v = alloc::vec![Vec3::ZERO, Vec3::X, Vec3::X.scale(2.0)];
        assert_eq!(
            TriangleMesh::with_positional_texture(v.clone(), alloc::vec![[0, 1, 2]]),
            Err(SceneError::DegenerateTriangle { triangle: 0 })
        );
        assert_eq!(
            TriangleMesh::with_positional_texture(v, alloc::vec![[0, 1, 3]]),
            Err(SceneError::IndexOutOfRange { triangle: 0 })
        );
    }

    #[test]
    fn blob_seam_lies_on_plane() {
        let p = BlobParams {
            radii: [0.2, 0.15, 0.18],
            bump_centers: alloc::vec![Vec3::new(0.5, 0.5, 0.7)],
            bump_amplitude: 0.2,
            bump_width: 0.4,
            rings: 8,
            segments: 16,
            doubly: false,
        };
        let half = blob_half(&p).unwrap();
        assert!(half.vertices().iter().all(|v| v.x >= 0.0));
        let full = make_symmetric_mesh(&half, false).unwrap();
        assert!(full.is_invariant_under(&SymmetryTransform::m2()));
        assert!(!full.is_invariant_under(&SymmetryTransform::m3()));

        let quarter = blob_half(&BlobParams { doubly: true, ..p }).unwrap();
        assert!(quarter.vertices().iter().all(|v| v.y >= 0.0));
        let full = make_symmetric_mesh(&quarter, true).unwrap();
        assert!(full.is_invariant_under(&SymmetryTransform::m3()));
    }
}
