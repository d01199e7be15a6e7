//! One-ray-per-pixel ray casting of a [`Scene`].

use alloc::vec::Vec;

use super::raycast::Bvh;
use super::{Scene, SceneError, Shading};
use crate::geometry::SymmetryTransform;
use crate::grid::{Grid, RgbImage};
use crate::math::{round, Vec3};
use crate::par;
use crate::photo::DepthMap;

/// Relative depth agreement required for a mirror point to count as visible.
pub const VISIBILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub rgb: RgbImage,
    pub depth: DepthMap,
    /// True where the pixel's mirror correspondence is not visible.
    pub occlusion: Grid<bool>,
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceHit {
    /// Camera-space point.
    pub point: Vec3,
    /// Object-space point.
    pub object_point: Vec3,
    pub tex: Vec3,
    pub triangle: u32,
}

/// Camera-space acceleration structure for one scene, in base units.
pub struct Renderer<'a> {
    scene: &'a Scene,
    bvh: Bvh,
    normals: Vec<Vec3>,
}

impl<'a> Renderer<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        let mesh = scene.mesh();
        let cam: Vec<Vec3> = mesh.vertices().iter().map(|v| scene.base_pose().transform_point(*v)).collect();
        let tris = mesh.triangles().iter().map(|t| t.map(|k| cam[k as usize])).collect();
        let normals = mesh
            .triangles()
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|k| mesh.vertices()[k as usize]);
                (b - a).cross(c - a).normalized().unwrap_or(Vec3::Z)
            })
            .collect();
        Renderer { scene, bvh: Bvh::new(tris), normals }
    }

    pub fn scene(&self) -> &Scene {
        self.scene
    }

    /// Nearest surface along the ray through continuous pixel `(x, y)`.
    pub fn cast(&self, x: f64, y: f64) -> Option<SurfaceHit> {
        let dir = self.scene.intrinsics().ray_direction(x, y);
        self.cast_dir(dir)
    }

    fn cast_dir(&self, dir: Vec3) -> Option<SurfaceHit> {
        let hit = self.bvh.intersect(Vec3::ZERO, dir, f64::INFINITY)?;
        let mesh = self.scene.mesh();
        let [i0, i1, i2] = mesh.triangles()[hit.triangle as usize].map(|k| k as usize);
        let w0 = 1.0 - hit.u - hit.v;
        let interp = |a: Vec3, b: Vec3, c: Vec3| a.scale(w0) + b.scale(hit.u) + c.scale(hit.v);
        let v = mesh.vertices();
        let t = mesh.tex_coords();
        Some(SurfaceHit {
            point: dir.scale(hit.t),
            object_point: interp(v[i0], v[i1], v[i2]),
            tex: interp(t[i0], t[i1], t[i2]),
            triangle: hit.triangle,
        })
    }

    /// Linear color in `[0, 1]`.
    pub fn color(&self, hit: &SurfaceHit) -> [f64; 3] {
        let albedo = self.scene.texture().albedo(hit.tex, hit.object_point);
        match *self.scene.shading() {
            Shading::Unlit => albedo,
            Shading::Lambert { light, ambient } => {
                let l = light.normalized().unwrap_or(Vec3::Y);
                let k = ambient + (1.0 - ambient) * self.normals[hit.triangle as usize].dot(l).abs();
                albedo.map(|c| c * k)
            }
        }
    }

    pub fn color_u8(&self, hit: &SurfaceHit) -> [u8; 3] {
        self.color(hit).map(quantize)
    }

    /// True when camera-space point `p` is the first surface seen along its
    /// viewing ray and projects inside a `width × height` image.
    pub fn is_visible(&self, p: Vec3, width: usize, height: usize) -> bool {
        if !(p.z > 0.0) {
            return false;
        }
        let (u, v) = self.scene.intrinsics().project(p);
        if !(u >= 0.0 && v >= 0.0 && u < width as f64 && v < height as f64) {
            return false;
        }
        let dir = p.scale(1.0 / p.z);
        match self.bvh.intersect(Vec3::ZERO, dir, f64::INFINITY) {
            Some(h) => (h.t - p.z).abs() <= VISIBILITY_TOLERANCE * p.z,
            None => false,
        }
    }

    /// Camera-space image of `p` under an object-space transform.
    pub fn transform_camera_point(&self, p: Vec3, transform: &SymmetryTransform) -> Vec3 {
        let pose = self.scene.base_pose();
        let r_t = pose.rotation().transpose();
        let obj = r_t.mul_vec(p - pose.translation());
        pose.transform_point(transform.apply(obj))
    }
}

#[inline]
fn quantize(c: f64) -> u8 {
    round(c.clamp(0.0, 1.0) * 255.0) as u8
}

/// Renders color, depth and mirror occlusion for the scene's main symmetry.
pub fn render(scene: &Scene, width: usize, height: usize) -> Result<RenderOutput, SceneError> {
    let renderer = Renderer::new(scene);
    let plane = *scene.base_gt_plane();
    let unit = scene.unit();
    let rows = par::map_indexed(height, |y| {
        let mut row = Vec::with_capacity(width);
        for x in 0..width {
            let px = renderer.cast(x as f64 + 0.5, y as f64 + 0.5).map(|hit| {
                let mirror = plane.reflect(hit.point);
                let occluded = !renderer.is_visible(mirror, width, height);
                // Base depth is rounded to f32 so every scaled depth is an exact multiple of a 32-bit value.
                (renderer.color_u8(&hit), unit * (hit.point.z as f32 as f64), occluded)
            });
            row.push(px);
        }
        row
    });
    let mut rgb = Grid::new(width, height, [0u8; 3]);
    let mut depth = DepthMap::invalid(width, height);
    let mut occlusion = Grid::new(width, height, false);
    let mut any = false;
    for (y, row) in rows.into_iter().enumerate() {
        for (x, px) in row.into_iter().enumerate() {
            if let Some((c, d, occ)) = px {
                any = true;
                rgb.set(x, y, c);
                depth.set(x, y, d);
                occlusion.set(x, y, occ);
            }
        }
    }
    if !any {
        return Err(SceneError::EmptyRender);
    }
    Ok(RenderOutput { rgb, depth, occlusion })
}

/// Mirror-occlusion mask for an arbitrary declared symmetry: true at
/// covered pixels whose correspondence under `transform` is not visible.
pub fn mirror_occlusion(scene: &Scene, transform: &SymmetryTransform, width: usize, height: usize) -> Grid<bool> {
    let renderer = Renderer::new(scene);
    let rows = par::map_indexed(height, |y| {
        (0..width)
            .map(|x| match renderer.cast(x as f64 + 0.5, y as f64 + 0.5) {
                Some(hit) => {
                    let m = renderer.transform_camera_point(hit.point, transform);
                    !renderer.is_visible(m, width, height)
                }
                None => false,
            })
            .collect::<Vec<bool>>()
    });
    Grid::from_vec(width, height, rows.into_iter().flatten().collect())
}
