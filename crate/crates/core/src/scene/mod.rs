//! Synthetic symmetric scenes with exact ground truth.
//!
//! A [`Scene`] is a textured mesh that is invariant under its declared
//! object-space symmetries, seen by a pinhole camera. [`render`] ray casts
//! one ray per pixel center and produces the color image, the camera-space
//! depth map, and a mirror-occlusion mask: a pixel is flagged when the
//! reflection of its surface point across the ground-truth plane is hidden,
//! behind the camera, or outside the image.

mod benchmark;
mod mesh;
mod raycast;
mod render;
mod texture;

use alloc::vec;
use alloc::vec::Vec;

pub use benchmark::{
    benchmark_camera, benchmark_scene, doubly_symmetric_occluded_scene, occlusion_free_scene, textureless_scene,
    BenchmarkPose, BENCHMARK_SCENES, BENCHMARK_SIZE,
};
pub use mesh::{
    blob_half, box_mesh, make_symmetric_mesh, merge, relief_half, BlobParams, ReliefParams, TriangleMesh,
    MIN_TRIANGLE_AREA, SYMMETRY_TOLERANCE,
};
pub use raycast::{intersect_triangle, Bvh, Hit, INTERSECTION_EPS};
pub use render::{mirror_occlusion, render, RenderOutput, Renderer, SurfaceHit};
pub use texture::{value_noise, TextureKind, TextureSpec};

use crate::geometry::{plane_in_camera, CameraIntrinsics, CameraPose, GeometryError, SymmetryPlane, SymmetryTransform};
use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("half mesh vertex {vertex} lies on the negative side of x = 0")]
    HalfCrossesPlane { vertex: usize },
    #[error("triangle {triangle} references a missing vertex")]
    IndexOutOfRange { triangle: usize },
    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },
    #[error("mesh has {vertices} vertices but {tex_coords} material coordinates")]
    TexCoordCount { vertices: usize, tex_coords: usize },
    #[error("mesh contains a non-finite coordinate")]
    NonFiniteVertex,
    #[error("mesh is not invariant under {0}")]
    NotSymmetric(&'static str),
    #[error("depth range must satisfy 0 < min < max, got [{0}, {1}]")]
    InvalidDepthRange(f64, f64),
    #[error("light direction must lie in the symmetry plane")]
    AsymmetricLight,
    #[error("texture parameter out of range: {0}")]
    InvalidTexture(&'static str),
    #[error("invalid camera: {0}")]
    Geometry(#[from] GeometryError),
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("no pixel hits the mesh")]
    EmptyRender,
}

/// How surface color is formed from albedo.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Shading {
    /// Color equals albedo.
    #[default]
    Unlit,
    /// Two-sided Lambert with an object-space light lying in x = 0.
    Lambert { light: Vec3, ambient: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    mesh: TriangleMesh,
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    gt_plane: SymmetryPlane,
    texture: TextureSpec,
    symmetries: Vec<SymmetryTransform>,
    depth_range: (f64, f64),
    shading: Shading,
    /// Length unit of the geometry: positions, translation and depth range
    /// are stored in base units and multiplied by `unit` on output.
    unit: f64,
}

impl Scene {
    pub fn new(
        mesh: TriangleMesh,
        intrinsics: CameraIntrinsics,
        pose: CameraPose,
        texture: TextureSpec,
        symmetries: Vec<SymmetryTransform>,
        depth_range: (f64, f64),
    ) -> Result<Self, SceneError> {
        let gt_plane = plane_in_camera(&pose)?;
        if !(depth_range.0 > 0.0 && depth_range.0 < depth_range.1 && depth_range.1.is_finite()) {
            return Err(SceneError::InvalidDepthRange(depth_range.0, depth_range.1));
        }
        if !(texture.scale > 0.0 && texture.scale.is_finite()) {
            return Err(SceneError::InvalidTexture("scale must be positive"));
        }
        if !(0.0..=1.0).contains(&texture.asymmetry) {
            return Err(SceneError::InvalidTexture("asymmetry must lie in [0, 1]"));
        }
        let symmetries = if symmetries.is_empty() { vec![SymmetryTransform::m2()] } else { symmetries };
        for s in &symmetries {
            if !mesh.is_invariant_under(s) {
                return Err(SceneError::NotSymmetric(s.label().name()));
            }
        }
        Ok(Scene {
            mesh,
            intrinsics,
            pose,
            gt_plane,
            texture,
            symmetries,
            depth_range,
            shading: Shading::Unlit,
            unit: 1.0,
        })
    }

    pub fn with_shading(mut self, shading: Shading) -> Result<Self, SceneError> {
        if let Shading::Lambert { light, .. } = shading {
            if light.x.abs() > 1e-12 {
                return Err(SceneError::AsymmetricLight);
            }
        }
        self.shading = shading;
        Ok(self)
    }

    /// Mesh in base units (see [`Scene::unit`]).
    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }
    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }
    pub fn pose(&self) -> CameraPose {
        self.pose.scaled(self.unit)
    }
    pub fn gt_plane(&self) -> SymmetryPlane {
        self.gt_plane.scaled(self.unit)
    }
    pub fn unit(&self) -> f64 {
        self.unit
    }
    /// Pose with translation in base units.
    pub fn base_pose(&self) -> &CameraPose {
        &self.pose
    }
    pub fn base_gt_plane(&self) -> &SymmetryPlane {
        &self.gt_plane
    }
    pub fn base_depth_range(&self) -> (f64, f64) {
        self.depth_range
    }
    pub fn texture(&self) -> &TextureSpec {
        &self.texture
    }
    pub fn symmetries(&self) -> &[SymmetryTransform] {
        &self.symmetries
    }
    pub fn depth_range(&self) -> (f64, f64) {
        (self.depth_range.0 * self.unit, self.depth_range.1 * self.unit)
    }
    pub fn shading(&self) -> &Shading {
        &self.shading
    }

    /// The scene with geometry, camera translation and depth range scaled
    /// by `c > 0`. Only the unit changes: rays are cast in base units, so
    /// the image and occlusion mask are bitwise unchanged and depth scales
    /// exactly.
    pub fn scaled(&self, c: f64) -> Result<Scene, SceneError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(SceneError::InvalidScale(c));
        }
        Ok(Scene { unit: self.unit * c, ..self.clone() })
    }
}
