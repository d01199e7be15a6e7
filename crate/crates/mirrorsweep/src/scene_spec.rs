//! JSON scene and camera documents.
//!
//! A scene document names a mesh (inline arrays or a generator), a camera,
//! a procedural texture, the declared symmetries and the depth range.
//! Unknown fields are rejected. Emitted documents always use an inline
//! mesh and re-parse to an equal [`Scene`].

use mirrorsweep_core::geometry::{CameraIntrinsics, CameraPose, SymmetryPlane, SymmetryTransform, TransformLabel};
use mirrorsweep_core::scene::{
    blob_half, make_symmetric_mesh, relief_half, BlobParams, ReliefParams, Scene, Shading, TextureKind, TextureSpec,
    TriangleMesh,
};
use mirrorsweep_core::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Pinhole camera; `R` is row-major and maps object to camera coordinates
/// together with `t` (`x_cam = R x_obj + t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 3]>,
}

impl CameraSpec {
    pub fn new(k: &CameraIntrinsics, pose: Option<&CameraPose>) -> Self {
        CameraSpec {
            fx: k.fx(),
            fy: k.fy(),
            cx: k.cx(),
            cy: k.cy(),
            r: pose.map(|p| p.rotation().to_row_major()),
            t: pose.map(|p| p.translation().to_array()),
        }
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics, CliError> {
        CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy).map_err(|e| CliError::validation("camera", e))
    }

    pub fn pose(&self) -> Result<CameraPose, CliError> {
        match (self.r, self.t) {
            (Some(r), Some(t)) => CameraPose::new(Mat3::from_row_major(r), Vec3::from_array(t))
                .map_err(|e| CliError::validation("camera", e)),
            _ => Err(CliError::Validation("camera: fields R and t are required here".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryName {
    M2,
    M3,
    M4,
}

impl SymmetryName {
    pub fn transform(self) -> SymmetryTransform {
        match self {
            SymmetryName::M2 => SymmetryTransform::m2(),
            SymmetryName::M3 => SymmetryTransform::m3(),
            SymmetryName::M4 => SymmetryTransform::m4(),
        }
    }

    pub fn from_label(label: TransformLabel) -> Option<Self> {
        match label {
            TransformLabel::M2 => Some(SymmetryName::M2),
            TransformLabel::M3 => Some(SymmetryName::M3),
            TransformLabel::M4 => Some(SymmetryName::M4),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "M2" => Some(SymmetryName::M2),
            "M3" => Some(SymmetryName::M3),
            "M4" => Some(SymmetryName::M4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// Explicit geometry. With `half`, the arrays describe the x ≥ 0 half
    /// and are mirrored. Missing `tex_coords` default to positions.
    Inline {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[u32; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tex_coords: Option<Vec<[f64; 3]>>,
        #[serde(default)]
        half: bool,
    },
    /// Closed bumpy ellipsoid.
    Blob {
        radii: [f64; 3],
        #[serde(default)]
        bump_centers: Vec<[f64; 3]>,
        #[serde(default)]
        bump_amplitude: f64,
        #[serde(default = "default_bump_width")]
        bump_width: f64,
        #[serde(default = "default_rings")]
        rings: usize,
        #[serde(default = "default_segments")]
        segments: usize,
    },
    /// Bumpy slab facing −z.
    Relief {
        half_width: f64,
        half_height: f64,
        depth: f64,
        #[serde(default)]
        bump_centers: Vec<[f64; 3]>,
        #[serde(default)]
        bump_amplitude: f64,
        #[serde(default = "default_bump_width")]
        bump_width: f64,
        #[serde(default = "default_cells")]
        cells: usize,
    },
}

fn default_bump_width() -> f64 {
    0.5
}
fn default_rings() -> usize {
    24
}
fn default_segments() -> usize {
    48
}
fn default_cells() -> usize {
    48
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextureDoc {
    pub kind: String,
    #[serde(default = "default_texture_scale")]
    pub scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub asymmetry: f64,
}

fn default_texture_scale() -> f64 {
    TextureSpec::default().scale
}

impl Default for TextureDoc {
    fn default() -> Self {
        TextureDoc::from(&TextureSpec::default())
    }
}

impl From<&TextureSpec> for TextureDoc {
    fn from(t: &TextureSpec) -> Self {
        TextureDoc { kind: t.kind.name().to_owned(), scale: t.scale, seed: t.seed, asymmetry: t.asymmetry }
    }
}

impl TextureDoc {
    fn to_spec(&self) -> Result<TextureSpec, CliError> {
        let kind = TextureKind::from_name(&self.kind)
            .ok_or_else(|| CliError::Validation(format!("texture.kind: unknown texture {:?}", self.kind)))?;
        Ok(TextureSpec { kind, scale: self.scale, seed: self.seed, asymmetry: self.asymmetry })
    }
}

/// Two-sided Lambert shading; the light must lie in the plane x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadingDoc {
    pub light: [f64; 3],
    pub ambient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub mesh: MeshSpec,
    pub camera: CameraSpec,
    #[serde(default)]
    pub texture: TextureDoc,
    #[serde(default = "default_symmetries")]
    pub symmetries: Vec<SymmetryName>,
    #[serde(default = "default_depth_range")]
    pub depth_range: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shading: Option<ShadingDoc>,
    /// Length unit: mesh, `t` and depth range are multiplied by it.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

fn default_symmetries() -> Vec<SymmetryName> {
    vec![SymmetryName::M2]
}
fn default_depth_range() -> [f64; 2] {
    [0.64, 1.23]
}
fn one() -> f64 {
    1.0
}
fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn vec3s(v: &[[f64; 3]]) -> Vec<Vec3> {
    v.iter().map(|a| Vec3::from_array(*a)).collect()
}

fn mesh_error(e: impl std::fmt::Display) -> CliError {
    CliError::validation("mesh", e)
}

impl MeshSpec {
    fn build(&self, doubly: bool) -> Result<TriangleMesh, CliError> {
        let half = match self {
            MeshSpec::Inline { vertices, triangles, tex_coords, half } => {
                let verts = vec3s(vertices);
                let tex = tex_coords.as_deref().map_or_else(|| verts.clone(), vec3s);
                let mesh = TriangleMesh::new(verts, triangles.clone(), tex).map_err(mesh_error)?;
                if !*half {
                    return Ok(mesh);
                }
                mesh
            }
            MeshSpec::Blob { radii, bump_centers, bump_amplitude, bump_width, rings, segments } => {
                blob_half(&BlobParams {
                    radii: *radii,
                    bump_centers: vec3s(bump_centers),
                    bump_amplitude: *bump_amplitude,
                    bump_width: *bump_width,
                    rings: *rings,
                    segments: *segments,
                    doubly,
                })
                .map_err(mesh_error)?
            }
            MeshSpec::Relief { half_width, half_height, depth, bump_centers, bump_amplitude, bump_width, cells } => {
                relief_half(&ReliefParams {
                    half_width: *half_width,
                    half_height: *half_height,
                    depth: *depth,
                    bump_centers: vec3s(bump_centers),
                    bump_amplitude: *bump_amplitude,
                    bump_width: *bump_width,
                    cells: *cells,
                })
                .map_err(mesh_error)?
            }
        };
        make_symmetric_mesh(&half, doubly).map_err(mesh_error)
    }
}

/// Parses a scene document. Syntax errors and unknown fields report the
/// line and column; semantic errors name the field.
pub fn parse_scene_spec(text: &str) -> Result<SceneSpec, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::validation("scene spec", e))
}

pub fn scene_from_spec(text: &str) -> Result<Scene, CliError> {
    build_scene(&parse_scene_spec(text)?)
}

pub fn build_scene(spec: &SceneSpec) -> Result<Scene, CliError> {
    let doubly = spec.symmetries.iter().any(|s| *s != SymmetryName::M2);
    let mesh = spec.mesh.build(doubly)?;
    let k = spec.camera.intrinsics()?;
    let pose = spec.camera.pose()?;
    let texture = spec.texture.to_spec()?;
    let symmetries = spec.symmetries.iter().map(|s| s.transform()).collect();
    let scene = Scene::new(mesh, k, pose, texture, symmetries, (spec.depth_range[0], spec.depth_range[1]))
        .map_err(|e| CliError::validation("scene", e))?;
    let scene = match spec.shading {
        Some(s) => scene
            .with_shading(Shading::Lambert { light: Vec3::from_array(s.light), ambient: s.ambient })
            .map_err(|e| CliError::validation("shading", e))?,
        None => scene,
    };
    if spec.scale == 1.0 {
        Ok(scene)
    } else {
        scene.scaled(spec.scale).map_err(|e| CliError::validation("scale", e))
    }
}

/// Document reproducing `scene` exactly, with the full mesh inlined.
pub fn spec_from_scene(scene: &Scene) -> SceneSpec {
    let mesh = scene.mesh();
    let arrays = |v: &[Vec3]| v.iter().map(|p| p.to_array()).collect::<Vec<_>>();
    let (lo, hi) = scene.base_depth_range();
    SceneSpec {
        mesh: MeshSpec::Inline {
            vertices: arrays(mesh.vertices()),
            triangles: mesh.triangles().to_vec(),
            tex_coords: Some(arrays(mesh.tex_coords())),
            half: false,
        },
        camera: CameraSpec::new(scene.intrinsics(), Some(scene.base_pose())),
        texture: TextureDoc::from(scene.texture()),
        symmetries: scene.symmetries().iter().filter_map(|s| SymmetryName::from_label(s.label())).collect(),
        depth_range: [lo, hi],
        shading: match *scene.shading() {
            Shading::Unlit => None,
            Shading::Lambert { light, ambient } => Some(ShadingDoc { light: light.to_array(), ambient }),
        },
        scale: scene.unit(),
    }
}

pub fn emit_scene_spec(scene: &Scene) -> String {
    serde_json::to_string_pretty(&spec_from_scene(scene)).expect("scene spec serializes")
}

/// Plane in result documents: `w` with `wᵀx + 1 = 0`, its unit normal and
/// its distance from the camera center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneDoc {
    pub w: [f64; 3],
    pub normal: [f64; 3],
    pub distance: f64,
}

impl From<&SymmetryPlane> for PlaneDoc {
    fn from(p: &SymmetryPlane) -> Self {
        PlaneDoc { w: p.w().to_array(), normal: p.normal().to_array(), distance: p.distance() }
    }
}

impl PlaneDoc {
    pub fn plane(&self) -> Result<SymmetryPlane, CliError> {
        SymmetryPlane::new(Vec3::from_array(self.w)).map_err(|e| CliError::validation("plane", e))
    }
}
