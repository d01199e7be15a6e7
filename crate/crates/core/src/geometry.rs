//! Camera and reflection-symmetry algebra.
//!
//! Pixels and depths travel as the homogeneous 4-vector `[x, y, 1, 1/d]`,
//! where `(x, y)` are continuous pixel coordinates (pixel `(i, j)` has its
//! center at `(i + 0.5, j + 0.5)`) and `d` is camera-space depth. A camera
//! space point `X` maps to that vector through `K̃ · [X; 1] / d`, with `K̃` the
//! 4×4 embedding of the intrinsics.
//!
//! A reflection plane is stored as `w` with the plane being `wᵀx + 1 = 0` in
//! camera space. Its correspondence matrix `C = K̃ · M̃(w) · K̃⁻¹` sends a
//! pixel-depth vector to (a multiple of) the vector of its mirror point.

use crate::math::{atan2, to_degrees, Mat3, Mat4, Vec3};

/// Entry-wise tolerance for matrix identities (involution, cross-checks).
pub const MATRIX_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for a warp followed by its inverse warp.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-6;
/// Smallest `|third component|` accepted before a warp is declared at infinity.
pub const AT_INFINITY_EPS: f64 = 1e-12;
/// Smallest camera-to-plane offset accepted by [`plane_in_camera`].
pub const DEGENERATE_OFFSET: f64 = 1e-9;
/// Orthonormality tolerance for [`CameraPose`] rotations.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("focal lengths must be positive and finite (fx={fx}, fy={fy})")]
    InvalidFocal { fx: f64, fy: f64 },
    #[error("principal point must be finite")]
    NonFinitePrincipalPoint,
    #[error("rotation is not orthonormal with determinant +1")]
    NotARotation,
    #[error("translation must be finite")]
    NonFiniteTranslation,
    #[error("plane parameter w must be finite and nonzero")]
    ZeroPlane,
    #[error("transform is not an involution (M·M != I)")]
    NotAnInvolution,
    #[error("symmetry plane passes through the camera center")]
    Degenerate,
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(GeometryError::InvalidFocal { fx, fy });
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(GeometryError::NonFinitePrincipalPoint);
        }
        Ok(CameraIntrinsics { fx, fy, cx, cy })
    }

    pub fn identity() -> Self {
        CameraIntrinsics { fx: 1.0, fy: 1.0, cx: 0.0, cy: 0.0 }
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }

    /// Intrinsics for an image downsampled by `stride`, under the
    /// pixel-center convention.
    pub fn downsampled(&self, stride: usize) -> Self {
        let s = stride as f64;
        CameraIntrinsics { fx: self.fx / s, fy: self.fy / s, cx: self.cx / s, cy: self.cy / s }
    }

    /// Camera-space ray direction (z = 1) through continuous pixel `(x, y)`.
    pub fn ray_direction(&self, x: f64, y: f64) -> Vec3 {
        Vec3::new((x - self.cx) / self.fx, (y - self.cy) / self.fy, 1.0)
    }

    /// Projects a camera-space point to continuous pixel coordinates.
    pub fn project(&self, p: Vec3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }
}

/// Object-to-camera rigid transform `X_cam = R · X_obj + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    rotation: Mat3,
    translation: Vec3,
}

impl CameraPose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        let rtr = rotation.transpose().mul_mat(&rotation);
        if !(rtr.max_abs_diff(&Mat3::IDENTITY) <= ROTATION_TOLERANCE
            && (rotation.determinant() - 1.0).abs() <= ROTATION_TOLERANCE)
        {
            return Err(GeometryError::NotARotation);
        }
        if !translation.is_finite() {
            return Err(GeometryError::NonFiniteTranslation);
        }
        Ok(CameraPose { rotation, translation })
    }

    pub fn identity() -> Self {
        CameraPose { rotation: Mat3::IDENTITY, translation: Vec3::ZERO }
    }

    /// Camera at `eye` (object frame) looking at `target`, image y axis
    /// pointing along `-up` projected onto the image plane.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Result<Self, GeometryError> {
        let forward = (target - eye).normalized().ok_or(GeometryError::NotARotation)?;
        let right = forward.cross(up).normalized().ok_or(GeometryError::NotARotation)?;
        let down = forward.cross(right);
        let rotation = Mat3::from_rows(right, down, forward);
        let translation = -rotation.mul_vec(eye);
        CameraPose::new(rotation, translation)
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn to_mat4(&self) -> Mat4 {
        Mat4::from_rotation_translation(&self.rotation, self.translation)
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    /// The same pose with the translation scaled by `c` (scene scaled by `c`).
    pub fn scaled(&self, c: f64) -> Self {
        CameraPose { rotation: self.rotation, translation: self.translation.scale(c) }
    }
}

/// Reflection plane `wᵀx + 1 = 0` in camera space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryPlane {
    w: Vec3,
}

impl SymmetryPlane {
    pub fn new(w: Vec3) -> Result<Self, GeometryError> {
        if !w.is_finite() || w.norm_squared() <= 0.0 {
            return Err(GeometryError::ZeroPlane);
        }
        Ok(SymmetryPlane { w })
    }

    /// Plane with unit normal `normal` at unit distance from the camera
    /// (on the side opposite `normal`).
    pub fn unit_offset(normal: Vec3) -> Result<Self, GeometryError> {
        let n = normal.normalized().ok_or(GeometryError::ZeroPlane)?;
        SymmetryPlane::new(n)
    }

    /// Plane with the given normal that crosses the optical axis at depth
    /// `anchor_depth`. Invariant under flipping the sign of `normal`.
    pub fn anchored(normal: Vec3, anchor_depth: f64) -> Result<Self, GeometryError> {
        let n = normal.normalized().ok_or(GeometryError::ZeroPlane)?;
        if n.z.abs() < 1e-9 || !(anchor_depth > 0.0) {
            return Err(GeometryError::Degenerate);
        }
        SymmetryPlane::new(n.scale(-1.0 / (n.z * anchor_depth)))
    }

    pub fn w(&self) -> Vec3 {
        self.w
    }

    /// Unit normal with canonical sign (first nonzero component positive).
    pub fn normal(&self) -> Vec3 {
        canonical_sign(self.w.scale(1.0 / self.w.norm()))
    }

    /// Distance from the camera center to the plane, `1 / ‖w‖`.
    pub fn distance(&self) -> f64 {
        1.0 / self.w.norm()
    }

    /// Signed value `wᵀx + 1`, zero on the plane.
    pub fn evaluate(&self, x: Vec3) -> f64 {
        self.w.dot(x) + 1.0
    }

    /// Reflects a camera-space point across the plane.
    pub fn reflect(&self, x: Vec3) -> Vec3 {
        let k = 2.0 * self.evaluate(x) / self.w.norm_squared();
        x - self.w.scale(k)
    }

    /// The plane after scaling the scene by `c > 0` (`w` scales by `1/c`).
    pub fn scaled(&self, c: f64) -> Self {
        SymmetryPlane { w: self.w.scale(1.0 / c) }
    }
}

/// Flips `v` so that its first nonzero component is positive.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let first = [v.x, v.y, v.z].into_iter().find(|c| *c != 0.0).unwrap_or(0.0);
    if first < 0.0 {
        -v
    } else {
        v
    }
}

/// Which object-space involution a transform represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformLabel {
    Identity,
    /// Mirror across the object-space plane x = 0.
    M2,
    /// Mirror across the object-space plane y = 0.
    M3,
    /// Composition of M2 and M3 (half-turn about z).
    M4,
    Custom,
}

impl TransformLabel {
    pub fn name(&self) -> &'static str {
        match self {
            TransformLabel::Identity => "I",
            TransformLabel::M2 => "M2",
            TransformLabel::M3 => "M3",
            TransformLabel::M4 => "M4",
            TransformLabel::Custom => "custom",
        }
    }
}

/// Object-space involution used by [`correspondence_general`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTransform {
    matrix: Mat4,
    label: TransformLabel,
}

impl SymmetryTransform {
    pub const IDENTITY: SymmetryTransform =
        SymmetryTransform { matrix: Mat4::IDENTITY, label: TransformLabel::Identity };

    pub fn new(matrix: Mat4, label: TransformLabel) -> Result<Self, GeometryError> {
        if !matrix.is_finite() || (matrix * matrix).max_abs_diff(&Mat4::IDENTITY) > 1e-12 {
            return Err(GeometryError::NotAnInvolution);
        }
        Ok(SymmetryTransform { matrix, label })
    }

    pub fn from_label(label: TransformLabel) -> Option<Self> {
        let d = match label {
            TransformLabel::Identity => [1.0, 1.0, 1.0, 1.0],
            TransformLabel::M2 => [-1.0, 1.0, 1.0, 1.0],
            TransformLabel::M3 => [1.0, -1.0, 1.0, 1.0],
            TransformLabel::M4 => [-1.0, -1.0, 1.0, 1.0],
            TransformLabel::Custom => return None,
        };
        Some(SymmetryTransform { matrix: Mat4::diag(d), label })
    }

    pub fn m2() -> Self {
        SymmetryTransform::from_label(TransformLabel::M2).unwrap()
    }
    pub fn m3() -> Self {
        SymmetryTransform::from_label(TransformLabel::M3).unwrap()
    }
    pub fn m4() -> Self {
        SymmetryTransform::from_label(TransformLabel::M4).unwrap()
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn label(&self) -> TransformLabel {
        self.label
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.max_abs_diff(&Mat4::IDENTITY) <= 1e-12
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.matrix.transform_point(p)
    }
}

/// What a [`CorrespondenceMap`] was built from.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrespondenceSource {
    Plane { intrinsics: CameraIntrinsics, plane: SymmetryPlane },
    General { intrinsics: CameraIntrinsics, pose: CameraPose, transform: SymmetryTransform },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondenceMap {
    matrix: Mat4,
    source: CorrespondenceSource,
}

impl CorrespondenceMap {
    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn source(&self) -> &CorrespondenceSource {
        &self.source
    }

    /// `C·C` divided by its (3,3) entry; the identity for a valid map.
    pub fn normalized_square(&self) -> Mat4 {
        let sq = self.matrix * self.matrix;
        sq.scale(1.0 / sq[(3, 3)])
    }
}

/// A continuous pixel location with a positive depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDepth {
    pub x: f64,
    pub y: f64,
    pub d: f64,
}

impl PixelDepth {
    pub fn new(x: f64, y: f64, d: f64) -> Self {
        PixelDepth { x, y, d }
    }

    pub fn homogeneous(&self) -> [f64; 4] {
        [self.x, self.y, 1.0, 1.0 / self.d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum InvalidWarp {
    #[error("correspondence lies at infinity")]
    AtInfinity,
    #[error("correspondence lies behind the camera")]
    BehindCamera,
}

/// 4×4 embedding of the intrinsics.
pub fn intrinsics_embed(k: &CameraIntrinsics) -> Mat4 {
    Mat4([[k.fx, 0.0, k.cx, 0.0], [0.0, k.fy, k.cy, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
}

fn intrinsics_embed_inverse(k: &CameraIntrinsics) -> Mat4 {
    Mat4([
        [1.0 / k.fx, 0.0, -k.cx / k.fx, 0.0],
        [0.0, 1.0 / k.fy, -k.cy / k.fy, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Camera-space reflection `[[I − 2wwᵀ/‖w‖², −2w/‖w‖²], [0, 1]]`.
pub fn mirror_matrix(plane: &SymmetryPlane) -> Mat4 {
    let w = plane.w.to_array();
    let n2 = plane.w.norm_squared();
    let mut m = Mat4::IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] -= 2.0 * w[i] * w[j] / n2;
        }
        m[(i, 3)] = -2.0 * w[i] / n2;
    }
    m
}

pub fn correspondence_from_plane(k: &CameraIntrinsics, plane: &SymmetryPlane) -> CorrespondenceMap {
    let matrix = intrinsics_embed(k) * mirror_matrix(plane) * intrinsics_embed_inverse(k);
    CorrespondenceMap { matrix, source: CorrespondenceSource::Plane { intrinsics: *k, plane: *plane } }
}

pub fn correspondence_general(
    k: &CameraIntrinsics,
    pose: &CameraPose,
    transform: &SymmetryTransform,
) -> CorrespondenceMap {
    let rt = pose.to_mat4();
    // Rigid inverse [Rᵀ, −Rᵀt].
    let rt_t = pose.rotation.transpose();
    let rt_inv = Mat4::from_rotation_translation(&rt_t, -rt_t.mul_vec(pose.translation));
    let matrix = intrinsics_embed(k) * rt * transform.matrix * rt_inv * intrinsics_embed_inverse(k);
    CorrespondenceMap {
        matrix,
        source: CorrespondenceSource::General { intrinsics: *k, pose: *pose, transform: *transform },
    }
}

/// Mirror correspondence of a pixel-depth pair.
pub fn warp_pixel(c: &CorrespondenceMap, p: PixelDepth) -> Result<PixelDepth, InvalidWarp> {
    warp_homogeneous(&c.matrix, p.homogeneous())
}

#[inline]
pub(crate) fn warp_homogeneous(m: &Mat4, x: [f64; 4]) -> Result<PixelDepth, InvalidWarp> {
    let v = m.mul_vec(x);
    finish_warp(v)
}

#[inline]
pub(crate) fn finish_warp(v: [f64; 4]) -> Result<PixelDepth, InvalidWarp> {
    if !(v[2].abs() >= AT_INFINITY_EPS) || v[3] == 0.0 {
        return Err(InvalidWarp::AtInfinity);
    }
    let inv = 1.0 / v[2];
    let d = v[2] / v[3];
    if !(d > 0.0) || !d.is_finite() {
        return Err(InvalidWarp::BehindCamera);
    }
    Ok(PixelDepth { x: v[0] * inv, y: v[1] * inv, d })
}

/// Camera-space image of the object-space plane x = 0.
pub fn plane_in_camera(pose: &CameraPose) -> Result<SymmetryPlane, GeometryError> {
    let a = pose.rotation.mul_vec(Vec3::X);
    let b = a.dot(pose.translation);
    if b.abs() < DEGENERATE_OFFSET {
        return Err(GeometryError::Degenerate);
    }
    SymmetryPlane::new(a.scale(-1.0 / b))
}

/// Unsigned angle between two plane normals in degrees, in `[0, 90]`.
pub fn angle_error(a: &SymmetryPlane, b: &SymmetryPlane) -> f64 {
    direction_angle(a.w, b.w)
}

/// Angle in degrees between two lines through the origin.
pub fn direction_angle(a: Vec3, b: Vec3) -> f64 {
    to_degrees(atan2(a.cross(b).norm(), a.dot(b).abs()))
}
