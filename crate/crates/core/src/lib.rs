//! Single-image shape from reflection symmetry.
//!
//! The crate detects the camera-space mirror plane of a bilaterally
//! symmetric object with a coarse-to-fine photo-consistency search over
//! plane normals, then recovers dense depth with a reflective plane-sweep
//! cost volume: every depth hypothesis at a pixel predicts where the mirror
//! point should appear, and the two image patches are compared.
//!
//! The core is `no_std` + `alloc`. With the default `std` feature, cost
//! volumes, candidate scoring and rendering run on the rayon pool; all
//! reductions are index ordered so results do not depend on thread count.
//!
//! Module map:
//! - [`geometry`]: intrinsics, poses, mirror/correspondence matrices, warps
//! - [`sampler`]: Fibonacci cap sampling and the coarse-to-fine driver
//! - [`scene`]: symmetric meshes, procedural textures and a ray caster that
//!   produces images, depth and mirror-occlusion ground truth
//! - [`photo`]: features, cost volumes, soft-argmin depth and confidence
//! - [`pipeline`]: detection, depth estimation, multi-symmetry fusion
//! - [`eval`]: depth and angle metrics

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eval;
pub mod geometry;
pub mod grid;
pub mod math;
mod par;
pub mod photo;
pub mod pipeline;
pub mod sampler;
pub mod scene;

pub use geometry::{
    angle_error, correspondence_from_plane, correspondence_general, intrinsics_embed, mirror_matrix, plane_in_camera,
    warp_pixel, CameraIntrinsics, CameraPose, CorrespondenceMap, GeometryError, InvalidWarp, PixelDepth, SymmetryPlane,
    SymmetryTransform, TransformLabel,
};
pub use grid::{Grid, RgbImage};
pub use math::{Mat3, Mat4, Vec3};
