//! Pinned synthetic scenes used by the test and benchmark suites.
//!
//! Objects sit at the origin with their main mirror plane at x = 0 and y
//! up; cameras orbit at 0.9–0.97 units so every visible depth falls inside
//! `[0.64, 1.23]`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::{blob_half, make_symmetric_mesh, relief_half, BlobParams, ReliefParams, TriangleMesh};
use super::texture::{TextureKind, TextureSpec};
use super::{Scene, SceneError};
use crate::geometry::{CameraIntrinsics, CameraPose, SymmetryTransform};
use crate::math::{cos, sin, to_radians, Vec3};

/// Image side length of benchmark renders.
pub const BENCHMARK_SIZE: usize = 256;
/// Number of scenes in the detection benchmark.
pub const BENCHMARK_SCENES: usize = 20;
pub const BENCHMARK_DEPTH_RANGE: (f64, f64) = (0.64, 1.23);

pub fn benchmark_camera() -> CameraIntrinsics {
    CameraIntrinsics::new(280.0, 280.0, 128.0, 128.0).expect("valid intrinsics")
}

/// Orbit camera looking at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkPose {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance: f64,
}

impl BenchmarkPose {
    pub fn to_pose(&self) -> Result<CameraPose, SceneError> {
        let (az, el) = (to_radians(self.azimuth_deg), to_radians(self.elevation_deg));
        let eye = Vec3::new(sin(az) * cos(el), sin(el), -cos(az) * cos(el)).scale(self.distance);
        Ok(CameraPose::look_at(eye, Vec3::ZERO, Vec3::Y)?)
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if let Some(u) = v.normalized() {
            if v.norm() <= 1.0 {
                return Vec3::new(u.x.abs(), u.y, u.z);
            }
        }
    }
}

fn random_blob(rng: &mut ChaCha8Rng, doubly: bool) -> Result<TriangleMesh, SceneError> {
    let params = BlobParams {
        radii: [rng.random_range(0.17..0.21), rng.random_range(0.17..0.21), rng.random_range(0.17..0.21)],
        bump_centers: (0..3).map(|_| random_direction(rng)).collect(),
        bump_amplitude: rng.random_range(0.1..0.2),
        bump_width: rng.random_range(0.45..0.7),
        rings: 24,
        segments: 48,
        doubly,
    };
    make_symmetric_mesh(&blob_half(&params)?, doubly)
}

fn random_relief(rng: &mut ChaCha8Rng, amplitude: f64) -> Result<TriangleMesh, SceneError> {
    let params = ReliefParams {
        half_width: rng.random_range(0.24..0.28),
        half_height: rng.random_range(0.22..0.26),
        depth: rng.random_range(0.04..0.08),
        bump_centers: (0..3).map(|_| Vec3::new(rng.random_range(0.1..0.9), rng.random_range(-0.8..0.8), 0.0)).collect(),
        bump_amplitude: amplitude,
        bump_width: rng.random_range(0.25..0.4),
        cells: 48,
    };
    make_symmetric_mesh(&relief_half(&params)?, false)
}

fn noise_texture(rng: &mut ChaCha8Rng, seed: u64) -> TextureSpec {
    TextureSpec { kind: TextureKind::Noise, scale: rng.random_range(0.05..0.07), seed, asymmetry: 0.0 }
}

fn signed_azimuth(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let a = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        a
    } else {
        -a
    }
}

/// Scene `index` of the pinned detection benchmark: textured blobs and
/// reliefs under mixed poses.
pub fn benchmark_scene(index: usize) -> Result<Scene, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + index as u64);
    let mesh = if index % 4 == 3 { random_relief(&mut rng, 0.08)? } else { random_blob(&mut rng, false)? };
    let pose = BenchmarkPose {
        azimuth_deg: signed_azimuth(&mut rng, 20.0, 45.0),
        elevation_deg: rng.random_range(5.0..30.0),
        distance: rng.random_range(0.9..0.97),
    };
    let texture = noise_texture(&mut rng, index as u64 + 1);
    Scene::new(mesh, benchmark_camera(), pose.to_pose()?, texture, vec![SymmetryTransform::m2()], BENCHMARK_DEPTH_RANGE)
}

/// Shallow textured relief seen from a moderate angle; mirror points are
/// visible almost everywhere.
pub fn occlusion_free_scene(index: usize) -> Result<Scene, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0CC1_0000 + index as u64);
    let mesh = random_relief(&mut rng, 0.02)?;
    let pose = BenchmarkPose {
        azimuth_deg: signed_azimuth(&mut rng, 20.0, 40.0),
        elevation_deg: rng.random_range(0.0..20.0),
        distance: rng.random_range(0.9..0.97),
    };
    let texture = noise_texture(&mut rng, 1000 + index as u64);
    Scene::new(mesh, benchmark_camera(), pose.to_pose()?, texture, vec![SymmetryTransform::m2()], BENCHMARK_DEPTH_RANGE)
}

/// Constant-albedo blob.
pub fn textureless_scene() -> Result<Scene, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E57);
    let mesh = random_blob(&mut rng, false)?;
    let pose = BenchmarkPose { azimuth_deg: 35.0, elevation_deg: 15.0, distance: 0.93 };
    let texture = TextureSpec { kind: TextureKind::Constant, scale: 0.04, seed: 0, asymmetry: 0.0 };
    Scene::new(mesh, benchmark_camera(), pose.to_pose()?, texture, vec![SymmetryTransform::m2()], BENCHMARK_DEPTH_RANGE)
}

/// Blob symmetric about x = 0 and y = 0, seen from far enough to the side
/// that much of the x-mirror is self-occluded while the y-mirror is not.
pub fn doubly_symmetric_occluded_scene() -> Result<Scene, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0B1);
    let mesh = random_blob(&mut rng, true)?;
    let pose = BenchmarkPose { azimuth_deg: 50.0, elevation_deg: 25.0, distance: 0.93 };
    let texture = noise_texture(&mut rng, 77);
    let symmetries: Vec<SymmetryTransform> = vec![SymmetryTransform::m2(), SymmetryTransform::m3()];
    Scene::new(mesh, benchmark_camera(), pose.to_pose()?, texture, symmetries, BENCHMARK_DEPTH_RANGE)
}
