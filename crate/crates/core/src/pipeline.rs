//! End-to-end driver: plane detection, depth estimation, multi-symmetry
//! fusion and the reflective consistency check.

use alloc::vec::Vec;

use crate::geometry::{
    correspondence_from_plane, correspondence_general, plane_in_camera, warp_pixel, CameraIntrinsics, CameraPose,
    CorrespondenceMap, GeometryError, PixelDepth, SymmetryPlane, SymmetryTransform, TransformLabel, DEGENERATE_OFFSET,
};
use crate::grid::{Grid, RgbImage};
use crate::photo::{
    aggregate_cost_volume, build_cost_volume, confidence_map, extract_features, fuse_cost_volumes, plane_score,
    soft_argmin_depth, volume_to_probability, ConfidenceMap, CostVolume, DepthHypotheses, DepthMap, FeatureConfig,
    FeatureMap, MatchingParams, PhotoError,
};
use crate::sampler::{coarse_to_fine, Direction, RoundTrace, ScheduleConfig};

/// Default relative tolerance of [`reflective_consistency_filter`].
pub const DEFAULT_CONSISTENCY_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("no candidate plane produced a valid cost volume")]
    NoValidCandidate,
    #[error("plane is degenerate for this camera")]
    DegeneratePlane,
    #[error("no non-identity symmetry transform given")]
    IdentityOnly,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Photo(#[from] PhotoError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub hypotheses: DepthHypotheses,
    pub matching: MatchingParams,
    /// Softmax temperature for the depth distribution.
    pub temperature: f64,
    /// Temperature of the per-plane score.
    pub score_temperature: f64,
    /// Depth at which candidate planes cross the optical axis. `None` uses
    /// the middle of the hypothesis range.
    pub anchor_depth: Option<f64>,
    pub consistency_epsilon: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureConfig::default(),
            hypotheses: DepthHypotheses::new(0.64, 1.23, 64).expect("valid default range"),
            matching: MatchingParams::default(),
            temperature: 0.01,
            score_temperature: 0.5,
            anchor_depth: None,
            consistency_epsilon: DEFAULT_CONSISTENCY_EPSILON,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.features.stride == 0 {
            return Err(PipelineError::InvalidConfig("stride must be positive"));
        }
        if !(self.temperature > 0.0) || !(self.score_temperature > 0.0) {
            return Err(PipelineError::InvalidConfig("temperatures must be positive"));
        }
        if !(self.consistency_epsilon > 0.0) {
            return Err(PipelineError::InvalidConfig("consistency epsilon must be positive"));
        }
        if matches!(self.anchor_depth, Some(a) if !(a > 0.0 && a.is_finite())) {
            return Err(PipelineError::InvalidConfig("anchor depth must be positive"));
        }
        let m = &self.matching;
        if !(m.cost_ceiling > 0.0) || !(0.0..=1.0).contains(&m.census_weight) {
            return Err(PipelineError::InvalidConfig("invalid matching parameters"));
        }
        Ok(())
    }

    pub fn anchor(&self) -> f64 {
        self.anchor_depth.unwrap_or(0.5 * (self.hypotheses.d_min() + self.hypotheses.d_max()))
    }

    /// Candidate plane for a normal direction.
    pub fn plane_for(&self, normal: &Direction) -> Result<SymmetryPlane, PipelineError> {
        SymmetryPlane::anchored(normal.vector(), self.anchor()).map_err(|_| PipelineError::DegeneratePlane)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Best plane, anchored at the configured depth.
    pub plane: SymmetryPlane,
    /// Its unit normal with canonical sign.
    pub normal: Direction,
    pub score: f64,
    pub trace: Vec<RoundTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Full-resolution depth, valid on foreground pixels.
    pub depth: DepthMap,
    /// Depth at feature resolution.
    pub coarse_depth: DepthMap,
    /// Confidence at feature resolution.
    pub confidence: ConfidenceMap,
    pub plane: Option<SymmetryPlane>,
    pub correspondences: Vec<CorrespondenceMap>,
    /// True where the full-resolution depth passes the reflective check.
    pub consistency_mask: Grid<bool>,
}

/// Pixels that differ from the background color (all pixels when `None`).
pub fn foreground_mask(image: &RgbImage, background: Option<[u8; 3]>) -> Grid<bool> {
    image.map(|c| background != Some(*c))
}

/// Score of one candidate correspondence on precomputed features.
pub fn score_correspondence(features: &FeatureMap, c: &CorrespondenceMap, config: &PipelineConfig) -> f64 {
    let volume = build_cost_volume(features, c, &config.hypotheses, &config.matching);
    plane_score(&aggregate_cost_volume(&volume), config.score_temperature)
}

/// Coarse-to-fine search over plane normals, scoring each candidate by the
/// photo-consistency of its aggregated cost volume.
pub fn detect_symmetry(
    image: &RgbImage,
    k: &CameraIntrinsics,
    schedule: &ScheduleConfig,
    config: &PipelineConfig,
) -> Result<DetectionResult, PipelineError> {
    config.validate()?;
    let features = extract_features(image, &config.features)?;
    if features.valid_count() == 0 {
        return Err(PipelineError::NoValidCandidate);
    }
    let search = coarse_to_fine(
        |n| match config.plane_for(n) {
            Ok(plane) => score_correspondence(&features, &correspondence_from_plane(k, &plane), config),
            Err(_) => 0.0,
        },
        schedule,
    );
    let any_valid = search.rounds.iter().flat_map(|r| r.scores.iter()).any(|s| *s > 0.0);
    if !any_valid {
        return Err(PipelineError::NoValidCandidate);
    }
    Ok(DetectionResult {
        plane: config.plane_for(&search.best)?,
        normal: search.best,
        score: search.best_score,
        trace: search.rounds,
    })
}

fn reconstruct(
    image: &RgbImage,
    features: &FeatureMap,
    volume: CostVolume,
    plane: Option<SymmetryPlane>,
    correspondences: Vec<CorrespondenceMap>,
    config: &PipelineConfig,
) -> ReconstructionResult {
    let aggregated = aggregate_cost_volume(&volume);
    let prob = volume_to_probability(&aggregated, config.temperature);
    let coarse_depth = soft_argmin_depth(&prob, &config.hypotheses);
    let confidence = confidence_map(&prob);
    let mask = foreground_mask(image, config.features.background);
    let depth = coarse_depth.upsample(features.stride(), image.width(), image.height(), Some(&mask));
    let mut consistency_mask = Grid::new(image.width(), image.height(), false);
    for c in &correspondences {
        let pass = reflective_consistency_filter(&depth, c, config.consistency_epsilon);
        for (o, p) in consistency_mask.as_mut_slice().iter_mut().zip(pass.as_slice()) {
            *o |= *p;
        }
    }
    ReconstructionResult { depth, coarse_depth, confidence, plane, correspondences, consistency_mask }
}

/// Depth, confidence and consistency for a known (or detected) plane.
pub fn estimate_depth(
    image: &RgbImage,
    k: &CameraIntrinsics,
    plane: &SymmetryPlane,
    config: &PipelineConfig,
) -> Result<ReconstructionResult, PipelineError> {
    config.validate()?;
    if !(plane.distance() >= DEGENERATE_OFFSET) {
        // Camera center (numerically) on the plane.
        return Err(PipelineError::DegeneratePlane);
    }
    let features = extract_features(image, &config.features)?;
    let c = correspondence_from_plane(k, plane);
    let volume = build_cost_volume(&features, &c, &config.hypotheses, &config.matching);
    Ok(reconstruct(image, &features, volume, Some(*plane), alloc::vec![c], config))
}

/// Depth from several object-space symmetries at once; their cost volumes
/// are fused by a validity-weighted mean before aggregation.
pub fn multi_symmetry_depth(
    image: &RgbImage,
    k: &CameraIntrinsics,
    pose: &CameraPose,
    transforms: &[SymmetryTransform],
    config: &PipelineConfig,
) -> Result<ReconstructionResult, PipelineError> {
    config.validate()?;
    let active: Vec<&SymmetryTransform> = transforms.iter().filter(|t| !t.is_identity()).collect();
    if active.is_empty() {
        return Err(PipelineError::IdentityOnly);
    }
    let features = extract_features(image, &config.features)?;
    let correspondences: Vec<CorrespondenceMap> = active.iter().map(|t| correspondence_general(k, pose, t)).collect();
    let volumes: Vec<CostVolume> =
        correspondences.iter().map(|c| build_cost_volume(&features, c, &config.hypotheses, &config.matching)).collect();
    let fused = fuse_cost_volumes(&volumes)?;
    let plane = if active.iter().any(|t| t.label() == TransformLabel::M2) { plane_in_camera(pose).ok() } else { None };
    Ok(reconstruct(image, &features, fused, plane, correspondences, config))
}

/// True at pixels whose depth, warped through `c`, lands on a valid pixel
/// whose own depth agrees with the warp-implied depth within `epsilon`
/// (relative). Invalid warps, off-image landings and invalid depths fail.
pub fn reflective_consistency_filter(depth: &DepthMap, c: &CorrespondenceMap, epsilon: f64) -> Grid<bool> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let (w, h) = (depth.width(), depth.height());
    Grid::from_fn(w, h, |x, y| {
        let d = match depth.get(x, y) {
            Some(d) => d,
            None => return false,
        };
        let q = match warp_pixel(c, PixelDepth::new(x as f64 + 0.5, y as f64 + 0.5, d)) {
            Ok(q) => q,
            Err(_) => return false,
        };
        if !(q.x >= 0.0 && q.y >= 0.0 && q.x <= w as f64 && q.y <= h as f64) {
            return false;
        }
        match depth.sample(q.x - 0.5, q.y - 0.5) {
            Some(other) => (other - q.d).abs() <= epsilon * q.d,
            None => false,
        }
    })
}
