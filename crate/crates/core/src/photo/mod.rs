//! Reflective plane-sweep photo-consistency.
//!
//! For a candidate correspondence map `C` and a grid of depth hypotheses,
//! every feature cell is warped to its mirror location at each depth and the
//! two descriptor windows are compared. Low cost means the hypothesis is
//! photo-consistent. The resulting volume is smoothed, turned into a
//! per-pixel distribution over depth, and reduced to a depth map (the
//! distribution's expectation), a confidence map, and a scalar plane score.

mod features;
mod persist;
mod reduce;
mod volume;

use alloc::vec::Vec;

pub use features::{extract_features, luma, FeatureConfig, FeatureMap};
pub use persist::{decode_volume, encode_volume, VolumeBlob, VOLUME_MAGIC};
pub use reduce::{
    aggregate_cost_volume, confidence_map, plane_score, soft_argmin_depth, volume_to_probability, ConfidenceMap,
    ProbabilityVolume,
};
pub use volume::{
    build_cost_volume, fuse_cost_volumes, masked_cost, matching_cost, max_cost, CostVolume, DepthHypotheses,
    MatchingParams,
};

use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhotoError {
    #[error("image {width}x{height} is smaller than the feature stride {stride}")]
    ImageTooSmall { width: usize, height: usize, stride: usize },
    #[error("invalid depth hypotheses: need 0 < d_min < d_max and D >= 2")]
    InvalidHypotheses,
    #[error("cost volumes have mismatched dimensions")]
    ShapeMismatch,
    #[error("malformed volume blob: {0}")]
    MalformedBlob(&'static str),
}

/// Dense depth with a validity mask. Invalid entries hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    depth: Grid<f64>,
    valid: Grid<bool>,
}

impl DepthMap {
    pub fn invalid(width: usize, height: usize) -> Self {
        DepthMap { depth: Grid::new(width, height, f64::NAN), valid: Grid::new(width, height, false) }
    }

    /// Builds a map from raw values; non-finite or non-positive entries are
    /// marked invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        let valid: Vec<bool> = values.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        let depth = values.iter().zip(&valid).map(|(d, v)| if *v { *d } else { f64::NAN }).collect();
        DepthMap { depth: Grid::from_vec(width, height, depth), valid: Grid::from_vec(width, height, valid) }
    }

    pub fn width(&self) -> usize {
        self.depth.width()
    }

    pub fn height(&self) -> usize {
        self.depth.height()
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        if *self.valid.get(x, y) {
            Some(*self.depth.get(x, y))
        } else {
            None
        }
    }

    pub fn set(&mut self, x: usize, y: usize, d: f64) {
        self.depth.set(x, y, d);
        self.valid.set(x, y, true);
    }

    pub fn invalidate(&mut self, x: usize, y: usize) {
        self.depth.set(x, y, f64::NAN);
        self.valid.set(x, y, false);
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.depth
    }

    pub fn mask(&self) -> &Grid<bool> {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Every valid depth multiplied by `c`.
    pub fn scaled(&self, c: f64) -> DepthMap {
        DepthMap { depth: self.depth.map(|d| d * c), valid: self.valid.clone() }
    }

    /// Validity-weighted bilinear sample at continuous *index* coordinates.
    /// `None` when no valid neighbor contributes.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let (w, h) = (self.width(), self.height());
        if w == 0 || h == 0 || !(x > -1.0 && y > -1.0 && x < w as f64 && y < h as f64) {
            return None;
        }
        let x0 = crate::math::floor(x);
        let y0 = crate::math::floor(y);
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (dy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
            for (dx, wx) in [(0i64, 1.0 - fx), (1, fx)] {
                let (xi, yi) = (x0 + dx, y0 + dy);
                if xi < 0 || yi < 0 || xi >= w as i64 || yi >= h as i64 {
                    continue;
                }
                let wgt = wx * wy;
                if wgt > 0.0 {
                    if let Some(d) = self.get(xi as usize, yi as usize) {
                        acc += wgt * d;
                        wsum += wgt;
                    }
                }
            }
        }
        if wsum > 0.0 {
            Some(acc / wsum)
        } else {
            None
        }
    }

    /// Upsamples a stride-`s` map to `width × height` pixels with
    /// validity-weighted bilinear interpolation. Pixels outside `mask`
    /// (when given) stay invalid.
    pub fn upsample(&self, stride: usize, width: usize, height: usize, mask: Option<&Grid<bool>>) -> DepthMap {
        let s = stride as f64;
        let mut out = DepthMap::invalid(width, height);
        let (fw, fh) = (self.width() as f64, self.height() as f64);
        for y in 0..height {
            for x in 0..width {
                if let Some(m) = mask {
                    if !*m.get(x, y) {
                        continue;
                    }
                }
                let u = ((x as f64 + 0.5) / s - 0.5).clamp(0.0, fw - 1.0);
                let v = ((y as f64 + 0.5) / s - 0.5).clamp(0.0, fh - 1.0);
                if let Some(d) = self.sample(u, v) {
                    out.set(x, y, d);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_skips_invalid_neighbors() {
        let mut m = DepthMap::invalid(2, 1);
        m.set(0, 0, 1.0);
        assert_eq!(m.sample(0.5, 0.0), Some(1.0));
        m.set(1, 0, 3.0);
        assert_eq!(m.sample(0.5, 0.0), Some(2.0));
        assert_eq!(DepthMap::invalid(2, 2).sample(0.5, 0.5), None);
    }

    #[test]
    fn upsample_constant_map() {
        let m = DepthMap::from_values(4, 4, alloc::vec![0.8; 16]);
        let up = m.upsample(4, 16, 16, None);
        assert_eq!(up.valid_count(), 256);
        assert!(up.values().iter().all(|d| (*d - 0.8).abs() < 1e-15));
    }
}
