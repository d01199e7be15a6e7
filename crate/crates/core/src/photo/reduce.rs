//! Reductions of a cost volume: smoothing, softmax over depth, soft-argmin
//! depth, confidence and plane score.

use alloc::vec;
use alloc::vec::Vec;

use super::volume::{CostVolume, DepthHypotheses};
use super::DepthMap;
use crate::grid::Grid;
use crate::math::exp;
use crate::par;

/// Spatial radius of the aggregation window (5×5).
pub const AGGREGATION_SPATIAL_RADIUS: usize = 2;
/// Depth radius of the aggregation window (3 slices).
pub const AGGREGATION_DEPTH_RADIUS: usize = 1;
/// Number of hypotheses summed by [`confidence_map`].
pub const CONFIDENCE_WINDOW: usize = 4;

/// Running box sum of `src` (stride `step`, `n` samples starting at `base`)
/// with radius `r`, written to `dst` with the same layout.
fn box_line(src: &[f64], dst: &mut [f64], base: usize, step: usize, n: usize, r: usize) {
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        let mut s = 0.0;
        for k in lo..=hi {
            s += src[base + k * step];
        }
        dst[base + i * step] = s;
    }
}

/// Box sums over a `w × h × d` array with radii `(rx, ry, rd)`.
fn box_sum_3d(data: &[f64], w: usize, h: usize, d: usize, rx: usize, ry: usize, rd: usize) -> Vec<f64> {
    let mut a = data.to_vec();
    let mut b = vec![0.0; data.len()];
    // Depth (contiguous).
    for p in 0..w * h {
        box_line(&a, &mut b, p * d, 1, d, rd);
    }
    // x within each row.
    let rows: Vec<Vec<f64>> = par::map_indexed(h, |y| {
        let mut out = vec![0.0; w * d];
        let row = &b[y * w * d..(y + 1) * w * d];
        for k in 0..d {
            box_line(row, &mut out, k, d, w, rx);
        }
        out
    });
    for (y, r) in rows.into_iter().enumerate() {
        a[y * w * d..(y + 1) * w * d].copy_from_slice(&r);
    }
    // y within each column.
    let stride = w * d;
    for x in 0..w {
        for k in 0..d {
            box_line(&a, &mut b, x * d + k, stride, h, ry);
        }
    }
    b
}

/// 5×5×3 mean filter. Invalid cells neither contribute nor receive values;
/// every valid cell is averaged over the valid cells in its window.
pub fn aggregate_cost_volume(volume: &CostVolume) -> CostVolume {
    let (w, h, d) = (volume.width(), volume.height(), volume.depth());
    let (cost, valid) = volume.raw_parts();
    let masked: Vec<f64> = cost.iter().zip(valid).map(|(c, v)| if *v { *c } else { 0.0 }).collect();
    let counts: Vec<f64> = valid.iter().map(|v| if *v { 1.0 } else { 0.0 }).collect();
    let (rs, rd) = (AGGREGATION_SPATIAL_RADIUS, AGGREGATION_DEPTH_RADIUS);
    let sums = box_sum_3d(&masked, w, h, d, rs, rs, rd);
    let n = box_sum_3d(&counts, w, h, d, rs, rs, rd);
    let out: Vec<f64> = sums.iter().zip(&n).zip(valid).map(|((s, n), v)| if *v { s / n } else { f64::NAN }).collect();
    CostVolume::from_parts(w, h, d, out, valid.to_vec())
}

/// Per-pixel distribution over depth hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVolume {
    width: usize,
    height: usize,
    depth: usize,
    prob: Vec<f64>,
    pixel_valid: Vec<bool>,
}

impl ProbabilityVolume {
    /// Normalizes each pixel's column of non-negative weights. Columns that
    /// sum to zero are invalid.
    pub fn from_weights(width: usize, height: usize, depth: usize, mut weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), width * height * depth);
        let mut pixel_valid = vec![false; width * height];
        for (p, col) in weights.chunks_mut(depth).enumerate() {
            let s: f64 = col.iter().sum();
            if s > 0.0 && s.is_finite() {
                col.iter_mut().for_each(|v| *v /= s);
                pixel_valid[p] = true;
            } else {
                col.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        ProbabilityVolume { width, height, depth, prob: weights, pixel_valid }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.pixel_valid[y * self.width + x]
    }

    /// Distribution at a pixel (all zeros when invalid).
    pub fn column(&self, x: usize, y: usize) -> &[f64] {
        let s = (y * self.width + x) * self.depth;
        &self.prob[s..s + self.depth]
    }

    pub fn values(&self) -> &[f64] {
        &self.prob
    }

    /// Index of the most probable hypothesis (first on ties).
    pub fn argmax(&self, x: usize, y: usize) -> Option<usize> {
        if !self.is_valid(x, y) {
            return None;
        }
        let col = self.column(x, y);
        let mut best = 0;
        for (i, p) in col.iter().enumerate() {
            if *p > col[best] {
                best = i;
            }
        }
        Some(best)
    }
}

/// `softmax(−V/τ)` along depth over the valid cells of each pixel.
pub fn volume_to_probability(volume: &CostVolume, temperature: f64) -> ProbabilityVolume {
    assert!(temperature > 0.0, "temperature must be positive");
    let (w, h, d) = (volume.width(), volume.height(), volume.depth());
    let (cost, valid) = volume.raw_parts();
    let mut weights = vec![0.0; cost.len()];
    for ((wcol, ccol), vcol) in weights.chunks_mut(d).zip(cost.chunks(d)).zip(valid.chunks(d)) {
        let min = ccol.iter().zip(vcol).filter(|(_, v)| **v).map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            continue;
        }
        for ((o, c), v) in wcol.iter_mut().zip(ccol).zip(vcol) {
            if *v {
                *o = exp(-(c - min) / temperature);
            }
        }
    }
    ProbabilityVolume::from_weights(w, h, d, weights)
}

/// Expected depth `Σ dᵢ·P(dᵢ)`, clamped to the hypothesis range.
pub fn soft_argmin_depth(prob: &ProbabilityVolume, hypotheses: &DepthHypotheses) -> DepthMap {
    assert_eq!(prob.depth(), hypotheses.count(), "hypothesis count mismatch");
    let depths = hypotheses.depths();
    let (w, h) = (prob.width(), prob.height());
    let mut out = DepthMap::invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            if !prob.is_valid(x, y) {
                continue;
            }
            let e: f64 = prob.column(x, y).iter().zip(&depths).map(|(p, d)| p * d).sum();
            out.set(x, y, e.clamp(hypotheses.d_min(), hypotheses.d_max()));
        }
    }
    out
}

/// Per-pixel confidence in `[0, 1]`; invalid pixels hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    values: Grid<f64>,
    valid: Grid<bool>,
}

impl ConfidenceMap {
    pub fn new(values: Grid<f64>, valid: Grid<bool>) -> Self {
        ConfidenceMap { values, valid }
    }
    pub fn width(&self) -> usize {
        self.values.width()
    }
    pub fn height(&self) -> usize {
        self.values.height()
    }
    pub fn get(&self, x: usize, y: usize) -> f64 {
        *self.values.get(x, y)
    }
    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }
    pub fn mask(&self) -> &Grid<bool> {
        &self.valid
    }

    /// Mean confidence over valid pixels, or `None` if there are none.
    pub fn mean(&self) -> Option<f64> {
        self.mean_where(|_, _| true)
    }

    /// Mean over valid pixels selected by `select(x, y)`.
    pub fn mean_where(&self, select: impl Fn(usize, usize) -> bool) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in 0..self.height() {
            for x in 0..self.width() {
                if *self.valid.get(x, y) && select(x, y) {
                    sum += self.get(x, y);
                    n += 1;
                }
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Nearest-cell upsampling to a `width × height` image at `stride`.
    pub fn upsample(&self, stride: usize, width: usize, height: usize) -> ConfidenceMap {
        let (fw, fh) = (self.width(), self.height());
        let pick = |x: usize, y: usize| ((x / stride).min(fw - 1), (y / stride).min(fh - 1));
        ConfidenceMap {
            values: Grid::from_fn(width, height, |x, y| {
                let (u, v) = pick(x, y);
                self.get(u, v)
            }),
            valid: Grid::from_fn(width, height, |x, y| {
                let (u, v) = pick(x, y);
                *self.valid.get(u, v)
            }),
        }
    }
}

/// Probability mass of the four hypotheses around the per-pixel argmax
/// (`argmax − 1 ..= argmax + 2`, shifted to stay inside the volume).
pub fn confidence_map(prob: &ProbabilityVolume) -> ConfidenceMap {
    let (w, h, d) = (prob.width(), prob.height(), prob.depth());
    let k = CONFIDENCE_WINDOW.min(d);
    let mut values = Grid::new(w, h, 0.0);
    let mut valid = Grid::new(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if let Some(a) = prob.argmax(x, y) {
                let start = a.saturating_sub(1).min(d - k);
                let s: f64 = prob.column(x, y)[start..start + k].iter().sum();
                values.set(x, y, s.clamp(0.0, 1.0));
                valid.set(x, y, true);
            }
        }
    }
    ConfidenceMap { values, valid }
}

/// Mean over pixels with any valid cell of `exp(−min_d cost / τ_s)`; 0 when
/// no pixel is valid.
pub fn plane_score(volume: &CostVolume, temperature: f64) -> f64 {
    assert!(temperature > 0.0, "temperature must be positive");
    let d = volume.depth();
    let (cost, valid) = volume.raw_parts();
    let mut sum = 0.0;
    let mut n = 0usize;
    for (ccol, vcol) in cost.chunks(d).zip(valid.chunks(d)) {
        let min = ccol.iter().zip(vcol).filter(|(_, v)| **v).map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            sum += exp(-min / temperature);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
