//! Depth hypotheses, window matching cost and cost-volume construction.

use alloc::vec;
use alloc::vec::Vec;

use super::features::{FeatureMap, CENSUS_RADIUS};
use super::PhotoError;
use crate::geometry::{CorrespondenceMap, AT_INFINITY_EPS};
use crate::math::sqrt;
use crate::par;

/// Uniform depth grid `d_i = d_min + i / (D − 1) · (d_max − d_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthHypotheses {
    d_min: f64,
    d_max: f64,
    count: usize,
}

impl DepthHypotheses {
    pub fn new(d_min: f64, d_max: f64, count: usize) -> Result<Self, PhotoError> {
        if !(d_min > 0.0 && d_min < d_max && d_max.is_finite() && count >= 2) {
            return Err(PhotoError::InvalidHypotheses);
        }
        Ok(DepthHypotheses { d_min, d_max, count })
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }
    pub fn d_max(&self) -> f64 {
        self.d_max
    }
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn depth(&self, i: usize) -> f64 {
        self.d_min + (i as f64 / (self.count - 1) as f64) * (self.d_max - self.d_min)
    }

    /// Spacing between consecutive hypotheses.
    pub fn step(&self) -> f64 {
        (self.d_max - self.d_min) / (self.count - 1) as f64
    }

    pub fn depths(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.depth(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingParams {
    /// Support radius in feature cells (3 → 7×7) over which patch costs
    /// are averaged.
    pub patch_radius: usize,
    /// Radius of the warped patch compared at each cell (1 → 3×3).
    pub match_radius: usize,
    /// Upper bound on the `1 − ZNCC` term.
    pub cost_ceiling: f64,
    /// Weight of the census Hamming fraction; `0` disables census.
    pub census_weight: f64,
    /// Minimum distance, in feature cells, between a cell and its warped
    /// location. Closer correspondences are invalid: at the depth where the
    /// viewing ray meets the plane every pixel trivially matches itself.
    pub min_separation: f64,
    /// The support follows planes through the volume whose depth index
    /// changes by `-L..=L` hypotheses per cell along each axis; the
    /// cheapest one is kept. `0` gives a fronto-parallel box.
    pub slant_levels: usize,
    /// Slopes tried for the warped patch itself, in hypotheses per cell
    /// along each axis: `-L..=L`. The patch keeps the cheapest.
    pub patch_slant_levels: usize,
}

impl Default for MatchingParams {
    fn default() -> Self {
        MatchingParams {
            patch_radius: 3,
            match_radius: 1,
            cost_ceiling: 1.5,
            census_weight: 0.3,
            min_separation: 3.0,
            slant_levels: 2,
            patch_slant_levels: 1,
        }
    }
}

/// Cost assigned when either window has no texture.
pub const NEUTRAL_COST: f64 = 1.0;
const ZERO_VARIANCE: f64 = 1e-12;

/// Cost of a window pair with too little shared foreground.
pub fn max_cost(params: &MatchingParams) -> f64 {
    (1.0 - params.census_weight) * params.cost_ceiling + params.census_weight
}

/// Photo-consistency cost between two square windows of equal size:
/// `(1 − α)·min(1 − ZNCC, ceiling) + α·census_hamming_fraction`, or
/// [`NEUTRAL_COST`] when either window is constant.
pub fn matching_cost(a: &[f64], b: &[f64], params: &MatchingParams) -> f64 {
    assert_eq!(a.len(), b.len(), "windows must have the same size");
    let side = crate::math::round(sqrt(a.len() as f64)) as usize;
    assert_eq!(side * side, a.len(), "windows must be square");
    assert!(side % 2 == 1, "window side must be odd");
    let mask = vec![true; a.len()];
    masked_cost(a, &mask, b, &mask, side / 2, params)
}

/// True when the masked-in values of `a` have (numerically) zero variance.
fn is_flat(a: &[f64], mask: &[bool]) -> bool {
    let (mut n, mut s, mut ss) = (0usize, 0.0, 0.0);
    for (v, m) in a.iter().zip(mask) {
        if *m {
            n += 1;
            s += v;
            ss += v * v;
        }
    }
    n == 0 || !((ss - s * s / n as f64) / n as f64 > ZERO_VARIANCE)
}

/// [`matching_cost`] restricted to positions where both masks are set.
/// Census bits compare against the window center and are dropped where
/// either neighbor is masked out. A flat source window costs
/// [`NEUTRAL_COST`] whatever the target; otherwise fewer than half the
/// positions in common (or a masked-out center) gives [`max_cost`].
pub fn masked_cost(
    a: &[f64],
    a_mask: &[bool],
    b: &[f64],
    b_mask: &[bool],
    radius: usize,
    params: &MatchingParams,
) -> f64 {
    let side = 2 * radius + 1;
    let c = radius * side + radius;
    if is_flat(a, a_mask) {
        return NEUTRAL_COST;
    }
    if !(a_mask[c] && b_mask[c]) {
        return max_cost(params);
    }
    let (mut n, mut sa, mut sb, mut saa, mut sbb, mut sab) = (0usize, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        if a_mask[i] && b_mask[i] {
            let (x, y) = (a[i], b[i]);
            n += 1;
            sa += x;
            sb += y;
            saa += x * x;
            sbb += y * y;
            sab += x * y;
        }
    }
    if 2 * n < a.len() {
        return max_cost(params);
    }
    let nf = n as f64;
    let ss_a = saa - sa * sa / nf;
    let ss_b = sbb - sb * sb / nf;
    if !(ss_a / nf > ZERO_VARIANCE && ss_b / nf > ZERO_VARIANCE) {
        return NEUTRAL_COST;
    }
    let zncc = ((sab - sa * sb / nf) / sqrt(ss_a * ss_b)).clamp(-1.0, 1.0);
    let zncc_cost = (1.0 - zncc).min(params.cost_ceiling);
    let alpha = params.census_weight;
    if alpha <= 0.0 {
        return zncc_cost;
    }
    let r = CENSUS_RADIUS.min(radius) as isize;
    let (ca, cb) = (a[c], b[c]);
    let (mut bits, mut diff) = (0u32, 0u32);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx == 0 && dy == 0 {
                continue;
            }
            let i = (c as isize + dy * side as isize + dx) as usize;
            if a_mask[i] && b_mask[i] {
                bits += 1;
                diff += ((a[i] < ca) != (b[i] < cb)) as u32;
            }
        }
    }
    if bits == 0 {
        return zncc_cost;
    }
    (1.0 - alpha) * zncc_cost + alpha * diff as f64 / bits as f64
}

/// `H′ × W′ × D` costs, laid out `[(y · W′ + x) · D + d]`.
#[derive(Debug, Clone)]
pub struct CostVolume {
    width: usize,
    height: usize,
    depth: usize,
    cost: Vec<f64>,
    valid: Vec<bool>,
}

impl CostVolume {
    /// Volume from raw parts; non-finite costs are marked invalid.
    pub fn from_parts(width: usize, height: usize, depth: usize, cost: Vec<f64>, valid: Vec<bool>) -> Self {
        assert_eq!(cost.len(), width * height * depth);
        assert_eq!(valid.len(), cost.len());
        let valid: Vec<bool> = valid.iter().zip(&cost).map(|(v, c)| *v && c.is_finite()).collect();
        let cost = cost.iter().zip(&valid).map(|(c, v)| if *v { *c } else { f64::NAN }).collect();
        CostVolume { width, height, depth, cost, valid }
    }

    pub fn constant(width: usize, height: usize, depth: usize, value: f64) -> Self {
        let n = width * height * depth;
        CostVolume { width, height, depth, cost: vec![value; n], valid: vec![true; n] }
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

    #[inline]
    pub fn index(&self, x: usize, y: usize, d: usize) -> usize {
        (y * self.width + x) * self.depth + d
    }

    pub fn get(&self, x: usize, y: usize, d: usize) -> Option<f64> {
        let i = self.index(x, y, d);
        self.valid[i].then(|| self.cost[i])
    }

    pub fn set(&mut self, x: usize, y: usize, d: usize, value: Option<f64>) {
        let i = self.index(x, y, d);
        match value {
            Some(c) if c.is_finite() => {
                self.cost[i] = c;
                self.valid[i] = true;
            }
            _ => {
                self.cost[i] = f64::NAN;
                self.valid[i] = false;
            }
        }
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Costs along depth at one pixel (`None` for invalid cells).
    pub fn column(&self, x: usize, y: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        let start = self.index(x, y, 0);
        (start..start + self.depth).map(move |i| self.valid[i].then(|| self.cost[i]))
    }

    /// Index of the lowest valid cost at a pixel (first on ties).
    pub fn argmin(&self, x: usize, y: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (d, c) in self.column(x, y).enumerate() {
            if let Some(c) = c {
                if best.map_or(true, |(_, b)| c < b) {
                    best = Some((d, c));
                }
            }
        }
        best.map(|(d, _)| d)
    }

    pub(crate) fn raw_parts(&self) -> (&[f64], &[bool]) {
        (&self.cost, &self.valid)
    }
}

/// Equal shape, equal validity, and equal costs at valid cells.
impl PartialEq for CostVolume {
    fn eq(&self, other: &Self) -> bool {
        (self.width, self.height, self.depth) == (other.width, other.height, other.depth)
            && self.valid == other.valid
            && self.cost.iter().zip(&other.cost).zip(&self.valid).all(|((a, b), v)| !*v || a == b)
    }
}

/// Reflective plane sweep: for each feature cell and depth hypothesis, warp
/// a small patch around the cell (at full-image resolution) through `C` and
/// compare it with the feature grid around the mirror location. Patch
/// neighbors are warped at the same hypothesized depth, so the target patch
/// follows the local mirror mapping rather than the image axes. Background
/// cells on either side are left out of the comparison.
///
/// The cost of a cell is then the lowest mean patch cost over its support
/// window, taken along slanted planes through the volume (see
/// [`MatchingParams::slant_levels`]). Cells whose own patch is invalid stay
/// invalid.
pub fn build_cost_volume(
    features: &FeatureMap,
    correspondence: &CorrespondenceMap,
    hypotheses: &DepthHypotheses,
    params: &MatchingParams,
) -> CostVolume {
    let raw = patch_costs(features, correspondence, hypotheses, params);
    slanted_support(&raw, params.patch_radius, params.slant_levels)
}

fn patch_costs(
    features: &FeatureMap,
    correspondence: &CorrespondenceMap,
    hypotheses: &DepthHypotheses,
    params: &MatchingParams,
) -> CostVolume {
    let (fw, fh) = (features.width(), features.height());
    let depth_count = hypotheses.count();
    let s = features.stride() as f64;
    let r = params.match_radius as isize;
    let side = (2 * r + 1) as usize;
    let m = correspondence.matrix().0;
    let col_x = [m[0][0] * s, m[1][0] * s, m[2][0] * s, m[3][0] * s];
    let col_y = [m[0][1] * s, m[1][1] * s, m[2][1] * s, m[3][1] * s];
    let gray = features.gray();
    let fg: Vec<bool> = (0..fw * fh).map(|i| features.is_valid(i % fw, i / fw)).collect();
    let fg = &fg[..];
    let depths = hypotheses.depths();
    let inv_depths: Vec<f64> = depths.iter().map(|d| 1.0 / d).collect();
    let step = hypotheses.step();
    let pl = params.patch_slant_levels as isize;
    let patch_slopes: Vec<(f64, f64)> =
        (-pl..=pl).flat_map(|a| (-pl..=pl).map(move |b| (a as f64, b as f64))).collect();
    let (max_u, max_v) = ((fw - 1) as f64, (fh - 1) as f64);
    let min_sep_sq = params.min_separation * params.min_separation;

    let row_len = fw * depth_count;
    let rows: Vec<(Vec<f64>, Vec<bool>)> = par::map_indexed(fh, |fy| {
        let mut row_cost = vec![f64::NAN; row_len];
        let mut row_valid = vec![false; row_len];
        let mut src = vec![0.0; side * side];
        let mut dst = vec![0.0; side * side];
        let mut src_mask = vec![false; side * side];
        let mut dst_mask = vec![false; side * side];
        for fx in 0..fw {
            if !features.is_valid(fx, fy) {
                continue;
            }
            for (k, dy) in (-r..=r).enumerate() {
                for (l, dx) in (-r..=r).enumerate() {
                    let (xx, yy) = (fx as isize + dx, fy as isize + dy);
                    let inside = xx >= 0 && yy >= 0 && xx < fw as isize && yy < fh as isize;
                    let i = if inside { yy as usize * fw + xx as usize } else { 0 };
                    let ok = inside && fg[i];
                    src[k * side + l] = if ok { gray[i] } else { 0.0 };
                    src_mask[k * side + l] = ok;
                }
            }
            let flat = is_flat(&src, &src_mask);
            let px = (fx as f64 + 0.5) * s;
            let py = (fy as f64 + 0.5) * s;
            let base = [
                m[0][0] * px + m[0][1] * py + m[0][2],
                m[1][0] * px + m[1][1] * py + m[1][2],
                m[2][0] * px + m[2][1] * py + m[2][2],
                m[3][0] * px + m[3][1] * py + m[3][2],
            ];
            for (di, inv_d) in inv_depths.iter().enumerate() {
                let center = [
                    base[0] + m[0][3] * inv_d,
                    base[1] + m[1][3] * inv_d,
                    base[2] + m[2][3] * inv_d,
                    base[3] + m[3][3] * inv_d,
                ];
                // Center validity: finite, in front of the camera, inside the grid.
                if !(center[2].abs() >= AT_INFINITY_EPS) || !(center[2] / center[3] > 0.0) {
                    continue;
                }
                let cu = center[0] / center[2] / s - 0.5;
                let cv = center[1] / center[2] / s - 0.5;
                if !(cu >= 0.0 && cv >= 0.0 && cu <= max_u && cv <= max_v) {
                    continue;
                }
                let (du, dv) = (cu - fx as f64, cv - fy as f64);
                if du * du + dv * dv < min_sep_sq {
                    continue;
                }
                let i = fx * depth_count + di;
                row_valid[i] = true;
                if flat {
                    row_cost[i] = NEUTRAL_COST;
                    continue;
                }
                if sample_foreground(gray, fg, fw, fh, cu, cv).is_none() {
                    row_cost[i] = max_cost(params);
                    continue;
                }
                let d = depths[di];
                let mut best = f64::INFINITY;
                for &(gx, gy) in &patch_slopes {
                    for (k, dy) in (-r..=r).enumerate() {
                        let dyf = dy as f64;
                        for (l, dx) in (-r..=r).enumerate() {
                            let dxf = dx as f64;
                            let mut vx = center[0] + dxf * col_x[0] + dyf * col_y[0];
                            let mut vy = center[1] + dxf * col_x[1] + dyf * col_y[1];
                            let mut vz = center[2] + dxf * col_x[2] + dyf * col_y[2];
                            let dn = d + step * (gx * dxf + gy * dyf);
                            if dn != d && dn > 0.0 {
                                let delta = 1.0 / dn - inv_d;
                                vx += m[0][3] * delta;
                                vy += m[1][3] * delta;
                                vz += m[2][3] * delta;
                            }
                            let sample = if vz.abs() >= AT_INFINITY_EPS && dn > 0.0 {
                                sample_foreground(gray, fg, fw, fh, vx / vz / s - 0.5, vy / vz / s - 0.5)
                            } else {
                                None
                            };
                            dst[k * side + l] = sample.unwrap_or(0.0);
                            dst_mask[k * side + l] = sample.is_some();
                        }
                    }
                    best = best.min(masked_cost(&src, &src_mask, &dst, &dst_mask, params.match_radius, params));
                }
                row_cost[i] = best;
            }
        }
        (row_cost, row_valid)
    });
    let mut cost = Vec::with_capacity(fw * fh * depth_count);
    let mut valid = Vec::with_capacity(fw * fh * depth_count);
    for (c, v) in rows {
        cost.extend(c);
        valid.extend(v);
    }
    CostVolume::from_parts(fw, fh, depth_count, cost, valid)
}

/// Lowest mean of `raw` over `(2r+1)²` supports lying on slanted planes
/// `d + sx·dx + sy·dy` with integer slopes in `-levels..=levels`. Invalid
/// and out-of-range cells are skipped; supports need at least a third of
/// their cells valid.
fn slanted_support(raw: &CostVolume, radius: usize, levels: usize) -> CostVolume {
    let (w, h, dc) = (raw.width(), raw.height(), raw.depth());
    let (cost, valid) = raw.raw_parts();
    let r = radius as isize;
    let l = levels as isize;
    let min_count = ((2 * radius + 1) * (2 * radius + 1)).div_ceil(3) as u32;
    let idx = |x: usize, y: usize, d: usize| (y * w + x) * dc + d;
    let active: Vec<bool> = (0..w * h).map(|i| valid[i * dc..(i + 1) * dc].iter().any(|v| *v)).collect();
    let near_active =
        |x: usize, y: usize| (x.saturating_sub(radius)..(x + radius + 1).min(w)).any(|xx| active[y * w + xx]);
    // Horizontal slanted sums, one plane per x-slope.
    let horizontal: Vec<Vec<(f64, u32)>> = (-l..=l)
        .map(|sx| {
            let rows: Vec<Vec<(f64, u32)>> = par::map_indexed(h, |y| {
                let mut out = vec![(0.0, 0u32); w * dc];
                for x in 0..w {
                    if !near_active(x, y) {
                        continue;
                    }
                    for d in 0..dc {
                        let (mut sum, mut n) = (0.0, 0u32);
                        for dx in -r..=r {
                            let (xx, dd) = (x as isize + dx, d as isize + sx * dx);
                            if xx < 0 || xx >= w as isize || dd < 0 || dd >= dc as isize {
                                continue;
                            }
                            let i = idx(xx as usize, y, dd as usize);
                            if valid[i] {
                                sum += cost[i];
                                n += 1;
                            }
                        }
                        out[x * dc + d] = (sum, n);
                    }
                }
                out
            });
            rows.concat()
        })
        .collect();
    let rows: Vec<Vec<f64>> = par::map_indexed(h, |y| {
        let mut out = vec![f64::NAN; w * dc];
        for x in 0..w {
            if !active[y * w + x] {
                continue;
            }
            for d in 0..dc {
                if !valid[idx(x, y, d)] {
                    continue;
                }
                let mut best = f64::INFINITY;
                for plane in &horizontal {
                    for sy in -l..=l {
                        let (mut sum, mut n) = (0.0, 0u32);
                        for dy in -r..=r {
                            let (yy, dd) = (y as isize + dy, d as isize + sy * dy);
                            if yy < 0 || yy >= h as isize || dd < 0 || dd >= dc as isize {
                                continue;
                            }
                            let (s, c) = plane[idx(x, yy as usize, dd as usize)];
                            sum += s;
                            n += c;
                        }
                        if n >= min_count {
                            best = best.min(sum / n as f64);
                        }
                    }
                }
                out[x * dc + d] = best;
            }
        }
        out
    });
    let cost = rows.concat();
    let valid = cost.iter().map(|c| c.is_finite()).collect();
    CostVolume::from_parts(w, h, dc, cost, valid)
}

/// Validity-weighted mean of several volumes of identical shape.
pub fn fuse_cost_volumes(volumes: &[CostVolume]) -> Result<CostVolume, PhotoError> {
    let first = volumes.first().ok_or(PhotoError::ShapeMismatch)?;
    if volumes.iter().any(|v| (v.width, v.height, v.depth) != (first.width, first.height, first.depth)) {
        return Err(PhotoError::ShapeMismatch);
    }
    let n = first.cost.len();
    let mut cost = vec![f64::NAN; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        let mut sum = 0.0;
        let mut count = 0usize;
        for v in volumes {
            if v.valid[i] {
                sum += v.cost[i];
                count += 1;
            }
        }
        if count > 0 {
            cost[i] = sum / count as f64;
            valid[i] = true;
        }
    }
    Ok(CostVolume { width: first.width, height: first.height, depth: first.depth, cost, valid })
}

/// Bilinear sample of `gray` at index coordinates using only foreground
/// corners; `None` outside the grid or when foreground corners carry less
/// than half the weight.
fn sample_foreground(gray: &[f64], fg: &[bool], w: usize, h: usize, u: f64, v: f64) -> Option<f64> {
    if !(u >= 0.0 && v >= 0.0 && u <= (w - 1) as f64 && v <= (h - 1) as f64) {
        return None;
    }
    let x0 = (u as usize).min(w.saturating_sub(2));
    let y0 = (v as usize).min(h.saturating_sub(2));
    let (fx, fy) = (u - x0 as f64, v - y0 as f64);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let corners = [
        (y0 * w + x0, (1.0 - fx) * (1.0 - fy)),
        (y0 * w + x1, fx * (1.0 - fy)),
        (y1 * w + x0, (1.0 - fx) * fy),
        (y1 * w + x1, fx * fy),
    ];
    let (mut acc, mut weight) = (0.0, 0.0);
    for (i, wt) in corners {
        if fg[i] {
            acc += gray[i] * wt;
            weight += wt;
        }
    }
    (weight >= 0.5).then(|| acc / weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn window(seed: u64) -> Vec<f64> {
        (0..49u64).map(|i| ((i * 2654435761 + seed * 40503) % 1000) as f64 / 1000.0).collect()
    }

    #[test]
    fn hypotheses_grid() {
        let h = DepthHypotheses::new(0.64, 1.23, 64).unwrap();
        assert_eq!(h.depth(0), 0.64);
        assert_abs_diff_eq!(h.depth(63), 1.23, epsilon = 1e-15);
        assert_abs_diff_eq!(h.depth(32), 0.939_682_539_682_539_7, epsilon = 1e-12);
        let h = DepthHypotheses::new(1.0, 2.0, 2).unwrap();
        assert_eq!(h.depths(), vec![1.0, 2.0]);
        assert!(DepthHypotheses::new(1.0, 1.0, 4).is_err());
        assert!(DepthHypotheses::new(0.0, 1.0, 4).is_err());
        assert!(DepthHypotheses::new(0.5, 1.0, 1).is_err());
    }

    #[test]
    fn identical_windows_cost_zero() {
        let a = window(1);
        assert_abs_diff_eq!(matching_cost(&a, &a, &MatchingParams::default()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn affine_intensity_change_keeps_zncc_term_zero() {
        let a = window(2);
        let b: Vec<f64> = a.iter().map(|v| 2.5 * v + 0.1).collect();
        let p = MatchingParams { census_weight: 0.0, ..MatchingParams::default() };
        assert_abs_diff_eq!(matching_cost(&a, &b, &p), 0.0, epsilon = 1e-12);
        // Census is order based, so it is invariant too.
        assert_abs_diff_eq!(matching_cost(&a, &b, &MatchingParams::default()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_window_is_neutral() {
        let c = vec![0.4; 49];
        let p = MatchingParams::default();
        assert_eq!(matching_cost(&c, &window(3), &p), NEUTRAL_COST);
        assert_eq!(matching_cost(&window(3), &c, &p), NEUTRAL_COST);
    }

    #[test]
    fn anticorrelated_window_is_capped() {
        let a = window(4);
        let b: Vec<f64> = a.iter().map(|v| 1.0 - v).collect();
        let p = MatchingParams { census_weight: 0.0, ..MatchingParams::default() };
        assert_abs_diff_eq!(matching_cost(&a, &b, &p), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn fusion_averages_valid_cells() {
        let mut a = CostVolume::constant(1, 1, 2, 0.2);
        let b = CostVolume::constant(1, 1, 2, 0.6);
        a.set(0, 0, 1, None);
        let f = fuse_cost_volumes(&[a, b]).unwrap();
        assert_abs_diff_eq!(f.get(0, 0, 0).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.get(0, 0, 1).unwrap(), 0.6, epsilon = 1e-15);
        assert!(fuse_cost_volumes(&[CostVolume::constant(1, 1, 2, 0.0), CostVolume::constant(2, 1, 2, 0.0)]).is_err());
    }
    #[test]
    fn masked_cost_background_rules() {
        let p = MatchingParams::default();
        let a = window(5);
        let all = vec![true; 49];
        // Flat source wins over a background target.
        assert_eq!(masked_cost(&vec![0.3; 49], &all, &a, &[false; 49], 3, &p), NEUTRAL_COST);
        let mut centre_off = all.clone();
        centre_off[24] = false;
        assert_eq!(masked_cost(&a, &all, &a, &centre_off, 3, &p), max_cost(&p));
        let mostly_off: Vec<bool> = (0..49).map(|i| i == 24 || i < 20).collect();
        assert_eq!(masked_cost(&a, &all, &a, &mostly_off, 3, &p), max_cost(&p));
        let half: Vec<bool> = (0..49).map(|i| i >= 14).collect();
        assert_abs_diff_eq!(masked_cost(&a, &all, &a, &half, 3, &p), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn slanted_support_follows_a_slanted_ridge() {
        // Cheap cells lie on d = 4 + x; a flat 7x7 box would miss most of them.
        let (w, h, dc) = (9, 9, 16);
        let mut v = CostVolume::constant(w, h, dc, 1.0);
        for y in 0..h {
            for x in 0..w {
                v.set(x, y, 4 + x, Some(0.1));
            }
        }
        let s = slanted_support(&v, 3, 2);
        assert_abs_diff_eq!(s.get(4, 4, 8).unwrap(), 0.1, epsilon = 1e-12);
        assert!(s.get(4, 4, 2).unwrap() > 0.5);
        let flat = slanted_support(&v, 3, 0);
        assert!(flat.get(4, 4, 8).unwrap() > 0.5);
    }

    #[test]
    fn slanted_support_needs_a_third_of_the_window() {
        let mut v = CostVolume::constant(7, 7, 1, 0.5);
        for y in 0..7 {
            for x in 0..7 {
                if y * 7 + x >= 15 {
                    v.set(x, y, 0, None);
                }
            }
        }
        v.set(3, 3, 0, Some(0.5));
        assert!(slanted_support(&v, 3, 0).get(3, 3, 0).is_none());
        v.set(3, 4, 0, Some(0.5));
        assert_abs_diff_eq!(slanted_support(&v, 3, 0).get(3, 3, 0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn foreground_sampling() {
        let gray = [0.0, 1.0, 2.0, 3.0];
        let fg = [true, true, true, false];
        assert_abs_diff_eq!(sample_foreground(&gray, &fg, 2, 2, 0.5, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        // Background corner is dropped and the rest renormalized.
        assert_abs_diff_eq!(sample_foreground(&gray, &fg, 2, 2, 0.5, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert!(sample_foreground(&gray, &fg, 2, 2, 0.9, 0.9).is_none());
        assert!(sample_foreground(&gray, &fg, 2, 2, -0.1, 0.0).is_none());
    }
}
