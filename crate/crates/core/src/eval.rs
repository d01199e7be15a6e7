//! Depth and plane-angle evaluation.
//!
//! Depth errors follow the usual KITTI definitions (natural log, no ×100
//! scaling). Sums use pairwise summation so results do not depend on how
//! the work is split.

use alloc::vec::Vec;

use crate::geometry::SymmetryPlane;
use crate::grid::Grid;
use crate::math::{ln, sqrt};
use crate::photo::DepthMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no pixel is valid in both maps and the mask")]
    EmptyMask,
    #[error("depth must be positive at every evaluated pixel")]
    NonPositiveDepth,
    #[error("no errors given")]
    EmptyInput,
    #[error("depth maps have different sizes")]
    ShapeMismatch,
}

/// Pairwise (fixed-tree) sum.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Lower median (element `(n − 1) / 2` of the sorted values).
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub silog: f64,
    pub absrel: f64,
    pub sqrel: f64,
    pub rmse: f64,
    pub mean_l1: f64,
    pub median_l1: f64,
    pub pixel_count: usize,
}

/// Predicted depth rescaled by `‖w_hat‖ / ‖w_gt‖`, mapping a prediction
/// made under the detected plane's scale back to ground-truth scale.
pub fn rescale_depth(pred: &DepthMap, w_gt: &SymmetryPlane, w_hat: &SymmetryPlane) -> DepthMap {
    pred.scaled(w_hat.w().norm() / w_gt.w().norm())
}

/// `(pred, gt)` pairs at pixels valid in both maps and in `mask`.
fn paired(pred: &DepthMap, gt: &DepthMap, mask: Option<&Grid<bool>>) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
    let (w, h) = (gt.width(), gt.height());
    if (pred.width(), pred.height()) != (w, h) || mask.is_some_and(|m| (m.width(), m.height()) != (w, h)) {
        return Err(EvalError::ShapeMismatch);
    }
    let mut p = Vec::new();
    let mut g = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mask.is_some_and(|m| !*m.get(x, y)) {
                continue;
            }
            if let (Some(a), Some(b)) = (pred.get(x, y), gt.get(x, y)) {
                if !(a > 0.0 && b > 0.0) {
                    return Err(EvalError::NonPositiveDepth);
                }
                p.push(a);
                g.push(b);
            }
        }
    }
    if p.is_empty() {
        return Err(EvalError::EmptyMask);
    }
    Ok((p, g))
}

/// Depth error statistics over the shared valid mask.
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap, mask: Option<&Grid<bool>>) -> Result<MetricsReport, EvalError> {
    let (p, g) = paired(pred, gt, mask)?;
    let log_err: Vec<f64> = p.iter().zip(&g).map(|(a, b)| ln(*a) - ln(*b)).collect();
    let log_sq: Vec<f64> = log_err.iter().map(|e| e * e).collect();
    let abs: Vec<f64> = p.iter().zip(&g).map(|(a, b)| (a - b).abs()).collect();
    let sq: Vec<f64> = abs.iter().map(|d| d * d).collect();
    let rel: Vec<f64> = abs.iter().zip(&g).map(|(d, b)| d / b).collect();
    let sq_rel: Vec<f64> = sq.iter().zip(&g).map(|(d, b)| d / b).collect();
    let mean_log = mean(&log_err);
    Ok(MetricsReport {
        silog: (mean(&log_sq) - mean_log * mean_log).max(0.0),
        absrel: mean(&rel),
        sqrel: mean(&sq_rel),
        rmse: sqrt(mean(&sq)),
        mean_l1: mean(&abs),
        median_l1: lower_median(&abs).expect("nonempty"),
        pixel_count: p.len(),
    })
}

/// `(1/n) Σ |pred − (‖w_hat‖ / ‖w_gt‖) · gt|` over the shared valid mask.
pub fn l_dpt(
    pred: &DepthMap,
    gt: &DepthMap,
    w_gt: &SymmetryPlane,
    w_hat: &SymmetryPlane,
    mask: Option<&Grid<bool>>,
) -> Result<f64, EvalError> {
    let (p, g) = paired(pred, gt, mask)?;
    let r = w_hat.w().norm() / w_gt.w().norm();
    let diffs: Vec<f64> = p.iter().zip(&g).map(|(a, b)| (a - r * b).abs()).collect();
    Ok(mean(&diffs))
}

/// Empirical CDF: `fractions[i]` is the share of errors `≤ thresholds[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl CurveData {
    /// Share of errors `≤ t`.
    pub fn fraction_below(&self, t: f64) -> f64 {
        let k = self.thresholds.partition_point(|x| *x <= t);
        if k == 0 {
            0.0
        } else {
            self.fractions[k - 1]
        }
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// Error-percentage curve over the distinct sorted error values. NaN
/// entries are ignored.
pub fn error_percentage_curve(errors: &[f64]) -> Result<CurveData, EvalError> {
    let mut v: Vec<f64> = errors.iter().copied().filter(|e| !e.is_nan()).collect();
    if v.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut thresholds = Vec::new();
    let mut fractions = Vec::new();
    for (i, e) in v.iter().enumerate() {
        if i + 1 < v.len() && v[i + 1] == *e {
            continue;
        }
        thresholds.push(*e);
        fractions.push((i + 1) as f64 / n);
    }
    Ok(CurveData { thresholds, fractions })
}

/// Summary of plane-normal angle errors in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSummary {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub count: usize,
}

pub fn angle_summary(errors_deg: &[f64]) -> Result<AngleSummary, EvalError> {
    if errors_deg.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(AngleSummary {
        mean: mean(errors_deg),
        median: lower_median(errors_deg).expect("nonempty"),
        max: errors_deg.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        count: errors_deg.len(),
    })
}

/// Share of angle errors at or below `threshold_deg`.
pub fn fraction_within(errors_deg: &[f64], threshold_deg: f64) -> f64 {
    if errors_deg.is_empty() {
        return 0.0;
    }
    errors_deg.iter().filter(|e| **e <= threshold_deg).count() as f64 / errors_deg.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn map(values: &[f64]) -> DepthMap {
        DepthMap::from_values(values.len(), 1, values.to_vec())
    }

    fn plane(s: f64) -> SymmetryPlane {
        SymmetryPlane::new(Vec3::new(s, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn two_pixel_example() {
        let r = depth_metrics(&map(&[1.0, 2.0]), &map(&[1.0, 1.0]), None).unwrap();
        // e = (0, ln 2): mean(e²) − mean(e)² = (ln 2)²/2 − (ln 2)²/4.
        let l2 = core::f64::consts::LN_2;
        assert_abs_diff_eq!(r.silog, l2 * l2 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.silog, 0.120113, epsilon = 1e-6);
        assert_abs_diff_eq!(r.absrel, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.sqrel, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rmse, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(r.mean_l1, 0.5);
        assert_eq!(r.median_l1, 0.0);
        assert_eq!(r.pixel_count, 2);
    }

    #[test]
    fn identical_maps_give_zero() {
        let g = map(&[0.7, 0.9, 1.1]);
        let r = depth_metrics(&g, &g, None).unwrap();
        assert_eq!(r, MetricsReport { pixel_count: 3, ..MetricsReport::default() });
    }

    #[test]
    fn errors() {
        let g = map(&[0.7, 0.9]);
        let none = DepthMap::invalid(2, 1);
        assert_eq!(depth_metrics(&none, &g, None), Err(EvalError::EmptyMask));
        let mask = Grid::new(2, 1, false);
        assert_eq!(depth_metrics(&g, &g, Some(&mask)), Err(EvalError::EmptyMask));
        let mut bad = g.clone();
        bad.set(0, 0, -1.0);
        assert_eq!(depth_metrics(&bad, &g, None), Err(EvalError::NonPositiveDepth));
        assert_eq!(depth_metrics(&map(&[1.0]), &g, None), Err(EvalError::ShapeMismatch));
        assert_eq!(error_percentage_curve(&[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn rescale_examples() {
        let p = map(&[0.5, 0.75]);
        assert_eq!(rescale_depth(&p, &plane(2.0), &plane(2.0)), p);
        let r = rescale_depth(&p, &plane(0.5), &plane(1.0));
        assert_eq!(r.get(0, 0), Some(1.0));
        assert_eq!(r.get(1, 0), Some(1.5));
    }

    #[test]
    fn l_dpt_examples() {
        let g = map(&[0.8, 1.0, 1.2]);
        let (wg, wh) = (plane(0.5), plane(1.0));
        assert_eq!(l_dpt(&g.scaled(2.0), &g, &wg, &wh, None).unwrap(), 0.0);
        let off = map(&[1.65, 2.05, 2.45]);
        assert_abs_diff_eq!(l_dpt(&off, &g, &wg, &wh, None).unwrap(), 0.05, epsilon = 1e-12);
        let m = depth_metrics(&off, &g.scaled(2.0), None).unwrap();
        assert_abs_diff_eq!(l_dpt(&off, &g, &wg, &wh, None).unwrap(), m.mean_l1, epsilon = 1e-15);
    }

    #[test]
    fn curve_examples() {
        let c = error_percentage_curve(&[3.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(c.fraction_below(2.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(c.fraction_below(0.5), 0.0);
        assert_eq!(c.fractions.last(), Some(&1.0));
        let flat = error_percentage_curve(&[0.4; 5]).unwrap();
        assert_eq!(flat.thresholds, vec![0.4]);
        assert_eq!(flat.fraction_below(0.39), 0.0);
        assert_eq!(flat.fraction_below(0.4), 1.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
    }

    #[test]
    fn angle_stats() {
        let s = angle_summary(&[0.5, 2.0, 0.25]).unwrap();
        assert_eq!(s.median, 0.5);
        assert_eq!(s.max, 2.0);
        assert_abs_diff_eq!(fraction_within(&[0.5, 2.0, 0.25], 1.0), 2.0 / 3.0, epsilon = 1e-15);
    }
}
