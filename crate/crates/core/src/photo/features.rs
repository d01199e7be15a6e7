//! Classical per-cell descriptors at a fixed stride.

use alloc::vec;
use alloc::vec::Vec;

use super::PhotoError;
use crate::grid::RgbImage;

/// Census neighborhood radius (5×5 window).
pub const CENSUS_RADIUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub stride: usize,
    /// Also compute central-difference x/y gradients.
    pub gradients: bool,
    /// Also compute 5×5 census codes.
    pub census: bool,
    /// Pixels of exactly this color are background. A cell is valid when at
    /// least half of its pixels are foreground.
    pub background: Option<[u8; 3]>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { stride: 4, gradients: false, census: true, background: Some([0, 0, 0]) }
    }
}

/// Rec.601 luma in `[0, 1]`.
#[inline]
pub fn luma(c: [u8; 3]) -> f64 {
    (0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64) / 255.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    stride: usize,
    gray: Vec<f64>,
    grad_x: Option<Vec<f64>>,
    grad_y: Option<Vec<f64>>,
    census: Option<Vec<u32>>,
    valid: Vec<bool>,
}

impl FeatureMap {
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn gray(&self) -> &[f64] {
        &self.gray
    }
    pub fn grad_x(&self) -> Option<&[f64]> {
        self.grad_x.as_deref()
    }
    pub fn grad_y(&self) -> Option<&[f64]> {
        self.grad_y.as_deref()
    }
    pub fn census(&self) -> Option<&[u32]> {
        self.census.as_deref()
    }
    pub fn valid(&self) -> &[bool] {
        &self.valid
    }
    pub fn gray_at(&self, x: usize, y: usize) -> f64 {
        self.gray[y * self.width + x]
    }
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

pub fn extract_features(image: &RgbImage, config: &FeatureConfig) -> Result<FeatureMap, PhotoError> {
    let s = config.stride.max(1);
    let (w, h) = (image.width(), image.height());
    if w < s || h < s {
        return Err(PhotoError::ImageTooSmall { width: w, height: h, stride: s });
    }
    let (fw, fh) = (w / s, h / s);
    let mut gray = vec![0.0; fw * fh];
    let mut valid = vec![false; fw * fh];
    for fy in 0..fh {
        for fx in 0..fw {
            let mut sum = 0.0;
            let mut fg = 0usize;
            for y in fy * s..(fy + 1) * s {
                for x in fx * s..(fx + 1) * s {
                    let c = *image.get(x, y);
                    if config.background != Some(c) {
                        sum += luma(c);
                        fg += 1;
                    }
                }
            }
            gray[fy * fw + fx] = if fg > 0 { sum / fg as f64 } else { 0.0 };
            valid[fy * fw + fx] = 2 * fg >= s * s;
        }
    }
    let at = |x: isize, y: isize| -> f64 {
        let xc = x.clamp(0, fw as isize - 1) as usize;
        let yc = y.clamp(0, fh as isize - 1) as usize;
        gray[yc * fw + xc]
    };
    let (grad_x, grad_y) = if config.gradients {
        let mut gx = vec![0.0; fw * fh];
        let mut gy = vec![0.0; fw * fh];
        for y in 0..fh as isize {
            for x in 0..fw as isize {
                let i = y as usize * fw + x as usize;
                gx[i] = 0.5 * (at(x + 1, y) - at(x - 1, y));
                gy[i] = 0.5 * (at(x, y + 1) - at(x, y - 1));
            }
        }
        (Some(gx), Some(gy))
    } else {
        (None, None)
    };
    let census = config.census.then(|| {
        let r = CENSUS_RADIUS as isize;
        let mut codes = vec![0u32; fw * fh];
        for y in 0..fh as isize {
            for x in 0..fw as isize {
                let center = at(x, y);
                let mut code = 0u32;
                let mut bit = 0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let inside = x + dx >= 0 && y + dy >= 0 && x + dx < fw as isize && y + dy < fh as isize;
                        if inside && at(x + dx, y + dy) < center {
                            code |= 1 << bit;
                        }
                        bit += 1;
                    }
                }
                codes[y as usize * fw + x as usize] = code;
            }
        }
        codes
    });
    Ok(FeatureMap { width: fw, height: fh, stride: s, gray, grad_x, grad_y, census, valid })
}
