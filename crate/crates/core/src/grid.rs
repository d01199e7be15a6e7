//! Dense row-major 2D grids.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit RGB image, pixel `(0, 0)` at the top-left.
pub type RgbImage = Grid<[u8; 3]>;

impl<T: Clone> Grid<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Grid { width, height, data: vec![fill; width * height] }
    }
}

impl<T> Grid<T> {
    /// Wraps row-major data. Panics if the length does not match.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid data length mismatch");
        Grid { width, height, data }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid { width: self.width, height: self.height, data: self.data.iter().map(f).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Grid<T>
    where
        T: Clone,
    {
        Grid::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y).clone())
    }
}

impl Grid<f64> {
    /// Bilinear sample at continuous *index* coordinates (cell `(i, j)` sits
    /// at `(i, j)`). `None` outside `[0, w-1] × [0, h-1]`.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        bilinear(&self.data, self.width, self.height, x, y)
    }
}

#[inline]
pub(crate) fn bilinear(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> Option<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return None;
    }
    let max_x = (width - 1) as f64;
    let max_y = (height - 1) as f64;
    if !(x <= max_x && y <= max_y) {
        return None;
    }
    let x0 = (x as usize).min(width.saturating_sub(2));
    let y0 = (y as usize).min(height.saturating_sub(2));
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let i = y0 * width + x0;
    if width == 1 || height == 1 {
        return Some(data[i]);
    }
    let top = data[i] + (data[i + 1] - data[i]) * fx;
    let bot = data[i + width] + (data[i + width + 1] - data[i + width]) * fx;
    Some(top + (bot - top) * fy)
}
