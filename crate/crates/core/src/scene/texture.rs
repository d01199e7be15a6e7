//! Procedural albedo evaluated at material coordinates.

use crate::math::{floor, sin, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextureKind {
    /// Four-octave value noise on an integer-hashed lattice.
    Noise,
    Checker,
    Stripes,
    /// Uniform albedo (textureless).
    Constant,
}

impl TextureKind {
    pub fn name(&self) -> &'static str {
        match self {
            TextureKind::Noise => "noise",
            TextureKind::Checker => "checker",
            TextureKind::Stripes => "stripes",
            TextureKind::Constant => "constant",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "noise" => Some(TextureKind::Noise),
            "checker" => Some(TextureKind::Checker),
            "stripes" => Some(TextureKind::Stripes),
            "constant" => Some(TextureKind::Constant),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureSpec {
    pub kind: TextureKind,
    /// Feature size in material-coordinate units.
    pub scale: f64,
    pub seed: u64,
    /// Strength in `[0, 1]` of a blotch pattern applied only on the x < 0
    /// side of the object. Zero keeps the appearance exactly symmetric.
    pub asymmetry: f64,
}

impl Default for TextureSpec {
    fn default() -> Self {
        TextureSpec { kind: TextureKind::Noise, scale: 0.04, seed: 0, asymmetry: 0.0 }
    }
}

/// Lowest and highest albedo produced, keeping objects distinct from the
/// black background.
const ALBEDO_LO: f64 = 0.12;
const ALBEDO_HI: f64 = 0.95;

#[inline]
fn hash3(ix: i64, iy: i64, iz: i64, seed: u64) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [ix, iy, iz] {
        h ^= (v as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = h.rotate_left(27).wrapping_mul(0x94D0_49BB_1331_11EB);
    }
    h ^= h >> 31;
    h = h.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    h ^ (h >> 32)
}

#[inline]
fn lattice(ix: i64, iy: i64, iz: i64, seed: u64) -> f64 {
    (hash3(ix, iy, iz, seed) >> 11) as f64 / (1u64 << 53) as f64
}

#[inline]
fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Trilinear value noise in `[0, 1]`.
pub fn value_noise(p: Vec3, seed: u64) -> f64 {
    let (fx, fy, fz) = (floor(p.x), floor(p.y), floor(p.z));
    let (ix, iy, iz) = (fx as i64, fy as i64, fz as i64);
    let (tx, ty, tz) = (smooth(p.x - fx), smooth(p.y - fy), smooth(p.z - fz));
    let mut acc = 0.0;
    for dz in 0..2 {
        for dy in 0..2 {
            for dx in 0..2 {
                let w = (if dx == 1 { tx } else { 1.0 - tx })
                    * (if dy == 1 { ty } else { 1.0 - ty })
                    * (if dz == 1 { tz } else { 1.0 - tz });
                acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
            }
        }
    }
    acc
}

const OCTAVES: usize = 4;
const PERSISTENCE: f64 = 0.6;

fn fractal(p: Vec3, seed: u64) -> f64 {
    let (mut acc, mut norm, mut amp, mut freq) = (0.0, 0.0, 1.0, 1.0);
    for k in 0..OCTAVES {
        acc += amp * value_noise(p.scale(freq), seed.wrapping_add(101 * k as u64));
        norm += amp;
        amp *= PERSISTENCE;
        freq *= 2.03;
    }
    acc / norm
}

/// Stretches a roughly `[0.25, 0.75]` fractal value over the albedo range.
fn contrast(v: f64) -> f64 {
    let t = ((v - 0.5) * 2.2 + 0.5).clamp(0.0, 1.0);
    ALBEDO_LO + (ALBEDO_HI - ALBEDO_LO) * t
}

impl TextureSpec {
    /// Linear RGB albedo in `[0, 1]` at material coordinate `m` on the
    /// surface point `p` (object space).
    pub fn albedo(&self, m: Vec3, p: Vec3) -> [f64; 3] {
        let q = m.scale(1.0 / self.scale);
        let base = match self.kind {
            TextureKind::Noise => [
                contrast(fractal(q, self.seed)),
                contrast(fractal(q, self.seed.wrapping_add(7919))),
                contrast(fractal(q, self.seed.wrapping_add(15_485_863))),
            ],
            TextureKind::Checker => {
                let parity = (floor(q.x) as i64 + floor(q.y) as i64 + floor(q.z) as i64).rem_euclid(2);
                if parity == 0 {
                    [0.85, 0.8, 0.3]
                } else {
                    [0.2, 0.3, 0.7]
                }
            }
            TextureKind::Stripes => {
                let s = 0.5 + 0.5 * sin(core::f64::consts::TAU * (q.y + 0.37 * q.z));
                let v = ALBEDO_LO + (ALBEDO_HI - ALBEDO_LO) * s;
                [v, 0.5 * v + 0.3, 1.0 - v * 0.8]
            }
            TextureKind::Constant => [0.6, 0.55, 0.5],
        };
        if self.asymmetry > 0.0 && p.x < 0.0 {
            let blot = value_noise(q.scale(0.5), self.seed.wrapping_add(31_337));
            if blot > 0.55 {
                let a = self.asymmetry.clamp(0.0, 1.0);
                return base.map(|c| (1.0 - a) * c + a * (1.0 - c));
            }
        }
        base
    }
}
