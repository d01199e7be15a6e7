//! Debug dumps of volumes: `"SYMV"`, then little-endian `u32` H′, W′, D,
//! then `H′·W′·D` little-endian `f32` values in `[y][x][d]` order. Invalid
//! cells are stored as NaN.

use alloc::vec::Vec;

use super::reduce::ProbabilityVolume;
use super::volume::CostVolume;
use super::PhotoError;

pub const VOLUME_MAGIC: [u8; 4] = *b"SYMV";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeBlob {
    pub height: u32,
    pub width: u32,
    pub depth: u32,
    pub data: Vec<f32>,
}

impl VolumeBlob {
    pub fn from_cost(volume: &CostVolume) -> Self {
        let (cost, valid) = volume.raw_parts();
        VolumeBlob {
            height: volume.height() as u32,
            width: volume.width() as u32,
            depth: volume.depth() as u32,
            data: cost.iter().zip(valid).map(|(c, v)| if *v { *c as f32 } else { f32::NAN }).collect(),
        }
    }

    pub fn from_probability(prob: &ProbabilityVolume) -> Self {
        let d = prob.depth();
        let mut data = Vec::with_capacity(prob.values().len());
        for y in 0..prob.height() {
            for x in 0..prob.width() {
                let valid = prob.is_valid(x, y);
                data.extend(prob.column(x, y).iter().map(|p| if valid { *p as f32 } else { f32::NAN }));
            }
        }
        debug_assert_eq!(data.len(), prob.width() * prob.height() * d);
        VolumeBlob { height: prob.height() as u32, width: prob.width() as u32, depth: d as u32, data }
    }

    /// Cost volume with NaN cells invalid.
    pub fn to_cost_volume(&self) -> CostVolume {
        let cost: Vec<f64> = self.data.iter().map(|v| *v as f64).collect();
        let valid = cost.iter().map(|c| c.is_finite()).collect();
        CostVolume::from_parts(self.width as usize, self.height as usize, self.depth as usize, cost, valid)
    }
}

pub fn encode_volume(blob: &VolumeBlob) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * blob.data.len());
    out.extend_from_slice(&VOLUME_MAGIC);
    for v in [blob.height, blob.width, blob.depth] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &blob.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_volume(bytes: &[u8]) -> Result<VolumeBlob, PhotoError> {
    if bytes.len() < HEADER_LEN {
        return Err(PhotoError::MalformedBlob("truncated header"));
    }
    if bytes[..4] != VOLUME_MAGIC {
        return Err(PhotoError::MalformedBlob("bad magic"));
    }
    let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    let (height, width, depth) = (word(4), word(8), word(12));
    let n = (height as u64) * (width as u64) * (depth as u64);
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != 4 * n {
        return Err(PhotoError::MalformedBlob("payload length does not match header"));
    }
    let data = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok(VolumeBlob { height, width, depth, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut v = CostVolume::constant(3, 2, 4, 0.25);
        v.set(1, 1, 2, None);
        v.set(2, 0, 0, Some(1.125));
        let bytes = encode_volume(&VolumeBlob::from_cost(&v));
        assert_eq!(&bytes[..4], b"SYMV");
        assert_eq!(&bytes[4..16], &[2, 0, 0, 0, 3, 0, 0, 0, 4, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 4 * 24);
        let back = decode_volume(&bytes).unwrap().to_cost_volume();
        assert_eq!(back, v);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_volume(b"SYMV").is_err());
        let mut bytes = encode_volume(&VolumeBlob::from_cost(&CostVolume::constant(1, 1, 2, 0.0)));
        bytes[0] = b'X';
        assert!(decode_volume(&bytes).is_err());
        bytes[0] = b'S';
        bytes.pop();
        assert!(decode_volume(&bytes).is_err());
    }
}
