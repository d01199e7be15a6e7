//! 8-bit PNG images and masks.

use std::io::Cursor;

use mirrorsweep_core::{Grid, RgbImage};

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("PNG decode failed: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("PNG encode failed: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("unsupported PNG color type {0:?}")]
    ColorType(png::ColorType),
}

fn encode(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
    }
    Ok(out)
}

pub fn encode_rgb(image: &RgbImage) -> Result<Vec<u8>, ImageError> {
    let data: Vec<u8> = image.as_slice().iter().flatten().copied().collect();
    encode(image.width(), image.height(), png::ColorType::Rgb, &data)
}

/// Boolean mask as grayscale 0/255.
pub fn encode_mask(mask: &Grid<bool>) -> Result<Vec<u8>, ImageError> {
    let data: Vec<u8> = mask.as_slice().iter().map(|m| if *m { 255 } else { 0 }).collect();
    encode(mask.width(), mask.height(), png::ColorType::Grayscale, &data)
}

fn decode(bytes: &[u8]) -> Result<(usize, usize, png::ColorType, Vec<u8>), ImageError> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = dec.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    Ok((info.width as usize, info.height as usize, info.color_type, buf))
}

/// Decodes any 8-bit (or expandable) PNG to RGB; alpha is dropped and
/// gray is replicated.
pub fn decode_rgb(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let (w, h, color, buf) = decode(bytes)?;
    let px: Vec<[u8; 3]> = match color {
        png::ColorType::Rgb => buf.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        png::ColorType::Rgba => buf.chunks_exact(4).map(|c| [c[0], c[1], c[2]]).collect(),
        png::ColorType::Grayscale => buf.iter().map(|g| [*g; 3]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|c| [c[0]; 3]).collect(),
        other => return Err(ImageError::ColorType(other)),
    };
    Ok(Grid::from_vec(w, h, px))
}

/// Mask from a PNG: a pixel is set when its first channel is nonzero.
pub fn decode_mask(bytes: &[u8]) -> Result<Grid<bool>, ImageError> {
    let rgb = decode_rgb(bytes)?;
    Ok(rgb.map(|c| c[0] != 0))
}
