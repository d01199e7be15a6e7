//! Grayscale PFM depth files.
//!
//! Written as `Pf\n<W> <H>\n-1.0\n` followed by little-endian `f32` rows,
//! bottom row first. Invalid pixels are NaN. Big-endian input (positive
//! scale) is accepted.

use mirrorsweep_core::photo::DepthMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PfmError {
    #[error("header line {line}: {reason}")]
    Header { line: usize, reason: String },
    #[error("expected {expected} bytes of pixel data, found {found}")]
    Payload { expected: usize, found: usize },
}

fn header(line: usize, reason: impl Into<String>) -> PfmError {
    PfmError::Header { line, reason: reason.into() }
}

/// Encodes `depth`; values are rounded to `f32`.
pub fn encode_pfm(depth: &DepthMap) -> Vec<u8> {
    let (w, h) = (depth.width(), depth.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = depth.get(x, y).map_or(f32::NAN, |d| d as f32);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Splits off one `\n`-terminated header line.
fn next_line(bytes: &[u8], pos: &mut usize, line: usize) -> Result<String, PfmError> {
    let rest = &bytes[*pos..];
    let end = rest.iter().position(|b| *b == b'\n').ok_or_else(|| header(line, "missing line"))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).map(|s| s.trim().to_owned()).map_err(|_| header(line, "not ASCII"))
}

pub fn decode_pfm(bytes: &[u8]) -> Result<DepthMap, PfmError> {
    let mut pos = 0;
    match next_line(bytes, &mut pos, 1)?.as_str() {
        "Pf" => {}
        "PF" => return Err(header(1, "color PFM is not supported")),
        other => return Err(header(1, format!("expected \"Pf\", found {other:?}"))),
    }
    let dims = next_line(bytes, &mut pos, 2)?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    let parse_dim = |s: &str| s.parse::<usize>().ok().filter(|v| *v > 0);
    let (w, h) = match parts.as_slice() {
        [a, b] => match (parse_dim(a), parse_dim(b)) {
            (Some(w), Some(h)) => (w, h),
            _ => return Err(header(2, format!("bad dimensions {dims:?}"))),
        },
        _ => return Err(header(2, format!("expected \"<width> <height>\", found {dims:?}"))),
    };
    let scale_line = next_line(bytes, &mut pos, 3)?;
    let scale: f64 = scale_line
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| header(3, format!("bad scale {scale_line:?}")))?;
    let little = scale < 0.0;
    let expected = w.checked_mul(h).and_then(|n| n.checked_mul(4)).ok_or_else(|| header(2, "image too large"))?;
    let body = &bytes[pos..];
    if body.len() != expected {
        return Err(PfmError::Payload { expected, found: body.len() });
    }
    let mut values = vec![f64::NAN; w * h];
    for (i, c) in body.chunks_exact(4).enumerate() {
        let raw = [c[0], c[1], c[2], c[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (x, row) = (i % w, i / w);
        values[(h - 1 - row) * w + x] = v as f64;
    }
    Ok(DepthMap::from_values(w, h, values))
}
