//! Transfer evaluation metrics: characters, messages, unique colors.
//!
//! Characters and messages fall out of the codec and the segment plan. The
//! unique-color count needs pixel access, so a minimal binary PPM (P6, 8-bit)
//! decoder lives here; other formats must be converted externally. Payloads
//! themselves are treated as opaque bytes; the decoder exists only for the
//! color metric.

use std::collections::HashSet;

use thiserror::Error;

use crate::segment::{split, SegmentError, SegmentPlan};
use crate::transcode::encode_bytes;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("malformed PPM: {detail}")]
    MalformedPpm { detail: String },
    #[error("invalid image: {detail}")]
    InvalidImage { detail: String },
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self, MetricsError> {
        if width == 0 || height == 0 {
            return Err(MetricsError::InvalidImage {
                detail: format!("dimensions must be positive, got {width}x{height}"),
            });
        }
        let expected = width as u64 * height as u64;
        if pixels.len() as u64 != expected {
            return Err(MetricsError::InvalidImage {
                detail: format!(
                    "{width}x{height} needs {expected} pixels, got {}",
                    pixels.len()
                ),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// Decode a binary PPM (magic `P6`, maxval 255).
///
/// Header whitespace and `#` comments are handled; exactly one whitespace
/// byte separates the maxval from the pixel payload, and the payload must be
/// exactly `3 * width * height` bytes.
pub fn parse_ppm(bytes: &[u8]) -> Result<RgbImage, MetricsError> {
    let malformed = |detail: String| MetricsError::MalformedPpm { detail };

    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(malformed("not a binary PPM (missing P6 magic)".into()));
    }
    let mut pos = 2;
    let width = read_header_number(bytes, &mut pos, "width")?;
    let height = read_header_number(bytes, &mut pos, "height")?;
    let maxval = read_header_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(malformed(format!("maxval must be 255, got {maxval}")));
    }
    match bytes.get(pos) {
        Some(b) if is_ppm_whitespace(*b) => pos += 1,
        _ => return Err(malformed("missing separator before pixel data".into())),
    }
    if width == 0 || height == 0 {
        return Err(malformed(format!("zero dimension: {width}x{height}")));
    }

    let expected = 3u64 * width as u64 * height as u64;
    let payload = &bytes[pos..];
    if (payload.len() as u64) < expected {
        return Err(malformed(format!(
            "truncated pixel payload: need {expected} bytes, have {}",
            payload.len()
        )));
    }
    if payload.len() as u64 > expected {
        return Err(malformed(format!(
            "{} trailing bytes after pixel payload",
            payload.len() as u64 - expected
        )));
    }

    let pixels = payload
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    RgbImage::new(width, height, pixels)
}

fn is_ppm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0B | 0x0C)
}

fn read_header_number(bytes: &[u8], pos: &mut usize, field: &str) -> Result<u32, MetricsError> {
    let malformed = |detail: String| MetricsError::MalformedPpm { detail };

    // At least one whitespace (or comment) byte must precede the token.
    let mut separated = false;
    loop {
        match bytes.get(*pos) {
            Some(b) if is_ppm_whitespace(*b) => {
                separated = true;
                *pos += 1;
            }
            Some(b'#') => {
                separated = true;
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    if !separated {
        return Err(malformed(format!("missing separator before {field}")));
    }

    let mut value: u64 = 0;
    let mut digits = 0;
    while let Some(b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value * 10 + (b - b'0') as u64;
        if value > u32::MAX as u64 {
            return Err(malformed(format!("{field} out of range")));
        }
        *pos += 1;
        digits += 1;
    }
    if digits == 0 {
        return Err(malformed(format!("expected decimal {field}")));
    }
    Ok(value as u32)
}

/// Count distinct `(r,g,b)` triples. Exact 24-bit identity, no quantization.
pub fn unique_colors(image: &RgbImage) -> usize {
    let mut seen: HashSet<[u8; 3]> = HashSet::with_capacity(image.pixels.len().min(1 << 16));
    for &pixel in &image.pixels {
        seen.insert(pixel);
    }
    seen.len()
}

/// The evaluation triple for one payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferStats {
    /// Code points in the encoded payload, which equals the payload byte length.
    pub characters: usize,
    /// Segments under the given plan.
    pub messages: usize,
    /// Distinct RGB triples, when an image was supplied.
    pub unique_colors: Option<usize>,
}

impl TransferStats {
    /// Machine contract: `characters,messages,unique_colors`, with `-` for an
    /// absent color count.
    pub fn csv_line(&self) -> String {
        let colors = self
            .unique_colors
            .map_or_else(|| "-".to_string(), |c| c.to_string());
        format!("{},{},{}", self.characters, self.messages, colors)
    }
}

/// Compute the stats for a payload under a plan, with the color count taken
/// from `image` when one is supplied.
pub fn transfer_stats(
    payload: &[u8],
    plan: &SegmentPlan,
    image: Option<&RgbImage>,
) -> Result<TransferStats, SegmentError> {
    let text = encode_bytes(payload);
    let messages = split(&text, plan)?.len();
    Ok(TransferStats {
        characters: text.len(),
        messages,
        unique_colors: image.map(unique_colors),
    })
}
