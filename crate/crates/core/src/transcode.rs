//! Byte ↔ text code-point codec.
//!
//! Payload bytes travel as text code points. Bytes 32–255 map to themselves;
//! bytes 0–31 are control values that cannot ride in a message body, so they
//! are shifted up by 256 into 256–287. The mapping is a bijection between
//! `[0,255]` and `[32,255] ∪ [256,287]`, and it preserves length: one byte,
//! one code point.

use thiserror::Error;

/// Added to bytes 0–31 to lift them out of the control range.
pub const CONTROL_SHIFT: u16 = 256;

/// Largest byte value that gets shifted (0–31 are controls).
pub const CONTROL_MAX: u8 = 31;

/// Smallest legal code point.
pub const POINT_MIN: u16 = 32;

/// Largest legal code point (31 + 256).
pub const POINT_MAX: u16 = 287;

/// Codec-boundary errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscodeError {
    /// A point outside `[32,255] ∪ [256,287]`: a corrupted or foreign payload.
    #[error("code point {point} at index {index} is outside the sendable range [32,287]")]
    RangeViolation { index: usize, point: u32 },
}

/// Validated text payload: every point lies in `[32,255] ∪ [256,287]`.
///
/// Construction checks the range, so a value of this type never holds a
/// control point (0–31) or anything at or above 288. In particular LF (10)
/// and CR (13) cannot appear, which is what makes line-oriented file formats
/// safe for rendered segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CodePointText {
    points: Vec<u16>,
}

impl CodePointText {
    /// Empty text.
    pub fn new() -> Self {
        Self::default()
    }

    /// Validate arbitrary points, rejecting anything outside the sendable range.
    pub fn try_from_points<I>(points: I) -> Result<Self, TranscodeError>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut out = Vec::new();
        for (index, point) in points.into_iter().enumerate() {
            if point < POINT_MIN as u32 || point > POINT_MAX as u32 {
                return Err(TranscodeError::RangeViolation { index, point });
            }
            out.push(point as u16);
        }
        Ok(Self { points: out })
    }

    /// Interpret a string as text payload, one point per Unicode scalar value.
    pub fn from_utf8(s: &str) -> Result<Self, TranscodeError> {
        Self::try_from_points(s.chars().map(|c| c as u32))
    }

    /// Serialize as UTF-8, one Unicode scalar value per point.
    ///
    /// Point 255 becomes the bytes `C3 BF`, point 256 becomes `C4 80`, and
    /// point 287 becomes `C4 9F`.
    pub fn to_utf8(&self) -> String {
        self.points
            .iter()
            .map(|&p| char::from_u32(p as u32).expect("points below 288 are valid scalars"))
            .collect()
    }

    pub fn points(&self) -> &[u16] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Wrap points already known to be in range (slices of valid text stay valid).
    pub(crate) fn from_validated(points: Vec<u16>) -> Self {
        debug_assert!(points.iter().all(|&p| (POINT_MIN..=POINT_MAX).contains(&p)));
        Self { points }
    }
}

/// Map payload bytes to text points: 0–31 shift up by 256, the rest pass through.
pub fn encode_bytes(payload: &[u8]) -> CodePointText {
    let points = payload
        .iter()
        .map(|&b| {
            if b <= CONTROL_MAX {
                b as u16 + CONTROL_SHIFT
            } else {
                b as u16
            }
        })
        .collect();
    CodePointText { points }
}

/// Exact inverse of [`encode_bytes`]: points at or above 256 shift back down.
///
/// Infallible because `CodePointText` is validated on construction; foreign
/// data surfaces [`TranscodeError::RangeViolation`] there instead.
pub fn decode_text(text: &CodePointText) -> Vec<u8> {
    text.points
        .iter()
        .map(|&p| {
            if p >= CONTROL_SHIFT {
                (p - CONTROL_SHIFT) as u8
            } else {
                p as u8
            }
        })
        .collect()
}
