//! Payload segmentation and reassembly.
//!
//! A text payload is cut into messages that each fit one SMS. The first three
//! points of every message are a zero-padded decimal index, 000–999, so a
//! transfer can span at most 1000 messages. Receivers sort by index and
//! concatenate bodies to get the original payload back, whatever order the
//! messages arrived in.
//!
//! The module also defines the segments file interchange format: one rendered
//! segment per line, UTF-8, lines separated by a single LF. Bodies can never
//! contain LF or CR (the codec forbids points 0–31), so the framing needs no
//! escaping. An optional leading `#count=<k>` line declares the segment count.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io;

use thiserror::Error;

use crate::transcode::{CodePointText, TranscodeError};

/// Points reserved for the decimal sequence index at the front of a message.
pub const HEADER_POINTS: usize = 3;

/// Most segments a transfer can carry: indices run 000–999.
pub const MAX_SEGMENTS: usize = 1000;

/// Leading manifest line recognized in segments files.
pub const COUNT_LINE_PREFIX: &str = "#count=";

/// Errors from splitting, parsing, reassembly, and the segments file format.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentError {
    /// The payload would not fit the 000–999 indexing space.
    #[error("payload needs {required} segments but indexing stops at {MAX_SEGMENTS}")]
    TooManySegments { required: usize },
    #[error("malformed segment header: {reason}")]
    MalformedHeader { reason: &'static str },
    #[error("missing segments: {}", format_indices(.0))]
    MissingSegments(Vec<u16>),
    /// Two segments share an index but carry different bodies.
    #[error("conflicting duplicate at index {index:03}")]
    ConflictingDuplicate { index: u16 },
    /// A segment's index exceeds the declared transfer count.
    #[error("segment index {index:03} is outside the expected count {expected_count}")]
    IndexBeyondCount { index: u16, expected_count: usize },
    #[error("segment index {index} exceeds {}", MAX_SEGMENTS - 1)]
    IndexOutOfRange { index: u16 },
    /// Plans must leave room for at least one body point after the header.
    #[error("segment capacity must be at least {} points, got {capacity}", HEADER_POINTS + 1)]
    CapacityTooSmall { capacity: usize },
    /// A file line held points outside the sendable range.
    #[error(transparent)]
    InvalidText(#[from] TranscodeError),
    /// A file line was not valid UTF-8.
    #[error("line is not valid UTF-8 (valid up to byte {valid_up_to})")]
    NotUtf8 { valid_up_to: usize },
}

fn format_indices(indices: &[u16]) -> String {
    indices
        .iter()
        .map(|i| format!("{i:03}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Per-message size budget, header included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    capacity_points: usize,
}

impl SegmentPlan {
    /// 70 points, the size of one UCS-2 SMS. The alphabet here exceeds
    /// 7 bits, so the 160-character GSM budget does not apply.
    pub const DEFAULT_CAPACITY_POINTS: usize = 70;

    pub fn new(capacity_points: usize) -> Result<Self, SegmentError> {
        if capacity_points <= HEADER_POINTS {
            return Err(SegmentError::CapacityTooSmall {
                capacity: capacity_points,
            });
        }
        Ok(Self { capacity_points })
    }

    pub fn capacity_points(&self) -> usize {
        self.capacity_points
    }

    /// Points left for payload once the 3-point index header is paid for.
    pub fn body_capacity(&self) -> usize {
        self.capacity_points - HEADER_POINTS
    }
}

impl Default for SegmentPlan {
    fn default() -> Self {
        Self {
            capacity_points: Self::DEFAULT_CAPACITY_POINTS,
        }
    }
}

/// One SMS unit: a sequence index in 0–999 plus a body of text points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    index: u16,
    body: CodePointText,
}

impl Segment {
    pub fn new(index: u16, body: CodePointText) -> Result<Self, SegmentError> {
        if index as usize >= MAX_SEGMENTS {
            return Err(SegmentError::IndexOutOfRange { index });
        }
        Ok(Self { index, body })
    }

    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn body(&self) -> &CodePointText {
        &self.body
    }

    /// Message form: three ASCII digit points (zero-padded index), then the body.
    pub fn render(&self) -> CodePointText {
        let mut points = Vec::with_capacity(HEADER_POINTS + self.body.len());
        points.push(b'0' as u16 + self.index / 100);
        points.push(b'0' as u16 + self.index / 10 % 10);
        points.push(b'0' as u16 + self.index % 10);
        points.extend_from_slice(self.body.points());
        CodePointText::from_validated(points)
    }

    /// Inverse of [`render`](Self::render): `parse(render(s)) == s`.
    pub fn parse(rendered: &CodePointText) -> Result<Self, SegmentError> {
        let points = rendered.points();
        if points.len() < HEADER_POINTS {
            return Err(SegmentError::MalformedHeader {
                reason: "shorter than the 3-point index header",
            });
        }
        let mut index = 0u16;
        for &p in &points[..HEADER_POINTS] {
            if !(48..=57).contains(&p) {
                return Err(SegmentError::MalformedHeader {
                    reason: "index header contains a non-digit point",
                });
            }
            index = index * 10 + (p - 48);
        }
        Ok(Self {
            index,
            body: CodePointText::from_validated(points[HEADER_POINTS..].to_vec()),
        })
    }
}

/// Segments needed for a payload of `len` points at the given body capacity.
fn required_segments(len: usize, body_capacity: usize) -> usize {
    if len == 0 {
        1
    } else {
        len.div_ceil(body_capacity)
    }
}

/// Cut a payload into consecutively indexed segments.
///
/// Every body except possibly the last is exactly `plan.body_capacity()`
/// points. An empty payload still produces one segment (with an empty body)
/// so the transfer is observable on the receiving side.
pub fn split(payload: &CodePointText, plan: &SegmentPlan) -> Result<Vec<Segment>, SegmentError> {
    let body_capacity = plan.body_capacity();
    let required = required_segments(payload.len(), body_capacity);
    if required > MAX_SEGMENTS {
        return Err(SegmentError::TooManySegments { required });
    }
    if payload.is_empty() {
        return Ok(vec![Segment {
            index: 0,
            body: CodePointText::new(),
        }]);
    }
    Ok(payload
        .points()
        .chunks(body_capacity)
        .enumerate()
        .map(|(i, chunk)| Segment {
            index: i as u16,
            body: CodePointText::from_validated(chunk.to_vec()),
        })
        .collect())
}

/// Stitch segments back into the payload, in ascending index order.
///
/// Exact duplicates are dropped; duplicates that disagree on the body are an
/// error. With `expected_count` known, exactly the indices `0..count` must be
/// present. With it unknown, the indices present must be contiguous from 0.
pub fn reassemble(
    segments: &[Segment],
    expected_count: Option<usize>,
) -> Result<CodePointText, SegmentError> {
    let mut by_index: BTreeMap<u16, &Segment> = BTreeMap::new();
    for segment in segments {
        match by_index.entry(segment.index) {
            Entry::Vacant(slot) => {
                slot.insert(segment);
            }
            Entry::Occupied(existing) => {
                if existing.get().body != segment.body {
                    return Err(SegmentError::ConflictingDuplicate {
                        index: segment.index,
                    });
                }
            }
        }
    }

    match expected_count {
        Some(count) => {
            if count > MAX_SEGMENTS {
                return Err(SegmentError::TooManySegments { required: count });
            }
            if let Some(&index) = by_index.keys().find(|&&i| i as usize >= count) {
                return Err(SegmentError::IndexBeyondCount {
                    index,
                    expected_count: count,
                });
            }
            let missing: Vec<u16> = (0..count as u16)
                .filter(|i| !by_index.contains_key(i))
                .collect();
            if !missing.is_empty() {
                return Err(SegmentError::MissingSegments(missing));
            }
        }
        None => {
            if let Some((&max, _)) = by_index.iter().next_back() {
                let missing: Vec<u16> = (0..max).filter(|i| !by_index.contains_key(i)).collect();
                if !missing.is_empty() {
                    return Err(SegmentError::MissingSegments(missing));
                }
            }
        }
    }

    let mut points = Vec::new();
    for segment in by_index.values() {
        points.extend_from_slice(segment.body.points());
    }
    Ok(CodePointText::from_validated(points))
}

/// Write delivered messages in the segments file format.
pub fn write_segments_file<W: io::Write>(
    writer: &mut W,
    messages: &[CodePointText],
    declared_count: Option<usize>,
) -> io::Result<()> {
    if let Some(count) = declared_count {
        writeln!(writer, "{COUNT_LINE_PREFIX}{count}")?;
    }
    for message in messages {
        writer.write_all(message.to_utf8().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// One line of a segments file: either a parsed segment or why it failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentsFileEntry {
    /// 1-based line number, for diagnostics.
    pub line_no: usize,
    pub parsed: Result<Segment, SegmentError>,
}

/// Parsed segments file contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentsFile {
    /// Count from a leading `#count=<k>` line, when present.
    pub declared_count: Option<usize>,
    pub entries: Vec<SegmentsFileEntry>,
}

/// Parse segments file bytes line by line.
///
/// Malformed lines are reported per entry rather than failing the whole file,
/// so an ingest can skip them with a warning. A trailing LF is not an empty
/// line.
pub fn read_segments_file(bytes: &[u8]) -> SegmentsFile {
    let mut lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }

    let mut declared_count = None;
    let mut entries = Vec::new();
    for (i, raw) in lines.into_iter().enumerate() {
        if i == 0 {
            if let Some(count) = parse_count_line(raw) {
                declared_count = Some(count);
                continue;
            }
        }
        entries.push(SegmentsFileEntry {
            line_no: i + 1,
            parsed: parse_line(raw),
        });
    }
    SegmentsFile {
        declared_count,
        entries,
    }
}

fn parse_count_line(raw: &[u8]) -> Option<usize> {
    std::str::from_utf8(raw)
        .ok()?
        .strip_prefix(COUNT_LINE_PREFIX)?
        .parse()
        .ok()
}

fn parse_line(raw: &[u8]) -> Result<Segment, SegmentError> {
    let s = std::str::from_utf8(raw).map_err(|e| SegmentError::NotUtf8 {
        valid_up_to: e.valid_up_to(),
    })?;
    let text = CodePointText::from_utf8(s)?;
    Segment::parse(&text)
}
