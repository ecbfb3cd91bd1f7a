//! Transfer arbitrary binary payloads over an SMS-like text channel.
//!
//! Plain SMS carries text, not bytes. This crate makes bytes ride anyway:
//! each payload byte becomes one text code point (control bytes 0–31 are
//! shifted up by 256 so they stay sendable), the resulting text is cut into
//! indexed segments of configurable size, and a receiving side persists each
//! segment as a byte record until the set is complete and the original file
//! can be rebuilt bit for bit.
//!
//! ## Pipeline
//!
//! ```text
//! bytes ── encode_bytes ──> text ── split ──> segments ── render ──> messages
//!                                                                       │
//!                                                              transmit (simulated)
//!                                                                       │
//! bytes <── decode_text ── text <── reassemble <── parse <── InboxStore ┘
//! ```
//!
//! ## Example
//!
//! ```rust
//! use smspipe::{decode_text, encode_bytes, reassemble, split, Segment, SegmentPlan};
//!
//! let payload = b"\x00\x1f binary payload \xff";
//! let text = encode_bytes(payload);
//! let segments = split(&text, &SegmentPlan::default()).unwrap();
//!
//! // Over the wire each segment is a short text message...
//! let delivered: Vec<Segment> = segments
//!     .iter()
//!     .map(|s| Segment::parse(&s.render()).unwrap())
//!     .collect();
//!
//! // ...and the receiver stitches the payload back together.
//! let text = reassemble(&delivered, Some(segments.len())).unwrap();
//! assert_eq!(decode_text(&text), payload);
//! ```

pub mod channel;
pub mod inbox;
pub mod metrics;
pub mod segment;
pub mod transcode;

pub use channel::{transmit, ChannelError, ChannelProfile};
pub use inbox::{InboxRecord, InboxStore, StoreError};
pub use metrics::{
    parse_ppm, transfer_stats, unique_colors, MetricsError, RgbImage, TransferStats,
};
pub use segment::{
    read_segments_file, reassemble, split, write_segments_file, Segment, SegmentError, SegmentPlan,
    SegmentsFile, SegmentsFileEntry, HEADER_POINTS, MAX_SEGMENTS,
};
pub use transcode::{decode_text, encode_bytes, CodePointText, TranscodeError};
