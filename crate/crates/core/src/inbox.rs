//! Persistent inbox for received segments.
//!
//! Each received segment becomes one durable byte record, keyed by a locally
//! assigned transfer id and the segment index. A store is a directory holding
//! one append-only log per transfer. Frames are human-inspectable:
//!
//! ```text
//! index (3 ASCII digits) | body length (decimal ASCII) | 0x0A | body bytes
//! ```
//!
//! Body bytes are the UTF-8 encoding of the segment's body points. A crash
//! mid-append leaves a truncated final frame, which reads back as a corrupt
//! record rather than silently vanishing.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::segment::{reassemble, Segment, SegmentError};
use crate::transcode::{decode_text, CodePointText, TranscodeError};

/// Store-level failures.
#[derive(Debug, Error)]
pub enum StoreError {
    /// The record could not be read or made durable.
    #[error("storage failure: {0}")]
    Storage(#[from] io::Error),
    /// Transfer ids name log files, so they are restricted to `[A-Za-z0-9._-]`.
    #[error("invalid transfer id {transfer_id:?}")]
    InvalidTransferId { transfer_id: String },
    /// A record for this (transfer, index) exists with a different body.
    #[error("conflicting duplicate for transfer {transfer_id:?} at index {index:03}")]
    ConflictingDuplicate { transfer_id: String, index: u16 },
    #[error("corrupt record log for transfer {transfer_id:?}: {detail}")]
    CorruptRecord { transfer_id: String, detail: String },
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Transcode(#[from] TranscodeError),
}

/// One persisted segment: body bytes plus its key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InboxRecord {
    pub transfer_id: String,
    pub index: u16,
    /// UTF-8 encoding of the segment's body points.
    pub body_bytes: Vec<u8>,
}

struct OpenLog {
    file: File,
    records: BTreeMap<u16, Vec<u8>>,
}

/// Directory-backed segment store. Single writer per store directory;
/// distinct directories are fully independent.
pub struct InboxStore {
    root: PathBuf,
    open_logs: HashMap<String, OpenLog>,
}

impl InboxStore {
    /// Open (creating if needed) a store directory.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            open_logs: HashMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Persist one segment. Returns `false` (and stores nothing) when an
    /// identical record is already present; a differing body for the same
    /// index is [`StoreError::ConflictingDuplicate`].
    pub fn put_record(&mut self, transfer_id: &str, segment: &Segment) -> Result<bool, StoreError> {
        validate_transfer_id(transfer_id)?;
        let log = self.open_log(transfer_id)?;
        let body_bytes = segment.body().to_utf8().into_bytes();

        if let Some(existing) = log.records.get(&segment.index()) {
            if *existing == body_bytes {
                return Ok(false);
            }
            return Err(StoreError::ConflictingDuplicate {
                transfer_id: transfer_id.to_string(),
                index: segment.index(),
            });
        }

        let mut frame = Vec::with_capacity(body_bytes.len() + 16);
        frame.extend_from_slice(format!("{:03}{}\n", segment.index(), body_bytes.len()).as_bytes());
        frame.extend_from_slice(&body_bytes);
        log.file.write_all(&frame)?;
        log.records.insert(segment.index(), body_bytes);
        Ok(true)
    }

    /// All records for a transfer in ascending index order, read fresh from
    /// disk. Unknown transfer ids yield an empty list.
    pub fn list_records(&self, transfer_id: &str) -> Result<Vec<InboxRecord>, StoreError> {
        validate_transfer_id(transfer_id)?;
        let records = match fs::read(self.log_path(transfer_id)) {
            Ok(bytes) => parse_log(&bytes, transfer_id)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(records
            .into_iter()
            .map(|(index, body_bytes)| InboxRecord {
                transfer_id: transfer_id.to_string(),
                index,
                body_bytes,
            })
            .collect())
    }

    /// Rebuild the original payload bytes from the stored segments.
    ///
    /// With `expected_count` known, every index in `0..count` must be present;
    /// otherwise the stored indices must be contiguous from 0.
    pub fn reconstruct(
        &self,
        transfer_id: &str,
        expected_count: Option<usize>,
    ) -> Result<Vec<u8>, StoreError> {
        let mut segments = Vec::new();
        for record in self.list_records(transfer_id)? {
            let s =
                std::str::from_utf8(&record.body_bytes).map_err(|e| StoreError::CorruptRecord {
                    transfer_id: transfer_id.to_string(),
                    detail: format!("record {:03} body is not UTF-8: {e}", record.index),
                })?;
            let body = CodePointText::from_utf8(s)?;
            segments.push(Segment::new(record.index, body)?);
        }
        let payload = reassemble(&segments, expected_count)?;
        Ok(decode_text(&payload))
    }

    /// Flush every log this instance has written to stable storage.
    pub fn sync(&self) -> Result<(), StoreError> {
        for log in self.open_logs.values() {
            log.file.sync_data()?;
        }
        Ok(())
    }

    fn log_path(&self, transfer_id: &str) -> PathBuf {
        self.root.join(format!("{transfer_id}.log"))
    }

    fn open_log(&mut self, transfer_id: &str) -> Result<&mut OpenLog, StoreError> {
        if !self.open_logs.contains_key(transfer_id) {
            let path = self.log_path(transfer_id);
            let file = OpenOptions::new().create(true).append(true).open(&path)?;
            let records = parse_log(&fs::read(&path)?, transfer_id)?;
            self.open_logs
                .insert(transfer_id.to_string(), OpenLog { file, records });
        }
        Ok(self.open_logs.get_mut(transfer_id).expect("just inserted"))
    }
}

fn validate_transfer_id(transfer_id: &str) -> Result<(), StoreError> {
    let ok = !transfer_id.is_empty()
        && transfer_id.len() <= 128
        && transfer_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidTransferId {
            transfer_id: transfer_id.to_string(),
        })
    }
}

fn parse_log(bytes: &[u8], transfer_id: &str) -> Result<BTreeMap<u16, Vec<u8>>, StoreError> {
    let corrupt = |detail: String| StoreError::CorruptRecord {
        transfer_id: transfer_id.to_string(),
        detail,
    };

    let mut records = BTreeMap::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let frame_start = pos;
        if bytes.len() - pos < 3 {
            return Err(corrupt(format!("truncated index at byte {frame_start}")));
        }
        let mut index = 0u16;
        for &b in &bytes[pos..pos + 3] {
            if !b.is_ascii_digit() {
                return Err(corrupt(format!("non-digit index at byte {frame_start}")));
            }
            index = index * 10 + (b - b'0') as u16;
        }
        pos += 3;

        let newline = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| corrupt(format!("unterminated length at byte {frame_start}")))?;
        let len_field = &bytes[pos..pos + newline];
        if len_field.is_empty() || !len_field.iter().all(u8::is_ascii_digit) {
            return Err(corrupt(format!("bad length field at byte {frame_start}")));
        }
        let len: usize = std::str::from_utf8(len_field)
            .expect("digits are UTF-8")
            .parse()
            .map_err(|_| corrupt(format!("length overflow at byte {frame_start}")))?;
        pos += newline + 1;

        if bytes.len() - pos < len {
            return Err(corrupt(format!(
                "truncated body at byte {frame_start}: need {len}, have {}",
                bytes.len() - pos
            )));
        }
        let body = bytes[pos..pos + len].to_vec();
        pos += len;

        if records.insert(index, body).is_some() {
            return Err(corrupt(format!("index {index:03} recorded twice")));
        }
    }
    Ok(records)
}
