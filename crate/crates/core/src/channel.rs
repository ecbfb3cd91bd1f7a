//! Deterministic simulated SMS transport.
//!
//! The real network is modeled, not implemented: messages go in, and a
//! seed-deterministic mix of loss, duplication, and bounded reordering comes
//! out. Identical input and profile always produce the identical delivery
//! trace, so adversarial delivery tests are reproducible.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) keyed with `seed_from_u64`,
//! and every draw goes through `next_u64` only, so traces are a pure function
//! of the documented ChaCha8 stream on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use thiserror::Error;

use crate::segment::HEADER_POINTS;
use crate::transcode::CodePointText;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("invalid channel profile: {reason}")]
    InvalidProfile { reason: String },
    /// An input message exceeds the per-message size limit. That is a
    /// segmentation bug upstream, not a delivery condition.
    #[error("message {index} has {length} points, over the {capacity}-point capacity")]
    OversizeMessage {
        index: usize,
        length: usize,
        capacity: usize,
    },
}

/// Channel behavior knobs. Same seed and same input means the same trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    /// Per-message size limit, header included.
    pub capacity_points: usize,
    /// Maximum displacement of any message from its send position.
    pub reorder_window: usize,
    /// Probability a delivered message is delivered twice.
    pub duplicate_prob: f64,
    /// Probability a message never arrives.
    pub loss_prob: f64,
    pub seed: u64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self {
            capacity_points: crate::segment::SegmentPlan::DEFAULT_CAPACITY_POINTS,
            reorder_window: 0,
            duplicate_prob: 0.0,
            loss_prob: 0.0,
            seed: 0,
        }
    }
}

impl ChannelProfile {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.capacity_points <= HEADER_POINTS {
            return Err(ChannelError::InvalidProfile {
                reason: format!(
                    "capacity_points must exceed {HEADER_POINTS}, got {}",
                    self.capacity_points
                ),
            });
        }
        for (name, p) in [
            ("duplicate_prob", self.duplicate_prob),
            ("loss_prob", self.loss_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ChannelError::InvalidProfile {
                    reason: format!("{name} must be in [0,1], got {p}"),
                });
            }
        }
        Ok(())
    }
}

/// Uniform in [0,1): the top 53 bits of one `next_u64` draw.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in 0..=bound. Modulo bias is irrelevant here; the requirement is
/// determinism, not perfect uniformity.
fn displacement(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    (rng.next_u64() as u128 % (bound as u128 + 1)) as usize
}

/// Push messages through the simulated network and return the delivery trace.
///
/// Loss is decided per message, duplication per surviving message (the copy
/// is injected adjacent to the original), and then every copy is displaced by
/// at most `reorder_window` positions via a stable sort on jittered keys.
pub fn transmit(
    messages: &[CodePointText],
    profile: &ChannelProfile,
) -> Result<Vec<CodePointText>, ChannelError> {
    profile.validate()?;
    for (index, message) in messages.iter().enumerate() {
        if message.len() > profile.capacity_points {
            return Err(ChannelError::OversizeMessage {
                index,
                length: message.len(),
                capacity: profile.capacity_points,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);

    let mut surviving: Vec<&CodePointText> = Vec::with_capacity(messages.len());
    for message in messages {
        if unit_f64(&mut rng) < profile.loss_prob {
            continue;
        }
        surviving.push(message);
        if unit_f64(&mut rng) < profile.duplicate_prob {
            surviving.push(message);
        }
    }

    let mut keyed: Vec<(usize, &CodePointText)> = surviving
        .into_iter()
        .enumerate()
        .map(|(position, message)| {
            (
                position + displacement(&mut rng, profile.reorder_window),
                message,
            )
        })
        .collect();
    // Stable sort: a key of position + jitter in 0..=window keeps every
    // message within `window` of its send position.
    keyed.sort_by_key(|&(key, _)| key);

    Ok(keyed.into_iter().map(|(_, m)| m.clone()).collect())
}
