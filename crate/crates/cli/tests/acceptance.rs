//! Acceptance suite: one test per release gate, each printing a
//! `[PASS] ...` line with the measured result (visible with `--nocapture`).
//!
//! Run with:
//!
//! ```text
//! cargo test -p smspipe-cli --test acceptance -- --nocapture
//! ```

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

use smspipe::{
    decode_text, encode_bytes, reassemble, split, transfer_stats, transmit, unique_colors,
    ChannelProfile, CodePointText, InboxStore, RgbImage, Segment, SegmentError, SegmentPlan,
    StoreError, MAX_SEGMENTS,
};

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Encode maps [0,31] onto [256,287] and [32,255] onto itself, bijectively,
/// and decode inverts it, checked by brute force over every byte value.
#[test]
fn codec_bijection() {
    let started = Instant::now();

    // Independent lookup table, built once by the shift rule.
    let mut table = [0u16; 256];
    for (b, entry) in table.iter_mut().enumerate() {
        *entry = if b <= 31 { (b + 256) as u16 } else { b as u16 };
    }

    let mut mismatches = 0;
    let mut seen = std::collections::HashSet::new();
    for b in 0..=255u8 {
        let text = encode_bytes(&[b]);
        let point = text.points()[0];
        if point != table[b as usize] {
            mismatches += 1;
        }
        if b <= 31 && !(256..=287).contains(&point) {
            mismatches += 1;
        }
        if b >= 32 && point != b as u16 {
            mismatches += 1;
        }
        if !seen.insert(point) {
            mismatches += 1;
        }
        if decode_text(&text) != vec![b] {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
    assert_eq!(seen.len(), 256);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[PASS] codec bijection: 256/256 byte values, 0 mismatches, {elapsed:?}");
}

/// 1000 seeded random payloads (lengths 0–10000) survive
/// encode → split → render → shuffle → parse → reassemble → decode.
#[test]
fn round_trip_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    for case in 0..1000 {
        let len = (rng.next_u64() % 10_001) as usize;
        let mut payload = vec![0u8; len];
        rng.fill_bytes(&mut payload);
        // Body capacity of at least 11 keeps 10000 points within 1000 segments.
        let capacity = 14 + (rng.next_u64() % 187) as usize;
        let plan = SegmentPlan::new(capacity).unwrap();

        let segments = split(&encode_bytes(&payload), &plan).unwrap();
        let count = segments.len();
        let mut rendered: Vec<CodePointText> = segments.iter().map(Segment::render).collect();
        shuffle(&mut rendered, &mut rng);

        let parsed: Vec<Segment> = rendered
            .iter()
            .map(|r| Segment::parse(r).unwrap())
            .collect();
        let rebuilt = decode_text(&reassemble(&parsed, Some(count)).unwrap());
        assert_eq!(
            rebuilt, payload,
            "case {case}: len {len}, capacity {capacity}"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("[PASS] round-trip identity: 1000/1000 payloads byte-identical, {elapsed:?}");
}

/// Split count equals max(1, ceil(n / (capacity − 3))) for n in 0..=5000 and
/// capacity in {4, 10, 70, 140, 160}, against an independent loop oracle.
#[test]
fn message_count_law() {
    let mut checked = 0u64;
    for capacity in [4usize, 10, 70, 140, 160] {
        let plan = SegmentPlan::new(capacity).unwrap();
        let body = capacity - 3;
        let full = encode_bytes(&vec![0u8; 5000]);
        for n in 0..=5000usize {
            // Loop oracle: simulate a sender draining the payload.
            let mut oracle = 0usize;
            let mut remaining = n;
            while remaining > 0 {
                remaining -= body.min(remaining);
                oracle += 1;
            }
            oracle = oracle.max(1);

            let formula = std::cmp::max(1, n.div_ceil(body));
            assert_eq!(formula, oracle, "n={n} capacity={capacity}");

            let payload =
                CodePointText::try_from_points(full.points()[..n].iter().map(|&p| p as u32))
                    .unwrap();
            match split(&payload, &plan) {
                Ok(segments) => assert_eq!(segments.len(), oracle, "n={n} capacity={capacity}"),
                Err(SegmentError::TooManySegments { required }) => {
                    assert_eq!(required, oracle, "n={n} capacity={capacity}");
                    assert!(oracle > MAX_SEGMENTS, "n={n} capacity={capacity}");
                }
                Err(other) => panic!("unexpected error at n={n}: {other}"),
            }
            checked += 1;
        }
    }
    println!("[PASS] message-count law: {checked} (n, capacity) cases, 0 deviations");
}

/// Exactly 1000 segments (indices 000–999) fit; 1001 do not.
#[test]
fn indexing_bounds() {
    let plan = SegmentPlan::new(7).unwrap(); // body capacity 4

    let at_limit = encode_bytes(&vec![9u8; 4000]);
    let segments = split(&at_limit, &plan).unwrap();
    assert_eq!(segments.len(), 1000);
    assert_eq!(segments.first().unwrap().index(), 0);
    assert_eq!(segments.last().unwrap().index(), 999);
    assert_eq!(
        segments.first().unwrap().render().points()[..3],
        [48, 48, 48]
    );
    assert_eq!(
        segments.last().unwrap().render().points()[..3],
        [57, 57, 57]
    );
    assert_eq!(
        decode_text(&reassemble(&segments, Some(1000)).unwrap()),
        vec![9u8; 4000]
    );

    let over_limit = encode_bytes(&vec![9u8; 4001]);
    let err = split(&over_limit, &plan).unwrap_err();
    assert_eq!(err, SegmentError::TooManySegments { required: 1001 });

    println!("[PASS] indexing bounds: 1000 segments fit, 1001 raise the overflow error");
}

/// Two transmits with seed 42 agree exactly; a lossless profile conserves the
/// multiset and keeps every message within the reorder window.
#[test]
fn channel_determinism() {
    let messages: Vec<CodePointText> = (0..100u16)
        .map(|i| encode_bytes(&[(i / 256) as u8, (i % 256) as u8]))
        .collect();

    let profile = ChannelProfile {
        reorder_window: 3,
        duplicate_prob: 0.2,
        loss_prob: 0.1,
        seed: 42,
        ..ChannelProfile::default()
    };
    let first = transmit(&messages, &profile).unwrap();
    let second = transmit(&messages, &profile).unwrap();
    assert_eq!(first, second, "seed 42 must give identical traces");

    let lossless = ChannelProfile {
        reorder_window: 4,
        seed: 42,
        ..ChannelProfile::default()
    };
    let delivered = transmit(&messages, &lossless).unwrap();

    let mut sent_sorted: Vec<&CodePointText> = messages.iter().collect();
    let mut delivered_sorted: Vec<&CodePointText> = delivered.iter().collect();
    sent_sorted.sort_by_key(|m| m.points().to_vec());
    delivered_sorted.sort_by_key(|m| m.points().to_vec());
    assert_eq!(sent_sorted, delivered_sorted, "multiset must be conserved");

    let mut max_displacement = 0;
    for (position, message) in delivered.iter().enumerate() {
        let sent = messages.iter().position(|m| m == message).unwrap();
        let displacement = position.abs_diff(sent);
        assert!(displacement <= lossless.reorder_window);
        max_displacement = max_displacement.max(displacement);
    }

    println!(
        "[PASS] channel determinism: identical traces at seed 42; multiset conserved, \
         max displacement {max_displacement} <= window {}",
        lossless.reorder_window
    );
}

/// 50 records survive close + reopen with identical content and order, and a
/// conflicting duplicate is rejected.
#[test]
fn store_durability() {
    let dir = tempfile::tempdir().unwrap();
    let segments: Vec<Segment> = (0..50u16)
        .map(|i| {
            let body = encode_bytes(&[i as u8, 0, 31, 255, (i * 3) as u8]);
            Segment::new(i, body).unwrap()
        })
        .collect();

    let before = {
        let mut store = InboxStore::open(dir.path()).unwrap();
        for segment in &segments {
            assert!(store.put_record("durable", segment).unwrap());
        }
        store.sync().unwrap();
        store.list_records("durable").unwrap()
    };
    assert_eq!(before.len(), 50);

    let mut reopened = InboxStore::open(dir.path()).unwrap();
    let after = reopened.list_records("durable").unwrap();
    assert_eq!(before, after, "content and order must survive reopen");
    let indices: Vec<u16> = after.iter().map(|r| r.index).collect();
    assert_eq!(indices, (0..50).collect::<Vec<u16>>());

    let conflicting = Segment::new(7, encode_bytes(b"different")).unwrap();
    let err = reopened.put_record("durable", &conflicting).unwrap_err();
    assert!(matches!(
        err,
        StoreError::ConflictingDuplicate { index: 7, .. }
    ));

    println!("[PASS] store durability: 50/50 records identical after reopen; conflict rejected");
}

/// 200 random images up to 64x64 match a sort+dedup color-count oracle exactly.
#[test]
fn unique_color_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..200 {
        let width = 1 + (rng.next_u64() % 64) as u32;
        let height = 1 + (rng.next_u64() % 64) as u32;
        // Narrow palettes on even cases force collisions.
        let mask: u8 = if case % 2 == 0 { 0x0F } else { 0xFF };
        let pixels: Vec<[u8; 3]> = (0..width as usize * height as usize)
            .map(|_| {
                let v = rng.next_u64();
                [
                    v as u8 & mask,
                    (v >> 8) as u8 & mask,
                    (v >> 16) as u8 & mask,
                ]
            })
            .collect();

        let mut oracle = pixels.clone();
        oracle.sort_unstable();
        oracle.dedup();

        let image = RgbImage::new(width, height, pixels).unwrap();
        assert_eq!(
            unique_colors(&image),
            oracle.len(),
            "case {case}: {width}x{height}"
        );
    }
    println!("[PASS] unique-color oracle: 200/200 images match sort+dedup exactly");
}

/// Payload lengths 2244 > 2165 > 2140 > 2115 > 2060 > 1940 keep that strict
/// character ordering and weakly decreasing message counts under any fixed
/// plan, with characters always equal to byte length.
#[test]
fn relational_character_ordering() {
    let lengths = [2244usize, 2165, 2140, 2115, 2060, 1940];
    let mut plans_checked = 0;

    for capacity in [6usize, 10, 70, 140, 160, 452] {
        let plan = SegmentPlan::new(capacity).unwrap();
        let stats: Vec<_> = lengths
            .iter()
            .map(|&len| transfer_stats(&vec![0u8; len], &plan, None).unwrap())
            .collect();

        for (stat, &len) in stats.iter().zip(&lengths) {
            assert_eq!(stat.characters, len, "characters must equal byte length");
        }
        for pair in stats.windows(2) {
            assert!(
                pair[0].characters > pair[1].characters,
                "characters must strictly decrease"
            );
            assert!(
                pair[0].messages >= pair[1].messages,
                "messages must weakly decrease (capacity {capacity})"
            );
        }
        plans_checked += 1;
    }

    println!(
        "[PASS] relational ordering: 6 payload lengths ordered under {plans_checked} plans, \
         characters == byte length throughout"
    );
}

// ---------------------------------------------------------------------------
// End-to-end through the real binary.
// ---------------------------------------------------------------------------

fn smspipe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smspipe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn sample_ppm() -> Vec<u8> {
    let width = 24u32;
    let height = 16u32;
    let mut bytes = format!("P6\n{width} {height}\n255\n").into_bytes();
    for y in 0..height {
        for x in 0..width {
            // Stripes with a gradient: repeated and unique colors both appear.
            bytes.extend_from_slice(&[(x * 11) as u8, (y * 17) as u8, ((x + y) % 4 * 60) as u8]);
        }
    }
    bytes
}

fn checksum(bytes: &[u8]) -> u64 {
    // FNV-1a, enough to compare files.
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn manifest_count(dir: &Path, segments_file: &str) -> usize {
    let manifest: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.join(format!("{segments_file}.manifest.json"))).unwrap(),
    )
    .unwrap();
    manifest["segment_count"].as_u64().unwrap() as usize
}

/// A sample PPM reconstructs byte-identically over an identity channel and
/// over a reordering+duplicating channel; with one segment deleted the
/// reconstruction exits with code 3 and names the missing index.
#[test]
fn end_to_end_cli() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = sample_ppm();
    fs::write(dir.path().join("sample.ppm"), &ppm).unwrap();

    // Identity channel.
    let out = smspipe(&["send", "sample.ppm", "clean.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let count = manifest_count(dir.path(), "clean.txt");
    let out = smspipe(
        &[
            "receive",
            "clean.txt",
            "--store",
            "inbox",
            "--transfer-id",
            "clean",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = smspipe(
        &[
            "reconstruct",
            "clean.out",
            "--store",
            "inbox",
            "--transfer-id",
            "clean",
            "--count",
            &count.to_string(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rebuilt = fs::read(dir.path().join("clean.out")).unwrap();
    assert_eq!(checksum(&rebuilt), checksum(&ppm));
    assert_eq!(rebuilt, ppm);

    // Reordering + duplicating channel.
    let out = smspipe(
        &[
            "send",
            "sample.ppm",
            "rough.txt",
            "--reorder-window",
            "5",
            "--dup-prob",
            "0.35",
            "--seed",
            "1234",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = smspipe(
        &[
            "receive",
            "rough.txt",
            "--store",
            "inbox",
            "--transfer-id",
            "rough",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = smspipe(
        &[
            "reconstruct",
            "rough.out",
            "--store",
            "inbox",
            "--transfer-id",
            "rough",
            "--count",
            &count.to_string(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rebuilt = fs::read(dir.path().join("rough.out")).unwrap();
    assert_eq!(checksum(&rebuilt), checksum(&ppm));
    assert_eq!(rebuilt, ppm);

    // Delete segment 004 from the clean delivery.
    let clean = fs::read_to_string(dir.path().join("clean.txt")).unwrap();
    let holed: String = clean
        .lines()
        .filter(|line| !line.starts_with("004"))
        .map(|line| format!("{line}\n"))
        .collect();
    fs::write(dir.path().join("holed.txt"), holed).unwrap();
    let out = smspipe(
        &[
            "receive",
            "holed.txt",
            "--store",
            "inbox",
            "--transfer-id",
            "holed",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = smspipe(
        &[
            "reconstruct",
            "holed.out",
            "--store",
            "inbox",
            "--transfer-id",
            "holed",
            "--count",
            &count.to_string(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "missing segment must exit 3");
    let diagnostics = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(
        diagnostics.contains("missing segments: 004"),
        "stderr must name the gap: {diagnostics}"
    );

    println!(
        "[PASS] end-to-end CLI: identity and reorder+dup channels reconstruct byte-identically \
         ({} segments); deleted segment exits 3 naming index 004",
        count
    );
}
