//! Command-line front end for the smspipe pipeline.
//!
//! `send` encodes a file into indexed segments, optionally roughs them up in
//! the simulated channel, and writes a segments file plus a manifest sidecar.
//! `receive` ingests a segments file into an inbox store, `reconstruct`
//! rebuilds the original file from the store, and `stats` reports the
//! character/message/unique-color triple for a payload.
//!
//! Exit codes: 0 success, 1 I/O or data failure, 2 segmentation overflow,
//! 3 missing segments. Reports go to stdout, diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use smspipe::{
    encode_bytes, parse_ppm, read_segments_file, split, transfer_stats, transmit,
    write_segments_file, ChannelProfile, CodePointText, InboxStore, Segment, SegmentError,
    SegmentPlan, StoreError,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_OVERFLOW: u8 = 2;
const EXIT_MISSING: u8 = 3;

#[derive(Parser)]
#[command(
    name = "smspipe",
    version,
    about = "Send binary files over SMS-sized text messages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into indexed segments and write a segments file
    Send(SendArgs),
    /// Ingest a segments file into an inbox store
    Receive(ReceiveArgs),
    /// Rebuild the original file from stored segments
    Reconstruct(ReconstructArgs),
    /// Report characters, messages, and (optionally) unique colors
    Stats(StatsArgs),
}

#[derive(Args)]
struct ChannelArgs {
    /// Maximum displacement of a message from its send position
    #[arg(long, default_value_t = 0)]
    reorder_window: usize,
    /// Probability a message is delivered twice
    #[arg(long, default_value_t = 0.0)]
    dup_prob: f64,
    /// Probability a message is dropped
    #[arg(long, default_value_t = 0.0)]
    loss_prob: f64,
    /// Channel PRNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SendArgs {
    /// File to transfer
    input: PathBuf,
    /// Segments file to write; `<output>.manifest.json` is written alongside
    output: PathBuf,
    /// Points per message, 3-point index header included
    #[arg(long, default_value_t = 70, value_parser = clap::value_parser!(u64).range(4..))]
    capacity: u64,
    /// Transfer id recorded in the manifest (default: derived from the input name)
    #[arg(long)]
    transfer_id: Option<String>,
    #[command(flatten)]
    channel: ChannelArgs,
}

#[derive(Args)]
struct ReceiveArgs {
    /// Segments file to ingest
    segments: PathBuf,
    /// Inbox store directory
    #[arg(long)]
    store: PathBuf,
    /// Transfer id to file the records under
    #[arg(long)]
    transfer_id: String,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Where to write the rebuilt file
    output: PathBuf,
    /// Inbox store directory
    #[arg(long)]
    store: PathBuf,
    /// Transfer id to rebuild
    #[arg(long)]
    transfer_id: String,
    /// Expected segment count; omit to require contiguous indices from 000
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Payload file
    input: PathBuf,
    /// Points per message, 3-point index header included
    #[arg(long, default_value_t = 70, value_parser = clap::value_parser!(u64).range(4..))]
    capacity: u64,
    /// Binary PPM (P6) image to count unique colors in
    #[arg(long)]
    ppm: Option<PathBuf>,
}

/// Sidecar describing one send, so the receiving side knows what complete
/// looks like. Travels next to the segments file, never inside it.
#[derive(Debug, Serialize, Deserialize)]
struct TransferManifest {
    transfer_id: String,
    segment_count: usize,
    payload_length: usize,
    source_name: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_FAILURE, e.to_string())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Segment(SegmentError::MissingSegments(_)) => {
                Failure::new(EXIT_MISSING, e.to_string())
            }
            StoreError::Segment(SegmentError::TooManySegments { .. }) => {
                Failure::new(EXIT_OVERFLOW, e.to_string())
            }
            other => Failure::new(EXIT_FAILURE, other.to_string()),
        }
    }
}

impl From<SegmentError> for Failure {
    fn from(e: SegmentError) -> Self {
        match e {
            SegmentError::TooManySegments { .. } => Failure::new(EXIT_OVERFLOW, e.to_string()),
            SegmentError::MissingSegments(_) => Failure::new(EXIT_MISSING, e.to_string()),
            other => Failure::new(EXIT_FAILURE, other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Send(args) => cmd_send(args),
        Command::Receive(args) => cmd_receive(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

/// Transfer id from the input file name, restricted to store-safe characters.
fn derive_transfer_id(input: &Path) -> String {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let cleaned: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .take(64)
        .collect();
    if cleaned.is_empty() {
        "transfer".to_string()
    } else {
        cleaned
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn cmd_send(args: SendArgs) -> Result<(), Failure> {
    let payload = read_file(&args.input)?;
    let capacity = args.capacity as usize;
    let plan = SegmentPlan::new(capacity).expect("clap keeps capacity >= 4");

    let segments = split(&encode_bytes(&payload), &plan)?;
    let rendered: Vec<CodePointText> = segments.iter().map(Segment::render).collect();

    let profile = ChannelProfile {
        capacity_points: capacity,
        reorder_window: args.channel.reorder_window,
        duplicate_prob: args.channel.dup_prob,
        loss_prob: args.channel.loss_prob,
        seed: args.channel.seed,
    };
    let delivered =
        transmit(&rendered, &profile).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;

    let mut file_bytes = Vec::new();
    write_segments_file(&mut file_bytes, &delivered, Some(segments.len()))
        .expect("writing to a Vec cannot fail");
    write_file(&args.output, &file_bytes)?;

    let manifest = TransferManifest {
        transfer_id: args
            .transfer_id
            .unwrap_or_else(|| derive_transfer_id(&args.input)),
        segment_count: segments.len(),
        payload_length: payload.len(),
        source_name: args.input.display().to_string(),
    };
    let manifest_json =
        serde_json::to_vec_pretty(&manifest).expect("manifest is always serializable");
    write_file(&manifest_path(&args.output), &manifest_json)?;

    println!(
        "sent {} bytes as {} segments ({} delivered) -> {}",
        manifest.payload_length,
        manifest.segment_count,
        delivered.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_receive(args: ReceiveArgs) -> Result<(), Failure> {
    let bytes = read_file(&args.segments)?;
    let file = read_segments_file(&bytes);
    let mut store = InboxStore::open(&args.store)?;

    let mut stored = 0usize;
    let mut duplicates = 0usize;
    let mut malformed = 0usize;
    let mut conflicts = 0usize;
    for entry in &file.entries {
        match &entry.parsed {
            Ok(segment) => match store.put_record(&args.transfer_id, segment) {
                Ok(true) => stored += 1,
                Ok(false) => duplicates += 1,
                Err(conflict @ StoreError::ConflictingDuplicate { .. }) => {
                    conflicts += 1;
                    eprintln!("warning: line {}: {conflict}", entry.line_no);
                }
                Err(fatal) => return Err(fatal.into()),
            },
            Err(reason) => {
                malformed += 1;
                eprintln!("warning: line {} skipped: {reason}", entry.line_no);
            }
        }
    }
    store.sync()?;

    if let Some(count) = file.declared_count {
        eprintln!("declared count: {count}");
    }
    println!(
        "stored {stored}, duplicates {duplicates}, malformed {malformed}, conflicts {conflicts}"
    );
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), Failure> {
    let store = InboxStore::open(&args.store)?;
    if args.count.is_none() && store.list_records(&args.transfer_id)?.is_empty() {
        eprintln!(
            "warning: no records for transfer {:?}; writing an empty file",
            args.transfer_id
        );
    }
    let payload = store.reconstruct(&args.transfer_id, args.count)?;
    write_file(&args.output, &payload)?;
    println!(
        "reconstructed {} bytes -> {}",
        payload.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let payload = read_file(&args.input)?;
    let plan = SegmentPlan::new(args.capacity as usize).expect("clap keeps capacity >= 4");

    let image = match &args.ppm {
        Some(path) => Some(
            parse_ppm(&read_file(path)?).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?,
        ),
        None => None,
    };

    let stats = transfer_stats(&payload, &plan, image.as_ref())?;

    // Human-readable view on stderr; the CSV line on stdout is the contract.
    eprintln!("characters    {}", stats.characters);
    eprintln!("messages      {}", stats.messages);
    match stats.unique_colors {
        Some(colors) => eprintln!("unique colors {colors}"),
        None => eprintln!("unique colors -"),
    }
    println!("{}", stats.csv_line());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_ids_derived_from_paths_are_store_safe() {
        assert_eq!(derive_transfer_id(Path::new("img.ppm")), "img");
        assert_eq!(
            derive_transfer_id(Path::new("/a/b/tidy-name_1.bin")),
            "tidy-name_1"
        );
        assert_eq!(
            derive_transfer_id(Path::new("weird name!.dat")),
            "weird-name-"
        );
        assert_eq!(derive_transfer_id(Path::new("/")), "transfer");
    }

    #[test]
    fn manifest_sidecar_appends_to_the_full_name() {
        assert_eq!(
            manifest_path(Path::new("out/segs.txt")),
            PathBuf::from("out/segs.txt.manifest.json")
        );
    }
}
