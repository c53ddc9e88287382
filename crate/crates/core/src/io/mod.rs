//! Event stream I/O, synthetic scene generation, noise injection and hot-pixel
//! preprocessing.

mod binary;
mod hot_pixels;
mod noise;
mod scene;
mod text;

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::Path;

pub use binary::{
    decode as decode_binary, decode_records as decode_binary_records, read_events_binary, write_events_binary,
    HEADER_LEN, MAGIC, RECORD_LEN,
};
pub use hot_pixels::{remove_hot_pixels, HotPixelReport, DEFAULT_HOT_PIXEL_SIGMA};
pub use noise::{inject_uniform_noise, NoiseSpec};
pub use scene::{generate_scene, replay_trigger_rule, GeneratedScene, Pattern, SceneSpec, DEFAULT_STEP_US};
pub use text::{
    parse_text_records, read_events_text, read_events_text_counted, write_events_text, write_events_text_with_comments,
    TextDecoded,
};

use crate::error::Result;
use crate::event::{validate_events, Event, EventPacket, SensorGeometry, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Text,
    Binary,
}

impl FileFormat {
    /// `.bin` and `.evt` files are binary; everything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("evt") => FileFormat::Binary,
            _ => FileFormat::Text,
        }
    }
}

/// Reads a packet, sniffing the `EVT1` magic to pick the decoder.
pub fn read_events_file(path: impl AsRef<Path>) -> Result<EventPacket> {
    let mut bytes = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)
    } else {
        read_events_text(&bytes[..])
    }
}

pub fn write_events_file(path: impl AsRef<Path>, packet: &EventPacket, comments: &[String]) -> Result<u64> {
    let path = path.as_ref();
    let sink = BufWriter::new(File::create(path)?);
    match FileFormat::from_path(path) {
        FileFormat::Binary => write_events_binary(packet, sink),
        FileFormat::Text => write_events_text_with_comments(packet, comments, sink),
    }
}

/// Records of a file exactly as stored, before bounds checks and re-sorting.
#[derive(Debug, Clone)]
pub struct RawEvents {
    pub geometry: SensorGeometry,
    pub events: Vec<Event>,
}

impl RawEvents {
    pub fn validate(&self) -> ValidationReport {
        validate_events(&self.geometry, &self.events)
    }
}

/// Reads a file without normalising it, so that out-of-bounds records and
/// ordering problems can be reported instead of rejected or repaired.
pub fn read_raw_events_file(path: impl AsRef<Path>) -> Result<RawEvents> {
    let mut bytes = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    let (geometry, events) =
        if bytes.starts_with(MAGIC) { binary::decode_records(&bytes)? } else { text::parse_text_records(&bytes[..])? };
    Ok(RawEvents { geometry, events })
}
