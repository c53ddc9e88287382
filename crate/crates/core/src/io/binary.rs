//! `EVT1` binary layout, all little-endian:
//!
//! | offset | size | field              |
//! |--------|------|--------------------|
//! | 0      | 4    | magic `b"EVT1"`    |
//! | 4      | 2    | width (u16)        |
//! | 6      | 2    | height (u16)       |
//! | 8      | 8    | count (u64)        |
//! | 16     | 13·n | records            |
//!
//! Each record is `t: u64`, `x: u16`, `y: u16`, `p: i8` with `p ∈ {-1, +1}`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::event::{Event, EventPacket, Polarity, SensorGeometry};

pub const MAGIC: &[u8; 4] = b"EVT1";
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 13;

pub fn write_events_binary<W: Write>(packet: &EventPacket, mut sink: W) -> Result<u64> {
    let g = packet.geometry();
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * packet.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&g.width.to_le_bytes());
    buf.extend_from_slice(&g.height.to_le_bytes());
    buf.extend_from_slice(&(packet.len() as u64).to_le_bytes());
    for e in packet.events() {
        buf.extend_from_slice(&e.t.to_le_bytes());
        buf.extend_from_slice(&e.x.to_le_bytes());
        buf.extend_from_slice(&e.y.to_le_bytes());
        buf.push(e.p.sign() as u8);
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(buf.len() as u64)
}

pub fn read_events_binary<R: Read>(mut source: R) -> Result<EventPacket> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    let mut raw = [0u8; 8];
    raw.copy_from_slice(&b[at..at + 8]);
    u64::from_le_bytes(raw)
}

pub fn decode(bytes: &[u8]) -> Result<EventPacket> {
    let (geometry, events) = decode_records(bytes)?;
    if let Some(i) = events.iter().position(|e| !geometry.contains(e.x, e.y)) {
        let e = events[i];
        return Err(Error::Format(format!("record {i}: pixel ({},{}) outside {geometry} sensor", e.x, e.y)));
    }
    if events.windows(2).any(|w| w[1].t < w[0].t) {
        log::warn!("binary input not time-ordered; re-sorting");
        return EventPacket::from_unsorted(geometry, events);
    }
    Ok(EventPacket::new_unchecked(geometry, events))
}

/// Decodes header and records as stored, without bounds checks or
/// re-sorting.
pub fn decode_records(bytes: &[u8]) -> Result<(SensorGeometry, Vec<Event>)> {
    let n = bytes.len().min(MAGIC.len());
    if bytes[..n] != MAGIC[..n] {
        return Err(Error::Format("bad magic, expected EVT1".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN as u64, actual: bytes.len() as u64 });
    }
    let geometry = SensorGeometry::new(u16_at(bytes, 4), u16_at(bytes, 6)).map_err(|e| Error::Format(e.to_string()))?;
    let count = u64_at(bytes, 8);
    let expected = count
        .checked_mul(RECORD_LEN as u64)
        .and_then(|n| n.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::Format(format!("record count {count} overflows")))?;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(Error::Format(format!("{} trailing bytes after {count} records", actual - expected)));
    }

    let mut events = Vec::with_capacity(count as usize);
    for (i, rec) in bytes[HEADER_LEN..].chunks_exact(RECORD_LEN).enumerate() {
        let t = u64_at(rec, 0);
        let x = u16_at(rec, 8);
        let y = u16_at(rec, 10);
        let p = Polarity::from_sign(rec[12] as i8)
            .ok_or_else(|| Error::Format(format!("record {i}: polarity byte {} not in {{-1,+1}}", rec[12] as i8)))?;
        events.push(Event::new(x, y, t, p));
    }
    Ok((geometry, events))
}
