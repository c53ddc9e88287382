//! Line-oriented text format.
//!
//! ```text
//! # optional comments anywhere
//! 346,260          <- width,height
//! 1000,10,20,1     <- t,x,y,p with p in {0,1}
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::event::{Event, EventPacket, Polarity, SensorGeometry};

/// A decoded packet together with how many events arrived out of order and
/// had to be re-sorted.
#[derive(Debug, Clone)]
pub struct TextDecoded {
    pub packet: EventPacket,
    pub out_of_order: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| parse_err(line, format!("invalid {name} `{}`", raw.trim())))
}

pub fn read_events_text<R: BufRead>(source: R) -> Result<EventPacket> {
    let decoded = read_events_text_counted(source)?;
    if decoded.out_of_order > 0 {
        log::warn!("re-sorted {} out-of-order events", decoded.out_of_order);
    }
    Ok(decoded.packet)
}

pub fn read_events_text_counted<R: BufRead>(source: R) -> Result<TextDecoded> {
    let (geometry, events, lines) = parse_lines(source)?;
    let mut out_of_order = 0usize;
    let mut last_t = 0u64;
    for (i, (e, &lineno)) in events.iter().zip(&lines).enumerate() {
        if !geometry.contains(e.x, e.y) {
            return Err(parse_err(lineno, format!("pixel ({},{}) outside {geometry} sensor", e.x, e.y)));
        }
        if i > 0 && e.t < last_t {
            out_of_order += 1;
        }
        last_t = last_t.max(e.t);
    }
    let packet = if out_of_order > 0 {
        EventPacket::from_unsorted(geometry, events)?
    } else {
        EventPacket::new_unchecked(geometry, events)
    };
    Ok(TextDecoded { packet, out_of_order })
}

/// Parses the header and records as written, without bounds checks or
/// re-sorting.
pub fn parse_text_records<R: BufRead>(source: R) -> Result<(SensorGeometry, Vec<Event>)> {
    parse_lines(source).map(|(g, events, _)| (g, events))
}

fn parse_lines<R: BufRead>(source: R) -> Result<(SensorGeometry, Vec<Event>, Vec<usize>)> {
    let mut geometry: Option<SensorGeometry> = None;
    let mut events = Vec::new();
    let mut lines = Vec::new();

    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').collect();

        if geometry.is_none() {
            if fields.len() != 2 {
                return Err(Error::Format(format!("missing header: expected `width,height` at line {lineno}")));
            }
            let w: u16 = parse_field(lineno, "width", fields[0])?;
            let h: u16 = parse_field(lineno, "height", fields[1])?;
            geometry = Some(SensorGeometry::new(w, h).map_err(|e| parse_err(lineno, e.to_string()))?);
            continue;
        }

        if fields.len() != 4 {
            return Err(parse_err(lineno, format!("expected 4 fields `t,x,y,p`, found {}", fields.len())));
        }
        let t: u64 = parse_field(lineno, "timestamp", fields[0])?;
        let x: u16 = parse_field(lineno, "x", fields[1])?;
        let y: u16 = parse_field(lineno, "y", fields[2])?;
        let bit: u8 = parse_field(lineno, "polarity", fields[3])?;
        let p = Polarity::from_bit(bit).ok_or_else(|| parse_err(lineno, "polarity out of range"))?;
        events.push(Event::new(x, y, t, p));
        lines.push(lineno);
    }

    let geometry = geometry.ok_or_else(|| Error::Format("missing header `width,height`".into()))?;
    Ok((geometry, events, lines))
}

pub fn write_events_text<W: Write>(packet: &EventPacket, sink: W) -> Result<u64> {
    write_events_text_with_comments(packet, &[], sink)
}

/// Like [`write_events_text`], with `# ` comment lines ahead of the header.
pub fn write_events_text_with_comments<W: Write>(
    packet: &EventPacket,
    comments: &[String],
    mut sink: W,
) -> Result<u64> {
    let mut buf = String::with_capacity(24 * (packet.len() + 1));
    for c in comments {
        buf.push_str("# ");
        buf.push_str(c);
        buf.push('\n');
    }
    let g = packet.geometry();
    buf.push_str(&format!("{},{}\n", g.width, g.height));
    for e in packet.events() {
        use std::fmt::Write as _;
        let _ = writeln!(buf, "{},{},{},{}", e.t, e.x, e.y, e.p.bit());
    }
    sink.write_all(buf.as_bytes())?;
    sink.flush()?;
    Ok(buf.len() as u64)
}
