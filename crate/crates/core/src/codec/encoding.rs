//! Canonical text encoding. Ten fields in fixed order joined by U+001F:
//!
//! ```text
//! version ␟ originator ␟ category ␟ subject ␟ reference ␟ referenced_hash ␟
//! timestamp ␟ duration ␟ geometry ␟ payload
//! ```
//!
//! See `docs/protocol.md` for the byte-level description.

use chrono::{DateTime, NaiveDateTime, Utc};

use super::{CodecError, GeoShape, MessageCategory, RefIndicator, WfMessage};
use crate::crypto::Digest;

pub const UNIT_SEPARATOR: u8 = 0x1F;
const FIELD_COUNT: usize = 10;
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub fn encode(message: &WfMessage) -> Result<Vec<u8>, CodecError> {
    message.validate()?;
    Ok(encode_unchecked(message).into_bytes())
}

/// Digest of the canonical encoding.
pub fn digest_of(message: &WfMessage) -> Result<Digest, CodecError> {
    Ok(Digest::of(&encode(message)?))
}

fn encode_unchecked(m: &WfMessage) -> String {
    let sep = UNIT_SEPARATOR as char;
    let fields: [String; FIELD_COUNT] = [
        m.version.to_string(),
        m.originator_id.clone(),
        m.category.code().to_string(),
        format!("{:02}", m.subject_code),
        m.reference_indicator.code().to_string(),
        m.referenced_hash.map(|d| d.to_hex()).unwrap_or_default(),
        m.timestamp.format(TIMESTAMP_FORMAT).to_string(),
        m.duration.map(|d| d.to_string()).unwrap_or_default(),
        m.geometry.map(|g| encode_geometry(&g)).unwrap_or_default(),
        m.payload_text.clone().unwrap_or_default(),
    ];
    fields.join(&sep.to_string())
}

fn encode_fixed(v: i32) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:05}", a / 100_000, a % 100_000)
}

fn encode_geometry(g: &GeoShape) -> String {
    format!("{},{},{}", encode_fixed(g.lat_e5()), encode_fixed(g.lon_e5()), g.radius_m)
}

pub fn decode(bytes: &[u8]) -> Result<WfMessage, CodecError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CodecError::MalformedBytes(format!("not UTF-8: {e}")))?;
    let fields: Vec<&str> = text.split(UNIT_SEPARATOR as char).collect();
    if fields.len() != FIELD_COUNT {
        return Err(CodecError::MalformedBytes(format!("expected {FIELD_COUNT} fields, found {}", fields.len())));
    }

    let version: u8 = parse_uint(fields[0], "version")?;
    let originator_id = fields[1].to_owned();
    let category = {
        let mut chars = fields[2].chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                MessageCategory::from_code(c).ok_or_else(|| CodecError::UnknownCategory(fields[2].to_owned()))?
            }
            _ => return Err(CodecError::UnknownCategory(fields[2].to_owned())),
        }
    };
    if fields[3].len() != 2 {
        return Err(CodecError::MalformedBytes(format!("subject code must be two digits: {:?}", fields[3])));
    }
    let subject_code: u8 = parse_uint(fields[3], "subject_code")?;
    let reference_indicator = {
        let mut chars = fields[4].chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => RefIndicator::from_code(c)
                .ok_or_else(|| CodecError::MalformedBytes(format!("unknown reference indicator {:?}", fields[4])))?,
            _ => return Err(CodecError::MalformedBytes(format!("unknown reference indicator {:?}", fields[4]))),
        }
    };
    let referenced_hash = if fields[5].is_empty() {
        None
    } else {
        Some(fields[5].parse::<Digest>().map_err(|e| CodecError::MalformedBytes(e.to_string()))?)
    };
    let timestamp = NaiveDateTime::parse_from_str(fields[6], TIMESTAMP_FORMAT)
        .map_err(|e| CodecError::MalformedBytes(format!("timestamp {:?}: {e}", fields[6])))?;
    let timestamp = DateTime::<Utc>::from_naive_utc_and_offset(timestamp, Utc);
    let duration = if fields[7].is_empty() { None } else { Some(parse_uint(fields[7], "duration")?) };
    let geometry = if fields[8].is_empty() { None } else { Some(decode_geometry(fields[8])?) };
    let payload_text = if category.carries_text() {
        Some(fields[9].to_owned())
    } else if fields[9].is_empty() {
        None
    } else {
        return Err(CodecError::MalformedBytes(format!("category {} carries no payload", category.code())));
    };

    let message = WfMessage {
        version,
        originator_id,
        category,
        subject_code,
        reference_indicator,
        referenced_hash,
        timestamp,
        duration,
        geometry,
        payload_text,
    };
    message.validate()?;
    // Only canonical spellings are accepted; this makes decode injective.
    if encode_unchecked(&message).as_bytes() != bytes {
        return Err(CodecError::MalformedBytes("non-canonical encoding".into()));
    }
    Ok(message)
}

fn parse_uint<T: std::str::FromStr>(s: &str, field: &'static str) -> Result<T, CodecError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CodecError::MalformedBytes(format!("{field}: expected decimal digits, got {s:?}")));
    }
    s.parse::<T>().map_err(|_| CodecError::FieldOutOfRange { field, value: s.to_owned() })
}

fn decode_fixed(s: &str, field: &'static str) -> Result<i32, CodecError> {
    let malformed = || CodecError::MalformedBytes(format!("{field}: bad fixed-point value {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').ok_or_else(malformed)?;
    if int.is_empty() || frac.len() != 5 || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    if int.len() > 3 {
        return Err(CodecError::FieldOutOfRange { field, value: s.to_owned() });
    }
    let int: i64 = int.parse().map_err(|_| malformed())?;
    let frac: i64 = frac.parse().map_err(|_| malformed())?;
    let v = int * 100_000 + frac;
    Ok(if neg { -v } else { v } as i32)
}

fn decode_geometry(s: &str) -> Result<GeoShape, CodecError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CodecError::MalformedBytes(format!("geometry needs lat,lon,radius: {s:?}")));
    }
    let lat = decode_fixed(parts[0], "latitude")?;
    let lon = decode_fixed(parts[1], "longitude")?;
    let radius_m: u32 = parse_uint(parts[2], "radius_m")?;
    let g = GeoShape::from_fixed(lat, lon, radius_m);
    g.validate()?;
    Ok(g)
}
