//! Middlebury `.flo`: `202021.25` as f32, width and height as i32, then
//! interleaved `(u, v)` f32 pairs in row-major order. Little-endian.

use crate::io::reader::ByteReader;
use crate::{Error, FlowField, Result};

pub const FLO_MAGIC: f32 = 202021.25;

pub fn write_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * flow.u().len());
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&(*u as f32).to_le_bytes());
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    let mut r = ByteReader::new(bytes);
    let magic = r.f32("magic")?;
    if magic != FLO_MAGIC {
        return Err(Error::format(0, format!("bad .flo magic {magic}")));
    }
    let w = r.i32("width")?;
    let h = r.i32("height")?;
    if w <= 0 || h <= 0 {
        return Err(Error::format(4, format!("bad dimensions {w}x{h}")));
    }
    let n = w as usize * h as usize;
    if r.remaining() != 8 * n {
        return Err(Error::format(
            12,
            format!("payload is {} bytes, expected {}", r.remaining(), 8 * n),
        ));
    }
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        u.push(f64::from(r.f32("u")?));
        v.push(f64::from(r.f32("v")?));
    }
    FlowField::new(w as usize, h as usize, u, v)
        .map_err(|e| Error::format(12, e.to_string()))
}
