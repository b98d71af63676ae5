//! Tensor files: magic `MOSV`, version byte 1, u32 dimension count, u32
//! dimensions, then f32 values in row-major order. Little-endian.

use crate::io::reader::ByteReader;
use crate::volume::InputVolume;
use crate::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"MOSV";
pub const TENSOR_VERSION: u8 = 1;

pub fn write_tensor(volume: &InputVolume) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + 4 * volume.data().len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.push(TENSOR_VERSION);
    out.extend_from_slice(&3u32.to_le_bytes());
    let (c, h, w) = volume.shape();
    for d in [c, h, w] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &x in volume.data() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

/// Reads any tensor with one to three dimensions; missing leading dimensions
/// are taken as 1.
pub fn read_tensor(bytes: &[u8]) -> Result<InputVolume> {
    let mut r = ByteReader::new(bytes);
    if r.take(4, "magic")? != TENSOR_MAGIC {
        return Err(Error::format(0, "not a tensor file (bad magic)"));
    }
    let version = r.u8("version")?;
    if version != TENSOR_VERSION {
        return Err(Error::format(4, format!("unsupported tensor version {version}")));
    }
    let ndim = r.u32("dimension count")? as usize;
    if ndim == 0 || ndim > 3 {
        return Err(Error::format(5, format!("unsupported dimension count {ndim}")));
    }
    let mut dims = [1usize; 3];
    for d in dims[3 - ndim..].iter_mut() {
        *d = r.u32("dimension")? as usize;
    }
    let n = dims.iter().product::<usize>();
    if r.remaining() != 4 * n {
        return Err(Error::format(
            r.pos(),
            format!("header declares {n} values ({} bytes), payload has {} bytes", 4 * n, r.remaining()),
        ));
    }
    let data = (0..n)
        .map(|_| r.f32("value").map(f64::from))
        .collect::<Result<Vec<_>>>()?;
    InputVolume::new(dims[0], dims[1], dims[2], data)
}
