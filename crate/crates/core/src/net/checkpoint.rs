//! Model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `MOSN` | 4 bytes |
//! | version (1) | u8 |
//! | input channels, height, width | 3 x u32 |
//! | class count | u32 |
//! | layer count | u32 |
//! | per layer: tag, then fields | u8, see below |
//! | parameter count | u64 |
//! | parameters | f64 each |
//!
//! Layer tags: 1 conv (`out_channels, kernel, stride, padding` as u32),
//! 2 ReLU, 3 max-pool, 4 dense (`outputs` as u32), 5 dropout (`rate` as f64).
//! Parameters follow layer order, weights before biases.

use std::io::Write;

use crate::io::reader::ByteReader;
use crate::net::{LayerSpec, Net, NetConfig, Shape};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MOSN";
pub const CHECKPOINT_VERSION: u8 = 1;

pub fn write_checkpoint<W: Write>(net: &Net, mut out: W) -> std::io::Result<()> {
    let cfg = net.config();
    let mut buf = Vec::with_capacity(64 + 8 * net.param_count());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.push(CHECKPOINT_VERSION);
    for d in [cfg.input.c, cfg.input.h, cfg.input.w, cfg.classes, cfg.layers.len()] {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for layer in &cfg.layers {
        match *layer {
            LayerSpec::Conv {
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                buf.push(1);
                for d in [out_channels, kernel, stride, padding] {
                    buf.extend_from_slice(&(d as u32).to_le_bytes());
                }
            }
            LayerSpec::Relu => buf.push(2),
            LayerSpec::MaxPool => buf.push(3),
            LayerSpec::Dense { outputs } => {
                buf.push(4);
                buf.extend_from_slice(&(outputs as u32).to_le_bytes());
            }
            LayerSpec::Dropout { rate } => {
                buf.push(5);
                buf.extend_from_slice(&rate.to_le_bytes());
            }
        }
    }
    buf.extend_from_slice(&(net.param_count() as u64).to_le_bytes());
    for p in net.params().iter().copied().flatten() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Net> {
    let mut r = ByteReader::new(bytes);
    if r.take(4, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::format(0, "not a checkpoint (bad magic)"));
    }
    let version = r.u8("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(4, format!("unsupported checkpoint version {version}")));
    }
    let c = r.u32("input channels")? as usize;
    let h = r.u32("input height")? as usize;
    let w = r.u32("input width")? as usize;
    let classes = r.u32("class count")? as usize;
    let count = r.u32("layer count")? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let at = r.pos();
        let spec = match r.u8("layer tag")? {
            1 => LayerSpec::Conv {
                out_channels: r.u32("conv channels")? as usize,
                kernel: r.u32("conv kernel")? as usize,
                stride: r.u32("conv stride")? as usize,
                padding: r.u32("conv padding")? as usize,
            },
            2 => LayerSpec::Relu,
            3 => LayerSpec::MaxPool,
            4 => LayerSpec::Dense {
                outputs: r.u32("dense outputs")? as usize,
            },
            5 => LayerSpec::Dropout {
                rate: r.f64("dropout rate")?,
            },
            tag => return Err(Error::format(at, format!("unknown layer tag {tag}"))),
        };
        layers.push(spec);
    }
    let config = NetConfig {
        input: Shape::new(c, h, w),
        classes,
        layers,
    };
    let at = r.pos();
    let mut net = Net::zeros(config).map_err(|e| Error::format(at, e.to_string()))?;
    let declared = r.u64("parameter count")? as usize;
    if declared != net.param_count() {
        return Err(Error::format(
            at,
            format!(
                "header declares {declared} parameters, layers need {}",
                net.param_count()
            ),
        ));
    }
    for tensor in net.params_mut() {
        for p in tensor.iter_mut() {
            *p = r.f64("parameters")?;
        }
    }
    r.finish()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rng;

    #[test]
    fn round_trip() {
        let cfg = NetConfig::with_paper_dropout(Shape::new(4, 8, 8), 3, 2, 3, 5);
        let net = Net::new(cfg, &mut Rng::new(1)).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&net, &mut bytes).unwrap();
        let back = read_checkpoint(&bytes).unwrap();
        assert_eq!(back, net);
        let mut again = Vec::new();
        write_checkpoint(&back, &mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn corrupt_files_rejected() {
        let net = Net::zeros(NetConfig::small(Shape::new(1, 4, 4), 2, 1, 1, 2, 0.5)).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&net, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(read_checkpoint(&bad).is_err());
        assert!(read_checkpoint(&bytes[..bytes.len() - 3]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_checkpoint(&long).is_err());
    }
}
