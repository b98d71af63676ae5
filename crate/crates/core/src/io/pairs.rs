//! Per-transition image pairs stored as numbered PGM files in one directory.

use std::path::Path;

use crate::io::pnm::{read_pgm, write_pgm};
use crate::io::{read_file, write_file};
use crate::motion::{ChannelPair, MosPair, XyPair};
use crate::{ByteImage, Error, Result};

/// A channel pair with a file naming scheme.
pub trait PairFiles: ChannelPair + Sized {
    /// File-name prefixes of the first and second channel.
    const PREFIXES: [&'static str; 2];
    fn from_images(first: ByteImage, second: ByteImage) -> Result<Self>;
}

impl PairFiles for MosPair {
    const PREFIXES: [&'static str; 2] = ["mag", "ori"];
    fn from_images(first: ByteImage, second: ByteImage) -> Result<Self> {
        MosPair::new(first, second)
    }
}

impl PairFiles for XyPair {
    const PREFIXES: [&'static str; 2] = ["x", "y"];
    fn from_images(first: ByteImage, second: ByteImage) -> Result<Self> {
        XyPair::new(first, second)
    }
}

pub fn pair_file_name(prefix: &str, t: usize) -> String {
    format!("{prefix}_{t:04}.pgm")
}

/// Write `<first>_TTTT.pgm` and `<second>_TTTT.pgm` for every transition.
pub fn write_pairs<P: PairFiles>(dir: &Path, pairs: &[P]) -> Result<()> {
    for (t, pair) in pairs.iter().enumerate() {
        write_file(&dir.join(pair_file_name(P::PREFIXES[0], t)), &write_pgm(pair.first()))?;
        write_file(&dir.join(pair_file_name(P::PREFIXES[1], t)), &write_pgm(pair.second()))?;
    }
    Ok(())
}

/// Read pairs `0, 1, ...` until the first missing index.
pub fn read_pairs<P: PairFiles>(dir: &Path) -> Result<Vec<P>> {
    let mut out = Vec::new();
    loop {
        let a = dir.join(pair_file_name(P::PREFIXES[0], out.len()));
        let b = dir.join(pair_file_name(P::PREFIXES[1], out.len()));
        if !a.is_file() {
            break;
        }
        let first = read_pgm(&read_file(&a)?)?;
        let second = read_pgm(&read_file(&b)?)?;
        out.push(P::from_images(first, second)?);
    }
    if out.is_empty() {
        return Err(Error::Io {
            path: dir.join(pair_file_name(P::PREFIXES[0], 0)),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no image pairs found"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pairs: Vec<MosPair> = (0..3u8)
            .map(|k| MosPair::new(ByteImage::filled(3, 2, k), ByteImage::filled(3, 2, 10 + k)).unwrap())
            .collect();
        write_pairs(dir.path(), &pairs).unwrap();
        assert_eq!(read_pairs::<MosPair>(dir.path()).unwrap(), pairs);
        assert!(read_pairs::<XyPair>(dir.path()).is_err());
    }
}
