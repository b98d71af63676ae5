//! File formats, manifests and the synthetic dataset generator.

pub mod flo;
pub mod manifest;
pub mod pairs;
pub mod pnm;
pub(crate) mod reader;
pub mod scores;
pub mod synth;
pub mod tensor;
pub mod viz;

use std::path::{Path, PathBuf};

use crate::{Error, GrayImage, Result};

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Write `bytes`, creating parent directories as needed.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Files in `dir` with one of the given extensions, sorted by name.
pub fn list_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && extensions.contains(&ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// All PGM/PPM frames of a clip directory, in file-name order, as gray.
pub fn read_frames(dir: &Path) -> Result<Vec<GrayImage>> {
    list_files(dir, &["pgm", "ppm"])?
        .iter()
        .map(|p| {
            pnm::read_frame(&read_file(p)?).map_err(|e| match e {
                Error::Format { offset, message } => Error::Format {
                    offset,
                    message: format!("{}: {message}", p.display()),
                },
                other => other,
            })
        })
        .collect()
}
