//! Synthetic motion clips with known ground truth.
//!
//! Each clip views a fresh random texture through a moving window, so every
//! frame transition is an exact global motion. The default classes are the
//! four axis directions at two speeds; rotation and zoom families exist for
//! harder experiments.

use std::path::Path;

use crate::io::manifest::{Manifest, ManifestEntry, Split};
use crate::io::pnm::write_pgm;
use crate::io::write_file;
use crate::texture::random_texture;
use crate::{Error, GrayImage, Result, Rng};

const TEXTURE_SIGMA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionFamily {
    /// right, left, down, up; `speed` pixels per frame.
    Translation,
    /// counter-clockwise, clockwise; `speed` degrees per frame.
    Rotation,
    /// in, out; scale changes by `2 * speed` percent per frame.
    Zoom,
}

impl MotionFamily {
    fn directions(&self) -> &'static [&'static str] {
        match self {
            MotionFamily::Translation => &["right", "left", "down", "up"],
            MotionFamily::Rotation => &["ccw", "cw"],
            MotionFamily::Zoom => &["in", "out"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub frames_per_clip: usize,
    pub family: MotionFamily,
    pub speeds: Vec<u32>,
    pub clips_per_class: usize,
    /// Fraction of each class assigned to the training split.
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            frames_per_clip: 12,
            family: MotionFamily::Translation,
            speeds: vec![1, 3],
            clips_per_class: 100,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// One motion class.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClass {
    pub label: String,
    pub direction: usize,
    pub speed: u32,
}

impl SyntheticSpec {
    pub fn validate(&self, stack_length: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.clips_per_class == 0 || self.speeds.is_empty() {
            return Err(Error::InvalidParameter(
                "frame size, clip count and speed list must be non-empty".into(),
            ));
        }
        if self.frames_per_clip < stack_length + 1 {
            return Err(Error::Insufficient {
                what: "frames per clip",
                needed: stack_length + 1,
                available: self.frames_per_clip,
            });
        }
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(Error::InvalidParameter("train fraction must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Direction-major class list, e.g. `right_s1, right_s3, left_s1, ...`.
    pub fn classes(&self) -> Vec<MotionClass> {
        let mut out = Vec::new();
        for (d, name) in self.family.directions().iter().enumerate() {
            for &speed in &self.speeds {
                out.push(MotionClass {
                    label: format!("{name}_s{speed}"),
                    direction: d,
                    speed,
                });
            }
        }
        out
    }

    /// Frames of one clip, as 8-bit values stored in reals.
    pub fn clip(&self, class: &MotionClass, rng: &mut Rng) -> Vec<GrayImage> {
        let (w, h) = (self.width, self.height);
        let n = self.frames_per_clip;
        match self.family {
            MotionFamily::Translation => {
                let (dx, dy): (i64, i64) = match class.direction {
                    0 => (1, 0),
                    1 => (-1, 0),
                    2 => (0, 1),
                    _ => (0, -1),
                };
                let s = i64::from(class.speed);
                let travel = s as usize * (n - 1);
                let margin = travel + 2;
                let canvas = random_texture(w + 2 * margin, h + 2 * margin, TEXTURE_SIGMA, rng);
                // random phase: where the window starts inside the margin
                let jx = rng.uniform(3).expect("non-empty") as i64 - 1;
                let jy = rng.uniform(3).expect("non-empty") as i64 - 1;
                (0..n as i64)
                    .map(|t| {
                        let ox = margin as i64 + jx - dx * s * t + if dx > 0 { travel as i64 / 2 } else if dx < 0 { -(travel as i64) / 2 } else { 0 };
                        let oy = margin as i64 + jy - dy * s * t + if dy > 0 { travel as i64 / 2 } else if dy < 0 { -(travel as i64) / 2 } else { 0 };
                        GrayImage::from_fn(w, h, |x, y| {
                            let cx = (x as i64 + ox).clamp(0, canvas.width() as i64 - 1) as usize;
                            let cy = (y as i64 + oy).clamp(0, canvas.height() as i64 - 1) as usize;
                            canvas.at(cx, cy).round()
                        })
                    })
                    .collect()
            }
            MotionFamily::Rotation | MotionFamily::Zoom => {
                let side = 2 * w.max(h);
                let canvas = random_texture(side, side, TEXTURE_SIGMA, rng);
                let phase = rng.range(0.0, 360.0);
                let (cx, cy) = (side as f64 / 2.0, side as f64 / 2.0);
                let sign = if class.direction == 0 { 1.0 } else { -1.0 };
                (0..n)
                    .map(|t| {
                        let t = t as f64;
                        let (angle, scale) = match self.family {
                            MotionFamily::Rotation => ((phase + sign * f64::from(class.speed) * t).to_radians(), 1.0),
                            _ => (phase.to_radians(), (1.0 + sign * 0.02 * f64::from(class.speed)).powf(t)),
                        };
                        let (sin, cos) = angle.sin_cos();
                        GrayImage::from_fn(w, h, |x, y| {
                            // inverse map: frame pixel to canvas
                            let px = (x as f64 - w as f64 / 2.0) / scale;
                            let py = (y as f64 - h as f64 / 2.0) / scale;
                            let sx = cx + cos * px + sin * py;
                            let sy = cy - sin * px + cos * py;
                            canvas.bilinear_sample(sx, sy).round()
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Clip directory of clip `i` of a class, relative to the dataset root.
pub fn clip_path(label: &str, i: usize) -> String {
    format!("{label}/clip_{i:04}")
}

pub fn frame_name(t: usize) -> String {
    format!("frame_{t:04}.pgm")
}

/// Build a manifest with a stratified train/test split; every clip's
/// content comes from its own `(seed, clip number)` stream.
pub fn synthetic_manifest(spec: &SyntheticSpec) -> Result<Manifest> {
    let mut entries = Vec::new();
    let mut split_rng = Rng::with_stream(spec.seed, u64::MAX);
    for (k, class) in spec.classes().iter().enumerate() {
        let mut order: Vec<usize> = (0..spec.clips_per_class).collect();
        split_rng.shuffle(&mut order);
        let n_train = (spec.train_fraction * spec.clips_per_class as f64).round() as usize;
        let mut splits = vec![Split::Test; spec.clips_per_class];
        for &i in &order[..n_train] {
            splits[i] = Split::Train;
        }
        for (i, split) in splits.into_iter().enumerate() {
            entries.push(ManifestEntry {
                path: clip_path(&class.label, i),
                label: class.label.clone(),
                class_index: k,
                split,
            });
        }
    }
    Manifest::new(entries)
}

/// Frames of every clip in manifest order, generated in memory.
pub fn synthetic_clips(spec: &SyntheticSpec) -> Result<Vec<Vec<GrayImage>>> {
    spec.validate(1)?;
    let classes = spec.classes();
    let mut out = Vec::with_capacity(classes.len() * spec.clips_per_class);
    for (k, class) in classes.iter().enumerate() {
        for i in 0..spec.clips_per_class {
            let mut rng = Rng::with_stream(spec.seed, (k * spec.clips_per_class + i) as u64);
            out.push(spec.clip(class, &mut rng));
        }
    }
    Ok(out)
}

/// Write every clip as PGM frames under `root`, then `root/manifest.tsv`.
pub fn gen_synthetic(spec: &SyntheticSpec, root: &Path) -> Result<Manifest> {
    spec.validate(1)?;
    let manifest = synthetic_manifest(spec)?;
    let clips = synthetic_clips(spec)?;
    for (entry, frames) in manifest.entries().iter().zip(&clips) {
        let dir = root.join(&entry.path);
        for (t, frame) in frames.iter().enumerate() {
            write_file(&dir.join(frame_name(t)), &write_pgm(&frame.to_bytes()))?;
        }
    }
    write_file(&root.join("manifest.tsv"), manifest.to_text().as_bytes())?;
    Ok(manifest)
}
