//! Crop geometry for training augmentation and test-time ten-crop
//! evaluation.
//!
//! Flips mirror pixels only. Orientation and horizontal-flow values are not
//! remapped when a volume is mirrored.

use crate::volume::InputVolume;
use crate::{Error, GrayImage, Result, Rng};

/// Default network input side.
pub const DEFAULT_OUT_SIDE: usize = 224;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropSpec {
    pub x: usize,
    pub y: usize,
    pub crop_w: usize,
    pub crop_h: usize,
    pub flip: bool,
    pub out_side: usize,
}

impl CropSpec {
    pub fn full(w: usize, h: usize, out_side: usize) -> Self {
        Self {
            x: 0,
            y: 0,
            crop_w: w,
            crop_h: h,
            flip: false,
            out_side,
        }
    }

    pub fn flipped(self) -> Self {
        Self { flip: !self.flip, ..self }
    }

    fn fits(&self, w: usize, h: usize) -> bool {
        self.crop_w >= 1
            && self.crop_h >= 1
            && self.x + self.crop_w <= w
            && self.y + self.crop_h <= h
            && self.out_side >= 1
    }
}

/// Crop sides as fractions of the shorter frame side.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSet {
    fractions: Vec<f64>,
}

impl Default for ScaleSet {
    /// `{256, 224, 192, 168} / 256`.
    fn default() -> Self {
        Self {
            fractions: vec![1.0, 0.875, 0.75, 0.65625],
        }
    }
}

impl ScaleSet {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() || fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "scale fractions must be non-empty and in (0, 1], got {fractions:?}"
            )));
        }
        Ok(Self { fractions })
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }
}

fn check_crop(w: usize, h: usize, crop_w: usize, crop_h: usize) -> Result<()> {
    if crop_w == 0 || crop_h == 0 || crop_w > w || crop_h > h {
        return Err(Error::InvalidParameter(format!(
            "a {crop_w}x{crop_h} crop does not fit a {w}x{h} source"
        )));
    }
    Ok(())
}

/// Top-left, top-right, bottom-left, bottom-right and centre crops, unflipped.
pub fn five_crops(w: usize, h: usize, crop_w: usize, crop_h: usize, out_side: usize) -> Result<[CropSpec; 5]> {
    check_crop(w, h, crop_w, crop_h)?;
    let (rx, ry) = (w - crop_w, h - crop_h);
    let at = |x, y| CropSpec {
        x,
        y,
        crop_w,
        crop_h,
        flip: false,
        out_side,
    };
    Ok([at(0, 0), at(rx, 0), at(0, ry), at(rx, ry), at(rx / 2, ry / 2)])
}

/// [`five_crops`] followed by the same five mirrored.
pub fn ten_crops(w: usize, h: usize, crop_w: usize, crop_h: usize, out_side: usize) -> Result<[CropSpec; 10]> {
    let five = five_crops(w, h, crop_w, crop_h, out_side)?;
    Ok(std::array::from_fn(|i| if i < 5 { five[i] } else { five[i - 5].flipped() }))
}

/// Random crop: width and height drawn independently from the scale set,
/// position drawn from the five canonical positions, mirrored with
/// probability 1/2.
pub fn random_multiscale_crop(w: usize, h: usize, scales: &ScaleSet, out_side: usize, rng: &mut Rng) -> Result<CropSpec> {
    let base = w.min(h) as f64;
    let fr = scales.fractions();
    let side = |f: f64| ((f * base).round() as usize).max(1);
    let crop_w = side(fr[rng.uniform(fr.len())?]);
    let crop_h = side(fr[rng.uniform(fr.len())?]);
    let five = five_crops(w, h, crop_w, crop_h, out_side)?;
    let mut spec = five[rng.uniform(5)?];
    spec.flip = rng.coin(0.5);
    Ok(spec)
}

/// Extract the crop window from every channel, mirror if asked, and resize
/// bilinearly to `out_side x out_side`.
pub fn apply_crop(volume: &InputVolume, spec: &CropSpec) -> Result<InputVolume> {
    let (c, h, w) = volume.shape();
    if !spec.fits(w, h) {
        return Err(Error::InvalidParameter(format!(
            "crop {}x{} at ({}, {}) does not fit a {w}x{h} volume",
            spec.crop_w, spec.crop_h, spec.x, spec.y
        )));
    }
    let side = spec.out_side;
    let mut data = Vec::with_capacity(c * side * side);
    for ch in 0..c {
        let window = GrayImage::from_fn(spec.crop_w, spec.crop_h, |x, y| {
            let sx = if spec.flip { spec.crop_w - 1 - x } else { x };
            volume.at(ch, spec.y + y, spec.x + sx)
        });
        data.extend(window.resize(side, side).into_data());
    }
    InputVolume::new(c, side, side, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(specs: &[CropSpec]) -> Vec<(usize, usize)> {
        specs.iter().map(|s| (s.x, s.y)).collect()
    }

    fn ramp(c: usize, h: usize, w: usize) -> InputVolume {
        InputVolume::new(c, h, w, (0..c * h * w).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn five_crop_positions() {
        let c = five_crops(256, 256, 224, 224, 224).unwrap();
        assert_eq!(tl(&c), vec![(0, 0), (32, 0), (0, 32), (32, 32), (16, 16)]);
        let c = five_crops(4, 4, 2, 2, 2).unwrap();
        assert_eq!(tl(&c), vec![(0, 0), (2, 0), (0, 2), (2, 2), (1, 1)]);
        let c = five_crops(8, 6, 8, 6, 8).unwrap();
        assert!(c.iter().all(|s| (s.x, s.y, s.crop_w, s.crop_h) == (0, 0, 8, 6)));
        assert!(five_crops(4, 4, 5, 2, 2).is_err());
    }

    #[test]
    fn ten_crop_layout() {
        let c = ten_crops(64, 48, 40, 40, 32).unwrap();
        assert!(c[..5].iter().all(|s| !s.flip));
        assert!(c[5..].iter().all(|s| s.flip));
        assert_eq!(tl(&c[..5]), tl(&c[5..]));
    }

    #[test]
    fn full_frame_ten_crops_give_two_results() {
        let v = ramp(2, 4, 4);
        let outs: Vec<InputVolume> = ten_crops(4, 4, 4, 4, 4)
            .unwrap()
            .iter()
            .map(|s| apply_crop(&v, s).unwrap())
            .collect();
        let mut distinct: Vec<&InputVolume> = Vec::new();
        for o in &outs {
            if !distinct.contains(&o) {
                distinct.push(o);
            }
        }
        assert_eq!(distinct.len(), 2);
        assert_eq!(outs[0], v);
    }

    #[test]
    fn identity_crop() {
        let v = ramp(3, 5, 5);
        assert_eq!(apply_crop(&v, &CropSpec::full(5, 5, 5)).unwrap(), v);
    }

    #[test]
    fn flip_twice_is_identity() {
        let v = ramp(2, 4, 4);
        let spec = CropSpec {
            flip: true,
            ..CropSpec::full(4, 4, 4)
        };
        let once = apply_crop(&v, &spec).unwrap();
        assert_ne!(once, v);
        let twice = apply_crop(&once, &spec).unwrap();
        for (a, b) in twice.data().iter().zip(v.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
        // channel order preserved, each channel mirrored on its own
        assert_eq!(once.at(1, 0, 0), v.at(1, 0, 3));
    }

    #[test]
    fn exact_sub_window() {
        let v = ramp(2, 4, 4);
        let spec = CropSpec {
            x: 0,
            y: 0,
            crop_w: 2,
            crop_h: 2,
            flip: false,
            out_side: 2,
        };
        let out = apply_crop(&v, &spec).unwrap();
        assert_eq!(out.data(), &[0.0, 1.0, 4.0, 5.0, 16.0, 17.0, 20.0, 21.0]);
    }

    #[test]
    fn out_of_bounds_crop_rejected() {
        let v = ramp(1, 4, 4);
        let spec = CropSpec {
            x: 3,
            ..CropSpec::full(2, 2, 2)
        };
        assert!(apply_crop(&v, &spec).is_err());
    }

    #[test]
    fn multiscale_sides() {
        let mut rng = Rng::new(11);
        let sides = [256, 224, 192, 168];
        let mut seen_flip = [false; 2];
        for _ in 0..200 {
            let s = random_multiscale_crop(256, 256, &ScaleSet::default(), 224, &mut rng).unwrap();
            assert!(sides.contains(&s.crop_w) && sides.contains(&s.crop_h));
            assert!(s.x + s.crop_w <= 256 && s.y + s.crop_h <= 256);
            seen_flip[s.flip as usize] = true;
        }
        assert!(seen_flip[0] && seen_flip[1]);
        let single = ScaleSet::new(vec![1.0]).unwrap();
        for _ in 0..20 {
            let s = random_multiscale_crop(64, 64, &single, 32, &mut rng).unwrap();
            assert_eq!((s.x, s.y, s.crop_w, s.crop_h), (0, 0, 64, 64));
        }
        let draw = |seed| {
            let mut r = Rng::new(seed);
            (0..10)
                .map(|_| random_multiscale_crop(64, 48, &ScaleSet::default(), 32, &mut r).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
    }

    #[test]
    fn scale_set_validation() {
        assert!(ScaleSet::new(vec![]).is_err());
        assert!(ScaleSet::new(vec![1.2]).is_err());
        assert!(ScaleSet::new(vec![0.0]).is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::Rng;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn crop_preserves_channels_and_bounds(
            seed in any::<u64>(),
            c in 1usize..4,
            w in 4usize..12,
            h in 4usize..12,
            out in 1usize..10,
        ) {
            let mut rng = Rng::new(seed);
            let v = InputVolume::new(c, h, w, (0..c * h * w).map(|_| rng.range(-1.0, 1.0)).collect()).unwrap();
            let spec = random_multiscale_crop(w, h, &ScaleSet::default(), out, &mut rng).unwrap();
            let o = apply_crop(&v, &spec).unwrap();
            prop_assert_eq!(o.shape(), (c, out, out));
            for ch in 0..c {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for y in spec.y..spec.y + spec.crop_h {
                    for x in spec.x..spec.x + spec.crop_w {
                        lo = lo.min(v.at(ch, y, x));
                        hi = hi.max(v.at(ch, y, x));
                    }
                }
                prop_assert!(o.channel(ch).iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
            }
        }

        #[test]
        fn flipped_crops_mirror_plain_crops(w in 2usize..10, h in 2usize..8, side in 1usize..8, seed in any::<u64>()) {
            prop_assume!(side <= w && side <= h);
            let mut rng = Rng::new(seed);
            let v = InputVolume::new(2, h, w, (0..2 * h * w).map(|_| rng.range(0.0, 1.0)).collect()).unwrap();
            let crops = ten_crops(w, h, side, side, side).unwrap();
            for k in 0..5 {
                let plain = apply_crop(&v, &crops[k]).unwrap();
                let mirrored = apply_crop(&v, &crops[k + 5]).unwrap();
                for c in 0..2 {
                    for y in 0..side {
                        for x in 0..side {
                            prop_assert_eq!(mirrored.at(c, y, x), plain.at(c, y, side - 1 - x));
                        }
                    }
                }
            }
        }

        #[test]
        fn symmetric_source_flipped_left_equals_plain_right(w in 2usize..10, h in 2usize..8, side in 1usize..8) {
            prop_assume!(side <= w && side <= h);
            let v = InputVolume::new(1, h, w, (0..h * w).map(|i| {
                let (x, y) = (i % w, i / w);
                (x.min(w - 1 - x) * 10 + y) as f64
            }).collect()).unwrap();
            let crops = ten_crops(w, h, side, side, side).unwrap();
            // top-left mirrored vs top-right plain, bottom-left mirrored vs bottom-right plain
            prop_assert_eq!(apply_crop(&v, &crops[5]).unwrap(), apply_crop(&v, &crops[1]).unwrap());
            prop_assert_eq!(apply_crop(&v, &crops[7]).unwrap(), apply_crop(&v, &crops[3]).unwrap());
        }
    }
}
