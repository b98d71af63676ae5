//! Glue from frames to network inputs.

use crate::augment::{apply_crop, random_multiscale_crop, ten_crops, ScaleSet};
use crate::flow::{video_flows, Tvl1Params};
use crate::motion::{mos_images, xy_images, ChannelPair, MosPair, MosParams, XyPair};
use crate::volume::{sample_test_starts, sample_train_start, stack_volume, InputVolume, StackSpec};
use crate::{Error, GrayImage, RescaleBounds, Result, Rng};

/// One labelled video, already reduced to its per-transition image pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip<P> {
    pub id: String,
    pub class: usize,
    pub pairs: Vec<P>,
}

/// How image pairs become network inputs at training and test time.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub stack: StackSpec,
    pub scales: ScaleSet,
    /// Side of the square network input.
    pub out_side: usize,
    /// Test-crop side as a fraction of the shorter frame side (224 / 256).
    pub test_crop_fraction: f64,
    /// Stack starts sampled per test video.
    pub test_samples: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            stack: StackSpec::default(),
            scales: ScaleSet::default(),
            out_side: 224,
            test_crop_fraction: 0.875,
            test_samples: 25,
        }
    }
}

impl PipelineParams {
    /// Random stack start, random multi-scale crop.
    pub fn train_input<P: ChannelPair>(&self, pairs: &[P], rng: &mut Rng) -> Result<InputVolume> {
        let start = sample_train_start(pairs.len(), self.stack.stack_length, rng)?;
        let volume = stack_volume(pairs, start, &self.stack)?;
        let crop = random_multiscale_crop(volume.width(), volume.height(), &self.scales, self.out_side, rng)?;
        apply_crop(&volume, &crop)
    }

    /// `test_samples` evenly spaced stacks, ten crops each, in that order.
    pub fn test_inputs<P: ChannelPair>(&self, pairs: &[P]) -> Result<Vec<InputVolume>> {
        let len = self.stack.stack_length;
        if pairs.len() < len {
            return Err(Error::Insufficient {
                what: "frames",
                needed: len + 1,
                available: pairs.len() + usize::from(!pairs.is_empty()),
            });
        }
        let starts = sample_test_starts(pairs.len(), len, self.test_samples)?;
        let mut inputs = Vec::with_capacity(starts.len() * 10);
        for start in starts {
            let volume = stack_volume(pairs, start, &self.stack)?;
            let (w, h) = (volume.width(), volume.height());
            let side = ((self.test_crop_fraction * w.min(h) as f64).round() as usize).clamp(1, w.min(h));
            for crop in ten_crops(w, h, side, side, self.out_side)? {
                inputs.push(apply_crop(&volume, &crop)?);
            }
        }
        Ok(inputs)
    }
}

/// Frames to magnitude/orientation pairs, one per transition.
pub fn frames_to_mos(frames: &[GrayImage], flow: &Tvl1Params, mos: &MosParams) -> Result<Vec<MosPair>> {
    Ok(video_flows(frames, flow)?
        .flows()
        .iter()
        .map(|f| mos_images(f, mos))
        .collect())
}

/// Frames to rescaled horizontal/vertical pairs, one per transition.
pub fn frames_to_xy(frames: &[GrayImage], flow: &Tvl1Params, bounds: RescaleBounds) -> Result<Vec<XyPair>> {
    Ok(video_flows(frames, flow)?
        .flows()
        .iter()
        .map(|f| xy_images(f, bounds))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ByteImage;

    fn pairs(n: usize, side: usize) -> Vec<MosPair> {
        (0..n)
            .map(|k| {
                MosPair::new(
                    ByteImage::filled(side, side, k as u8),
                    ByteImage::filled(side, side, 255 - k as u8),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn test_inputs_count() {
        let p = PipelineParams {
            stack: StackSpec::new(3).unwrap(),
            out_side: 8,
            ..PipelineParams::default()
        };
        let inputs = p.test_inputs(&pairs(6, 16)).unwrap();
        assert_eq!(inputs.len(), 250);
        assert!(inputs.iter().all(|v| v.shape() == (6, 8, 8)));
    }

    #[test]
    fn short_video_reports_frames_needed() {
        let p = PipelineParams::default();
        let err = p.test_inputs(&pairs(4, 8)).unwrap_err();
        assert!(matches!(err, Error::Insufficient { needed: 11, available: 5, .. }));
    }

    #[test]
    fn train_input_shape() {
        let p = PipelineParams {
            stack: StackSpec::new(2).unwrap(),
            out_side: 6,
            ..PipelineParams::default()
        };
        let v = p.train_input(&pairs(5, 12), &mut Rng::new(0)).unwrap();
        assert_eq!(v.shape(), (4, 6, 6));
    }
}
