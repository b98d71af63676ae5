//! Stacked network inputs.
//!
//! `L` consecutive channel pairs become one `2L x H x W` volume, interleaved
//! as `(first_0, second_0, first_1, second_1, ...)`. Bytes are centred so
//! that 128, the "no motion" level of every motion channel, maps to 0.

use crate::motion::ChannelPair;
use crate::{Error, Result, Rng};

/// Dense `channels x height x width` tensor, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVolume {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl InputVolume {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "volume dimensions must be positive, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::DimensionMismatch(format!(
                "{channels}x{height}x{width} volume needs {} values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
            .expect("positive dims")
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }
}

/// Byte level to network input.
pub fn normalize_byte(b: u8) -> f64 {
    (f64::from(b) - 128.0) / 128.0
}

/// Which members of each channel pair carry data; the others are written
/// as zeros so the channel count stays `2L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelSelect {
    #[default]
    Both,
    FirstOnly,
    SecondOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackSpec {
    pub stack_length: usize,
    pub select: ChannelSelect,
}

impl Default for StackSpec {
    fn default() -> Self {
        Self {
            stack_length: 10,
            select: ChannelSelect::Both,
        }
    }
}

impl StackSpec {
    pub fn new(stack_length: usize) -> Result<Self> {
        if stack_length == 0 {
            return Err(Error::InvalidParameter("stack length must be at least 1".into()));
        }
        Ok(Self {
            stack_length,
            ..Self::default()
        })
    }

    pub fn channels(&self) -> usize {
        2 * self.stack_length
    }
}

/// Stack `pairs[start..start + L]` into a `2L`-channel volume.
pub fn stack_volume<P: ChannelPair>(pairs: &[P], start: usize, spec: &StackSpec) -> Result<InputVolume> {
    let len = spec.stack_length;
    if len == 0 {
        return Err(Error::InvalidParameter("stack length must be at least 1".into()));
    }
    if start + len > pairs.len() {
        return Err(Error::Insufficient {
            what: "flow image pairs",
            needed: start + len,
            available: pairs.len(),
        });
    }
    let first = pairs[start].first();
    let (w, h) = (first.width(), first.height());
    let mut data = Vec::with_capacity(2 * len * w * h);
    for pair in &pairs[start..start + len] {
        for (k, img) in [pair.first(), pair.second()].into_iter().enumerate() {
            if (img.width(), img.height()) != (w, h) {
                return Err(Error::DimensionMismatch(format!(
                    "stacked images must all be {w}x{h}, got {}x{}",
                    img.width(),
                    img.height()
                )));
            }
            let keep = match spec.select {
                ChannelSelect::Both => true,
                ChannelSelect::FirstOnly => k == 0,
                ChannelSelect::SecondOnly => k == 1,
            };
            if keep {
                data.extend(img.data().iter().map(|&b| normalize_byte(b)));
            } else {
                data.extend(std::iter::repeat_n(0.0, w * h));
            }
        }
    }
    InputVolume::new(2 * len, h, w, data)
}

/// Random stack start for training, uniform over `[0, pair_count - L]`.
pub fn sample_train_start(pair_count: usize, stack_length: usize, rng: &mut Rng) -> Result<usize> {
    if pair_count < stack_length {
        return Err(Error::Insufficient {
            what: "flow image pairs",
            needed: stack_length,
            available: pair_count,
        });
    }
    rng.uniform(pair_count - stack_length + 1)
}

/// `k` evenly spaced stack starts covering `[0, pair_count - L]`, rounded to
/// the nearest index (halves round up). A single sample sits in the middle.
pub fn sample_test_starts(pair_count: usize, stack_length: usize, k: usize) -> Result<Vec<usize>> {
    if pair_count < stack_length {
        return Err(Error::Insufficient {
            what: "flow image pairs",
            needed: stack_length,
            available: pair_count,
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one test sample".into()));
    }
    let span = pair_count - stack_length;
    if k == 1 {
        return Ok(vec![span.div_ceil(2)]);
    }
    let d = k - 1;
    Ok((0..k).map(|i| (2 * i * span + d) / (2 * d)).collect())
}
