//! Rasters and flow fields.
//!
//! All rasters are row-major: pixel `(x, y)` lives at `data[y * width + x]`.
//! Real-valued rasters are `f64`; bytes only appear once values have been
//! quantized for storage.

use crate::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "raster dimensions must be positive, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::DimensionMismatch(format!(
            "{width}x{height} raster needs {} values, got {len}",
            width * height
        )));
    }
    Ok(())
}

/// Real-valued single-channel raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Checked pixel read.
    pub fn pixel_at(&self, x: usize, y: usize) -> Result<f64> {
        if x >= self.width || y >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.data[y * self.width + x])
    }

    #[inline]
    pub(crate) fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Bilinear interpolation with clamp-to-edge borders.
    ///
    /// Exact at integer coordinates and always within the range of the four
    /// contributing pixels.
    pub fn bilinear_sample(&self, x: f64, y: f64) -> f64 {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, max_x) };
        let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, max_y) };
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.at(x0, y0) + fx * (self.at(x1, y0) - self.at(x0, y0));
        let bottom = self.at(x0, y1) + fx * (self.at(x1, y1) - self.at(x0, y1));
        top + fy * (bottom - top)
    }

    /// Bilinear resize. Destination pixel centres map onto source pixel
    /// centres, so resizing to the same size is the identity.
    pub fn resize(&self, width: usize, height: usize) -> GrayImage {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        GrayImage::from_fn(width, height, |x, y| {
            self.bilinear_sample((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5)
        })
    }

    /// Separable Gaussian blur, clamp-to-edge.
    pub fn gaussian_blur(&self, sigma: f64) -> GrayImage {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil() as isize;
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);

        let (w, h) = (self.width as isize, self.height as isize);
        let mut tmp = vec![0.0; self.data.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, i) in kernel.iter().zip(-radius..=radius) {
                    let sx = (x + i).clamp(0, w - 1);
                    acc += k * self.data[(y * w + sx) as usize];
                }
                tmp[(y * w + x) as usize] = acc;
            }
        }
        let mut out = vec![0.0; self.data.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, i) in kernel.iter().zip(-radius..=radius) {
                    let sy = (y + i).clamp(0, h - 1);
                    acc += k * tmp[(sy * w + x) as usize];
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        GrayImage {
            width: self.width,
            height: self.height,
            data: out,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Round and clamp every value into a byte.
    pub fn to_bytes(&self) -> ByteImage {
        ByteImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }
}

/// 8-bit single-channel raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ByteImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "empty raster");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| f64::from(b)).collect(),
        }
    }
}

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len() / 3)?;
        if !data.len().is_multiple_of(3) {
            return Err(Error::DimensionMismatch(format!(
                "RGB payload length {} is not a multiple of 3",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Luma conversion, 0.299 R + 0.587 G + 0.114 B.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .chunks_exact(3)
                .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
                .collect(),
        }
    }
}

/// Dense displacement field: `u` horizontal, `v` vertical, in pixels per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_dims(width, height, u.len())?;
        check_dims(width, height, v.len())?;
        if u.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "flow components must be finite".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            u,
            v,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0)
    }

    pub fn uniform(width: usize, height: usize, u: f64, v: f64) -> Self {
        assert!(width > 0 && height > 0, "empty flow field");
        Self {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub(crate) fn from_parts(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), width * height);
        debug_assert_eq!(v.len(), width * height);
        Self {
            width,
            height,
            u,
            v,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    /// Swap direction of every vector.
    pub fn negated(&self) -> FlowField {
        Self::from_parts(
            self.width,
            self.height,
            self.u.iter().map(|c| -c).collect(),
            self.v.iter().map(|c| -c).collect(),
        )
    }

    /// Mean endpoint error against `other` over the window
    /// `[x0, x1) x [y0, y1)`.
    pub fn mean_epe_in(&self, other: &FlowField, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let (a, b) = self.at(x, y);
                let (c, d) = other.at(x, y);
                sum += ((a - c).powi(2) + (b - d).powi(2)).sqrt();
                n += 1;
            }
        }
        sum / n.max(1) as f64
    }

    /// Mean endpoint error over the central region obtained by trimming
    /// `margin` (a fraction of each side) from every border.
    pub fn interior_epe(&self, other: &FlowField, margin: f64) -> f64 {
        let mx = (self.width as f64 * margin).round() as usize;
        let my = (self.height as f64 * margin).round() as usize;
        self.mean_epe_in(other, mx, my, self.width - mx, self.height - my)
    }

    pub fn mean_magnitude(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| a.hypot(*b))
            .sum::<f64>()
            / self.u.len() as f64
    }
}

/// Bounds `[low, high]` of the linear byte rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleBounds {
    low: f64,
    high: f64,
}

impl RescaleBounds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !low.is_finite() || !high.is_finite() || low >= high {
            return Err(Error::InvalidParameter(format!(
                "rescale bounds need low < high, got ({low}, {high})"
            )));
        }
        Ok(Self { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }
}
