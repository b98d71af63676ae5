//! Flow fields to 8-bit motion images.
//!
//! A flow field becomes either the classic pair of rescaled `x`/`y`
//! displacement images or a magnitude/orientation pair. The orientation is
//! zeroed wherever the rescaled magnitude byte falls below a threshold, which
//! suppresses the arbitrary angles of near-still pixels.

use crate::{ByteImage, FlowField, GrayImage, RescaleBounds, Result};

/// Linear map of `[low, high]` onto `0..=255`, clamped outside, rounded half up.
pub fn rescale_to_byte(value: f64, bounds: RescaleBounds) -> u8 {
    if value < bounds.low() {
        return 0;
    }
    if value > bounds.high() {
        return 255;
    }
    let scaled = 255.0 * (value - bounds.low()) / (bounds.high() - bounds.low());
    // NaN falls through both comparisons and saturates to 0 here
    (scaled + 0.5).floor() as u8
}

/// Per-pixel Euclidean length of the flow vector.
pub fn magnitude(flow: &FlowField) -> GrayImage {
    let data = flow
        .u()
        .iter()
        .zip(flow.v())
        .map(|(u, v)| (u * u + v * v).sqrt())
        .collect();
    GrayImage::new(flow.width(), flow.height(), data).expect("flow dims")
}

/// Four-quadrant angle of one vector in degrees, in `(-180, 180]`.
/// The zero vector maps to 0.
pub fn angle_degrees(u: f64, v: f64) -> f64 {
    if u == 0.0 && v == 0.0 {
        return 0.0;
    }
    let deg = v.atan2(u).to_degrees();
    if deg <= -180.0 {
        180.0
    } else {
        deg
    }
}

/// Per-pixel flow orientation in degrees, see [`angle_degrees`].
pub fn orientation(flow: &FlowField) -> GrayImage {
    let data = flow
        .u()
        .iter()
        .zip(flow.v())
        .map(|(&u, &v)| angle_degrees(u, v))
        .collect();
    GrayImage::new(flow.width(), flow.height(), data).expect("flow dims")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosParams {
    pub mag_bounds: RescaleBounds,
    pub ori_bounds: RescaleBounds,
    /// Orientation is kept only where the magnitude byte is at least this.
    pub mag_threshold: u8,
}

impl Default for MosParams {
    fn default() -> Self {
        Self {
            mag_bounds: RescaleBounds::new(-15.0, 15.0).expect("valid"),
            ori_bounds: RescaleBounds::new(-180.0, 180.0).expect("valid"),
            mag_threshold: 128,
        }
    }
}

/// Two same-sized byte images presented to the network as a channel pair.
pub trait ChannelPair {
    fn first(&self) -> &ByteImage;
    fn second(&self) -> &ByteImage;
}

/// Rescaled magnitude and filtered orientation of one frame transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MosPair {
    pub magnitude: ByteImage,
    pub orientation: ByteImage,
}

impl MosPair {
    pub fn new(magnitude: ByteImage, orientation: ByteImage) -> Result<Self> {
        same_dims(&magnitude, &orientation)?;
        Ok(Self {
            magnitude,
            orientation,
        })
    }
}

impl ChannelPair for MosPair {
    fn first(&self) -> &ByteImage {
        &self.magnitude
    }
    fn second(&self) -> &ByteImage {
        &self.orientation
    }
}

/// Rescaled horizontal and vertical displacement images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XyPair {
    pub flow_x: ByteImage,
    pub flow_y: ByteImage,
}

impl XyPair {
    pub fn new(flow_x: ByteImage, flow_y: ByteImage) -> Result<Self> {
        same_dims(&flow_x, &flow_y)?;
        Ok(Self { flow_x, flow_y })
    }
}

impl ChannelPair for XyPair {
    fn first(&self) -> &ByteImage {
        &self.flow_x
    }
    fn second(&self) -> &ByteImage {
        &self.flow_y
    }
}

fn same_dims(a: &ByteImage, b: &ByteImage) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(crate::Error::DimensionMismatch(format!(
            "channel pair is {}x{} and {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Magnitude byte and filtered orientation byte of a single vector.
pub fn mos_pixel(u: f64, v: f64, params: &MosParams) -> (u8, u8) {
    let mag = rescale_to_byte((u * u + v * v).sqrt(), params.mag_bounds);
    let theta = if mag < params.mag_threshold {
        0.0
    } else {
        angle_degrees(u, v)
    };
    (mag, rescale_to_byte(theta, params.ori_bounds))
}

pub fn mos_images(flow: &FlowField, params: &MosParams) -> MosPair {
    let (w, h) = (flow.width(), flow.height());
    let (mag, ori): (Vec<u8>, Vec<u8>) = flow
        .u()
        .iter()
        .zip(flow.v())
        .map(|(&u, &v)| mos_pixel(u, v, params))
        .unzip();
    MosPair {
        magnitude: ByteImage::new(w, h, mag).expect("flow dims"),
        orientation: ByteImage::new(w, h, ori).expect("flow dims"),
    }
}

pub fn xy_images(flow: &FlowField, bounds: RescaleBounds) -> XyPair {
    let (w, h) = (flow.width(), flow.height());
    let quantize = |c: &[f64]| {
        ByteImage::new(w, h, c.iter().map(|&x| rescale_to_byte(x, bounds)).collect())
            .expect("flow dims")
    };
    XyPair {
        flow_x: quantize(flow.u()),
        flow_y: quantize(flow.v()),
    }
}
