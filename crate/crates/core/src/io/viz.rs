//! Colour-wheel rendering of flow fields for eyeballing.

use crate::motion::angle_degrees;
use crate::{FlowField, RgbImage};

/// Hue encodes direction, saturation encodes magnitude relative to
/// `max_magnitude` (the field's own maximum when `None`), value is 1.
pub fn flow_to_rgb(flow: &FlowField, max_magnitude: Option<f64>) -> RgbImage {
    let max = max_magnitude.unwrap_or_else(|| {
        flow.u()
            .iter()
            .zip(flow.v())
            .map(|(u, v)| u.hypot(*v))
            .fold(0.0, f64::max)
    });
    let mut data = Vec::with_capacity(3 * flow.u().len());
    for (&u, &v) in flow.u().iter().zip(flow.v()) {
        let hue = angle_degrees(u, v).rem_euclid(360.0);
        let sat = if max > 0.0 { (u.hypot(v) / max).min(1.0) } else { 0.0 };
        data.extend(hsv_to_rgb(hue, sat, 1.0));
    }
    RgbImage::new(flow.width(), flow.height(), data).expect("flow dims")
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|k| ((k + m) * 255.0).round() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn still_pixels_are_white() {
        let img = flow_to_rgb(&FlowField::zeros(2, 2), None);
        assert!(img.data().iter().all(|&b| b == 255));
    }

    #[test]
    fn rightward_motion_is_red() {
        let img = flow_to_rgb(&FlowField::uniform(1, 1, 2.0, 0.0), None);
        assert_eq!(img.data(), &[255, 0, 0]);
    }
}
