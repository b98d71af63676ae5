//! Random smooth textures for synthetic motion.

use crate::{GrayImage, Rng};

/// Uniform noise blurred by a Gaussian of width `sigma`, then stretched to
/// the full 0..=255 range.
pub fn random_texture(width: usize, height: usize, sigma: f64, rng: &mut Rng) -> GrayImage {
    let noise = GrayImage::from_fn(width, height, |_, _| rng.range(0.0, 255.0));
    let blurred = noise.gaussian_blur(sigma);
    let (lo, hi) = blurred.min_max();
    let span = (hi - lo).max(f64::EPSILON);
    GrayImage::from_fn(width, height, |x, y| 255.0 * (blurred.at(x, y) - lo) / span)
}

/// `img` translated by `(dx, dy)`: `out(x, y) = img(x - dx, y - dy)`,
/// clamp-to-edge. Integer shifts are exact copies.
pub fn translate(img: &GrayImage, dx: f64, dy: f64) -> GrayImage {
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        img.bilinear_sample(x as f64 - dx, y as f64 - dy)
    })
}
