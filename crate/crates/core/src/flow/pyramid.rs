use crate::GrayImage;

/// Gaussian image pyramid; level 0 is the input.
pub(crate) struct Pyramid {
    levels: Vec<GrayImage>,
}

impl Pyramid {
    /// Build up to `max_levels` levels, stopping before either side would
    /// fall below `min_side`.
    pub(crate) fn build(img: &GrayImage, scale: f64, max_levels: usize, min_side: usize) -> Self {
        let sigma = 0.6 * (1.0 / (scale * scale) - 1.0).sqrt();
        let mut levels = vec![img.clone()];
        for k in 1..max_levels {
            let factor = scale.powi(k as i32);
            let w = (img.width() as f64 * factor).round() as usize;
            let h = (img.height() as f64 * factor).round() as usize;
            if w < min_side || h < min_side {
                break;
            }
            let prev = levels.last().expect("non-empty");
            levels.push(prev.gaussian_blur(sigma).resize(w, h));
        }
        Self { levels }
    }

    pub(crate) fn len(&self) -> usize {
        self.levels.len()
    }

    pub(crate) fn level(&self, k: usize) -> &GrayImage {
        &self.levels[k]
    }

    pub(crate) fn dims(&self, k: usize) -> (usize, usize) {
        (self.levels[k].width(), self.levels[k].height())
    }
}
