use crate::net::{Mode, Net};
use crate::volume::InputVolume;
use crate::{Result, Rng};

/// Smallest magnitude used as the denominator of the relative error, so
/// gradients that are zero up to rounding are compared absolutely.
pub const GRADIENT_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_relative_error: f64,
    /// `(tensor, index)` where the largest error occurred.
    pub worst: (usize, usize),
    pub checked: usize,
}

/// Compare backpropagated gradients with central differences of step `step`
/// for every parameter. Dropout masks are replayed from `mask_seed`, so the
/// loss is the same smooth function for every perturbation.
pub fn gradient_check(net: &Net, input: &InputVolume, target: usize, mask_seed: u64, step: f64) -> Result<GradientCheck> {
    let loss = |n: &Net| -> Result<f64> {
        let f = n.forward(input, Mode::Train(&mut Rng::new(mask_seed)))?;
        Ok(-f.scores.scores()[target].ln())
    };
    let forward = net.forward(input, Mode::Train(&mut Rng::new(mask_seed)))?;
    let (_, grads) = net.backward(&forward, target)?;
    let mut probe = net.clone();
    let mut result = GradientCheck {
        max_relative_error: 0.0,
        worst: (0, 0),
        checked: 0,
    };
    for (t, analytic) in grads.tensors.iter().enumerate() {
        for (k, &a) in analytic.iter().enumerate() {
            let orig = probe.params_mut()[t][k];
            probe.params_mut()[t][k] = orig + step;
            let plus = loss(&probe)?;
            probe.params_mut()[t][k] = orig - step;
            let minus = loss(&probe)?;
            probe.params_mut()[t][k] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
            if err > result.max_relative_error {
                result.max_relative_error = err;
                result.worst = (t, k);
            }
            result.checked += 1;
        }
    }
    Ok(result)
}
