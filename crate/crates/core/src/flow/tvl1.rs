//! Coarse-to-fine TV-L1 optical flow.
//!
//! The solver alternates two sub-problems per warp: a point-wise
//! soft-threshold on the linearized L1 data term for an auxiliary field `v`,
//! and a ROF denoising of `v` (Chambolle dual projection) for the flow `u`.
//! Each flow component carries its own dual field.

use crate::flow::pyramid::Pyramid;
use crate::{Error, FlowField, GrayImage, Result};

const GRAD_IS_ZERO: f64 = 1e-10;

/// Coarsest pyramid level is never smaller than this on either side.
pub const MIN_LEVEL_SIDE: usize = 16;

/// Solver parameters. Intensities are taken on the 8-bit scale (0..=255),
/// which is what `lambda` is tuned for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tvl1Params {
    /// Weight of the L1 data term.
    pub lambda: f64,
    /// Coupling between the flow and the auxiliary field.
    pub tv_theta: f64,
    /// Dual step.
    pub tau: f64,
    pub pyramid_scale: f64,
    pub levels: usize,
    pub warps_per_level: usize,
    /// Dual-projection steps per denoising pass.
    pub inner_iterations: usize,
    /// Cap on threshold/denoise alternations per warp.
    pub outer_iterations: usize,
    /// Alternations stop once the RMS flow update drops below this.
    pub stop_epsilon: f64,
}

impl Default for Tvl1Params {
    fn default() -> Self {
        Self {
            lambda: 0.15,
            tv_theta: 0.3,
            tau: 0.25,
            pyramid_scale: 0.5,
            levels: 5,
            warps_per_level: 5,
            inner_iterations: 10,
            outer_iterations: 10,
            stop_epsilon: 0.01,
        }
    }
}

impl Tvl1Params {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.lambda > 0.0 && self.tv_theta > 0.0 && self.tau > 0.0 && self.stop_epsilon > 0.0) {
            return bad("lambda, tv_theta, tau and stop_epsilon must be positive".into());
        }
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return bad(format!("pyramid_scale {} not in (0, 1)", self.pyramid_scale));
        }
        if self.levels == 0
            || self.warps_per_level == 0
            || self.inner_iterations == 0
            || self.outer_iterations == 0
        {
            return bad("levels and iteration counts must be at least 1".into());
        }
        if self.tau * self.tv_theta > 0.25 {
            return bad(format!(
                "tau * tv_theta = {} exceeds 0.25",
                self.tau * self.tv_theta
            ));
        }
        Ok(())
    }
}

/// Dense TV-L1 flow from `prev` to `next`: `next(x + flow(x)) ~ prev(x)`.
pub fn tvl1_flow(prev: &GrayImage, next: &GrayImage, params: &Tvl1Params) -> Result<FlowField> {
    solve(prev, next, params, false).map(|(flow, _)| flow)
}

/// Same as [`tvl1_flow`], also returning the TV-L1 energy of the finest
/// level after each of its warps.
pub fn tvl1_flow_with_trace(
    prev: &GrayImage,
    next: &GrayImage,
    params: &Tvl1Params,
) -> Result<(FlowField, Vec<f64>)> {
    solve(prev, next, params, true)
}

/// `lambda * sum |next(x + flow) - prev(x)| + sum (|grad u| + |grad v|)`.
pub fn tvl1_energy(prev: &GrayImage, next: &GrayImage, flow: &FlowField, lambda: f64) -> f64 {
    let (w, h) = (prev.width(), prev.height());
    let warped = warp(next, flow.u(), flow.v());
    let data: f64 = warped
        .iter()
        .zip(prev.data())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let mut tv = 0.0;
    for field in [flow.u(), flow.v()] {
        let (gx, gy) = forward_gradient(field, w, h);
        tv += gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).sum::<f64>();
    }
    lambda * data + tv
}

fn solve(
    prev: &GrayImage,
    next: &GrayImage,
    params: &Tvl1Params,
    trace: bool,
) -> Result<(FlowField, Vec<f64>)> {
    params.validate()?;
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(Error::DimensionMismatch(format!(
            "frames are {}x{} and {}x{}",
            prev.width(),
            prev.height(),
            next.width(),
            next.height()
        )));
    }
    let (w, h) = (prev.width(), prev.height());
    let is_flat = |img: &GrayImage| {
        let (lo, hi) = img.min_max();
        hi - lo == 0.0
    };
    if is_flat(prev) && is_flat(next) {
        return Ok((FlowField::zeros(w, h), Vec::new()));
    }

    let prev_pyr = Pyramid::build(prev, params.pyramid_scale, params.levels, MIN_LEVEL_SIDE);
    let next_pyr = Pyramid::build(next, params.pyramid_scale, prev_pyr.len(), MIN_LEVEL_SIDE);

    let coarsest = prev_pyr.len() - 1;
    let (cw, ch) = prev_pyr.dims(coarsest);
    let mut u1 = vec![0.0; cw * ch];
    let mut u2 = vec![0.0; cw * ch];
    let mut energies = Vec::new();

    for level in (0..prev_pyr.len()).rev() {
        let i0 = prev_pyr.level(level);
        let i1 = next_pyr.level(level);
        let record = trace && level == 0;
        let mut level_solver = LevelSolver::new(i0, i1, params);
        for _ in 0..params.warps_per_level {
            level_solver.warp_iteration(&mut u1, &mut u2);
            if record {
                let flow = FlowField::from_parts(w, h, u1.clone(), u2.clone());
                energies.push(tvl1_energy(prev, next, &flow, params.lambda));
            }
        }
        if level > 0 {
            let (fw, fh) = prev_pyr.dims(level - 1);
            let (lw, lh) = prev_pyr.dims(level);
            u1 = upsample(&u1, lw, lh, fw, fh, fw as f64 / lw as f64);
            u2 = upsample(&u2, lw, lh, fw, fh, fh as f64 / lh as f64);
        }
    }

    for c in u1.iter_mut().chain(u2.iter_mut()) {
        if !c.is_finite() {
            *c = 0.0;
        }
    }
    Ok((FlowField::from_parts(w, h, u1, u2), energies))
}

/// State carried across the warps of one pyramid level.
struct LevelSolver<'a> {
    i0: &'a GrayImage,
    i1: &'a GrayImage,
    params: &'a Tvl1Params,
    // dual fields, (x, y) parts for each flow component
    p11: Vec<f64>,
    p12: Vec<f64>,
    p21: Vec<f64>,
    p22: Vec<f64>,
}

impl<'a> LevelSolver<'a> {
    fn new(i0: &'a GrayImage, i1: &'a GrayImage, params: &'a Tvl1Params) -> Self {
        let n = i0.width() * i0.height();
        Self {
            i0,
            i1,
            params,
            p11: vec![0.0; n],
            p12: vec![0.0; n],
            p21: vec![0.0; n],
            p22: vec![0.0; n],
        }
    }

    fn warp_iteration(&mut self, u1: &mut [f64], u2: &mut [f64]) {
        let (w, h) = (self.i0.width(), self.i0.height());
        let n = w * h;
        let lt = self.params.lambda * self.params.tv_theta;
        let theta = self.params.tv_theta;
        let taut = self.params.tau / theta;

        let warped = warp(self.i1, u1, u2);
        let (gx, gy) = central_gradient(&warped, w, h);
        let grad: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * a + b * b).collect();
        let rho_c: Vec<f64> = (0..n)
            .map(|i| warped[i] - gx[i] * u1[i] - gy[i] * u2[i] - self.i0.data()[i])
            .collect();

        let mut v1 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut div1 = vec![0.0; n];
        let mut div2 = vec![0.0; n];
        let stop = self.params.stop_epsilon * self.params.stop_epsilon;

        for _ in 0..self.params.outer_iterations {
            // soft threshold on the linearized residual
            for i in 0..n {
                let rho = rho_c[i] + gx[i] * u1[i] + gy[i] * u2[i];
                let (d1, d2) = if rho < -lt * grad[i] {
                    (lt * gx[i], lt * gy[i])
                } else if rho > lt * grad[i] {
                    (-lt * gx[i], -lt * gy[i])
                } else if grad[i] < GRAD_IS_ZERO {
                    (0.0, 0.0)
                } else {
                    let f = -rho / grad[i];
                    (f * gx[i], f * gy[i])
                };
                v1[i] = u1[i] + d1;
                v2[i] = u2[i] + d2;
            }

            let mut change = 0.0;
            for inner in 0..self.params.inner_iterations {
                divergence(&self.p11, &self.p12, w, h, &mut div1);
                divergence(&self.p21, &self.p22, w, h, &mut div2);
                let last = inner + 1 == self.params.inner_iterations;
                for i in 0..n {
                    let a = v1[i] + theta * div1[i];
                    let b = v2[i] + theta * div2[i];
                    if last {
                        change += (a - u1[i]).powi(2) + (b - u2[i]).powi(2);
                    }
                    u1[i] = a;
                    u2[i] = b;
                }
                dual_step(u1, w, h, taut, &mut self.p11, &mut self.p12);
                dual_step(u2, w, h, taut, &mut self.p21, &mut self.p22);
            }
            if change / n as f64 <= stop {
                break;
            }
        }
    }
}

fn warp(img: &GrayImage, u1: &[f64], u2: &[f64]) -> Vec<f64> {
    let w = img.width();
    let mut out = Vec::with_capacity(u1.len());
    for (i, (a, b)) in u1.iter().zip(u2).enumerate() {
        let x = (i % w) as f64;
        let y = (i / w) as f64;
        out.push(img.bilinear_sample(x + a, y + b));
    }
    out
}

/// Central differences with clamp-to-edge borders.
fn central_gradient(f: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            gx[y * w + x] = 0.5 * (f[y * w + xp] - f[y * w + xm]);
            gy[y * w + x] = 0.5 * (f[yp * w + x] - f[ym * w + x]);
        }
    }
    (gx, gy)
}

/// Forward differences, zero on the last column/row.
fn forward_gradient(f: &[f64], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                gx[i] = f[i + 1] - f[i];
            }
            if y + 1 < h {
                gy[i] = f[i + w] - f[i];
            }
        }
    }
    (gx, gy)
}

/// Negative adjoint of [`forward_gradient`].
fn divergence(px: &[f64], py: &[f64], w: usize, h: usize, out: &mut [f64]) {
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let dx = if w == 1 {
                0.0
            } else if x == 0 {
                px[i]
            } else if x + 1 == w {
                -px[i - 1]
            } else {
                px[i] - px[i - 1]
            };
            let dy = if h == 1 {
                0.0
            } else if y == 0 {
                py[i]
            } else if y + 1 == h {
                -py[i - w]
            } else {
                py[i] - py[i - w]
            };
            out[i] = dx + dy;
        }
    }
}

fn dual_step(u: &[f64], w: usize, h: usize, taut: f64, px: &mut [f64], py: &mut [f64]) {
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let ux = if x + 1 < w { u[i + 1] - u[i] } else { 0.0 };
            let uy = if y + 1 < h { u[i + w] - u[i] } else { 0.0 };
            let norm = 1.0 + taut * ux.hypot(uy);
            px[i] = (px[i] + taut * ux) / norm;
            py[i] = (py[i] + taut * uy) / norm;
        }
    }
}

fn upsample(f: &[f64], w: usize, h: usize, nw: usize, nh: usize, factor: f64) -> Vec<f64> {
    let img = GrayImage::new(w, h, f.to_vec()).expect("level dims");
    img.resize(nw, nh).into_data().into_iter().map(|c| c * factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        Tvl1Params::default().validate().unwrap();
    }

    #[test]
    fn rejects_unstable_step() {
        let p = Tvl1Params {
            tau: 1.0,
            tv_theta: 0.3,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = Tvl1Params {
            pyramid_scale: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn divergence_is_negative_adjoint_of_gradient() {
        let (w, h) = (5, 4);
        let f: Vec<f64> = (0..w * h).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let px: Vec<f64> = (0..w * h).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let py: Vec<f64> = (0..w * h).map(|i| ((i * 5) % 9) as f64 - 4.0).collect();
        let (gx, gy) = forward_gradient(&f, w, h);
        let mut div = vec![0.0; w * h];
        divergence(&px, &py, w, h, &mut div);
        let lhs: f64 = (0..w * h).map(|i| gx[i] * px[i] + gy[i] * py[i]).sum();
        let rhs: f64 = -(0..w * h).map(|i| f[i] * div[i]).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn constant_frames_give_zero_flow() {
        let a = GrayImage::filled(20, 20, 30.0);
        let b = GrayImage::filled(20, 20, 90.0);
        let flow = tvl1_flow(&a, &b, &Tvl1Params::default()).unwrap();
        assert!(flow.u().iter().chain(flow.v()).all(|&c| c == 0.0));
    }

    #[test]
    fn mismatched_frames_rejected() {
        let a = GrayImage::filled(20, 20, 0.0);
        let b = GrayImage::filled(21, 20, 0.0);
        assert!(matches!(
            tvl1_flow(&a, &b, &Tvl1Params::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tiny_frames_use_a_single_level() {
        let a = GrayImage::from_fn(8, 8, |x, y| ((x * 3 + y * 5) % 7) as f64 * 30.0);
        let flow = tvl1_flow(&a, &a, &Tvl1Params::default()).unwrap();
        assert_eq!((flow.width(), flow.height()), (8, 8));
        assert!(flow.mean_magnitude() < 0.05);
    }
}
