use crate::Rng;

/// Activation shape, channels x height x width. Dense outputs are `(n, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(c: usize, h: usize, w: usize) -> Self {
        Self { c, h, w }
    }

    pub fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv {
    pub input: Shape,
    pub output: Shape,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    /// `[out][in][ky][kx]`
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Output indices `o` with `0 <= o * stride + k - pad < size`.
fn valid_range(k: usize, pad: usize, stride: usize, size: usize, out: usize) -> (usize, usize) {
    let lo = if k >= pad { 0 } else { (pad - k).div_ceil(stride) };
    // o * stride + k - pad <= size - 1
    let hi = if size + pad < k + 1 {
        0
    } else {
        ((size - 1 + pad - k) / stride + 1).min(out)
    };
    (lo.min(hi), hi)
}

impl Conv {
    pub fn new(input: Shape, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Option<Self> {
        if kernel == 0 || stride == 0 || input.h + 2 * padding < kernel || input.w + 2 * padding < kernel {
            return None;
        }
        let oh = (input.h + 2 * padding - kernel) / stride + 1;
        let ow = (input.w + 2 * padding - kernel) / stride + 1;
        Some(Self {
            input,
            output: Shape::new(out_channels, oh, ow),
            kernel,
            stride,
            padding,
            weights: vec![0.0; out_channels * input.c * kernel * kernel],
            bias: vec![0.0; out_channels],
        })
    }

    pub fn init(&mut self, rng: &mut Rng) {
        let fan_in = (self.input.c * self.kernel * self.kernel) as f64;
        let limit = (6.0 / fan_in).sqrt();
        self.weights.iter_mut().for_each(|w| *w = rng.range(-limit, limit));
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    fn widx(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.input.c + i) * self.kernel + ky) * self.kernel + kx
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let Shape { c: ic, h: ih, w: iw } = self.input;
        let Shape { c: oc, h: oh, w: ow } = self.output;
        let (s, p) = (self.stride, self.padding);
        let mut out = vec![0.0; oc * oh * ow];
        for o in 0..oc {
            let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
            plane.iter_mut().for_each(|v| *v = self.bias[o]);
            for i in 0..ic {
                let src = &x[i * ih * iw..(i + 1) * ih * iw];
                for ky in 0..self.kernel {
                    let (y0, y1) = valid_range(ky, p, s, ih, oh);
                    for kx in 0..self.kernel {
                        let (x0, x1) = valid_range(kx, p, s, iw, ow);
                        let wv = self.weights[self.widx(o, i, ky, kx)];
                        for oy in y0..y1 {
                            let iy = oy * s + ky - p;
                            let row = &src[iy * iw..(iy + 1) * iw];
                            let dst = &mut plane[oy * ow..(oy + 1) * ow];
                            if s == 1 {
                                let off = x0 + kx - p;
                                for (d, v) in dst[x0..x1].iter_mut().zip(&row[off..off + (x1 - x0)]) {
                                    *d += wv * v;
                                }
                            } else {
                                for ox in x0..x1 {
                                    dst[ox] += wv * row[ox * s + kx - p];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Returns the input gradient; parameter gradients are accumulated.
    pub fn backward(&self, x: &[f64], dout: &[f64], dw: &mut [f64], db: &mut [f64]) -> Vec<f64> {
        let Shape { c: ic, h: ih, w: iw } = self.input;
        let Shape { c: oc, h: oh, w: ow } = self.output;
        let (s, p) = (self.stride, self.padding);
        let mut dx = vec![0.0; ic * ih * iw];
        for o in 0..oc {
            let g = &dout[o * oh * ow..(o + 1) * oh * ow];
            db[o] += g.iter().sum::<f64>();
            for i in 0..ic {
                let src = &x[i * ih * iw..(i + 1) * ih * iw];
                let dsrc = &mut dx[i * ih * iw..(i + 1) * ih * iw];
                for ky in 0..self.kernel {
                    let (y0, y1) = valid_range(ky, p, s, ih, oh);
                    for kx in 0..self.kernel {
                        let (x0, x1) = valid_range(kx, p, s, iw, ow);
                        let widx = self.widx(o, i, ky, kx);
                        let wv = self.weights[widx];
                        let mut acc = 0.0;
                        for oy in y0..y1 {
                            let iy = oy * s + ky - p;
                            let grow = &g[oy * ow..(oy + 1) * ow];
                            for (ox, &go) in grow.iter().enumerate().take(x1).skip(x0) {
                                let ix = ox * s + kx - p;
                                acc += go * src[iy * iw + ix];
                                dsrc[iy * iw + ix] += wv * go;
                            }
                        }
                        dw[widx] += acc;
                    }
                }
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `[out][in]`
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn init(&mut self, rng: &mut Rng) {
        let limit = (6.0 / self.inputs as f64).sqrt();
        self.weights.iter_mut().for_each(|w| *w = rng.range(-limit, limit));
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    pub fn backward(&self, x: &[f64], dout: &[f64], dw: &mut [f64], db: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &g) in dout.iter().enumerate() {
            db[o] += g;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let drow = &mut dw[o * self.inputs..(o + 1) * self.inputs];
            for k in 0..self.inputs {
                drow[k] += g * x[k];
                dx[k] += g * row[k];
            }
        }
        dx
    }
}

/// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MaxPool {
    pub input: Shape,
    pub output: Shape,
}

impl MaxPool {
    pub fn new(input: Shape) -> Option<Self> {
        if input.h < 2 || input.w < 2 {
            return None;
        }
        Some(Self {
            input,
            output: Shape::new(input.c, input.h / 2, input.w / 2),
        })
    }

    /// Output and, per output element, the flat input index of its maximum.
    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let Shape { c, h, w } = self.input;
        let Shape { h: oh, w: ow, .. } = self.output;
        let mut out = Vec::with_capacity(self.output.len());
        let mut idx = Vec::with_capacity(self.output.len());
        for ch in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = ch * h * w + 2 * oy * w + 2 * ox;
                    for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                        let k = ch * h * w + (2 * oy + dy) * w + 2 * ox + dx;
                        if x[k] > x[best] {
                            best = k;
                        }
                    }
                    out.push(x[best]);
                    idx.push(best);
                }
            }
        }
        (out, idx)
    }

    pub fn backward(&self, idx: &[usize], dout: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.input.len()];
        for (&k, &g) in idx.iter().zip(dout) {
            dx[k] += g;
        }
        dx
    }
}
