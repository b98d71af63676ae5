use crate::motion::ChannelPair;
use crate::net::{Gradients, Mode, Net};
use crate::pipeline::{Clip, PipelineParams};
use crate::{Error, Result, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub base_lr: f64,
    /// Iterations between learning-rate drops.
    pub lr_step: usize,
    pub lr_factor: f64,
    pub max_iter: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            base_lr: 0.005,
            lr_step: 5000,
            lr_factor: 0.1,
            max_iter: 15000,
            momentum: 0.9,
            weight_decay: 0.0005,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.base_lr, self.lr_factor, self.momentum, self.weight_decay];
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParameter("training rates must be non-negative".into()));
        }
        if self.batch_size == 0 || self.lr_step == 0 {
            return Err(Error::InvalidParameter(
                "batch size and learning-rate step must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Step schedule: `base_lr * lr_factor ^ floor(iter / lr_step)`.
pub fn lr_at(iter: usize, cfg: &TrainConfig) -> f64 {
    cfg.base_lr * cfg.lr_factor.powi((iter / cfg.lr_step) as i32)
}

/// Momentum SGD with L2 weight decay.
#[derive(Debug, Clone)]
pub struct Sgd {
    velocity: Vec<Vec<f64>>,
}

impl Sgd {
    pub fn new(net: &Net) -> Self {
        Self {
            velocity: net.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    /// `v = momentum * v - lr * (g + weight_decay * w)`, then `w += v`.
    pub fn step(&mut self, net: &mut Net, grads: &Gradients, iter: usize, cfg: &TrainConfig) -> Result<()> {
        let mut params = net.params_mut();
        if params.len() != grads.tensors.len()
            || params.len() != self.velocity.len()
            || params
                .iter()
                .zip(&grads.tensors)
                .zip(&self.velocity)
                .any(|((p, g), v)| p.len() != g.len() || p.len() != v.len())
        {
            return Err(Error::DimensionMismatch(
                "gradient shapes do not match the network parameters".into(),
            ));
        }
        let lr = lr_at(iter, cfg);
        for ((p, g), v) in params.iter_mut().zip(&grads.tensors).zip(&mut self.velocity) {
            for k in 0..p.len() {
                v[k] = cfg.momentum * v[k] - lr * (g[k] + cfg.weight_decay * p[k]);
                p[k] += v[k];
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub iter: usize,
    pub lr: f64,
    pub loss: f64,
}

/// Mini-batch training on class-balanced samples.
///
/// Each batch slot draws a class uniformly, then a clip of that class, a
/// random stack start and a random multi-scale crop. Returns the mean batch
/// loss of every iteration.
pub fn train<P: ChannelPair>(
    net: &mut Net,
    clips: &[Clip<P>],
    pipeline: &PipelineParams,
    cfg: &TrainConfig,
) -> Result<Vec<LossRecord>> {
    cfg.validate()?;
    if clips.is_empty() {
        return Err(Error::Insufficient {
            what: "training clips",
            needed: 1,
            available: 0,
        });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); net.classes()];
    for (i, clip) in clips.iter().enumerate() {
        if clip.class >= net.classes() {
            return Err(Error::InvalidParameter(format!(
                "clip `{}` has class {} but the network has {} classes",
                clip.id,
                clip.class,
                net.classes()
            )));
        }
        if clip.pairs.len() < pipeline.stack.stack_length {
            return Err(Error::Insufficient {
                what: "flow image pairs",
                needed: pipeline.stack.stack_length,
                available: clip.pairs.len(),
            });
        }
        by_class[clip.class].push(i);
    }
    by_class.retain(|c| !c.is_empty());

    let mut rng = Rng::new(cfg.seed);
    let mut sgd = Sgd::new(net);
    let mut curve = Vec::with_capacity(cfg.max_iter);
    for iter in 0..cfg.max_iter {
        let mut total = Gradients::zeros_like(net);
        let mut loss = 0.0;
        for _ in 0..cfg.batch_size {
            let members = &by_class[rng.uniform(by_class.len())?];
            let clip = &clips[members[rng.uniform(members.len())?]];
            let input = pipeline.train_input(&clip.pairs, &mut rng)?;
            let forward = net.forward(&input, Mode::Train(&mut rng))?;
            let (l, g) = net.backward(&forward, clip.class)?;
            loss += l;
            total.add(&g);
        }
        let n = cfg.batch_size as f64;
        total.scale(1.0 / n);
        curve.push(LossRecord {
            iter,
            lr: lr_at(iter, cfg),
            loss: loss / n,
        });
        sgd.step(net, &total, iter, cfg)?;
    }
    Ok(curve)
}
