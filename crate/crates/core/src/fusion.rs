//! Test-time prediction, late fusion of stream scores, and evaluation.

use crate::io::manifest::Manifest;
use crate::motion::ChannelPair;
use crate::net::Net;
use crate::pipeline::PipelineParams;
use crate::volume::InputVolume;
use crate::{ByteImage, Error, Result, ScoreVector};

/// Anything that maps one input volume to class probabilities.
pub trait Classifier {
    fn classify(&self, input: &InputVolume) -> Result<ScoreVector>;
}

impl Classifier for Net {
    fn classify(&self, input: &InputVolume) -> Result<ScoreVector> {
        self.predict(input)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoPrediction {
    pub video_id: String,
    pub scores: ScoreVector,
}

impl VideoPrediction {
    /// Highest-scoring class, lowest index on ties.
    pub fn predicted(&self) -> usize {
        self.scores.argmax()
    }
}

/// Average the scores of every test sample and crop of one video.
pub fn predict_video<C: Classifier, P: ChannelPair>(
    classifier: &C,
    video_id: &str,
    pairs: &[P],
    pipeline: &PipelineParams,
) -> Result<VideoPrediction> {
    let inputs = pipeline.test_inputs(pairs)?;
    let mut sum: Vec<f64> = Vec::new();
    for input in &inputs {
        let s = classifier.classify(input)?;
        if sum.is_empty() {
            sum = vec![0.0; s.classes()];
        } else if sum.len() != s.classes() {
            return Err(Error::DimensionMismatch("classifier changed class count".into()));
        }
        sum.iter_mut().zip(s.scores()).for_each(|(a, b)| *a += b);
    }
    Ok(VideoPrediction {
        video_id: video_id.to_string(),
        scores: ScoreVector::normalized(sum)?,
    })
}

/// Non-negative per-stream weights, at least one positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights(Vec<f64>);

impl FusionWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fusion weights must be non-negative with one positive, got {weights:?}"
            )));
        }
        Ok(Self(weights))
    }

    /// Equal weights.
    pub fn unweighted(streams: usize) -> Self {
        Self(vec![1.0; streams])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Weighted sum of stream scores, renormalized.
pub fn fuse(streams: &[ScoreVector], weights: &FusionWeights) -> Result<ScoreVector> {
    if streams.is_empty() || streams.len() != weights.0.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} streams but {} weights",
            streams.len(),
            weights.0.len()
        )));
    }
    let k = streams[0].classes();
    if streams.iter().any(|s| s.classes() != k) {
        return Err(Error::DimensionMismatch("streams disagree on class count".into()));
    }
    let mut sum = vec![0.0; k];
    for (s, w) in streams.iter().zip(&weights.0) {
        sum.iter_mut().zip(s.scores()).for_each(|(a, b)| *a += w * b);
    }
    ScoreVector::normalized(sum)
}

/// Fuse per-video predictions of several streams, matched by video id.
/// Output follows the order of the first stream.
pub fn fuse_predictions(streams: &[Vec<VideoPrediction>], weights: &FusionWeights) -> Result<Vec<VideoPrediction>> {
    let Some(first) = streams.first() else {
        return Err(Error::InvalidParameter("no streams to fuse".into()));
    };
    first
        .iter()
        .map(|p| {
            let scores: Vec<ScoreVector> = streams
                .iter()
                .map(|s| {
                    s.iter()
                        .find(|q| q.video_id == p.video_id)
                        .map(|q| q.scores.clone())
                        .ok_or_else(|| Error::UnknownVideo(p.video_id.clone()))
                })
                .collect::<Result<_>>()?;
            Ok(VideoPrediction {
                video_id: p.video_id.clone(),
                scores: fuse(&scores, weights)?,
            })
        })
        .collect()
}

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.classes..(truth + 1) * self.classes]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    /// One line per true class, comma-separated integer counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.classes {
            let row: Vec<String> = self.row(k).iter().map(|c| c.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Row-normalized heat image: each cell is `round(255 * count / row_sum)`.
    pub fn heat_image(&self) -> ByteImage {
        let mut data = Vec::with_capacity(self.counts.len());
        for k in 0..self.classes {
            let row = self.row(k);
            let sum: u64 = row.iter().sum();
            for &c in row {
                let v = if sum == 0 { 0.0 } else { 255.0 * c as f64 / sum as f64 };
                data.push(v.round() as u8);
            }
        }
        ByteImage::new(self.classes, self.classes, data).expect("square matrix")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Correct / total.
    pub accuracy: f64,
    /// Diagonal / row sum, `None` for classes without test videos.
    pub per_class: Vec<Option<f64>>,
    /// Mean of the defined per-class accuracies.
    pub class_mean: f64,
    pub confusion: ConfusionMatrix,
}

/// Score predictions against the manifest's labels.
pub fn evaluate(predictions: &[VideoPrediction], manifest: &Manifest) -> Result<EvalReport> {
    let k = manifest.class_count();
    let mut confusion = ConfusionMatrix::new(k);
    for p in predictions {
        let entry = manifest
            .find(&p.video_id)
            .ok_or_else(|| Error::UnknownVideo(p.video_id.clone()))?;
        if p.scores.classes() != k {
            return Err(Error::DimensionMismatch(format!(
                "prediction for `{}` has {} classes, manifest has {k}",
                p.video_id,
                p.scores.classes()
            )));
        }
        confusion.add(entry.class_index, p.predicted());
    }
    let total = confusion.total();
    if total == 0 {
        return Err(Error::Insufficient {
            what: "predictions",
            needed: 1,
            available: 0,
        });
    }
    let per_class: Vec<Option<f64>> = (0..k)
        .map(|c| {
            let sum: u64 = confusion.row(c).iter().sum();
            (sum > 0).then(|| confusion.get(c, c) as f64 / sum as f64)
        })
        .collect();
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    Ok(EvalReport {
        accuracy: confusion.trace() as f64 / total as f64,
        class_mean: defined.iter().sum::<f64>() / defined.len() as f64,
        per_class,
        confusion,
    })
}

/// Mean accuracy over dataset splits.
pub fn multi_split_average(accuracies: &[f64]) -> Result<f64> {
    if accuracies.is_empty() {
        return Err(Error::Insufficient {
            what: "splits",
            needed: 1,
            available: 0,
        });
    }
    Ok(accuracies.iter().sum::<f64>() / accuracies.len() as f64)
}
