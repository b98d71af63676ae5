use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Per-class probabilities for one input or one video.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    /// Validates that scores are non-negative and sum to one.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidParameter("score vector is empty".into()));
        }
        if scores.iter().any(|&s| !s.is_finite() || s < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scores must be finite and non-negative: {scores:?}"
            )));
        }
        let sum: f64 = scores.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("scores sum to {sum}, not 1")));
        }
        Ok(Self { scores })
    }

    /// Scale non-negative weights so they sum to one.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if sum.is_nan() || sum <= 0.0 || raw.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize scores {raw:?}"
            )));
        }
        Ok(Self {
            scores: raw.into_iter().map(|s| s / sum).collect(),
        })
    }

    pub fn uniform(classes: usize) -> Self {
        assert!(classes > 0);
        Self {
            scores: vec![1.0 / classes as f64; classes],
        }
    }

    /// Numerically stable softmax.
    pub fn softmax(logits: &[f64]) -> Self {
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        Self {
            scores: exp.into_iter().map(|e| e / sum).collect(),
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn classes(&self) -> usize {
        self.scores.len()
    }

    /// Index of the largest score; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }
}
