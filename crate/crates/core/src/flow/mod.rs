//! Dense optical flow between consecutive frames.

mod block_match;
mod pyramid;
mod tvl1;

pub use block_match::block_match_flow;
pub use tvl1::{tvl1_energy, tvl1_flow, tvl1_flow_with_trace, Tvl1Params, MIN_LEVEL_SIDE};

use crate::{Error, FlowField, GrayImage, Result};

/// Flow fields of an `n`-frame clip: `n - 1` of them, in frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPairSeq {
    flows: Vec<FlowField>,
}

impl FlowPairSeq {
    pub fn new(flows: Vec<FlowField>) -> Result<Self> {
        if let Some(first) = flows.first() {
            let dims = (first.width(), first.height());
            if flows.iter().any(|f| (f.width(), f.height()) != dims) {
                return Err(Error::DimensionMismatch(
                    "flow fields of one clip must share dimensions".into(),
                ));
            }
        }
        Ok(Self { flows })
    }

    pub fn flows(&self) -> &[FlowField] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn into_inner(self) -> Vec<FlowField> {
        self.flows
    }
}

/// `flows[t] = tvl1_flow(frames[t], frames[t + 1])`.
pub fn video_flows(frames: &[GrayImage], params: &Tvl1Params) -> Result<FlowPairSeq> {
    if frames.len() < 2 {
        return Err(Error::Insufficient {
            what: "frames",
            needed: 2,
            available: frames.len(),
        });
    }
    let dims = (frames[0].width(), frames[0].height());
    if frames.iter().any(|f| (f.width(), f.height()) != dims) {
        return Err(Error::DimensionMismatch(
            "frames of one clip must share dimensions".into(),
        ));
    }
    let flows = frames
        .windows(2)
        .map(|pair| tvl1_flow(&pair[0], &pair[1], params))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowPairSeq { flows })
}
