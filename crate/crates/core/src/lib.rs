//! Magnitude-orientation motion images for action recognition.
//!
//! The crate covers the whole temporal-stream data path: dense TV-L1 optical
//! flow between consecutive frames, conversion of each flow field into an
//! 8-bit magnitude image and a magnitude-filtered orientation image, stacking
//! of consecutive image pairs into network inputs, crop/flip augmentation,
//! a small from-scratch convolutional classifier, and test-time averaging
//! with late fusion of several streams.
//!
//! ```
//! use mos::{motion, FlowField};
//!
//! // one pixel moving 3 px/frame to the right
//! let flow = FlowField::uniform(1, 1, 3.0, 0.0);
//! let pair = motion::mos_images(&flow, &motion::MosParams::default());
//! assert_eq!(pair.magnitude.data(), &[153]);
//! assert_eq!(pair.orientation.data(), &[128]);
//! ```

mod error;
mod score;

pub mod augment;
pub mod flow;
pub mod fusion;
pub mod image;
pub mod io;
pub mod motion;
pub mod net;
pub mod pipeline;
pub mod rng;
pub mod texture;
pub mod volume;

pub use error::{Error, Result};
pub use image::{ByteImage, FlowField, GrayImage, RescaleBounds, RgbImage};
pub use rng::Rng;
pub use score::ScoreVector;

/// The guide's chapters, compiled as doctests so their snippets stay in
/// sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/mos.md")]
    mod mos {}
    #[doc = include_str!("../../../book/src/volumes.md")]
    mod volumes {}
    #[doc = include_str!("../../../book/src/augmentation.md")]
    mod augmentation {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
