//! Visual-comfort assessment for stereoscopic retargeted images.
//!
//! The crate covers the whole pipeline: image and disparity I/O, block-matching
//! disparity estimation, the disparity and image-quality features, four
//! stereoscopic retargeting operators, ε-SVR pooling with repeated
//! cross-validation, and MOS computation from raw ratings.

pub mod cli;
pub mod corpus;
pub mod disparity;
pub mod error;
pub mod features;
pub mod imagecore;
pub mod model;
pub mod pipeline;
pub mod retarget;
pub mod synth;

pub use error::{Error, Result};
