//! Multimodal (EEG + facial landmark) feature extraction and classification
//! for driver attention and short hazard-incident detection.
//!
//! The pipeline, module by module:
//!
//! - [`session`]: dataset manifest, EEG/landmark file formats, synthetic sessions
//! - [`preproc`]: band-pass filtering, artifact masking, interval segmentation
//! - [`info`]: histogram entropy, mutual information, pairwise channel features
//! - [`topomap`]: Welch band power and the RGB scalp raster
//! - [`face`]: landmark geometry features and per-trial statistics
//! - [`embed`]: 4096-dim image embedding providers
//! - [`learn`]: PCA, extreme learning machine, LSTM with SGDM
//! - [`eval`]: feature assembly, normalization, leave-one-subject-out evaluation

// NaN must fail the range checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod embed;
pub mod error;
pub mod eval;
pub mod face;
pub mod image;
pub mod info;
pub mod learn;
pub mod preproc;
pub mod session;
pub mod stats;
pub mod topomap;

pub use error::{Error, Result};
