//! EEG preprocessing: band-pass filtering, artifact masking, segmentation.

pub mod artifacts;
pub mod filter;
pub mod segment;

pub use artifacts::{reject_artifacts, CleanTrial, DEFAULT_Z_THRESH};
pub use filter::{bandpass_filter, BandPass, FilterSpec};
pub use segment::{segment_clean, segment_intervals};

use crate::error::Result;
use crate::session::eeg::EegTrial;

/// Filter then mask, the standard cleaning chain for one trial.
pub fn clean_trial(trial: &EegTrial, spec: &FilterSpec, z_thresh: f64) -> Result<CleanTrial> {
    let filtered = bandpass_filter(trial, spec)?;
    reject_artifacts(&filtered, z_thresh)
}
