//! Dataset schema: channel layout, EEG and landmark files, the session
//! manifest, and the seeded synthetic-session generator.

pub mod eeg;
pub mod landmarks;
pub mod layout;
pub mod manifest;
pub mod synth;

pub use eeg::{read_eeg_csv, write_eeg_csv, EegTrial, SAMPLE_RATE};
pub use landmarks::{read_landmarks_csv, write_landmarks_csv, FaceBox, LandmarkFrame, LandmarkTrack};
pub use layout::{ChannelLayout, CHANNEL_NAMES, N_CHANNELS};
pub use manifest::{
    load_eeg_trial, load_manifest, load_session, Dataset, SessionManifest, Task, TrialData, TrialEntry,
    TrialLabel,
};
pub use synth::{synth_dataset, SignalMode, SynthConfig};
