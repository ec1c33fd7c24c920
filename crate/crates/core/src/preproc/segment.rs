use crate::error::{Error, Result};
use crate::preproc::artifacts::CleanTrial;
use crate::session::eeg::EegTrial;

/// Samples per segment when `interval_s` divides the trial into whole
/// segments (to within one sample); otherwise an error.
pub fn samples_per_interval(n_samples: usize, sample_rate: f64, interval_s: f64) -> Result<usize> {
    let duration_s = n_samples as f64 / sample_rate;
    let err = || Error::NonDivisibleInterval {
        interval_s,
        duration_s,
    };
    if !(interval_s > 0.0) {
        return Err(err());
    }
    let per = (interval_s * sample_rate).round() as usize;
    if per == 0 || !n_samples.is_multiple_of(per) {
        return Err(err());
    }
    let count = n_samples / per;
    if ((count as f64) * interval_s * sample_rate - n_samples as f64).abs() >= 1.0 {
        return Err(err());
    }
    Ok(per)
}

/// Splits a trial into contiguous, non-overlapping segments of `interval_s`.
/// Segment ids are `<trial_id>#<k>`.
pub fn segment_intervals(trial: &EegTrial, interval_s: f64) -> Result<Vec<EegTrial>> {
    let n = trial.n_samples();
    let per = samples_per_interval(n, trial.sample_rate, interval_s)?;
    (0..n / per)
        .map(|k| {
            let channels = trial.channels.iter().map(|c| c[k * per..(k + 1) * per].to_vec()).collect();
            EegTrial::from_parts(
                trial.subject_id.clone(),
                format!("{}#{k}", trial.trial_id),
                channels,
                per as f64 / trial.sample_rate,
            )
        })
        .collect()
}

/// Segments a masked trial, carrying the mask along.
pub fn segment_clean(trial: &CleanTrial, interval_s: f64) -> Result<Vec<CleanTrial>> {
    let segs = segment_intervals(&trial.trial, interval_s)?;
    let per = segs.first().map_or(0, EegTrial::n_samples);
    Ok(segs
        .into_iter()
        .enumerate()
        .map(|(k, s)| CleanTrial::from_mask(s, trial.rejected_mask[k * per..(k + 1) * per].to_vec()))
        .collect())
}
