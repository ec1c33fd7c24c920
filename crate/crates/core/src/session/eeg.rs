use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::session::layout::{CHANNEL_NAMES, N_CHANNELS};

/// Required acquisition rate.
pub const SAMPLE_RATE: f64 = 128.0;

/// Number of decimals written to EEG and landmark CSV files.
pub const CSV_DECIMALS: i32 = 3;

/// One EEG recording in canonical channel order.
///
/// Samples are stored channel-major: `channels[c][t]` is microvolts on
/// channel `c` at sample `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EegTrial {
    pub subject_id: String,
    pub trial_id: String,
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: f64,
    pub duration_s: f64,
}

pub fn expected_samples(duration_s: f64) -> usize {
    (duration_s * SAMPLE_RATE).round() as usize
}

impl EegTrial {
    /// Builds a validated trial. `duration_s` must be at least one second.
    pub fn new(
        subject_id: impl Into<String>,
        trial_id: impl Into<String>,
        channels: Vec<Vec<f64>>,
        duration_s: f64,
    ) -> Result<Self> {
        if !(duration_s >= 1.0) {
            return Err(Error::Config(format!(
                "trial duration {duration_s} s is below the 1 s minimum"
            )));
        }
        Self::from_parts(subject_id.into(), trial_id.into(), channels, duration_s)
    }

    /// Like [`EegTrial::new`] without the one-second minimum; used for
    /// interval segments.
    pub(crate) fn from_parts(
        subject_id: String,
        trial_id: String,
        channels: Vec<Vec<f64>>,
        duration_s: f64,
    ) -> Result<Self> {
        if channels.len() != N_CHANNELS {
            return Err(Error::Shape {
                expected: format!("{N_CHANNELS} channels"),
                found: format!("{} channels", channels.len()),
            });
        }
        let n = channels[0].len();
        let expected = expected_samples(duration_s);
        for (c, ch) in channels.iter().enumerate() {
            if ch.len() != expected {
                return Err(Error::SampleCount {
                    expected,
                    found: ch.len(),
                });
            }
            if let Some(row) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row,
                    channel: CHANNEL_NAMES[c].to_string(),
                });
            }
        }
        debug_assert_eq!(n, expected);
        Ok(Self {
            subject_id,
            trial_id,
            channels,
            sample_rate: SAMPLE_RATE,
            duration_s,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Same metadata with replaced channel data of identical shape.
    pub fn with_channels(&self, channels: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(channels.len(), N_CHANNELS);
        debug_assert!(channels.iter().all(|c| c.len() == self.n_samples()));
        Self {
            channels,
            ..self.clone()
        }
    }
}

/// Reads an EEG CSV (header of 14 channel names in any order) and returns
/// the samples in canonical channel order.
pub fn read_eeg_csv(
    path: &Path,
    subject_id: &str,
    trial_id: &str,
    duration_s: f64,
) -> Result<EegTrial> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();

    let mut column_for = [usize::MAX; N_CHANNELS];
    let mut unexpected = Vec::new();
    for (col, h) in headers.iter().enumerate() {
        match CHANNEL_NAMES.iter().position(|n| *n == h) {
            Some(c) if column_for[c] == usize::MAX => column_for[c] = col,
            Some(_) => unexpected.push(format!("{h} (duplicate)")),
            None => unexpected.push(h.to_string()),
        }
    }
    let missing: Vec<String> = column_for
        .iter()
        .zip(CHANNEL_NAMES)
        .filter(|(c, _)| **c == usize::MAX)
        .map(|(_, n)| n.to_string())
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        return Err(Error::ChannelSet {
            missing,
            unexpected,
        });
    }

    let mut channels = vec![Vec::new(); N_CHANNELS];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != N_CHANNELS {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: row + 2,
                msg: format!("expected {N_CHANNELS} fields, found {}", rec.len()),
            });
        }
        for (c, &col) in column_for.iter().enumerate() {
            let field = &rec[col];
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: row + 2,
                msg: format!("cannot parse `{field}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    channel: CHANNEL_NAMES[c].to_string(),
                });
            }
            channels[c].push(v);
        }
    }
    EegTrial::new(subject_id, trial_id, channels, duration_s)
}

/// Writes samples in canonical column order with fixed precision.
pub fn write_eeg_csv(path: &Path, trial: &EegTrial) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", CHANNEL_NAMES.join(",")).map_err(io)?;
    let mut line = String::with_capacity(N_CHANNELS * 10);
    for t in 0..trial.n_samples() {
        line.clear();
        for c in 0..N_CHANNELS {
            if c > 0 {
                line.push(',');
            }
            push_fixed(&mut line, trial.channels[c][t]);
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Rounds to the CSV precision so in-memory values equal what a
/// write/read cycle produces.
pub fn quantize(v: f64) -> f64 {
    let scale = 10f64.powi(CSV_DECIMALS);
    let q = (v * scale).round() / scale;
    // avoid "-0.000" in files
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

pub(crate) fn push_fixed(out: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(out, "{:.*}", CSV_DECIMALS as usize, v);
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_trial(seconds: f64) -> EegTrial {
        let n = expected_samples(seconds);
        let channels = (0..N_CHANNELS)
            .map(|c| (0..n).map(|t| quantize((t as f64 * 0.37 + c as f64).sin() * 20.0)).collect())
            .collect();
        EegTrial::new("s01", "t01", channels, seconds).unwrap()
    }

    #[test]
    fn two_second_file_has_256_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let trial = ramp_trial(2.0);
        write_eeg_csv(&p, &trial).unwrap();
        let back = read_eeg_csv(&p, "s01", "t01", 2.0).unwrap();
        assert_eq!(back.n_samples(), 256);
        assert_eq!(back, trial);
    }

    #[test]
    fn permuted_columns_are_reordered() {
        let dir = tempfile::tempdir().unwrap();
        let trial = ramp_trial(1.0);
        let p = dir.path().join("perm.csv");
        let order: Vec<usize> = vec![13, 0, 5, 2, 7, 1, 12, 3, 9, 4, 11, 6, 10, 8];
        let mut s = order.iter().map(|&c| CHANNEL_NAMES[c]).collect::<Vec<_>>().join(",");
        s.push('\n');
        for t in 0..trial.n_samples() {
            let row: Vec<String> = order.iter().map(|&c| format!("{:.3}", trial.channels[c][t])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        std::fs::write(&p, s).unwrap();
        let back = read_eeg_csv(&p, "s01", "t01", 1.0).unwrap();
        assert_eq!(back.channels, trial.channels);
    }

    #[test]
    fn thirteen_columns_names_missing_channel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short.csv");
        let names: Vec<&str> = CHANNEL_NAMES.iter().copied().filter(|n| *n != "O2").collect();
        let mut s = names.join(",");
        s.push('\n');
        for _ in 0..128 {
            s.push_str(&vec!["0.0"; 13].join(","));
            s.push('\n');
        }
        std::fs::write(&p, s).unwrap();
        match read_eeg_csv(&p, "s", "t", 1.0) {
            Err(Error::ChannelSet { missing, .. }) => assert_eq!(missing, vec!["O2".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duration_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_eeg_csv(&p, &ramp_trial(2.0)).unwrap();
        assert!(matches!(
            read_eeg_csv(&p, "s", "t", 3.0),
            Err(Error::SampleCount { expected: 384, found: 256 })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nan.csv");
        let mut s = CHANNEL_NAMES.join(",");
        s.push('\n');
        for t in 0..128 {
            let mut row = vec!["1.0"; 14];
            if t == 5 {
                row[3] = "NaN";
            }
            s.push_str(&row.join(","));
            s.push('\n');
        }
        std::fs::write(&p, s).unwrap();
        assert!(matches!(read_eeg_csv(&p, "s", "t", 1.0), Err(Error::NonFinite { row: 5, .. })));
    }
}
