//! Histogram estimates of entropy, mutual information and conditional
//! entropy, and the all-pairs channel feature vector built from them.
//!
//! All quantities are in bits. Entropies are summed over the sorted list of
//! cell terms so that transposing a joint table leaves every result
//! bit-identical, which makes `I(X;Y) == I(Y;X)` exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preproc::CleanTrial;
use crate::session::layout::{CHANNEL_NAMES, N_CHANNELS};

/// Minimum number of (unmasked) samples for a histogram estimate.
pub const MIN_SAMPLES: usize = 32;

/// Number of unordered channel pairs, C(14, 2).
pub const N_PAIRS: usize = N_CHANNELS * (N_CHANNELS - 1) / 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub n_bins: usize,
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        Self { n_bins: 8 }
    }
}

impl DiscretizationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::Config(format!("n_bins must be >= 2, got {}", self.n_bins)));
        }
        Ok(())
    }

    pub fn max_entropy(&self) -> f64 {
        (self.n_bins as f64).log2()
    }
}

/// Which pairwise quantity populates the channel-pair features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMeasure {
    /// `H(ch_j | ch_i)` for `i < j`.
    #[default]
    ConditionalEntropy,
    /// Symmetric `I(ch_i; ch_j)`.
    MutualInformation,
}

/// Equal-width bin index of every sample, range taken from the data.
/// Errors on a constant sequence.
pub fn bin_indices(x: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return Err(Error::DegenerateChannel);
    }
    let scale = n_bins as f64 / (hi - lo);
    Ok(x
        .iter()
        .map(|&v| (((v - lo) * scale) as usize).min(n_bins - 1))
        .collect())
}

/// Row-major joint probability table, `p[bx * n_bins + by]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub n_bins: usize,
    pub p: Vec<f64>,
}

impl JointTable {
    pub fn from_bins(bx: &[usize], by: &[usize], n_bins: usize) -> Self {
        let mut counts = vec![0u64; n_bins * n_bins];
        for (&a, &b) in bx.iter().zip(by) {
            counts[a * n_bins + b] += 1;
        }
        let n = bx.len() as f64;
        Self {
            n_bins,
            p: counts.into_iter().map(|c| c as f64 / n).collect(),
        }
    }

    pub fn cell(&self, bx: usize, by: usize) -> f64 {
        self.p[bx * self.n_bins + by]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.n_bins)
            .map(|i| self.p[i * self.n_bins..(i + 1) * self.n_bins].iter().sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.n_bins)
            .map(|j| (0..self.n_bins).map(|i| self.p[i * self.n_bins + j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n_bins;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p[j * n + i] = self.p[i * n + j];
            }
        }
        Self { n_bins: n, p }
    }

    /// `(H(X), H(Y), H(X,Y))`.
    pub fn entropies(&self) -> (f64, f64, f64) {
        (
            entropy_unchecked(&self.marginal_x()),
            entropy_unchecked(&self.marginal_y()),
            entropy_unchecked(&self.p),
        )
    }

    /// `H(X) + H(Y) - H(X,Y)`, clamped to `[0, min(H(X), H(Y))]`.
    pub fn mutual_information(&self) -> f64 {
        let (hx, hy, hxy) = self.entropies();
        (hx + hy - hxy).clamp(0.0, hx.min(hy))
    }

    /// `H(Y|X) = H(Y) - I(X;Y)`.
    pub fn conditional_entropy(&self) -> f64 {
        let (_, hy, _) = self.entropies();
        hy - self.mutual_information()
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::TooShort {
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    Ok(())
}

pub fn joint_histogram(x: &[f64], y: &[f64], spec: &DiscretizationSpec) -> Result<JointTable> {
    spec.validate()?;
    check_lengths(x, y)?;
    let bx = bin_indices(x, spec.n_bins)?;
    let by = bin_indices(y, spec.n_bins)?;
    Ok(JointTable::from_bins(&bx, &by, spec.n_bins))
}

fn entropy_unchecked(p: &[f64]) -> f64 {
    let mut terms: Vec<f64> = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().max(0.0)
}

/// Shannon entropy in bits with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64> {
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidProbability(format!("entry {v} is negative or NaN")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("entries sum to {total}")));
    }
    Ok(entropy_unchecked(p))
}

pub fn mutual_information(x: &[f64], y: &[f64], spec: &DiscretizationSpec) -> Result<f64> {
    Ok(joint_histogram(x, y, spec)?.mutual_information())
}

/// `H(Y|X)` in bits.
pub fn conditional_entropy(x: &[f64], y: &[f64], spec: &DiscretizationSpec) -> Result<f64> {
    Ok(joint_histogram(x, y, spec)?.conditional_entropy())
}

/// Canonical unordered pairs `(i, j)`, `i < j`.
pub fn pair_index() -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(N_PAIRS);
    for i in 0..N_CHANNELS {
        for j in i + 1..N_CHANNELS {
            v.push((i, j));
        }
    }
    v
}

pub fn pair_names(measure: PairMeasure) -> Vec<String> {
    pair_index()
        .into_iter()
        .map(|(i, j)| match measure {
            PairMeasure::ConditionalEntropy => format!("H({}|{})", CHANNEL_NAMES[j], CHANNEL_NAMES[i]),
            PairMeasure::MutualInformation => format!("I({};{})", CHANNEL_NAMES[i], CHANNEL_NAMES[j]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatureVector {
    pub values: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
}

/// One value per unordered channel pair over the unmasked rows of a trial.
///
/// A constant channel yields `log2(n_bins)` for its pairs under the
/// conditional-entropy measure (0 under mutual information).
pub fn pairwise_features(
    trial: &CleanTrial,
    spec: &DiscretizationSpec,
    measure: PairMeasure,
) -> Result<PairFeatureVector> {
    spec.validate()?;
    if !trial.is_usable() {
        return Err(Error::Unusable {
            ratio: trial.rejection_ratio,
        });
    }
    let kept: Vec<Vec<f64>> = (0..N_CHANNELS).map(|c| trial.kept(c)).collect();
    let n = kept[0].len();
    if n < MIN_SAMPLES {
        return Err(Error::TooShort {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    let bins: Vec<Option<Vec<usize>>> = kept
        .iter()
        .enumerate()
        .map(|(c, x)| match bin_indices(x, spec.n_bins) {
            Ok(b) => Some(b),
            Err(_) => {
                log::warn!(
                    "trial {}: channel {} is constant, its pairs get the max-uncertainty value",
                    trial.trial.trial_id,
                    CHANNEL_NAMES[c]
                );
                None
            }
        })
        .collect();
    let pairs = pair_index();
    let fallback = match measure {
        PairMeasure::ConditionalEntropy => spec.max_entropy(),
        PairMeasure::MutualInformation => 0.0,
    };
    let values = pairs
        .iter()
        .map(|&(i, j)| match (&bins[i], &bins[j]) {
            (Some(bx), Some(by)) => {
                let t = JointTable::from_bins(bx, by, spec.n_bins);
                match measure {
                    PairMeasure::ConditionalEntropy => t.conditional_entropy(),
                    PairMeasure::MutualInformation => t.mutual_information(),
                }
            }
            _ => fallback,
        })
        .collect();
    Ok(PairFeatureVector { values, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::eeg::EegTrial;
    use rand::{Rng, SeedableRng};

    fn uniform(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.125; 8]).unwrap(), 3.0);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 1.0);
        assert!(entropy(&[1.5, -0.5]).is_err());
        assert!(entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn identical_inputs_give_diagonal_table() {
        let x = uniform(500, 1);
        let t = joint_histogram(&x, &x, &DiscretizationSpec::default()).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert_eq!(t.cell(i, j), 0.0);
                }
            }
        }
        assert!((t.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (hx, _, _) = t.entropies();
        assert!((mutual_information(&x, &x, &DiscretizationSpec::default()).unwrap() - hx).abs() < 1e-12);
        assert!(conditional_entropy(&x, &x, &DiscretizationSpec::default()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn marginals_match_single_histograms() {
        let (x, y) = (uniform(300, 2), uniform(300, 3));
        let spec = DiscretizationSpec::default();
        let t = joint_histogram(&x, &y, &spec).unwrap();
        let bx = bin_indices(&x, 8).unwrap();
        let mut hist = vec![0.0; 8];
        bx.iter().for_each(|&b| hist[b] += 1.0 / 300.0);
        for (a, b) in t.marginal_x().iter().zip(&hist) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn error_paths() {
        let spec = DiscretizationSpec::default();
        assert!(matches!(joint_histogram(&[0.0; 40], &uniform(40, 1), &spec), Err(Error::DegenerateChannel)));
        assert!(matches!(joint_histogram(&uniform(40, 1), &uniform(41, 1), &spec), Err(Error::LengthMismatch { .. })));
        assert!(matches!(joint_histogram(&uniform(20, 1), &uniform(20, 2), &spec), Err(Error::TooShort { .. })));
        assert!(DiscretizationSpec { n_bins: 1 }.validate().is_err());
    }

    #[test]
    fn four_level_independent_uniforms() {
        // exact product distribution: every (a, b) pair once
        let mut x = Vec::new();
        let mut y = Vec::new();
        for rep in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    x.push(a as f64 + 0.5 + 0.01 * rep as f64);
                    y.push(b as f64 + 0.5 + 0.01 * rep as f64);
                }
            }
        }
        let h = conditional_entropy(&x, &y, &DiscretizationSpec { n_bins: 4 }).unwrap();
        assert!((h - 2.0).abs() < 1e-12, "{h}");
    }

    #[test]
    fn transposed_table_gives_identical_mi() {
        let (x, y) = (uniform(200, 7), uniform(200, 8));
        let spec = DiscretizationSpec::default();
        assert_eq!(mutual_information(&x, &y, &spec).unwrap(), mutual_information(&y, &x, &spec).unwrap());
    }

    fn trial_from(channels: Vec<Vec<f64>>) -> CleanTrial {
        let secs = channels[0].len() as f64 / 128.0;
        CleanTrial::unmasked(EegTrial::new("s", "t", channels, secs).unwrap())
    }

    #[test]
    fn ninety_one_features() {
        let channels = (0..14).map(|c| uniform(256, c)).collect();
        let f = pairwise_features(&trial_from(channels), &DiscretizationSpec::default(), PairMeasure::default()).unwrap();
        assert_eq!(f.values.len(), 91);
        assert_eq!(f.pairs.len(), 91);
        assert!(f.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert_eq!(pair_names(PairMeasure::ConditionalEntropy)[0], "H(AF4|AF3)");
    }

    #[test]
    fn identical_channels_give_zero_features() {
        let x = uniform(256, 11);
        let f = pairwise_features(&trial_from(vec![x; 14]), &DiscretizationSpec::default(), PairMeasure::default()).unwrap();
        assert!(f.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_channel_gets_max_uncertainty() {
        let mut channels: Vec<Vec<f64>> = (0..14).map(|c| uniform(256, c + 100)).collect();
        channels[3] = vec![1.0; 256];
        let f = pairwise_features(&trial_from(channels), &DiscretizationSpec::default(), PairMeasure::default()).unwrap();
        for (k, &(i, j)) in f.pairs.iter().enumerate() {
            if i == 3 || j == 3 {
                assert_eq!(f.values[k], 3.0);
            } else {
                assert!(f.values[k] < 3.0);
            }
        }
    }

    #[test]
    fn pairwise_matches_direct_call() {
        let channels: Vec<Vec<f64>> = (0..14).map(|c| uniform(300, c + 40)).collect();
        let spec = DiscretizationSpec::default();
        let f = pairwise_features(&trial_from(channels.clone()), &spec, PairMeasure::ConditionalEntropy).unwrap();
        for (k, &(i, j)) in f.pairs.iter().enumerate() {
            assert_eq!(f.values[k], conditional_entropy(&channels[i], &channels[j], &spec).unwrap());
        }
    }
}
