//! Min/max scaling of feature columns to [-1, 1], fit on training rows,
//! with optional per-block weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Per-column output multiplier; empty means 1 everywhere.
    #[serde(default)]
    pub weight: Vec<f64>,
}

impl MinMaxScaler {
    /// Column ranges of `rows`; all rows must share one length.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(r.as_ref()) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Self {
            min,
            max,
            weight: Vec::new(),
        }
    }

    /// Like [`fit`](Self::fit), then weights each block of consecutive
    /// columns by `1 / sqrt(block length)` so every block carries the same
    /// total range regardless of its width. `blocks` must sum to the row
    /// length.
    pub fn fit_blocks<R: AsRef<[f64]>>(rows: &[R], blocks: &[usize]) -> Result<Self> {
        let mut s = Self::fit(rows);
        let total: usize = blocks.iter().sum();
        if total != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: s.dim(),
            });
        }
        s.weight = blocks
            .iter()
            .flat_map(|&b| std::iter::repeat_n(1.0 / (b as f64).sqrt(), b))
            .collect();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps each column to [-1, 1] by the fitted range. Constant columns map
    /// to 0; values outside the fitted range are clipped.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .enumerate()
            .map(|(j, (&v, (&lo, &hi)))| {
                let span = hi - lo;
                let w = self.weight.get(j).copied().unwrap_or(1.0);
                if span > 0.0 {
                    w * (2.0 * (v - lo) / span - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform_rows<R: AsRef<[f64]>>(&self, rows: &[R]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r.as_ref())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_rows_span_unit_interval() {
        let rows = vec![vec![1.0, 5.0, 2.0], vec![3.0, 5.0, -2.0], vec![2.0, 5.0, 0.0]];
        let s = MinMaxScaler::fit(&rows);
        let t = s.transform_rows(&rows);
        assert_eq!(t[0], vec![-1.0, 0.0, 1.0]);
        assert_eq!(t[1], vec![1.0, 0.0, -1.0]);
        assert_eq!(t[2], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn blocks_share_total_weight() {
        let rows = vec![vec![0.0; 5], vec![1.0; 5]];
        let s = MinMaxScaler::fit_blocks(&rows, &[1, 4]).unwrap();
        let t = s.transform(&[1.0; 5]);
        assert_eq!(t[0], 1.0);
        assert_eq!(&t[1..], &[0.5; 4]);
        let ss: f64 = t[1..].iter().map(|v| v * v).sum();
        assert!((ss - t[0] * t[0]).abs() < 1e-12);
        assert!(MinMaxScaler::fit_blocks(&rows, &[2, 2]).is_err());
    }

    #[test]
    fn unseen_values_are_clipped() {
        let s = MinMaxScaler::fit(&[vec![0.0], vec![1.0]]);
        assert_eq!(s.transform(&[3.0]), vec![1.0]);
        assert_eq!(s.transform(&[-3.0]), vec![-1.0]);
    }
}
