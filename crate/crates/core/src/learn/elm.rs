//! Single-hidden-layer extreme learning machine with triangular-basis
//! activations and ridge-regularized least-squares output weights.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmConfig {
    pub hidden: usize,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        Self {
            hidden: 500,
            ridge: 1e-6,
            seed: 0,
        }
    }
}

/// `max(0, 1 - |z|)`.
pub fn tribas(z: f64) -> f64 {
    (1.0 - z.abs()).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    /// `L x k`, uniform in [-1, 1].
    pub input_weights: DMatrix<f64>,
    pub biases: Vec<f64>,
    /// `L x 2`.
    pub output_weights: DMatrix<f64>,
    pub config: ElmConfig,
}

fn check_training_set(x: &[Vec<f64>], y: &[u8]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c > 1) {
        return Err(Error::Config(format!("class label {bad} is not binary")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::SingleClass);
    }
    let k = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: r.len(),
        });
    }
    Ok(k)
}

impl ElmModel {
    pub fn input_dim(&self) -> usize {
        self.input_weights.ncols()
    }

    pub fn hidden(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok((0..self.biases.len())
            .map(|l| {
                let z: f64 = self.input_weights.row(l).iter().zip(x).map(|(w, v)| w * v).sum();
                tribas(z + self.biases[l])
            })
            .collect())
    }

    fn hidden_matrix(&self, x: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let l = self.biases.len();
        let mut h = DMatrix::zeros(x.len(), l);
        for (i, row) in x.iter().enumerate() {
            for (j, v) in self.hidden(row)?.into_iter().enumerate() {
                h[(i, j)] = v;
            }
        }
        Ok(h)
    }

    /// Predicted class and the two output scores; ties go to class 0.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, [f64; 2])> {
        let h = self.hidden(x)?;
        let mut s = [0.0; 2];
        for (c, slot) in s.iter_mut().enumerate() {
            *slot = h.iter().zip(self.output_weights.column(c).iter()).map(|(a, b)| a * b).sum();
        }
        Ok((argmax2(s), s))
    }

    pub fn predict_rows(&self, x: &[Vec<f64>]) -> Result<Vec<u8>> {
        x.iter().map(|r| self.predict(r).map(|p| p.0)).collect()
    }
}

pub fn argmax2(s: [f64; 2]) -> u8 {
    if s[1] > s[0] {
        1
    } else {
        0
    }
}

/// Fits output weights solving `min |H b - Y|^2 + ridge |b|^2` with one-hot
/// targets. The primal `L x L` system is used when `n >= L`, the dual
/// `n x n` system otherwise; both give the same minimizer.
pub fn elm_train(x: &[Vec<f64>], y: &[u8], cfg: &ElmConfig) -> Result<ElmModel> {
    let k = check_training_set(x, y)?;
    if cfg.hidden == 0 || !(cfg.ridge > 0.0) {
        return Err(Error::Config("ELM needs hidden > 0 and ridge > 0".into()));
    }
    let l = cfg.hidden;
    let mut rng = stats::rng_stream(cfg.seed, &[stats::str_hash("elm")]);
    let input_weights = DMatrix::from_fn(l, k, |_, _| rng.random_range(-1.0..=1.0));
    let biases: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut model = ElmModel {
        input_weights,
        biases,
        output_weights: DMatrix::zeros(l, 2),
        config: *cfg,
    };
    let h = model.hidden_matrix(x)?;
    let t = DMatrix::from_fn(x.len(), 2, |i, c| if y[i] as usize == c { 1.0 } else { 0.0 });
    model.output_weights = ridge_solve(&h, &t, cfg.ridge)?;
    Ok(model)
}

pub(crate) fn ridge_solve(h: &DMatrix<f64>, t: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let (n, l) = h.shape();
    let singular = || Error::Config("ridge system is not positive definite".into());
    if n >= l {
        let mut a = h.tr_mul(h);
        for i in 0..l {
            a[(i, i)] += ridge;
        }
        let chol = a.cholesky().ok_or_else(singular)?;
        Ok(chol.solve(&h.tr_mul(t)))
    } else {
        let mut a = h * h.transpose();
        for i in 0..n {
            a[(i, i)] += ridge;
        }
        let chol = a.cholesky().ok_or_else(singular)?;
        Ok(h.tr_mul(&chol.solve(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Vec<Vec<f64>>, Vec<u8>) {
        (
            vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]],
            vec![0, 1, 1, 0],
        )
    }

    #[test]
    fn tribas_endpoints() {
        assert_eq!(tribas(0.0), 1.0);
        assert_eq!(tribas(1.0), 0.0);
        assert_eq!(tribas(-1.0), 0.0);
        assert_eq!(tribas(2.0), 0.0);
        assert_eq!(tribas(0.25), 0.75);
    }

    #[test]
    fn xor_exact_fit() {
        let (x, y) = xor();
        let m = elm_train(&x, &y, &ElmConfig { hidden: 50, ..ElmConfig::default() }).unwrap();
        assert_eq!(m.predict_rows(&x).unwrap(), y);
    }

    #[test]
    fn primal_and_dual_agree_with_normal_equations() {
        let (x, y) = xor();
        for hidden in [3, 50] {
            let m = elm_train(&x, &y, &ElmConfig { hidden, ridge: 1e-3, seed: 4 }).unwrap();
            let h = m.hidden_matrix(&x).unwrap();
            let t = DMatrix::from_fn(4, 2, |i, c| if y[i] as usize == c { 1.0 } else { 0.0 });
            let mut a = h.tr_mul(&h);
            for i in 0..hidden {
                a[(i, i)] += 1e-3;
            }
            let direct = a.lu().solve(&h.tr_mul(&t)).unwrap();
            assert!((&direct - &m.output_weights).amax() < 1e-8);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = xor();
        let cfg = ElmConfig { hidden: 20, ridge: 1e-6, seed: 9 };
        let a = elm_train(&x, &y, &cfg).unwrap();
        let b = elm_train(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_scores_keep_argmax() {
        let (x, y) = xor();
        let mut m = elm_train(&x, &y, &ElmConfig { hidden: 50, ..ElmConfig::default() }).unwrap();
        let before: Vec<_> = x.iter().map(|r| m.predict(r).unwrap()).collect();
        m.output_weights *= 3.0;
        for (r, (c, s)) in x.iter().zip(before) {
            let (c2, s2) = m.predict(r).unwrap();
            assert_eq!(c, c2);
            assert!((s2[0] - 3.0 * s[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_go_to_class_zero() {
        assert_eq!(argmax2([0.3, 0.3]), 0);
    }

    #[test]
    fn training_set_errors() {
        let (x, _) = xor();
        assert!(matches!(elm_train(&x, &[1, 1, 1, 1], &ElmConfig::default()), Err(Error::SingleClass)));
        let m = elm_train(&x, &[0, 1, 1, 0], &ElmConfig::default()).unwrap();
        assert!(matches!(m.predict(&[0.0; 3]), Err(Error::DimensionMismatch { .. })));
    }
}
