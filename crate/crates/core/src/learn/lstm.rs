//! Stacked LSTM sequence classifier with a softmax readout on the final
//! time step of the top layer, trained by backpropagation through time and
//! stochastic gradient descent with momentum.
//!
//! Gate blocks are stacked in the order input, forget, candidate, output:
//! rows `[0, H)` of `w`, `u` and `b` belong to the input gate, and so on.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    /// `4H x input`.
    pub w: DMatrix<f64>,
    /// `4H x H`.
    pub u: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LstmLayer {
    pub fn hidden(&self) -> usize {
        self.u.ncols()
    }

    pub fn input(&self) -> usize {
        self.w.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub layers: Vec<LstmLayer>,
    /// `2 x H_top`.
    pub readout_w: DMatrix<f64>,
    pub readout_b: DVector<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdmConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for SgdmConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 60,
            batch_size: 8,
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

impl SgdmConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.momentum)
            && self.epochs > 0
            && self.batch_size > 0
            && self.clip_norm > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid SGDM settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean cross-entropy over each epoch's mini-batches, before each update.
    pub epoch_losses: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct LayerCache {
    /// `xs[t]`: layer input at step t.
    xs: Vec<DMatrix<f64>>,
    /// `h[t + 1]`, `c[t + 1]` after step t; index 0 is the zero state.
    h: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
    /// Post-activation gates, stacked `4H x B`.
    gates: Vec<DMatrix<f64>>,
    tanh_c: Vec<DMatrix<f64>>,
}

impl LstmModel {
    /// Weights uniform in `+-1/sqrt(H)`, biases zero except the forget
    /// gate at 1; readout uniform in `+-1/sqrt(H_top)`.
    pub fn new(input_dim: usize, hidden: &[usize], seed: u64) -> Self {
        assert!(!hidden.is_empty() && input_dim > 0);
        let mut rng = stats::rng_stream(seed, &[stats::str_hash("lstm-init")]);
        let mut layers = Vec::with_capacity(hidden.len());
        let mut inp = input_dim;
        for &h in hidden {
            let a = 1.0 / (h as f64).sqrt();
            let w = DMatrix::from_fn(4 * h, inp, |_, _| rng.random_range(-a..a));
            let u = DMatrix::from_fn(4 * h, h, |_, _| rng.random_range(-a..a));
            let mut b = DVector::zeros(4 * h);
            b.rows_mut(h, h).fill(1.0);
            layers.push(LstmLayer { w, u, b });
            inp = h;
        }
        let a = 1.0 / (inp as f64).sqrt();
        let readout_w = DMatrix::from_fn(2, inp, |_, _| rng.random_range(-a..a));
        Self {
            layers,
            readout_w,
            readout_b: DVector::zeros(2),
            seed,
        }
    }

    /// Same shapes, every parameter zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for b in z.blocks_mut() {
            b.fill(0.0);
        }
        z
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input()
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(LstmLayer::hidden).collect()
    }

    /// Parameter blocks in a fixed order (per layer w, u, b; then readout).
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            v.push(l.w.as_slice());
            v.push(l.u.as_slice());
            v.push(l.b.as_slice());
        }
        v.push(self.readout_w.as_slice());
        v.push(self.readout_b.as_slice());
        v
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            v.push(l.w.as_mut_slice());
            v.push(l.u.as_mut_slice());
            v.push(l.b.as_mut_slice());
        }
        v.push(self.readout_w.as_mut_slice());
        v.push(self.readout_b.as_mut_slice());
        v
    }

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    fn check_batch(&self, seqs: &[&[Vec<f64>]]) -> Result<usize> {
        let steps = seqs.first().map_or(0, |s| s.len());
        if steps == 0 {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        for s in seqs {
            if s.len() != steps {
                return Err(Error::InconsistentSequenceLength {
                    first: steps,
                    other: s.len(),
                });
            }
            if let Some(v) = s.iter().find(|v| v.len() != self.input_dim()) {
                return Err(Error::DimensionMismatch {
                    expected: self.input_dim(),
                    found: v.len(),
                });
            }
        }
        Ok(steps)
    }

    fn forward_batch(&self, seqs: &[&[Vec<f64>]]) -> Result<(Vec<LayerCache>, DMatrix<f64>)> {
        let steps = self.check_batch(seqs)?;
        let bsz = seqs.len();
        let mut inputs: Vec<DMatrix<f64>> = (0..steps)
            .map(|t| DMatrix::from_fn(self.input_dim(), bsz, |i, b| seqs[b][t][i]))
            .collect();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let h_dim = layer.hidden();
            let mut cache = LayerCache {
                xs: Vec::with_capacity(steps),
                h: vec![DMatrix::zeros(h_dim, bsz)],
                c: vec![DMatrix::zeros(h_dim, bsz)],
                gates: Vec::with_capacity(steps),
                tanh_c: Vec::with_capacity(steps),
            };
            for x in inputs.drain(..) {
                let mut z = &layer.w * &x;
                z.gemm(1.0, &layer.u, &cache.h[cache.h.len() - 1], 1.0);
                for mut col in z.column_iter_mut() {
                    col += &layer.b;
                }
                for (r, mut row) in z.row_iter_mut().enumerate() {
                    let candidate = (2 * h_dim..3 * h_dim).contains(&r);
                    for v in row.iter_mut() {
                        *v = if candidate { v.tanh() } else { sigmoid(*v) };
                    }
                }
                let c_prev = &cache.c[cache.c.len() - 1];
                let mut c = DMatrix::zeros(h_dim, bsz);
                let mut tc = DMatrix::zeros(h_dim, bsz);
                let mut h = DMatrix::zeros(h_dim, bsz);
                for b in 0..bsz {
                    for j in 0..h_dim {
                        let (i, f, g, o) = (
                            z[(j, b)],
                            z[(h_dim + j, b)],
                            z[(2 * h_dim + j, b)],
                            z[(3 * h_dim + j, b)],
                        );
                        let cv = f * c_prev[(j, b)] + i * g;
                        c[(j, b)] = cv;
                        tc[(j, b)] = cv.tanh();
                        h[(j, b)] = o * tc[(j, b)];
                    }
                }
                cache.xs.push(x);
                cache.gates.push(z);
                cache.c.push(c);
                cache.tanh_c.push(tc);
                cache.h.push(h);
            }
            inputs = cache.h[1..].to_vec();
            caches.push(cache);
        }
        let top = &caches[caches.len() - 1];
        let mut logits = &self.readout_w * &top.h[steps];
        for mut col in logits.column_iter_mut() {
            col += &self.readout_b;
        }
        let probs = softmax_columns(&logits);
        Ok((caches, probs))
    }

    /// Class probabilities for one sequence of step vectors.
    pub fn forward(&self, seq: &[Vec<f64>]) -> Result<[f64; 2]> {
        let (_, p) = self.forward_batch(&[seq])?;
        Ok([p[(0, 0)], p[(1, 0)]])
    }

    /// Most probable class; ties go to class 0.
    pub fn predict(&self, seq: &[Vec<f64>]) -> Result<u8> {
        let p = self.forward(seq)?;
        Ok(super::elm::argmax2(p))
    }

    /// Mean cross-entropy (nats) over a set of sequences.
    pub fn loss(&self, seqs: &[&[Vec<f64>]], labels: &[u8]) -> Result<f64> {
        let (_, p) = self.forward_batch(seqs)?;
        Ok(cross_entropy(&p, labels))
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, seqs: &[&[Vec<f64>]], labels: &[u8]) -> Result<(f64, LstmModel)> {
        if seqs.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: seqs.len(),
                right: labels.len(),
            });
        }
        let (caches, probs) = self.forward_batch(seqs)?;
        let loss = cross_entropy(&probs, labels);
        let bsz = seqs.len();
        let steps = seqs[0].len();
        let mut grad = self.zeros_like();

        let mut dlogits = probs;
        for (b, &y) in labels.iter().enumerate() {
            dlogits[(y as usize, b)] -= 1.0;
        }
        dlogits /= bsz as f64;
        let top = &caches[caches.len() - 1];
        grad.readout_w = &dlogits * top.h[steps].transpose();
        grad.readout_b = dlogits.column_sum();

        // gradient arriving at each step's output from the layer above
        let mut dh_in: Vec<DMatrix<f64>> = (0..steps)
            .map(|_| DMatrix::zeros(top.h[0].nrows(), bsz))
            .collect();
        dh_in[steps - 1] = self.readout_w.tr_mul(&dlogits);

        for (li, layer) in self.layers.iter().enumerate().rev() {
            let cache = &caches[li];
            let h_dim = layer.hidden();
            let g = &mut grad.layers[li];
            let mut dh_next = DMatrix::zeros(h_dim, bsz);
            let mut dc_next = DMatrix::<f64>::zeros(h_dim, bsz);
            let mut dx_out: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); steps];
            let mut dz = DMatrix::zeros(4 * h_dim, bsz);
            for t in (0..steps).rev() {
                let z = &cache.gates[t];
                let c_prev = &cache.c[t];
                let tc = &cache.tanh_c[t];
                for b in 0..bsz {
                    for j in 0..h_dim {
                        let (i, f, gg, o) = (
                            z[(j, b)],
                            z[(h_dim + j, b)],
                            z[(2 * h_dim + j, b)],
                            z[(3 * h_dim + j, b)],
                        );
                        let dh = dh_in[t][(j, b)] + dh_next[(j, b)];
                        let tcv = tc[(j, b)];
                        let dc = dh * o * (1.0 - tcv * tcv) + dc_next[(j, b)];
                        dz[(j, b)] = dc * gg * i * (1.0 - i);
                        dz[(h_dim + j, b)] = dc * c_prev[(j, b)] * f * (1.0 - f);
                        dz[(2 * h_dim + j, b)] = dc * i * (1.0 - gg * gg);
                        dz[(3 * h_dim + j, b)] = dh * tcv * o * (1.0 - o);
                        dc_next[(j, b)] = dc * f;
                    }
                }
                g.w.gemm(1.0, &dz, &cache.xs[t].transpose(), 1.0);
                g.u.gemm(1.0, &dz, &cache.h[t].transpose(), 1.0);
                g.b += dz.column_sum();
                dh_next = layer.u.tr_mul(&dz);
                if li > 0 {
                    dx_out[t] = layer.w.tr_mul(&dz);
                }
            }
            if li > 0 {
                dh_in = dx_out;
            }
        }
        Ok((loss, grad))
    }
}

fn softmax_columns(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = logits.clone();
    for mut col in p.column_iter_mut() {
        let m = col.max();
        col.apply(|v| *v = (*v - m).exp());
        let s = col.sum();
        col /= s;
    }
    p
}

fn cross_entropy(probs: &DMatrix<f64>, labels: &[u8]) -> f64 {
    let s: f64 = labels
        .iter()
        .enumerate()
        .map(|(b, &y)| -probs[(y as usize, b)].max(f64::MIN_POSITIVE).ln())
        .sum();
    s / labels.len() as f64
}

fn global_norm(g: &LstmModel) -> f64 {
    g.blocks()
        .iter()
        .flat_map(|b| b.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Trains with mini-batch SGDM: `v <- mu v - lr g`, `theta <- theta + v`,
/// with the batch gradient rescaled to at most `clip_norm`. Batches are
/// drawn from a per-epoch seeded shuffle.
pub fn lstm_train(
    mut model: LstmModel,
    seqs: &[Vec<Vec<f64>>],
    labels: &[u8],
    cfg: &SgdmConfig,
) -> Result<(LstmModel, TrainReport)> {
    cfg.validate()?;
    if seqs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: seqs.len(),
            right: labels.len(),
        });
    }
    if seqs.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let all: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
    model.check_batch(&all)?;
    let mut velocity = model.zeros_like();
    let mut report = TrainReport::default();
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    for epoch in 0..cfg.epochs {
        let mut rng = stats::rng_stream(cfg.seed, &[stats::str_hash("lstm-shuffle"), epoch as u64]);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let bx: Vec<&[Vec<f64>]> = chunk.iter().map(|&i| seqs[i].as_slice()).collect();
            let by: Vec<u8> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, mut grad) = model.loss_and_grad(&bx, &by)?;
            total += loss * chunk.len() as f64;
            let norm = global_norm(&grad);
            if norm > cfg.clip_norm {
                let s = cfg.clip_norm / norm;
                grad.blocks_mut().into_iter().for_each(|b| b.iter_mut().for_each(|v| *v *= s));
            }
            for ((v, g), p) in velocity
                .blocks_mut()
                .into_iter()
                .zip(grad.blocks())
                .zip(model.blocks_mut())
            {
                for ((vi, gi), pi) in v.iter_mut().zip(g).zip(p.iter_mut()) {
                    *vi = cfg.momentum * *vi - cfg.learning_rate * gi;
                    *pi += *vi;
                }
            }
        }
        report.epoch_losses.push(total / seqs.len() as f64);
    }
    Ok((model, report))
}

/// Largest relative difference between backpropagated gradients and
/// central finite differences with step `step`, over every parameter:
/// `|a - n| / max(|a| + |n|, 1e-7)`.
pub fn gradcheck(model: &LstmModel, seqs: &[Vec<Vec<f64>>], labels: &[u8], step: f64) -> Result<f64> {
    let batch: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
    let (_, grad) = model.loss_and_grad(&batch, labels)?;
    let analytic: Vec<f64> = grad.blocks().iter().flat_map(|b| b.iter().copied()).collect();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    let mut flat = 0;
    let n_blocks = probe.blocks().len();
    for bi in 0..n_blocks {
        let len = probe.blocks()[bi].len();
        for k in 0..len {
            let orig = probe.blocks()[bi][k];
            probe.blocks_mut()[bi][k] = orig + step;
            let up = probe.loss(&batch, labels)?;
            probe.blocks_mut()[bi][k] = orig - step;
            let down = probe.loss(&batch, labels)?;
            probe.blocks_mut()[bi][k] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[flat];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-7);
            worst = worst.max(rel);
            flat += 1;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn toy(n: usize, steps: usize, dim: usize, seed: u64) -> (Vec<Vec<Vec<f64>>>, Vec<u8>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let seqs = labels
            .iter()
            .map(|&y| {
                (0..steps)
                    .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0) + if y == 1 { 0.5 } else { -0.5 }).collect())
                    .collect()
            })
            .collect();
        (seqs, labels)
    }

    #[test]
    fn zero_model_is_uniform_and_keeps_zero_cell() {
        let m = LstmModel::new(3, &[4, 2], 1).zeros_like();
        let seq = vec![vec![0.7, -0.2, 0.1]; 3];
        assert_eq!(m.forward(&seq).unwrap(), [0.5, 0.5]);
        let init = LstmModel::new(3, &[4, 2], 1);
        let (caches, _) = init.forward_batch(&[&vec![vec![0.0; 3]; 2][..]]).unwrap();
        assert!(caches[0].c[1].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn probabilities_normalized() {
        let m = LstmModel::new(5, &[6, 3], 2);
        let (seqs, _) = toy(4, 3, 5, 3);
        for s in &seqs {
            let p = m.forward(s).unwrap();
            assert!(p[0] > 0.0 && p[1] > 0.0);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_unit_two_steps_by_hand() {
        let mut m = LstmModel::new(1, &[1], 0);
        let l = &mut m.layers[0];
        // i, f, g, o
        let (wi, wf, wg, wo) = (0.5, -0.3, 0.8, 0.2);
        let (ui, uf, ug, uo) = (0.1, 0.4, -0.6, 0.3);
        let (bi, bf, bg, bo) = (0.05, 1.0, -0.1, 0.2);
        l.w.copy_from_slice(&[wi, wf, wg, wo]);
        l.u.copy_from_slice(&[ui, uf, ug, uo]);
        l.b.copy_from_slice(&[bi, bf, bg, bo]);
        m.readout_w.copy_from_slice(&[0.7, -0.4]);
        m.readout_b.copy_from_slice(&[0.1, -0.1]);
        let xs = [0.9, -0.4];
        let (mut h, mut c) = (0.0f64, 0.0f64);
        for x in xs {
            let i = sigmoid(wi * x + ui * h + bi);
            let f = sigmoid(wf * x + uf * h + bf);
            let g = (wg * x + ug * h + bg).tanh();
            let o = sigmoid(wo * x + uo * h + bo);
            c = f * c + i * g;
            h = o * c.tanh();
        }
        let (l0, l1) = (0.7 * h + 0.1, -0.4 * h - 0.1);
        let p1 = 1.0 / (1.0 + (l0 - l1).exp());
        let p = m.forward(&[vec![0.9], vec![-0.4]]).unwrap();
        assert!((p[1] - p1).abs() < 1e-12);
    }

    #[test]
    fn one_step_has_no_recurrence() {
        let m = LstmModel::new(2, &[3], 5);
        let mut no_u = m.clone();
        no_u.layers[0].u.fill(0.0);
        let s = vec![vec![0.3, -0.8]];
        assert_eq!(m.forward(&s).unwrap(), no_u.forward(&s).unwrap());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = LstmModel::new(3, &[4, 4], 7);
        let (seqs, labels) = toy(3, 3, 3, 8);
        let err = gradcheck(&m, &seqs, &labels, 1e-5).unwrap();
        assert!(err < 1e-4, "{err}");
        let coarse = gradcheck(&m, &seqs, &labels, 1e-2).unwrap();
        assert!(coarse > err);
    }

    #[test]
    fn zero_parameters_give_zero_gradients_except_readout_bias() {
        let m = LstmModel::new(2, &[3, 2], 1).zeros_like();
        let seqs = vec![vec![vec![0.0; 2]; 3]; 2];
        let labels = [0u8, 0];
        let batch: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
        let (_, g) = m.loss_and_grad(&batch, &labels).unwrap();
        let blocks = g.blocks();
        let (last, rest) = blocks.split_last().unwrap();
        assert!(rest.iter().all(|b| b.iter().all(|v| *v == 0.0)));
        assert_eq!(*last, &[-0.5, 0.5][..]);
    }

    #[test]
    fn overfits_a_tiny_set() {
        let (seqs, labels) = toy(8, 3, 4, 21);
        let m = LstmModel::new(4, &[8, 4], 3);
        let cfg = SgdmConfig {
            learning_rate: 0.1,
            epochs: 500,
            batch_size: 8,
            ..SgdmConfig::default()
        };
        let (trained, report) = lstm_train(m, &seqs, &labels, &cfg).unwrap();
        let batch: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
        assert!(trained.loss(&batch, &labels).unwrap() < 0.01);
        assert!(report.epoch_losses.last().unwrap() < &report.epoch_losses[0]);
    }

    #[test]
    fn full_batch_without_momentum_is_gradient_descent() {
        let (seqs, labels) = toy(6, 2, 3, 4);
        let m = LstmModel::new(3, &[4], 2);
        let cfg = SgdmConfig {
            learning_rate: 0.05,
            momentum: 0.0,
            epochs: 5,
            batch_size: 6,
            clip_norm: 1e9,
            seed: 0,
        };
        let (trained, _) = lstm_train(m.clone(), &seqs, &labels, &cfg).unwrap();
        // full batch: shuffle order only permutes the mean, so compare to
        // plain updates up to summation-order rounding
        let batch: Vec<&[Vec<f64>]> = seqs.iter().map(Vec::as_slice).collect();
        let mut gd = m;
        for _ in 0..5 {
            let (_, g) = gd.loss_and_grad(&batch, &labels).unwrap();
            for (p, gb) in gd.blocks_mut().into_iter().zip(g.blocks()) {
                p.iter_mut().zip(gb).for_each(|(a, b)| *a -= 0.05 * b);
            }
        }
        for (a, b) in trained.blocks().iter().zip(gd.blocks()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (seqs, labels) = toy(10, 2, 3, 6);
        let cfg = SgdmConfig { epochs: 3, ..SgdmConfig::default() };
        let a = lstm_train(LstmModel::new(3, &[4, 2], 1), &seqs, &labels, &cfg).unwrap();
        let b = lstm_train(LstmModel::new(3, &[4, 2], 1), &seqs, &labels, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn shape_errors() {
        let m = LstmModel::new(3, &[4], 0);
        assert!(matches!(m.forward(&[vec![0.0; 2]]), Err(Error::DimensionMismatch { .. })));
        let seqs = vec![vec![vec![0.0; 3]; 2], vec![vec![0.0; 3]; 3]];
        assert!(matches!(
            lstm_train(m, &seqs, &[0, 1], &SgdmConfig::default()),
            Err(Error::InconsistentSequenceLength { .. })
        ));
        assert!(SgdmConfig { momentum: 1.0, ..SgdmConfig::default() }.validate().is_err());
    }
}
