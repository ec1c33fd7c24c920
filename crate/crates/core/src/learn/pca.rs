//! Principal component analysis of a training matrix.
//!
//! With `d <= n` the components come from the SVD of the centered data.
//! With `d > n` (tens of thousands of features, a few hundred trials) the
//! eigenvectors of the `n x n` Gram matrix are mapped back to feature
//! space, which yields the same right singular directions at a fraction of
//! the cost.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x d`, orthonormal rows, ordered by decreasing variance.
    pub components: DMatrix<f64>,
    /// Variance captured by each component (divisor `n - 1`).
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    /// Fingerprint of the training rows, set by the caller.
    pub fitted_on: String,
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Flips each component so its largest-magnitude entry is positive.
fn fix_signs(c: &mut DMatrix<f64>) {
    for mut row in c.row_iter_mut() {
        let mut best = 0.0f64;
        for v in row.iter() {
            if v.abs() > best.abs() {
                best = *v;
            }
        }
        if best < 0.0 {
            row.neg_mut();
        }
    }
}

/// Modified Gram-Schmidt pass over the rows.
fn orthonormalize_rows(c: &mut DMatrix<f64>) {
    for i in 0..c.nrows() {
        for j in 0..i {
            let dot = c.row(i).dot(&c.row(j));
            let rj = c.row(j).into_owned();
            let mut ri = c.row_mut(i);
            ri -= rj * dot;
        }
        let norm = c.row(i).norm();
        c.row_mut(i).unscale_mut(norm);
    }
}

pub fn pca_fit(rows: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mut x = to_matrix(rows)?;
    let d = x.ncols();
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
    for (j, m) in mean.iter().enumerate() {
        x.column_mut(j).add_scalar_mut(-m);
    }
    let total_variance = x.norm_squared() / (n - 1) as f64;

    // (singular value^2, direction) pairs, unsorted
    let (sq, dirs): (Vec<f64>, DMatrix<f64>) = if d <= n {
        let svd = x.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        (svd.singular_values.iter().map(|s| s * s).collect(), vt)
    } else {
        let gram = &x * x.transpose();
        let eig = SymmetricEigen::new(gram);
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        // rows of (X^T u)^T / sigma
        let mut dirs = (x.transpose() * &eig.eigenvectors).transpose();
        for (i, v) in vals.iter().enumerate() {
            let s = v.sqrt();
            if s > 0.0 {
                dirs.row_mut(i).unscale_mut(s);
            }
        }
        (vals, dirs)
    };

    let mut order: Vec<usize> = (0..sq.len()).collect();
    order.sort_by(|&a, &b| sq[b].total_cmp(&sq[a]).then(a.cmp(&b)));
    let top = sq[order[0]];
    let tol = top * (n.max(d) as f64) * f64::EPSILON * 10.0;
    let rank = order.iter().filter(|&&i| sq[i] > tol && sq[i] > 0.0).count();
    if k > rank || k == 0 {
        return Err(Error::RankDeficient {
            requested: k,
            achievable: rank,
        });
    }
    let mut components = DMatrix::from_fn(k, d, |i, j| dirs[(order[i], j)]);
    orthonormalize_rows(&mut components);
    fix_signs(&mut components);
    let explained_variance = order[..k].iter().map(|&i| sq[i] / (n - 1) as f64).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
        fitted_on: String::new(),
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// `components * (x - mean)`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, m)| a - m));
        Ok((&self.components * centered).iter().copied().collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    /// Maps scores back to feature space.
    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: z.len(),
            });
        }
        let zv = DVector::from_column_slice(z);
        let back = self.components.tr_mul(&zv);
        Ok(back.iter().zip(&self.mean).map(|(a, m)| a + m).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| (0..d).map(|_| g.sample(&mut rng)).collect()).collect()
    }

    fn max_orthonormality_error(c: &DMatrix<f64>) -> f64 {
        let g = c * c.transpose();
        let mut e = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((g[(i, j)] - target).abs());
            }
        }
        e
    }

    #[test]
    fn orthonormal_in_both_regimes() {
        for (n, d) in [(50, 8), (12, 40)] {
            let m = pca_fit(&gaussian_rows(n, d, 3), 5).unwrap();
            assert!(max_orthonormality_error(&m.components) < 1e-9);
            assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn wide_and_tall_routes_agree() {
        let rows = gaussian_rows(10, 9, 4);
        let tall = pca_fit(&rows, 4).unwrap();
        // pad with zero columns to force the Gram route
        let padded: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().copied().chain(std::iter::repeat_n(0.0, 5)).collect())
            .collect();
        let wide = pca_fit(&padded, 4).unwrap();
        for i in 0..4 {
            assert!((tall.explained_variance[i] - wide.explained_variance[i]).abs() < 1e-9);
            for j in 0..9 {
                assert!((tall.components[(i, j)] - wide.components[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn exact_low_rank_reconstruction() {
        let basis = gaussian_rows(2, 6, 9);
        let coefs = gaussian_rows(30, 2, 10);
        let rows: Vec<Vec<f64>> = coefs
            .iter()
            .map(|c| (0..6).map(|j| 1.5 + c[0] * basis[0][j] + c[1] * basis[1][j]).collect())
            .collect();
        let m = pca_fit(&rows, 2).unwrap();
        for r in &rows {
            let back = m.inverse(&m.transform(r).unwrap()).unwrap();
            for (a, b) in back.iter().zip(r) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(matches!(pca_fit(&rows, 3), Err(Error::RankDeficient { achievable: 2, .. })));
    }

    #[test]
    fn mean_maps_to_zero_and_full_rank_is_isometry() {
        let rows = gaussian_rows(20, 5, 11);
        let m = pca_fit(&rows, 5).unwrap();
        assert!(m.transform(&m.mean).unwrap().iter().all(|v| v.abs() < 1e-12));
        let (a, b) = (m.transform(&rows[0]).unwrap(), m.transform(&rows[1]).unwrap());
        let dz: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let dx: f64 = rows[0].iter().zip(&rows[1]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!((dz - dx).abs() < 1e-9);
    }

    #[test]
    fn dimension_checks() {
        let m = pca_fit(&gaussian_rows(10, 3, 1), 2).unwrap();
        assert!(m.transform(&[0.0; 4]).is_err());
        assert!(pca_fit(&gaussian_rows(1, 3, 1), 1).is_err());
    }
}
