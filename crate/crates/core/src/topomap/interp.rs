//! Thin-plate-spline interpolation of electrode values onto the 224x224
//! head raster.
//!
//! Electrode positions are snapped to the centers of their nearest grid
//! nodes before fitting, so the surface passes exactly through each
//! electrode's node. The fitted surface is linear in the electrode values;
//! the interpolator precomputes the per-pixel weights once per layout.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::image::IMAGE_SIDE;
use crate::session::layout::ChannelLayout;

/// Row-major scalar raster; row 0 is the front of the head (+y).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub side: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            values: vec![0.0; side * side],
        }
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Little-endian f32, row-major, no header.
    pub fn to_f32_le_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| (*v as f32).to_le_bytes()).collect()
    }

    pub fn dump(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_f32_le_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Unit-disk coordinates of a pixel center.
pub fn pixel_center(row: usize, col: usize, side: usize) -> (f64, f64) {
    let half = side as f64 / 2.0;
    ((col as f64 + 0.5 - half) / half, (half - row as f64 - 0.5) / half)
}

/// Grid node `(row, col)` containing a unit-disk position.
pub fn nearest_node(x: f64, y: f64, side: usize) -> (usize, usize) {
    let half = side as f64 / 2.0;
    let col = ((x * half + half).floor() as isize).clamp(0, side as isize - 1) as usize;
    let row = ((half - y * half).floor() as isize).clamp(0, side as isize - 1) as usize;
    (row, col)
}

pub fn in_disk(row: usize, col: usize, side: usize) -> bool {
    let (x, y) = pixel_center(row, col, side);
    x * x + y * y <= 1.0
}

fn tps_kernel(r2: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else {
        0.5 * r2 * r2.ln()
    }
}

#[derive(Debug, Clone)]
pub struct ScalpInterpolator {
    pub side: usize,
    pub nodes: Vec<(usize, usize)>,
    centers: Vec<(f64, f64)>,
    /// For each in-disk pixel: (flat index, weight per electrode).
    weights: Vec<(usize, Vec<f64>)>,
    system: DMatrix<f64>,
}

impl ScalpInterpolator {
    pub fn new(layout: &ChannelLayout) -> Result<Self> {
        Self::with_side(layout, IMAGE_SIDE)
    }

    pub fn with_side(layout: &ChannelLayout, side: usize) -> Result<Self> {
        let m = layout.len();
        let nodes: Vec<(usize, usize)> = layout
            .positions_2d
            .iter()
            .map(|&(x, y)| nearest_node(x, y, side))
            .collect();
        for i in 0..m {
            for j in i + 1..m {
                if nodes[i] == nodes[j] {
                    return Err(Error::CoincidentElectrodes {
                        a: layout.names[i].clone(),
                        b: layout.names[j].clone(),
                    });
                }
            }
        }
        let centers: Vec<(f64, f64)> = nodes.iter().map(|&(r, c)| pixel_center(r, c, side)).collect();
        let dim = m + 3;
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..m {
            for j in 0..m {
                let (dx, dy) = (centers[i].0 - centers[j].0, centers[i].1 - centers[j].1);
                a[(i, j)] = tps_kernel(dx * dx + dy * dy);
            }
            let p = [1.0, centers[i].0, centers[i].1];
            for k in 0..3 {
                a[(i, m + k)] = p[k];
                a[(m + k, i)] = p[k];
            }
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Config("thin-plate-spline system is singular".into()))?;
        // weights on electrode values: basis row times the first m columns of the inverse
        let cols = inv.columns(0, m).into_owned();
        let mut weights = Vec::new();
        let mut basis = DVector::<f64>::zeros(dim);
        for row in 0..side {
            for col in 0..side {
                if !in_disk(row, col, side) {
                    continue;
                }
                let (x, y) = pixel_center(row, col, side);
                for (j, c) in centers.iter().enumerate() {
                    let (dx, dy) = (x - c.0, y - c.1);
                    basis[j] = tps_kernel(dx * dx + dy * dy);
                }
                basis[m] = 1.0;
                basis[m + 1] = x;
                basis[m + 2] = y;
                let w = cols.tr_mul(&basis);
                weights.push((row * side + col, w.iter().copied().collect()));
            }
        }
        Ok(Self {
            side,
            nodes,
            centers,
            weights,
            system: a,
        })
    }

    pub fn n_electrodes(&self) -> usize {
        self.nodes.len()
    }

    /// Grid of the spline through `values`; zero outside the unit disk.
    pub fn interpolate(&self, values: &[f64]) -> Result<Grid> {
        if values.len() != self.n_electrodes() {
            return Err(Error::LengthMismatch {
                left: self.n_electrodes(),
                right: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("electrode value {i} is not finite")));
        }
        let mut g = Grid::zeros(self.side);
        for (idx, w) in &self.weights {
            g.values[*idx] = w.iter().zip(values).map(|(a, b)| a * b).sum();
        }
        Ok(g)
    }

    /// Max absolute residual of the solved spline system for `values`:
    /// the surface coefficients are solved directly and the interpolation
    /// conditions re-evaluated.
    pub fn system_residual(&self, values: &[f64]) -> f64 {
        let m = self.n_electrodes();
        let mut rhs = DVector::<f64>::zeros(m + 3);
        for (i, v) in values.iter().enumerate() {
            rhs[i] = *v;
        }
        let Some(coef) = self.system.clone().lu().solve(&rhs) else {
            return f64::INFINITY;
        };
        (0..m)
            .map(|i| {
                let (x, y) = self.centers[i];
                let mut s = coef[m] + coef[m + 1] * x + coef[m + 2] * y;
                for (j, c) in self.centers.iter().enumerate() {
                    let (dx, dy) = (x - c.0, y - c.1);
                    s += coef[j] * tps_kernel(dx * dx + dy * dy);
                }
                (s - values[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// One-off interpolation; build a [`ScalpInterpolator`] to reuse weights.
pub fn interpolate_scalp_map(layout: &ChannelLayout, values: &[f64]) -> Result<Grid> {
    ScalpInterpolator::new(layout)?.interpolate(values)
}
