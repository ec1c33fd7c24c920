use std::path::Path;

use super::interp::Grid;
use crate::error::{Error, Result};
use crate::image::RgbImage;

/// The three-band scalp raster: theta in red, alpha in green, beta in blue.
pub type ScalpImage = RgbImage;

const BAND_NAMES: [&str; 3] = ["theta", "alpha", "beta"];

/// Joint normalization of three band grids into 8-bit channels.
///
/// Negative values are clamped to 0, `M` is the maximum over all three
/// grids and each channel is `round(255 * g / M)`. `M == 0` gives black.
pub fn compose_rgb_topomap(grids: [&Grid; 3]) -> Result<ScalpImage> {
    let side = grids[0].side;
    for g in &grids[1..] {
        if g.side != side {
            return Err(Error::Shape {
                expected: format!("{side}x{side}"),
                found: format!("{0}x{0}", g.side),
            });
        }
    }
    for (b, g) in grids.iter().enumerate() {
        if let Some(i) = g.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / side,
                channel: BAND_NAMES[b].to_string(),
            });
        }
    }
    let m = grids
        .iter()
        .flat_map(|g| g.values.iter())
        .fold(0.0f64, |a, &v| a.max(v));
    let mut img = RgbImage::new(side, side);
    if m == 0.0 {
        return Ok(img);
    }
    for (b, g) in grids.iter().enumerate() {
        for (i, &v) in g.values.iter().enumerate() {
            img.pixels[i * 3 + b] = (255.0 * v.max(0.0) / m).round() as u8;
        }
    }
    Ok(img)
}

pub fn render_png(image: &ScalpImage, path: &Path) -> Result<()> {
    image.write_png(path)
}
