//! Per-frame facial geometry and per-trial statistics.

pub mod catalog;
pub mod scheme;

use crate::error::{Error, Result};
use crate::session::landmarks::{LandmarkFrame, LandmarkTrack};
use crate::stats;

pub use catalog::{GeometryFeature, PointRef, CATALOG, CATALOG_VERSION, N_GEOMETRY};

/// Number of per-trial face-geometry features (mean, p95, std per entry).
pub const N_TRIAL_FEATURES: usize = 3 * N_GEOMETRY;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFaceFeatures {
    /// Catalog-major: entry k at `3k` (mean), `3k+1` (p95), `3k+2` (std).
    pub values: Vec<f64>,
    pub frames_used: usize,
}

fn resolve(points: &[(f64, f64)], r: &PointRef) -> (f64, f64) {
    match r {
        PointRef::Index(i) => points[*i],
        PointRef::Mid(ix) => {
            let n = ix.len() as f64;
            let (sx, sy) = ix.iter().fold((0.0, 0.0), |(sx, sy), &i| (sx + points[i].0, sy + points[i].1));
            (sx / n, sy / n)
        }
    }
}

/// Angle at `v` between `a - v` and `c - v`, in [0, pi].
fn angle_at(a: (f64, f64), v: (f64, f64), c: (f64, f64)) -> f64 {
    let (ux, uy) = (a.0 - v.0, a.1 - v.1);
    let (wx, wy) = (c.0 - v.0, c.1 - v.1);
    let cross = ux * wy - uy * wx;
    let dot = ux * wx + uy * wy;
    cross.abs().atan2(dot)
}

/// The 30 catalog features of one frame. Returns `None` for frames that are
/// not usable (invalid flag, missing points or a face box under 50x50).
pub fn frame_features(frame: &LandmarkFrame) -> Option<[f64; N_GEOMETRY]> {
    if !frame.is_usable() {
        return None;
    }
    let diag = frame.face_box.diagonal();
    let pts = &frame.points;
    let mut out = [0.0; N_GEOMETRY];
    for (o, f) in out.iter_mut().zip(CATALOG.iter()) {
        *o = match f {
            GeometryFeature::Distance { a, b, .. } => {
                let (p, q) = (resolve(pts, a), resolve(pts, b));
                (p.0 - q.0).hypot(p.1 - q.1) / diag
            }
            GeometryFeature::Angle { a, vertex, c, .. } => {
                angle_at(resolve(pts, a), resolve(pts, vertex), resolve(pts, c))
            }
        };
    }
    Some(out)
}

/// Mean, 95th percentile and population std of each catalog entry across
/// frames. Needs at least two frames.
pub fn trial_statistics(frames: &[[f64; N_GEOMETRY]]) -> Result<TrialFaceFeatures> {
    if frames.len() < 2 {
        return Err(Error::FeatureMissing {
            trial_id: String::new(),
            reason: format!("{} valid face frames, need at least 2", frames.len()),
        });
    }
    let mut values = Vec::with_capacity(N_TRIAL_FEATURES);
    let mut column = vec![0.0; frames.len()];
    for k in 0..N_GEOMETRY {
        for (c, f) in column.iter_mut().zip(frames) {
            *c = f[k];
        }
        values.extend_from_slice(&stats::mean_p95_std(&column));
    }
    Ok(TrialFaceFeatures {
        values,
        frames_used: frames.len(),
    })
}

/// Frame features for every usable frame of a track, then trial statistics.
pub fn track_features(trial_id: &str, track: &LandmarkTrack) -> Result<TrialFaceFeatures> {
    let rows: Vec<[f64; N_GEOMETRY]> = track.frames.iter().filter_map(frame_features).collect();
    trial_statistics(&rows).map_err(|e| match e {
        Error::FeatureMissing { reason, .. } => Error::FeatureMissing {
            trial_id: trial_id.to_string(),
            reason,
        },
        other => other,
    })
}
