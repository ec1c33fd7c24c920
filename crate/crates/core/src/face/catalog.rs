//! The frozen catalog of 30 per-frame geometric features.
//!
//! Distances are divided by the face-box diagonal; angles are in radians at
//! the middle point. Changing any entry requires bumping
//! [`CATALOG_VERSION`].

use serde::Serialize;

use super::scheme::{L_BROW, L_EYE, NAMES, R_BROW, R_EYE};

pub const CATALOG_VERSION: &str = "face-geometry-30/v1";
pub const N_GEOMETRY: usize = 30;

/// A landmark or the centroid of several landmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Mid(&'static [usize]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometryFeature {
    /// |a - b| / face diagonal
    Distance { name: &'static str, a: PointRef, b: PointRef },
    /// Angle at `vertex` between the segments to `a` and `c`.
    Angle { name: &'static str, a: PointRef, vertex: PointRef, c: PointRef },
}

impl GeometryFeature {
    pub fn name(&self) -> &'static str {
        match self {
            GeometryFeature::Distance { name, .. } | GeometryFeature::Angle { name, .. } => name,
        }
    }

    pub fn is_distance(&self) -> bool {
        matches!(self, GeometryFeature::Distance { .. })
    }
}

use GeometryFeature::{Angle, Distance};
use PointRef::{Index as I, Mid as M};

const R_EYE_UPPER: &[usize] = &[20, 21];
const R_EYE_LOWER: &[usize] = &[23, 24];
const L_EYE_UPPER: &[usize] = &[26, 27];
const L_EYE_LOWER: &[usize] = &[29, 30];

pub const CATALOG: [GeometryFeature; N_GEOMETRY] = [
    Distance { name: "r_brow_center_to_r_eye_mid", a: I(2), b: M(&R_EYE) },
    Distance { name: "l_brow_center_to_l_eye_mid", a: I(7), b: M(&L_EYE) },
    Distance { name: "nose_mid_to_r_lip_corner", a: I(16), b: I(31) },
    Distance { name: "nose_mid_to_l_lip_corner", a: I(16), b: I(37) },
    Distance { name: "r_brow_mid_to_l_brow_mid", a: M(&R_BROW), b: M(&L_BROW) },
    Distance { name: "r_eye_opening", a: M(R_EYE_UPPER), b: M(R_EYE_LOWER) },
    Distance { name: "l_eye_opening", a: M(L_EYE_UPPER), b: M(L_EYE_LOWER) },
    Distance { name: "r_eye_width", a: I(19), b: I(22) },
    Distance { name: "l_eye_width", a: I(25), b: I(28) },
    Distance { name: "mouth_width", a: I(31), b: I(37) },
    Distance { name: "outer_mouth_opening", a: I(34), b: I(40) },
    Distance { name: "inner_mouth_opening", a: I(44), b: I(47) },
    Distance { name: "r_inner_brow_to_r_inner_eye", a: I(4), b: I(22) },
    Distance { name: "l_inner_brow_to_l_inner_eye", a: I(5), b: I(25) },
    Distance { name: "r_outer_brow_to_r_outer_eye", a: I(0), b: I(19) },
    Distance { name: "l_outer_brow_to_l_outer_eye", a: I(9), b: I(28) },
    Distance { name: "inner_brow_gap", a: I(4), b: I(5) },
    Distance { name: "nose_tip_to_upper_lip", a: I(13), b: I(34) },
    Distance { name: "nose_base_to_lower_lip", a: I(16), b: I(40) },
    Distance { name: "r_eye_mid_to_r_lip_corner", a: M(&R_EYE), b: I(31) },
    Distance { name: "l_eye_mid_to_l_lip_corner", a: M(&L_EYE), b: I(37) },
    Distance { name: "interocular", a: M(&R_EYE), b: M(&L_EYE) },
    Distance { name: "nose_length", a: I(10), b: I(13) },
    Distance { name: "upper_lip_thickness", a: I(34), b: I(44) },
    Angle { name: "r_mouth_corner_angle", a: I(34), vertex: I(31), c: I(40) },
    Angle { name: "l_mouth_corner_angle", a: I(34), vertex: I(37), c: I(40) },
    Angle { name: "r_brow_arch", a: I(0), vertex: I(2), c: I(4) },
    Angle { name: "l_brow_arch", a: I(5), vertex: I(7), c: I(9) },
    Angle { name: "lip_corners_at_nose_base", a: I(31), vertex: I(16), c: I(37) },
    Angle { name: "eye_mids_at_nose_tip", a: M(&R_EYE), vertex: I(13), c: M(&L_EYE) },
];

/// Machine-readable catalog export.
pub fn catalog_json() -> serde_json::Value {
    serde_json::json!({
        "version": CATALOG_VERSION,
        "landmark_names": NAMES.to_vec(),
        "features": CATALOG,
        "statistics": ["mean", "p95", "std"],
        "layout": "catalog-major: feature k occupies columns 3k (mean), 3k+1 (p95), 3k+2 (std)",
    })
}

/// Markdown table for documentation.
pub fn catalog_markdown() -> String {
    let fmt_ref = |r: &PointRef| match r {
        PointRef::Index(i) => format!("{i} ({})", NAMES[*i]),
        PointRef::Mid(ix) => format!("mid{ix:?}"),
    };
    let mut s = format!("Catalog version `{CATALOG_VERSION}`\n\n| # | name | kind | points |\n|---|------|------|--------|\n");
    for (k, f) in CATALOG.iter().enumerate() {
        let (kind, pts) = match f {
            Distance { a, b, .. } => ("distance / diag", format!("{} - {}", fmt_ref(a), fmt_ref(b))),
            Angle { a, vertex, c, .. } => (
                "angle (rad)",
                format!("{} < {} > {}", fmt_ref(a), fmt_ref(vertex), fmt_ref(c)),
            ),
        };
        s.push_str(&format!("| {k} | {} | {kind} | {pts} |\n", f.name()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_entries_with_valid_indices() {
        assert_eq!(CATALOG.len(), 30);
        let check = |r: &PointRef| match r {
            PointRef::Index(i) => assert!(*i < 49),
            PointRef::Mid(ix) => assert!(!ix.is_empty() && ix.iter().all(|i| *i < 49)),
        };
        let mut names = std::collections::BTreeSet::new();
        for f in &CATALOG {
            assert!(names.insert(f.name()));
            match f {
                Distance { a, b, .. } => {
                    check(a);
                    check(b)
                }
                Angle { a, vertex, c, .. } => {
                    check(a);
                    check(vertex);
                    check(c)
                }
            }
        }
    }

    #[test]
    fn markdown_has_a_row_per_feature() {
        assert_eq!(catalog_markdown().lines().filter(|l| l.starts_with("| ") && !l.starts_with("| #")).count(), 30);
    }
}
