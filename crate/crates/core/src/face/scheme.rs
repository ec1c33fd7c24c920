//! The 49-point facial landmark scheme (68-point scheme minus the jaw
//! contour and the two inner-mouth corners).
//!
//! "Right"/"left" are the subject's, so the right eye appears on the image
//! left. Index map:
//!
//! | indices | region |
//! |---------|--------|
//! | 0-4     | right eyebrow, outer to inner |
//! | 5-9     | left eyebrow, inner to outer |
//! | 10-13   | nose bridge, top to tip |
//! | 14-18   | nose base, right to left |
//! | 19-24   | right eye: outer corner, upper outer, upper inner, inner corner, lower inner, lower outer |
//! | 25-30   | left eye: inner corner, upper inner, upper outer, outer corner, lower outer, lower inner |
//! | 31-42   | outer lip contour from right corner (31) over upper center (34), left corner (37), lower center (40) |
//! | 43-48   | inner lip: upper 43-45 (center 44), lower 46-48 (center 47) |

use crate::session::landmarks::N_LANDMARKS;

pub const NAMES: [&str; N_LANDMARKS] = [
    "r_brow_outer", "r_brow_2", "r_brow_center", "r_brow_4", "r_brow_inner",
    "l_brow_inner", "l_brow_2", "l_brow_center", "l_brow_4", "l_brow_outer",
    "nose_bridge_top", "nose_bridge_2", "nose_bridge_3", "nose_tip",
    "nose_base_r", "nose_base_2", "nose_base_center", "nose_base_4", "nose_base_l",
    "r_eye_outer", "r_eye_upper_outer", "r_eye_upper_inner", "r_eye_inner", "r_eye_lower_inner", "r_eye_lower_outer",
    "l_eye_inner", "l_eye_upper_inner", "l_eye_upper_outer", "l_eye_outer", "l_eye_lower_outer", "l_eye_lower_inner",
    "mouth_r_corner", "upper_lip_2", "upper_lip_3", "upper_lip_center", "upper_lip_5", "upper_lip_6",
    "mouth_l_corner", "lower_lip_6", "lower_lip_5", "lower_lip_center", "lower_lip_3", "lower_lip_2",
    "inner_upper_r", "inner_upper_center", "inner_upper_l", "inner_lower_l", "inner_lower_center", "inner_lower_r",
];

pub const R_BROW: [usize; 5] = [0, 1, 2, 3, 4];
pub const L_BROW: [usize; 5] = [5, 6, 7, 8, 9];
pub const R_EYE: [usize; 6] = [19, 20, 21, 22, 23, 24];
pub const L_EYE: [usize; 6] = [25, 26, 27, 28, 29, 30];

/// Neutral frontal face in face-box coordinates (x right, y down, both in
/// [0, 1]). Used by the synthetic generator and the crop renderer.
pub const TEMPLATE: [(f64, f64); N_LANDMARKS] = [
    (0.18, 0.30), (0.24, 0.27), (0.30, 0.26), (0.36, 0.27), (0.42, 0.29),
    (0.58, 0.29), (0.64, 0.27), (0.70, 0.26), (0.76, 0.27), (0.82, 0.30),
    (0.50, 0.38), (0.50, 0.45), (0.50, 0.52), (0.50, 0.59),
    (0.42, 0.64), (0.46, 0.655), (0.50, 0.66), (0.54, 0.655), (0.58, 0.64),
    (0.22, 0.40), (0.27, 0.375), (0.33, 0.375), (0.38, 0.40), (0.33, 0.415), (0.27, 0.415),
    (0.62, 0.40), (0.67, 0.375), (0.73, 0.375), (0.78, 0.40), (0.73, 0.415), (0.67, 0.415),
    (0.36, 0.78), (0.41, 0.755), (0.46, 0.745), (0.50, 0.75), (0.54, 0.745), (0.59, 0.755),
    (0.64, 0.78), (0.59, 0.81), (0.545, 0.825), (0.50, 0.83), (0.455, 0.825), (0.41, 0.81),
    (0.45, 0.775), (0.50, 0.777), (0.55, 0.775), (0.55, 0.785), (0.50, 0.79), (0.45, 0.785),
];

/// Coarse facial region of a landmark, used to color rendered crops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Brow,
    Nose,
    Eye,
    Mouth,
}

pub fn region(index: usize) -> Region {
    match index {
        0..=9 => Region::Brow,
        10..=18 => Region::Nose,
        19..=30 => Region::Eye,
        _ => Region::Mouth,
    }
}
