//! Face crops rendered from landmarks.
//!
//! Without video frames, the face path feeds the embedding provider a
//! schematic crop: the face box is mapped onto a 224x224 canvas and every
//! landmark is drawn as a filled disk colored by facial region. Landmark
//! motion therefore reaches the embedding exactly as it would through pixels.

use crate::face::scheme::{region, Region};
use crate::image::{RgbImage, IMAGE_SIDE};
use crate::session::landmarks::LandmarkFrame;

const BACKGROUND: [u8; 3] = [32, 32, 32];
const RADIUS: f64 = 4.0;

fn color(r: Region) -> [u8; 3] {
    match r {
        Region::Brow => [230, 180, 60],
        Region::Nose => [200, 120, 90],
        Region::Eye => [80, 160, 230],
        Region::Mouth => [220, 60, 80],
    }
}

/// `None` for frames that are not usable.
pub fn render_face_crop(frame: &LandmarkFrame) -> Option<RgbImage> {
    if !frame.is_usable() {
        return None;
    }
    let side = IMAGE_SIDE as f64;
    let b = frame.face_box;
    let mut img = RgbImage::filled(IMAGE_SIDE, IMAGE_SIDE, BACKGROUND);
    for (i, &(x, y)) in frame.points.iter().enumerate() {
        let u = (x - b.x) / b.w * side;
        let v = (y - b.y) / b.h * side;
        let rgb = color(region(i));
        let r0 = (v - RADIUS).floor().max(0.0) as usize;
        let r1 = ((v + RADIUS).ceil().max(0.0) as usize).min(IMAGE_SIDE);
        let c0 = (u - RADIUS).floor().max(0.0) as usize;
        let c1 = ((u + RADIUS).ceil().max(0.0) as usize).min(IMAGE_SIDE);
        for row in r0..r1 {
            for col in c0..c1 {
                let dy = row as f64 + 0.5 - v;
                let dx = col as f64 + 0.5 - u;
                if dx * dx + dy * dy <= RADIUS * RADIUS {
                    img.put(row, col, rgb);
                }
            }
        }
    }
    Some(img)
}
