//! The 14-channel headset montage and its frozen 2-D electrode positions.
//!
//! Positions come from idealized 10-20 spherical angles (azimuth from the
//! nose, positive toward the right ear; polar angle from the vertex)
//! projected azimuthal-equidistantly: `r = polar / POLAR_AT_RIM`. The head
//! disk rim therefore sits at a polar angle of 115 degrees, so the
//! equatorial electrodes (T7, O1, ...) land at r = 0.8.

use serde::Serialize;

pub const N_CHANNELS: usize = 14;

pub const CHANNEL_NAMES: [&str; N_CHANNELS] = [
    "AF3", "AF4", "F3", "F4", "F7", "F8", "FC5", "FC6", "P7", "P8", "T7", "T8", "O1", "O2",
];

/// Polar angle (degrees) mapped onto the unit-disk rim.
pub const POLAR_AT_RIM: f64 = 115.0;

/// (azimuth, polar) in degrees, canonical channel order.
const SPHERICAL_DEG: [(f64, f64); N_CHANNELS] = [
    (-23.0, 74.0),   // AF3
    (23.0, 74.0),    // AF4
    (-40.0, 62.0),   // F3
    (40.0, 62.0),    // F4
    (-54.0, 92.0),   // F7
    (54.0, 92.0),    // F8
    (-69.0, 73.0),   // FC5
    (69.0, 73.0),    // FC6
    (-126.0, 92.0),  // P7
    (126.0, 92.0),   // P8
    (-90.0, 92.0),   // T7
    (90.0, 92.0),    // T8
    (-162.0, 92.0),  // O1
    (162.0, 92.0),   // O2
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelLayout {
    pub names: Vec<String>,
    /// (x, y) with +x toward the right ear and +y toward the nose.
    pub positions_2d: Vec<(f64, f64)>,
}

impl ChannelLayout {
    /// The canonical Emotiv-style montage.
    pub fn standard() -> Self {
        let positions_2d = SPHERICAL_DEG
            .iter()
            .map(|&(az, polar)| {
                let r = polar / POLAR_AT_RIM;
                let a = az.to_radians();
                (r * a.sin(), r * a.cos())
            })
            .collect();
        Self {
            names: CHANNEL_NAMES.iter().map(|s| s.to_string()).collect(),
            positions_2d,
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl Default for ChannelLayout {
    fn default() -> Self {
        Self::standard()
    }
}

/// Index of a canonical channel name. Panics on unknown names; intended for
/// compile-time-known labels.
pub fn channel_index(name: &str) -> usize {
    CHANNEL_NAMES
        .iter()
        .position(|n| *n == name)
        .unwrap_or_else(|| panic!("unknown channel {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_layout_invariants() {
        let l = ChannelLayout::standard();
        assert_eq!(l.len(), 14);
        for &(x, y) in &l.positions_2d {
            assert!(x * x + y * y <= 1.0);
        }
        for i in 0..14 {
            for j in i + 1..14 {
                let (a, b) = (l.positions_2d[i], l.positions_2d[j]);
                assert!((a.0 - b.0).hypot(a.1 - b.1) > 0.05, "{i} {j}");
            }
        }
    }

    #[test]
    fn hemispheres_and_front_back() {
        let l = ChannelLayout::standard();
        let p = |n: &str| l.positions_2d[channel_index(n)];
        assert!(p("T7").0 < 0.0 && p("T8").0 > 0.0);
        assert!(p("AF3").1 > 0.0 && p("O1").1 < 0.0);
        assert!((p("T8").0 - 0.8).abs() < 1e-12);
    }
}
