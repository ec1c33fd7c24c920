use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::session::eeg::{csv_err, push_fixed};

pub const N_LANDMARKS: usize = 49;

/// Smallest accepted face detection, in pixels per side.
pub const MIN_FACE_SIDE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl FaceBox {
    pub fn diagonal(&self) -> f64 {
        self.w.hypot(self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    pub timestamp_s: f64,
    pub face_box: FaceBox,
    /// Empty for frames where detection failed.
    pub points: Vec<(f64, f64)>,
    pub valid: bool,
}

impl LandmarkFrame {
    /// A frame is usable when flagged valid, carries 49 finite points and a
    /// face box of at least 50x50 pixels.
    pub fn is_usable(&self) -> bool {
        self.valid
            && self.points.len() == N_LANDMARKS
            && self.face_box.w >= MIN_FACE_SIDE
            && self.face_box.h >= MIN_FACE_SIDE
            && self.points.iter().all(|(x, y)| x.is_finite() && y.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkTrack {
    pub frames: Vec<LandmarkFrame>,
}

impl LandmarkTrack {
    pub fn new(frames: Vec<LandmarkFrame>) -> Result<Self> {
        for w in frames.windows(2) {
            if !(w[1].timestamp_s > w[0].timestamp_s) {
                return Err(Error::Config(format!(
                    "landmark timestamps not strictly increasing at {} s",
                    w[1].timestamp_s
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn usable_frames(&self) -> impl Iterator<Item = &LandmarkFrame> {
        self.frames.iter().filter(|f| f.is_usable())
    }

    /// Frames whose timestamp falls in `[start_s, end_s)`.
    pub fn window(&self, start_s: f64, end_s: f64) -> LandmarkTrack {
        LandmarkTrack {
            frames: self
                .frames
                .iter()
                .filter(|f| f.timestamp_s >= start_s && f.timestamp_s < end_s)
                .cloned()
                .collect(),
        }
    }
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = ["timestamp_s", "valid", "box_x", "box_y", "box_w", "box_h"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 0..N_LANDMARKS {
        h.push(format!("p{i:02}_x"));
        h.push(format!("p{i:02}_y"));
    }
    h
}

/// Reads a landmark CSV: `timestamp_s,valid,box_x,box_y,box_w,box_h`
/// followed by `pNN_x,pNN_y` for the 49 points. Point fields may be empty
/// on invalid frames.
pub fn read_landmarks_csv(path: &Path) -> Result<LandmarkTrack> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let expected = header();
    let got: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("landmark header must be `{}`...", expected[..8].join(",")),
        });
    }
    let mut frames = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        let num = |idx: usize| -> Result<f64> {
            rec[idx].parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("field `{}` is not a number: `{}`", expected[idx], &rec[idx]),
            })
        };
        let valid = match &rec[1] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("valid flag must be 0/1, got `{other}`"),
                })
            }
        };
        let face_box = FaceBox {
            x: num(2)?,
            y: num(3)?,
            w: num(4)?,
            h: num(5)?,
        };
        let has_points = !rec[6].is_empty();
        let mut points = Vec::new();
        if has_points {
            for p in 0..N_LANDMARKS {
                points.push((num(6 + 2 * p)?, num(7 + 2 * p)?));
            }
        } else if valid {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: "valid frame without landmark points".into(),
            });
        }
        let mut frame = LandmarkFrame {
            timestamp_s: num(0)?,
            face_box,
            points,
            valid,
        };
        if frame.valid && !frame.is_usable() {
            log::warn!(
                "{}:{line}: frame below minimum face size or non-finite, marked invalid",
                path.display()
            );
            frame.valid = false;
        }
        frames.push(frame);
    }
    LandmarkTrack::new(frames).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_landmarks_csv(path: &Path, track: &LandmarkTrack) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header().join(",")).map_err(io)?;
    let mut line = String::new();
    for f in &track.frames {
        line.clear();
        push_fixed(&mut line, f.timestamp_s);
        line.push_str(if f.valid { ",1" } else { ",0" });
        for v in [f.face_box.x, f.face_box.y, f.face_box.w, f.face_box.h] {
            line.push(',');
            push_fixed(&mut line, v);
        }
        if f.points.is_empty() {
            for _ in 0..2 * N_LANDMARKS {
                line.push(',');
            }
        } else {
            for &(x, y) in &f.points {
                line.push(',');
                push_fixed(&mut line, x);
                line.push(',');
                push_fixed(&mut line, y);
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64, valid: bool) -> LandmarkFrame {
        LandmarkFrame {
            timestamp_s: t,
            face_box: FaceBox { x: 10.0, y: 20.0, w: 120.0, h: 140.0 },
            points: if valid {
                (0..N_LANDMARKS).map(|i| (30.0 + i as f64, 50.0 + 0.5 * i as f64)).collect()
            } else {
                Vec::new()
            },
            valid,
        }
    }

    #[test]
    fn round_trip_with_invalid_frames() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lm.csv");
        let track = LandmarkTrack::new(vec![frame(0.0, true), frame(0.1, false), frame(0.2, true)]).unwrap();
        write_landmarks_csv(&p, &track).unwrap();
        let back = read_landmarks_csv(&p).unwrap();
        assert_eq!(back, track);
        assert_eq!(back.usable_frames().count(), 2);
    }

    #[test]
    fn non_increasing_timestamps_rejected() {
        assert!(LandmarkTrack::new(vec![frame(0.1, true), frame(0.1, true)]).is_err());
    }

    #[test]
    fn small_face_box_is_not_usable() {
        let mut f = frame(0.0, true);
        f.face_box.w = 49.0;
        assert!(!f.is_usable());
    }
}
