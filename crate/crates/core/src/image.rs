//! 8-bit RGB raster with PNG output and a content key.

use std::io::BufWriter;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Side length of every network input image.
pub const IMAGE_SIDE: usize = 224;

/// Interleaved RGB, row-major, `pixels.len() == width * height * 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for px in img.pixels.chunks_exact_mut(3) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        let i = (row * self.width + col) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Errors unless the image is exactly 224x224x3.
    pub fn check_network_input(&self) -> Result<()> {
        if self.width != IMAGE_SIDE || self.height != IMAGE_SIDE || self.pixels.len() != IMAGE_SIDE * IMAGE_SIDE * 3 {
            return Err(Error::Shape {
                expected: format!("{IMAGE_SIDE}x{IMAGE_SIDE}x3"),
                found: format!("{}x{}x{}", self.width, self.height, self.pixels.len() / (self.width * self.height).max(1)),
            });
        }
        Ok(())
    }

    /// `sha256:<hex>` over the dimensions and pixel bytes.
    pub fn content_key(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width as u32).to_le_bytes());
        h.update((self.height as u32).to_le_bytes());
        h.update(&self.pixels);
        format!("sha256:{}", hex::encode(h.finalize()))
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().map_err(|e| Error::Format(e.to_string()))?;
            w.write_image_data(&self.pixels).map_err(|e| Error::Format(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let bytes = self.encode_png()?;
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        std::io::Write::write_all(&mut w, &bytes).map_err(|e| Error::io(path, e))
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let dec = png::Decoder::new(std::io::BufReader::new(f));
        let mut reader = dec.read_info().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(Error::Format(format!("{}: expected 8-bit RGB", path.display())));
        }
        buf.truncate(info.buffer_size());
        Ok(Self {
            width: info.width as usize,
            height: info.height as usize,
            pixels: buf,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let mut img = RgbImage::new(5, 3);
        img.put(1, 4, [10, 20, 30]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        img.write_png(&p).unwrap();
        assert_eq!(RgbImage::read_png(&p).unwrap(), img);
    }

    #[test]
    fn content_key_tracks_pixels() {
        let a = RgbImage::new(4, 4);
        let mut b = a.clone();
        assert_eq!(a.content_key(), b.content_key());
        b.put(0, 0, [1, 0, 0]);
        assert_ne!(a.content_key(), b.content_key());
    }

    #[test]
    fn network_input_shape() {
        assert!(RgbImage::new(IMAGE_SIDE, IMAGE_SIDE).check_network_input().is_ok());
        assert!(RgbImage::new(223, IMAGE_SIDE).check_network_input().is_err());
    }
}
