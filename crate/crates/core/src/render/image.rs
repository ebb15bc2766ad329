//! Linear-radiance framebuffer and its 8-bit encodings.

use std::io::Write;
use std::path::Path;

use crate::math::Rgb;

use super::RenderError;

/// Display gamma applied when quantizing to 8 bits.
pub const DISPLAY_GAMMA: f64 = 2.2;

/// Row-major linear RGB radiance.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, pixels: vec![Rgb::ZERO; width as usize * height as usize] }
    }

    pub(crate) fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize);
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }

    /// Root-mean-square difference over all channels of all pixels.
    pub fn rmse(&self, other: &Image) -> Result<f64, RenderError> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(RenderError::InvalidArgument(format!(
                "image sizes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let sum: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| {
                let d = *a - *b;
                d.dot(d)
            })
            .sum();
        Ok((sum / (3 * self.pixels.len()) as f64).sqrt())
    }

    /// Gamma-encoded 8-bit RGB, row-major, three bytes per pixel.
    pub fn to_srgb8(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.to_array().map(encode_channel)).collect()
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.to_srgb8())?;
        out.flush()
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.pixels.len() * 3 + 32);
        self.write_ppm(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn save_ppm(&self, path: &Path) -> Result<(), RenderError> {
        std::fs::write(path, self.to_ppm_bytes()).map_err(|e| RenderError::Io(path.display().to_string(), e))
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RenderError> {
        let buf = image::RgbImage::from_raw(self.width, self.height, self.to_srgb8())
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| RenderError::Encode(path.display().to_string(), e.to_string()))
    }

    /// Picks PPM or PNG from the file extension (`.png` gives PNG, anything else PPM).
    pub fn save(&self, path: &Path) -> Result<(), RenderError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => self.save_png(path),
            _ => self.save_ppm(path),
        }
    }
}

fn encode_channel(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v.powf(1.0 / DISPLAY_GAMMA) * 255.0).round() as u8
}
