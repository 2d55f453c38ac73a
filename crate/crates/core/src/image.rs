//! Grayscale raster type and its PGM (P5) / PNG codecs.
//!
//! Brightness is stored as `f64` in `[0, 1]`; 8-bit files map linearly
//! `0..=255 -> 0.0..=1.0`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major grayscale image with brightness values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidParameter(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(col, row)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Clamp-to-edge access.
    #[inline]
    pub fn get_clamped(&self, col: isize, row: isize) -> f64 {
        let c = col.clamp(0, self.width as isize - 1) as usize;
        let r = row.clamp(0, self.height as isize - 1) as usize;
        self.pixels[r * self.width + c]
    }

    /// Rotates the raster by 90 degrees clockwise on screen.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        for row in 0..h {
            for col in 0..w {
                // (col, row) -> (h - 1 - row, col) in a h-wide image
                out[col * h + (h - 1 - row)] = self.pixels[row * w + col];
            }
        }
        GrayImage { width: h, height: w, pixels: out }
    }

    pub fn mirror_horizontal(&self) -> GrayImage {
        let mut out = self.pixels.clone();
        for row in out.chunks_mut(self.width) {
            row.reverse();
        }
        GrayImage { width: self.width, height: self.height, pixels: out }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| (v * 255.0).round() as u8).collect()
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }

    /// Reads a PGM or PNG file, dispatching on the magic bytes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::decode(&bytes)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"P5") {
            decode_pgm(bytes)
        } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
            decode_png(bytes)
        } else {
            Err(Error::Decode("not a binary PGM (P5) or PNG file".into()))
        }
    }

    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_u8());
        out
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        encode_png_gray(self.width, self.height, &self.to_u8())
    }

    /// Writes PNG when the extension is `.png`, PGM otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        let bytes = if is_png { self.encode_png()? } else { self.encode_pgm() };
        fs::write(path, bytes)?;
        Ok(())
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and `#` comments may separate header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Decode("truncated PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode("bad PGM header number".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Decode(format!("unsupported PGM maxval {maxval}")));
    }
    // exactly one whitespace byte before the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Decode("missing whitespace after PGM header".into()));
    }
    pos += 1;
    let raster =
        bytes.get(pos..pos + width * height).ok_or_else(|| Error::Decode("truncated PGM raster".into()))?;
    let scale = maxval as f64;
    GrayImage::new(width, height, raster.iter().map(|&b| (f64::from(b) / scale).min(1.0)).collect())
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| Error::Decode(e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Decode(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let luma: Vec<f64> = match info.color_type {
        png::ColorType::Grayscale => data.iter().map(|&b| f64::from(b) / 255.0).collect(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).map(|p| f64::from(p[0]) / 255.0).collect(),
        png::ColorType::Rgb | png::ColorType::Rgba => {
            let step = if info.color_type == png::ColorType::Rgb { 3 } else { 4 };
            data.chunks_exact(step)
                .map(|p| {
                    let y = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
                    (y / 255.0).clamp(0.0, 1.0)
                })
                .collect()
        }
        png::ColorType::Indexed => {
            return Err(Error::Decode("palette PNG was not expanded".into()));
        }
    };
    GrayImage::new(w, h, luma)
}

pub(crate) fn encode_png_gray(width: usize, height: usize, data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(BufWriter::new(&mut out), width as u32, height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(data).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
    }
    Ok(out)
}

/// Palette PNG: `indices` are palette entries, `palette` is packed RGB.
pub(crate) fn encode_png_indexed(
    width: usize,
    height: usize,
    indices: &[u8],
    palette: &[u8],
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut w = BufWriter::new(&mut out);
        let mut encoder = png::Encoder::new(&mut w, width as u32, height as u32);
        encoder.set_color(png::ColorType::Indexed);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_palette(palette.to_vec());
        let mut writer = encoder.write_header().map_err(png_err)?;
        writer.write_image_data(indices).map_err(png_err)?;
        writer.finish().map_err(png_err)?;
        w.flush()?;
    }
    Ok(out)
}

fn png_err(e: png::EncodingError) -> Error {
    Error::Decode(e.to_string())
}
