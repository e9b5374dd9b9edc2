//! Binary PGM images, Pearson correlation between images and bit-matrix
//! rendering of keystreams.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cipher::Key;
use crate::randstats::BitSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("not a binary PGM (expected magic P5, found {0:?})")]
    Magic(String),
    #[error("malformed PGM header: {0}")]
    Header(String),
    #[error("unsupported maxval {0} (only 255)")]
    MaxVal(u32),
    #[error("image dimensions must be nonzero, got {width}x{height}")]
    ZeroSize { width: usize, height: usize },
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image has zero pixel variance")]
    ZeroVariance,
    #[error("pixel buffer holds {found} bytes, {width}x{height} needs {expected}")]
    PixelCount { width: usize, height: usize, expected: usize, found: usize },
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(ImageError::PixelCount { width, height, expected, found: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &p in &self.pixels {
            h[p as usize] += 1;
        }
        h
    }
}

/// Cursor over the ASCII header; `#` starts a comment running to end of line.
struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Header(format!("missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Header(format!("{what} out of range")))
    }
}

pub fn read_pgm(data: &[u8]) -> Result<GrayImage, ImageError> {
    let magic = &data[..data.len().min(2)];
    if magic != b"P5" {
        return Err(ImageError::Magic(String::from_utf8_lossy(magic).into_owned()));
    }
    let mut header = HeaderReader { data, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(ImageError::MaxVal(maxval.min(u32::MAX as usize) as u32));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroSize { width, height });
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(header.pos) {
        Some(c) if c.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(ImageError::Header("missing whitespace after maxval".into())),
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| ImageError::Header("dimensions overflow".into()))?;
    let raster = &data[header.pos..];
    if raster.len() < expected {
        return Err(ImageError::Truncated { expected, found: raster.len() });
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
}

/// Canonical `P5\n<w> <h>\n255\n` header followed by the raster.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Pearson correlation over all pixels of two equal-size images.
pub fn corr2(a: &GrayImage, b: &GrayImage) -> Result<f64, ImageError> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(ImageError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let n = a.pixels.len() as f64;
    let sum = |img: &GrayImage| img.pixels.iter().map(|&p| p as u64).sum::<u64>() as f64;
    let (mean_a, mean_b) = (sum(a) / n, sum(b) / n);
    let (mut sab, mut saa, mut sbb) = (0.0f64, 0.0f64, 0.0f64);
    for (&pa, &pb) in a.pixels.iter().zip(&b.pixels) {
        let da = pa as f64 - mean_a;
        let db = pb as f64 - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(ImageError::ZeroVariance);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// XORs the raster with the key's keystream; dimensions are unchanged.
pub fn encrypt_image(key: &Key, img: &GrayImage) -> GrayImage {
    let mut out = img.clone();
    key.generator().apply_keystream(&mut out.pixels);
    out
}

/// Renders bits row by row: 1 is black (0), 0 is white (255). The last row
/// is padded with white.
pub fn render_bitmap(bits: &BitSequence, width: usize) -> Result<GrayImage, ImageError> {
    if width == 0 {
        return Err(ImageError::ZeroSize { width, height: 0 });
    }
    let height = bits.len().div_ceil(width);
    let mut pixels = vec![255u8; width * height];
    for (i, b) in bits.iter().enumerate() {
        if b == 1 {
            pixels[i] = 0;
        }
    }
    GrayImage::new(width, height, pixels)
}

/// `value count` rows for every gray level.
pub fn histogram_text(img: &GrayImage) -> String {
    let mut out = String::new();
    for (value, count) in img.histogram().iter().enumerate() {
        let _ = writeln!(out, "{value} {count}");
    }
    out
}
