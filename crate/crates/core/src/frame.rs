//! Image grids: observed frames and per-pixel label masks.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::mog::{ColorMode, PixelValue};
use crate::segment::SemanticLabel;

/// Row-major `width x height` grid of pixel values sharing one color mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    mode: ColorMode,
    pixels: Vec<PixelValue>,
}

impl Frame {
    pub fn new(width: usize, height: usize, mode: ColorMode, pixels: Vec<PixelValue>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::usage(format!("frame dimensions must be positive, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::usage(format!(
                "{}x{} frame needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| p.mode() != mode) {
            return Err(Error::usage("pixel dimension differs from the frame's color mode"));
        }
        Ok(Frame {
            width,
            height,
            mode,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: PixelValue) -> Result<Self> {
        Self::new(width, height, value.mode(), vec![value; width * height])
    }

    /// Interleaved 8-bit samples, `d` per pixel.
    pub fn from_bytes(width: usize, height: usize, mode: ColorMode, bytes: &[u8]) -> Result<Self> {
        let d = mode.dim();
        if bytes.len() != width * height * d {
            return Err(Error::usage(format!(
                "{}x{}x{} frame needs {} bytes, got {}",
                width,
                height,
                d,
                width * height * d,
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(d)
            .map(|c| PixelValue::from_bytes(mode, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, mode, pixels)
    }

    /// Interleaved samples rounded to the nearest level.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.as_slice().iter().map(|v| v.round().clamp(0.0, 255.0) as u8))
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn pixels(&self) -> &[PixelValue] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> &PixelValue {
        &self.pixels[y * self.width + x]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: PixelValue) -> Result<()> {
        if value.mode() != self.mode {
            return Err(Error::usage("pixel dimension differs from the frame's color mode"));
        }
        self.pixels[y * self.width + x] = value;
        Ok(())
    }

    pub(crate) fn check_shape(&self, width: usize, height: usize, mode: ColorMode) -> Result<()> {
        if self.width != width || self.height != height || self.mode != mode {
            return Err(Error::usage(format!(
                "frame is {}x{} {:?}, expected {}x{} {:?}",
                self.width, self.height, self.mode, width, height, mode
            )));
        }
        Ok(())
    }

    /// Frame built from real-valued vectors, clamped into the sensor range.
    pub fn from_vectors(width: usize, height: usize, mode: ColorMode, values: &[Vector]) -> Result<Self> {
        Self::new(width, height, mode, values.iter().map(|v| PixelValue::clamped(*v)).collect())
    }
}

/// Row-major grid of semantic labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<SemanticLabel>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<SemanticLabel>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::usage(format!(
                "{}x{} mask cannot hold {} labels",
                width,
                height,
                labels.len()
            )));
        }
        Ok(LabelMask { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: SemanticLabel) -> Result<Self> {
        Self::new(width, height, vec![label; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> SemanticLabel {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: SemanticLabel) {
        self.labels[y * self.width + x] = label;
    }

    pub fn count(&self, label: SemanticLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    pub(crate) fn check_shape(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::usage(format!(
                "mask is {}x{}, expected {}x{}",
                self.width, self.height, width, height
            )));
        }
        Ok(())
    }
}
