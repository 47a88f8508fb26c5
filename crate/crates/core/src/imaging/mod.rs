//! Image types and the image-processing half of the pipeline.

mod colormap;
mod delta_t;
mod filter;
mod fusion;
pub mod io;
mod resize;

pub use colormap::{color_to_temp, temp_to_color};
pub use delta_t::{compute_delta_t, surroundings, SURROUND_RADIUS};
pub use filter::{median_denoise, unsharp_sharpen};
pub use fusion::{alpha_fuse, edge_overlay_msx, sobel_edges, DEFAULT_MSX_GAIN};
pub use resize::resize_bilinear;

use crate::{Error, Result};

/// Round half away from zero and saturate to 8 bits.
#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// 8-bit RGB image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRGB {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ImageRGB {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height * 3 {
            return Err(Error::shape(format!(
                "{width}x{height} RGB image needs {} bytes, got {}",
                width * height * 3,
                data.len()
            )));
        }
        Ok(ImageRGB {
            width,
            height,
            data,
        })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        ImageRGB {
            width,
            height,
            data: rgb.repeat(width * height),
        }
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        ImageRGB {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Channel value with coordinates clamped into the image (replicated
    /// border).
    #[inline]
    pub(crate) fn clamped(&self, x: isize, y: isize, c: usize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[(y * self.width + x) * 3 + c]
    }

    pub(crate) fn same_size(&self, other: &ImageRGB, what: &str) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::shape(format!(
                "{what}: image sizes differ ({}x{} vs {}x{})",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// Per-pixel temperature map in °C with the calibration range used to
/// render it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalField {
    width: usize,
    height: usize,
    temps: Vec<f64>,
    t_min: f64,
    t_max: f64,
}

impl ThermalField {
    pub fn new(width: usize, height: usize, temps: Vec<f64>, t_min: f64, t_max: f64) -> Result<Self> {
        check_bounds(t_min, t_max)?;
        if width == 0 || height == 0 || temps.len() != width * height {
            return Err(Error::shape(format!(
                "{width}x{height} thermal field needs {} samples, got {}",
                width * height,
                temps.len()
            )));
        }
        if let Some((i, t)) = temps
            .iter()
            .enumerate()
            .find(|(_, &t)| !(t_min..=t_max).contains(&t))
        {
            return Err(Error::domain(format!(
                "temperature {t} at ({}, {}) outside calibration range [{t_min}, {t_max}]",
                i % width,
                i / width
            )));
        }
        Ok(ThermalField {
            width,
            height,
            temps,
            t_min,
            t_max,
        })
    }

    pub fn uniform(width: usize, height: usize, t: f64, t_min: f64, t_max: f64) -> Result<Self> {
        Self::new(width, height, vec![t; width * height], t_min, t_max)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.temps[y * self.width + x]
    }

    /// Same field with every temperature shifted by `offset`; the
    /// calibration range moves with it.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.temps.iter().map(|t| t + offset).collect(),
            self.t_min + offset,
            self.t_max + offset,
        )
    }
}

pub(crate) fn check_bounds(t_min: f64, t_max: f64) -> Result<()> {
    if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
        return Err(Error::domain(format!(
            "calibration range requires t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    Ok(())
}

/// Boolean crack mask, `true` on crack pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrackMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl CrackMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::shape(format!(
                "{width}x{height} mask needs {} entries, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(CrackMask {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        CrackMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}
