//! PNG persistence.
//!
//! RGB images are 8-bit RGB PNGs. A thermal field is a 16-bit grayscale PNG
//! with `v = round(65535·(T − t_min)/(t_max − t_min))` plus a JSON sidecar
//! (`<name>.json`, next to `<name>.png`) holding the calibration range.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma, RgbImage};
use serde::{Deserialize, Serialize};

use super::{ImageRGB, ThermalField};
use crate::{Error, Result};

fn image_err(path: &Path, source: image::ImageError) -> Error {
    match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        other => Error::Image {
            path: path.to_path_buf(),
            source: other,
        },
    }
}

pub fn save_png(img: &ImageRGB, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = RgbImage::from_raw(img.width() as u32, img.height() as u32, img.as_bytes().to_vec())
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}

/// Load any PNG as 8-bit RGB.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageRGB> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| image_err(path, e))?.into_rgb8();
    let (w, h) = img.dimensions();
    ImageRGB::new(w as usize, h as usize, img.into_raw())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub t_min: f64,
    pub t_max: f64,
}

pub fn sidecar_path(png: &Path) -> PathBuf {
    png.with_extension("json")
}

pub fn save_thermal(field: &ThermalField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let span = field.t_max() - field.t_min();
    let raw: Vec<u16> = field
        .temps()
        .iter()
        .map(|&t| (65535.0 * (t - field.t_min()) / span).round().clamp(0.0, 65535.0) as u16)
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(field.width() as u32, field.height() as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_err(path, e))?;
    let cal = Calibration {
        t_min: field.t_min(),
        t_max: field.t_max(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&cal).expect("calibration serialises");
    fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

pub fn load_thermal(path: impl AsRef<Path>) -> Result<ThermalField> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let cal: Calibration = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: side.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    super::check_bounds(cal.t_min, cal.t_max)?;
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let gray = match img {
        image::DynamicImage::ImageLuma16(g) => g,
        other => {
            return Err(Error::Validation(format!(
                "{}: expected a 16-bit grayscale PNG, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let (w, h) = gray.dimensions();
    let span = cal.t_max - cal.t_min;
    let temps = gray
        .into_raw()
        .into_iter()
        .map(|v| (cal.t_min + f64::from(v) / 65535.0 * span).min(cal.t_max))
        .collect();
    ThermalField::new(w as usize, h as usize, temps, cal.t_min, cal.t_max)
}
