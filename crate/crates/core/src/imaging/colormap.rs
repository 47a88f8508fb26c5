//! Injective temperature ↔ colour lookup.
//!
//! Index `i ∈ 0..=255` maps to `(i, ⌊i/2⌋, 255 − i)`. Red carries the index,
//! so decoding is exact up to the 8-bit quantisation of the index.

use super::{check_bounds, ImageRGB, ThermalField};
use crate::{Error, Result};

#[inline]
fn lut(i: u8) -> [u8; 3] {
    [i, i / 2, 255 - i]
}

pub fn temp_to_color(field: &ThermalField) -> Result<ImageRGB> {
    let (t_min, t_max) = (field.t_min(), field.t_max());
    check_bounds(t_min, t_max)?;
    let span = t_max - t_min;
    let mut data = Vec::with_capacity(field.temps().len() * 3);
    for &t in field.temps() {
        let i = (255.0 * (t - t_min) / span).round().clamp(0.0, 255.0) as u8;
        data.extend_from_slice(&lut(i));
    }
    ImageRGB::new(field.width(), field.height(), data)
}

pub fn color_to_temp(img: &ImageRGB, t_min: f64, t_max: f64) -> Result<ThermalField> {
    check_bounds(t_min, t_max)?;
    let span = t_max - t_min;
    let mut temps = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let rgb = img.get(x, y);
            let expect = lut(rgb[0]);
            let off = |c: usize| (i16::from(rgb[c]) - i16::from(expect[c])).abs() > 1;
            if off(1) || off(2) {
                return Err(Error::MalformedColormap { x, y, rgb });
            }
            temps.push((t_min + f64::from(rgb[0]) / 255.0 * span).min(t_max));
        }
    }
    ThermalField::new(img.width(), img.height(), temps, t_min, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let f = ThermalField::new(3, 1, vec![20.0, 30.0, 25.0], 20.0, 30.0).unwrap();
        let img = temp_to_color(&f).unwrap();
        assert_eq!(img.get(0, 0), [0, 0, 255]);
        assert_eq!(img.get(1, 0), [255, 127, 0]);
        // 255 · 0.5 = 127.5 rounds away from zero to 128.
        assert_eq!(img.get(2, 0), [128, 64, 127]);
    }

    #[test]
    fn decode_known_pixel() {
        let img = ImageRGB::filled(1, 1, [0, 0, 255]);
        let f = color_to_temp(&img, 20.0, 30.0).unwrap();
        assert_eq!(f.get(0, 0), 20.0);
    }

    #[test]
    fn inconsistent_pixel_reports_position() {
        let mut img = ImageRGB::filled(3, 2, [0, 0, 255]);
        img.set(2, 1, [0, 200, 0]);
        match color_to_temp(&img, 20.0, 30.0) {
            Err(Error::MalformedColormap { x, y, rgb }) => {
                assert_eq!((x, y, rgb), (2, 1, [0, 200, 0]));
            }
            other => panic!("expected malformed colormap, got {other:?}"),
        }
    }

    #[test]
    fn tolerates_off_by_one_channels() {
        let img = ImageRGB::filled(1, 1, [100, 51, 154]);
        assert!(color_to_temp(&img, 0.0, 1.0).is_ok());
    }

    #[test]
    fn bad_bounds_rejected() {
        let img = ImageRGB::filled(1, 1, [0, 0, 255]);
        assert!(matches!(color_to_temp(&img, 5.0, 5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn roundtrip_within_half_step() {
        let temps: Vec<f64> = (0..1000).map(|i| 10.0 + 25.0 * (i as f64 / 999.0)).collect();
        let f = ThermalField::new(100, 10, temps, 10.0, 35.0).unwrap();
        let back = color_to_temp(&temp_to_color(&f).unwrap(), 10.0, 35.0).unwrap();
        let bound = 25.0 / 510.0 + 1e-12;
        for (a, b) in f.temps().iter().zip(back.temps()) {
            assert!((a - b).abs() <= bound);
        }
    }
}
