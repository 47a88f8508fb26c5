//! Temperature contrast between a crack and the ring of wall around it.

use super::{CrackMask, ThermalField};
use crate::{Error, Result};

/// Chebyshev radius of the dilation that defines a crack's surroundings.
pub const SURROUND_RADIUS: usize = 3;

/// Pixels within `radius` (8-connected) of the mask, excluding the mask.
pub fn surroundings(mask: &CrackMask, radius: usize) -> CrackMask {
    let (w, h) = (mask.width(), mask.height());
    // Separable square dilation: rows, then columns.
    let mut rows = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(w - 1);
                rows[y * w + lo..=y * w + hi].fill(true);
            }
        }
    }
    let mut ring = CrackMask::empty(w, h);
    for x in 0..w {
        for y in 0..h {
            if rows[y * w + x] {
                let lo = y.saturating_sub(radius);
                let hi = (y + radius).min(h - 1);
                for yy in lo..=hi {
                    ring.set(x, yy, true);
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                ring.set(x, y, false);
            }
        }
    }
    ring
}

/// |mean T over the crack − mean T over its surroundings|, in °C.
pub fn compute_delta_t(field: &ThermalField, mask: &CrackMask) -> Result<f64> {
    if field.width() != mask.width() || field.height() != mask.height() {
        return Err(Error::shape(format!(
            "mask is {}x{} but field is {}x{}",
            mask.width(),
            mask.height(),
            field.width(),
            field.height()
        )));
    }
    if mask.count() == 0 {
        return Err(Error::DegenerateGeometry("crack mask is empty".into()));
    }
    let ring = surroundings(mask, SURROUND_RADIUS);
    let mean_over = |m: &CrackMask| {
        let (sum, n) = field
            .temps()
            .iter()
            .zip(m.bits())
            .filter(|(_, &b)| b)
            .fold((0.0, 0usize), |(s, n), (&t, _)| (s + t, n + 1));
        (n > 0).then(|| sum / n as f64)
    };
    let inside = mean_over(mask).expect("mask is non-empty");
    let outside = mean_over(&ring)
        .ok_or_else(|| Error::DegenerateGeometry("crack has no surrounding pixels".into()))?;
    Ok((inside - outside).abs())
}
