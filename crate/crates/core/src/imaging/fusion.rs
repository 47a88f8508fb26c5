//! Combining a thermal render with a visible-light image of the same scene.

use super::{to_u8, ImageRGB};
use crate::{Error, Result};

pub const DEFAULT_MSX_GAIN: f64 = 64.0;

/// 50/50 blend: each channel is `round_half_away((thermal + visible) / 2)`.
pub fn alpha_fuse(thermal_render: &ImageRGB, visible: &ImageRGB) -> Result<ImageRGB> {
    thermal_render.same_size(visible, "alpha_fuse")?;
    let data = thermal_render
        .as_bytes()
        .iter()
        .zip(visible.as_bytes())
        .map(|(&a, &b)| ((u16::from(a) + u16::from(b) + 1) / 2) as u8)
        .collect();
    ImageRGB::new(thermal_render.width(), thermal_render.height(), data)
}

fn luminance(img: &ImageRGB) -> Vec<f64> {
    img.as_bytes()
        .chunks_exact(3)
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect()
}

/// Sobel gradient magnitude of the luminance, scaled so the strongest edge
/// is 1. A featureless image yields all zeros.
pub fn sobel_edges(img: &ImageRGB) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let lum = luminance(img);
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        lum[y * w + x]
    };
    let mut mag = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            mag.push(gx.hypot(gy));
        }
    }
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for m in &mut mag {
            *m /= max;
        }
    }
    mag
}

/// MSX-style overlay: brighten the thermal render by `gain` times the
/// normalised edge strength of the visible image.
pub fn edge_overlay_msx(thermal_render: &ImageRGB, visible: &ImageRGB, gain: f64) -> Result<ImageRGB> {
    thermal_render.same_size(visible, "edge_overlay_msx")?;
    if !(gain >= 0.0 && gain.is_finite()) {
        return Err(Error::domain(format!("edge gain must be non-negative, got {gain}")));
    }
    let edges = sobel_edges(visible);
    let data = thermal_render
        .as_bytes()
        .chunks_exact(3)
        .zip(&edges)
        .flat_map(|(p, &e)| {
            let boost = gain * e;
            [0, 1, 2].map(|c| to_u8(f64::from(p[c]) + boost))
        })
        .collect();
    ImageRGB::new(thermal_render.width(), thermal_render.height(), data)
}
