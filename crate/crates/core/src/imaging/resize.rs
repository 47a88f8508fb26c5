use super::{to_u8, ImageRGB};
use crate::{Error, Result};

/// Source coordinate for output index `i` under align-corners sampling.
fn source_coord(i: usize, n_in: usize, n_out: usize) -> f64 {
    if n_out == 1 {
        (n_in as f64 - 1.0) / 2.0
    } else {
        i as f64 * (n_in as f64 - 1.0) / (n_out as f64 - 1.0)
    }
}

/// Per-axis lookup: (lower index, upper index, weight of upper).
fn taps(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    (0..n_out)
        .map(|i| {
            let s = source_coord(i, n_in, n_out);
            let lo = (s.floor() as usize).min(n_in - 1);
            let hi = (lo + 1).min(n_in - 1);
            (lo, hi, s - lo as f64)
        })
        .collect()
}

/// Align-corners bilinear resize to exactly `out_w` × `out_h`.
pub fn resize_bilinear(img: &ImageRGB, out_w: usize, out_h: usize) -> Result<ImageRGB> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::domain(format!(
            "resize target must be positive, got {out_w}x{out_h}"
        )));
    }
    if out_w == img.width() && out_h == img.height() {
        return Ok(img.clone());
    }
    let xt = taps(img.width(), out_w);
    let yt = taps(img.height(), out_h);
    let mut data = Vec::with_capacity(out_w * out_h * 3);
    for &(y0, y1, fy) in &yt {
        for &(x0, x1, fx) in &xt {
            let (p00, p01) = (img.get(x0, y0), img.get(x1, y0));
            let (p10, p11) = (img.get(x0, y1), img.get(x1, y1));
            for c in 0..3 {
                let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p01[c]) * fx;
                let bot = f64::from(p10[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
                data.push(to_u8(top * (1.0 - fy) + bot * fy));
            }
        }
    }
    ImageRGB::new(out_w, out_h, data)
}
