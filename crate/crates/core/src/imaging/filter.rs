//! 3×3 neighbourhood filters with replicated borders.

use super::{to_u8, ImageRGB};

/// Per-channel 3×3 median.
pub fn median_denoise(img: &ImageRGB) -> ImageRGB {
    let mut out = img.clone();
    let mut win = [0u8; 9];
    for y in 0..img.height() {
        for x in 0..img.width() {
            let mut px = [0u8; 3];
            for (c, p) in px.iter_mut().enumerate() {
                let mut k = 0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        win[k] = img.clamped(x as isize + dx, y as isize + dy, c);
                        k += 1;
                    }
                }
                win.sort_unstable();
                *p = win[4];
            }
            out.set(x, y, px);
        }
    }
    out
}

const GAUSS: [[f64; 3]; 3] = [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]];

/// Unsharp mask: `I + amount·(I − G∗I)` with the 3×3 binomial blur `G`.
///
/// # Panics
/// If `amount` is negative or not finite.
pub fn unsharp_sharpen(img: &ImageRGB, amount: f64) -> ImageRGB {
    assert!(
        amount >= 0.0 && amount.is_finite(),
        "sharpen amount must be a finite non-negative number"
    );
    let mut out = img.clone();
    if amount == 0.0 {
        return out;
    }
    for y in 0..img.height() {
        for x in 0..img.width() {
            let mut px = [0u8; 3];
            for (c, p) in px.iter_mut().enumerate() {
                let mut blur = 0.0;
                for (ky, row) in GAUSS.iter().enumerate() {
                    for (kx, &k) in row.iter().enumerate() {
                        let v = img.clamped(x as isize + kx as isize - 1, y as isize + ky as isize - 1, c);
                        blur += k * f64::from(v);
                    }
                }
                let orig = f64::from(img.get(x, y)[c]);
                *p = to_u8(orig + amount * (orig - blur / 16.0));
            }
            out.set(x, y, px);
        }
    }
    out
}
