//! Procedural crack scenes with known ground truth.
//!
//! A sample is a smooth wall temperature field with sensor noise, a crack
//! drawn as a seeded random walk of varying width, and a temperature offset
//! on the crack whose magnitude is drawn from the requested level's band.
//! The field is rendered through the radiometric colormap and, depending on
//! the source kind, fused with or embossed by a synthetic visible-light image
//! of the same wall.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    classify_delta_t, save_manifest, stratified_split, CrackLevel, Manifest, SampleRecord,
    SourceKind, Split, SplitRatios,
};
use crate::imaging::{
    alpha_fuse, compute_delta_t, edge_overlay_msx, io, temp_to_color, to_u8, CrackMask, ImageRGB,
    ThermalField, DEFAULT_MSX_GAIN,
};
use crate::rng::{derive_seed, seeded_rng};
use crate::{Error, Result};

/// Attempts at drawing a crack offset before giving up on a sample.
pub const MAX_DELTA_RETRIES: usize = 8;

pub const DEFAULT_CALIBRATION_SPAN: f64 = 12.0;

const NOISE_SIGMA: f64 = 0.15;
const BORDER: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub width: usize,
    pub height: usize,
    /// Width of the rendered calibration range, °C. The range is centred on
    /// the wall's mean temperature, rounded to whole degrees.
    pub calibration_span: f64,
    /// Draw crack offsets right up to the class boundaries instead of
    /// keeping a safety margin.
    pub hard_boundaries: bool,
    pub msx_gain: f64,
    pub split: SplitRatios,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            width: 160,
            height: 120,
            calibration_span: DEFAULT_CALIBRATION_SPAN,
            hard_boundaries: false,
            msx_gain: DEFAULT_MSX_GAIN,
            split: SplitRatios::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub image: ImageRGB,
    pub field: ThermalField,
    pub mask: CrackMask,
    pub delta_t: f64,
}

/// Band the crack offset magnitude is drawn from.
fn offset_band(level: CrackLevel, hard: bool) -> (f64, f64) {
    match (level, hard) {
        (CrackLevel::Level1, false) => (0.5, 1.8),
        (CrackLevel::Level2, false) => (2.2, 3.8),
        (CrackLevel::Level3, false) => (4.2, 8.0),
        (CrackLevel::Level1, true) => (0.0, 2.0),
        (CrackLevel::Level2, true) => (2.0, 4.0),
        (CrackLevel::Level3, true) => (4.0, 8.0),
    }
}

fn background(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<f64> {
    let base = rng.random_range(18.0..28.0);
    let theta = rng.random_range(0.0..TAU);
    let ramp = rng.random_range(0.0..1.5);
    let wave_amp = rng.random_range(0.0..0.5);
    let wave_freq = rng.random_range(0.5..1.5);
    let wave_phase = rng.random_range(0.0..TAU);
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");

    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let diag = (w as f64).hypot(h as f64);
    let (c, s) = (theta.cos(), theta.sin());
    let mut temps = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = (x as f64, y as f64);
            let t = base
                + ramp * ((fx - cx) * c + (fy - cy) * s) / diag
                + wave_amp * (TAU * wave_freq * fx / w as f64 + wave_phase).sin()
                + noise.sample(rng);
            temps.push(t);
        }
    }
    temps
}

fn paint_disk(mask: &mut CrackMask, cx: f64, cy: f64, r: f64) {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let x0 = (cx - r).floor() as isize;
    let x1 = (cx + r).ceil() as isize;
    let y0 = (cy - r).floor() as isize;
    let y1 = (cy + r).ceil() as isize;
    for py in y0.max(0)..=y1.min(h - 1) {
        for px in x0.max(0)..=x1.min(w - 1) {
            let (dx, dy) = (px as f64 - cx, py as f64 - cy);
            if dx * dx + dy * dy <= r * r + 1e-9 {
                mask.set(px as usize, py as usize, true);
            }
        }
    }
    let (nx, ny) = (cx.round() as isize, cy.round() as isize);
    if (0..w).contains(&nx) && (0..h).contains(&ny) {
        mask.set(nx as usize, ny as usize, true);
    }
}

/// Random-walk polyline with per-vertex widths of 1–4 px.
fn crack(rng: &mut ChaCha8Rng, w: usize, h: usize) -> CrackMask {
    const SEGMENTS: usize = 12;
    let (fw, fh) = (w as f64, h as f64);
    let length = rng.random_range(0.5..0.7) * fw.min(fh * 4.0 / 3.0);
    let step = length / SEGMENTS as f64;
    let mut heading = rng.random_range(0.0..TAU);
    let turn = Normal::new(0.0, 0.3).expect("valid sigma");

    let clamp_x = |x: f64| x.clamp(BORDER, (fw - 1.0 - BORDER).max(BORDER));
    let clamp_y = |y: f64| y.clamp(BORDER, (fh - 1.0 - BORDER).max(BORDER));
    let jx = rng.random_range(-0.1..0.1) * fw;
    let jy = rng.random_range(-0.1..0.1) * fh;
    let mut p = (
        clamp_x(fw / 2.0 - length / 2.0 * heading.cos() + jx),
        clamp_y(fh / 2.0 - length / 2.0 * heading.sin() + jy),
    );
    let mut width = rng.random_range(1.0..4.0);

    let mut mask = CrackMask::empty(w, h);
    for _ in 0..SEGMENTS {
        heading += turn.sample(rng);
        let next = (
            clamp_x(p.0 + step * heading.cos()),
            clamp_y(p.1 + step * heading.sin()),
        );
        let next_width = rng.random_range(1.0..4.0);
        let seg_len = (next.0 - p.0).hypot(next.1 - p.1);
        let n = (seg_len / 0.5).ceil().max(1.0) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let r = (width + (next_width - width) * t) / 2.0;
            paint_disk(&mut mask, p.0 + (next.0 - p.0) * t, p.1 + (next.1 - p.1) * t, r);
        }
        p = next;
        width = next_width;
    }
    mask
}

/// Plaster-like wall photograph with the crack drawn as a dark line.
pub fn visible_texture(rng: &mut ChaCha8Rng, mask: &CrackMask) -> ImageRGB {
    let (w, h) = (mask.width(), mask.height());
    let tint = [
        rng.random_range(170.0..200.0),
        rng.random_range(158.0..185.0),
        rng.random_range(138.0..165.0),
    ];
    let f1 = rng.random_range(1.0..3.0);
    let f2 = rng.random_range(1.0..3.0);
    let (p1, p2) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            let mottle = 6.0 * (TAU * f1 * u + p1).sin() * (TAU * f2 * v + p2).cos();
            let grain: f64 = rng.random_range(-5.0..5.0);
            let shade = if mask.get(x, y) { 0.45 } else { 1.0 };
            for t in tint {
                data.push(to_u8((t + mottle + grain) * shade));
            }
        }
    }
    ImageRGB::new(w, h, data).expect("buffer sized to mask")
}

/// Generate one labelled sample. Identical arguments give identical output.
pub fn synth_sample(
    seed: u64,
    level: CrackLevel,
    source_kind: SourceKind,
    opts: &SynthOptions,
) -> Result<SynthSample> {
    let (w, h) = (opts.width, opts.height);
    if w < 2 * BORDER as usize + 2 || h < 2 * BORDER as usize + 2 {
        return Err(Error::domain(format!("sample size {w}x{h} too small")));
    }
    let mut rng = seeded_rng(seed);
    let bg = background(&mut rng, w, h);
    let mask = crack(&mut rng, w, h);
    let visible = visible_texture(&mut rng, &mask);

    let span = opts.calibration_span;
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::domain(format!("calibration span {span} must be positive")));
    }
    let mean = bg.iter().sum::<f64>() / bg.len() as f64;
    let t_min = (mean - span / 2.0).round();
    let t_max = t_min + span;
    let (lo, hi) = offset_band(level, opts.hard_boundaries);
    for _ in 0..MAX_DELTA_RETRIES {
        let magnitude = rng.random_range(lo..hi);
        let delta = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        let temps = bg
            .iter()
            .zip(mask.bits())
            .map(|(&t, &on)| (if on { t + delta } else { t }).clamp(t_min, t_max))
            .collect();
        let field = ThermalField::new(w, h, temps, t_min, t_max)?;
        let delta_t = compute_delta_t(&field, &mask)?;
        if classify_delta_t(delta_t)? != level {
            continue;
        }
        let thermal = temp_to_color(&field)?;
        let image = match source_kind {
            SourceKind::Thermal => thermal,
            SourceKind::Visible => visible,
            SourceKind::Fusion => alpha_fuse(&thermal, &visible)?,
            SourceKind::MsxLike => edge_overlay_msx(&thermal, &visible, opts.msx_gain)?,
        };
        return Ok(SynthSample {
            image,
            field,
            mask,
            delta_t,
        });
    }
    Err(Error::Generation(format!(
        "seed {seed}: measured ΔT stayed outside {level} after {MAX_DELTA_RETRIES} draws"
    )))
}

fn create_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

/// Generate `n_per_level` samples of each level under `out_dir`, split them,
/// and write `out_dir/manifest.jsonl`.
///
/// Layout: `images/l{level}_{index:05}.png` (the rendered sample) and
/// `thermal/l{level}_{index:05}.png` + `.json` (the ground-truth field).
pub fn synth_dataset(
    seed: u64,
    n_per_level: usize,
    source_kind: SourceKind,
    out_dir: impl AsRef<Path>,
    opts: &SynthOptions,
) -> Result<Manifest> {
    if n_per_level == 0 {
        return Err(Error::domain("n_per_level must be positive"));
    }
    opts.split.validate()?;
    let out_dir = out_dir.as_ref();
    let (img_dir, th_dir) = (out_dir.join("images"), out_dir.join("thermal"));
    create_dir(&img_dir)?;
    create_dir(&th_dir)?;

    let mut records = Vec::with_capacity(3 * n_per_level);
    for level in CrackLevel::ALL {
        for i in 0..n_per_level {
            let sample_seed = derive_seed(seed, &[u64::from(level.number()), i as u64]);
            let s = synth_sample(sample_seed, level, source_kind, opts)?;
            let name = format!("l{}_{i:05}.png", level.number());
            io::save_png(&s.image, img_dir.join(&name))?;
            io::save_thermal(&s.field, th_dir.join(&name))?;
            records.push(SampleRecord {
                image_path: Path::new("images").join(&name),
                source_kind,
                level,
                delta_t: s.delta_t,
                split: Split::Train,
            });
        }
    }
    let records = stratified_split(records, &opts.split, seed)?;
    let manifest = Manifest::new(seed, records)?;
    save_manifest(&manifest, out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}
