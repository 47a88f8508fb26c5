//! Build both fused views of one synthetic wall, then run the preprocessing
//! chain on them: resize, median denoise, unsharp mask.
//!
//! ```text
//! cargo run --example fuse_and_preprocess -- [out_dir]
//! ```

use std::path::PathBuf;

use thermocrack::dataset::{synth_sample, visible_texture, CrackLevel, SourceKind, SynthOptions};
use thermocrack::imaging::{
    alpha_fuse, edge_overlay_msx, io, median_denoise, resize_bilinear, temp_to_color,
    unsharp_sharpen, DEFAULT_MSX_GAIN,
};
use thermocrack::rng::seeded_rng;

fn main() -> thermocrack::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("thermocrack-fuse"), PathBuf::from);
    std::fs::create_dir_all(&out).map_err(|e| thermocrack::Error::io(&out, e))?;

    let s = synth_sample(42, CrackLevel::Level2, SourceKind::Thermal, &SynthOptions::default())?;
    let thermal = temp_to_color(&s.field)?;
    let visible = visible_texture(&mut seeded_rng(7), &s.mask);
    println!("crack: {} px, ΔT {:.2} °C", s.mask.count(), s.delta_t);

    let fused = alpha_fuse(&thermal, &visible)?;
    let msx = edge_overlay_msx(&thermal, &visible, DEFAULT_MSX_GAIN)?;
    for (name, img) in [("thermal", &thermal), ("visible", &visible), ("fusion", &fused), ("msx_like", &msx)] {
        io::save_png(img, out.join(format!("{name}.png")))?;
        let big = resize_bilinear(img, 1080, 1440)?;
        let clean = unsharp_sharpen(&median_denoise(&big), 1.0);
        io::save_png(&clean, out.join(format!("{name}_1080x1440.png")))?;
        println!("{name:<9} {}x{} -> {}x{}", img.width(), img.height(), clean.width(), clean.height());
    }
    println!("written to {}", out.display());
    Ok(())
}
