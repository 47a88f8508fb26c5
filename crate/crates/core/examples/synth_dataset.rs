//! Generate a small labelled dataset and summarise its manifest.
//!
//! ```text
//! cargo run --example synth_dataset -- [fusion|msx_like|thermal|visible] [n_per_level] [out_dir]
//! ```

use std::path::PathBuf;

use thermocrack::dataset::{load_manifest, synth_dataset, CrackLevel, SourceKind, Split, SynthOptions};

fn main() -> thermocrack::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SourceKind = args.next().as_deref().unwrap_or("msx_like").parse()?;
    let n: usize = args.next().map_or(20, |s| s.parse().expect("n_per_level"));
    let out = args
        .next()
        .map_or_else(|| std::env::temp_dir().join(format!("thermocrack-synth-{kind}")), PathBuf::from);

    let manifest = synth_dataset(1, n, kind, &out, &SynthOptions::default())?;
    assert_eq!(load_manifest(out.join("manifest.jsonl"))?, manifest);

    println!("{} {kind} samples in {}", manifest.len(), out.display());
    println!("level      train   val  test   ΔT range (°C)");
    for (level, counts) in CrackLevel::ALL.iter().zip(manifest.counts()) {
        let dts: Vec<f64> = manifest
            .records()
            .iter()
            .filter(|r| r.level == *level)
            .map(|r| r.delta_t)
            .collect();
        let lo = dts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = dts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("{level}  {:>6} {:>5} {:>5}   {lo:.2} .. {hi:.2}", counts[0], counts[1], counts[2]);
    }
    let first = manifest.split(Split::Test).next().expect("test split is not empty");
    println!("first test record: {} ({}, ΔT {:.2})", first.image_path.display(), first.level, first.delta_t);
    Ok(())
}
