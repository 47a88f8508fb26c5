//! Train a small classifier for a couple of epochs, save it as a
//! checkpoint, reload it and classify held-out images.
//!
//! ```text
//! cargo run --example predict_image -- [checkpoint.tck1 image.png]
//! ```

use std::path::PathBuf;

use thermocrack::dataset::{synth_dataset, SourceKind, Split, SynthOptions};
use thermocrack::imaging::io::load_png;
use thermocrack::model::{
    build_network, load_checkpoint, load_examples, predict, save_checkpoint, train,
    ArchitectureSpec, TrainConfig,
};

fn main() -> thermocrack::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [ckpt, image] = &args[..] {
        let (params, spec) = load_checkpoint(ckpt)?;
        let (level, p) = predict(&spec, &params, &load_png(image)?)?;
        println!("{level}  {:?}", p.data());
        return Ok(());
    }

    let dir = std::env::temp_dir().join("thermocrack-predict");
    let manifest = synth_dataset(3, 20, SourceKind::Thermal, &dir, &SynthOptions::default())?;
    let config = TrainConfig {
        epochs: 2,
        model_input: (48, 64),
        ..TrainConfig::default()
    };
    let spec = ArchitectureSpec::new(48, 64);
    let load = |s| load_examples(&manifest, &dir, s, config.model_input);
    let init = build_network(&spec, config.seed)?;
    let (params, _) = train(&spec, &init, &load(Split::Train)?, &load(Split::Val)?, &config)?;

    let path: PathBuf = dir.join("model.tck1");
    save_checkpoint(&params, &spec, &path)?;
    let (params, spec) = load_checkpoint(&path)?;
    println!("checkpoint {} ({} bytes)", path.display(), std::fs::metadata(&path).map_or(0, |m| m.len()));

    for r in manifest.split(Split::Test).take(6) {
        let img = load_png(dir.join(&r.image_path))?;
        let (level, p) = predict(&spec, &params, &img)?;
        println!("{}  actual {}  predicted {level}  p = {:.3?}", r.image_path.display(), r.level, p.data());
    }
    Ok(())
}
