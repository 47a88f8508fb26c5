//! Generate a synthetic dataset, train the crack classifier on it and score
//! the test split.
//!
//! ```text
//! cargo run --example train_classifier -- [fusion|msx_like|thermal|visible] [n_per_level] [epochs]
//! ```

use std::collections::BTreeMap;
use std::time::Instant;

use thermocrack::dataset::{synth_dataset, SourceKind, Split, SynthOptions};
use thermocrack::metrics::{compute_metrics, render_report, FormulaSet};
use thermocrack::model::{build_network, evaluate, load_examples, train, ArchitectureSpec, TrainConfig};

fn main() -> thermocrack::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SourceKind = args.next().as_deref().unwrap_or("fusion").parse()?;
    let n: usize = args.next().map_or(200, |s| s.parse().expect("n_per_level"));
    let epochs: usize = args.next().map_or(10, |s| s.parse().expect("epochs"));

    let dir = std::env::temp_dir().join(format!("thermocrack-{kind}-{n}"));
    let t0 = Instant::now();
    let manifest = synth_dataset(1, n, kind, &dir, &SynthOptions::default())?;
    println!("{} samples in {} ({:.1?})", manifest.len(), dir.display(), t0.elapsed());

    let config = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let spec = ArchitectureSpec::new(config.model_input.0, config.model_input.1);
    let load = |split| load_examples(&manifest, &dir, split, config.model_input);
    let (train_set, val_set, test_set) = (load(Split::Train)?, load(Split::Val)?, load(Split::Test)?);

    let t1 = Instant::now();
    let init = build_network(&spec, config.seed)?;
    let (params, history) = train(&spec, &init, &train_set, &val_set, &config)?;
    for s in &history {
        println!(
            "epoch {:>2}  loss {:.4}  val acc {:.3}",
            s.epoch,
            s.train_loss,
            s.val_accuracy
        );
    }
    println!("trained in {:.1?}", t1.elapsed());

    let cm = evaluate(&spec, &params, &test_set)?;
    let report = compute_metrics(&cm, FormulaSet::Standard)?;
    print!("{}", render_report(&BTreeMap::from([(kind, report)])));
    Ok(())
}
