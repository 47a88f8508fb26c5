//! The `thermocrack` command line.
//!
//! ```text
//! thermocrack synth      --n-per-level 200 --source fusion --out-dir data
//! thermocrack preprocess --image photo.png --resize 1080x1440
//! thermocrack fuse       --thermal t.png --visible v.png --source msx_like
//! thermocrack split      --data-dir data --split 0.6,0.2,0.2
//! thermocrack train      --data-dir data --out-dir run --epochs 10
//! thermocrack evaluate   --data-dir data --checkpoint run/model.tck1 --json
//! thermocrack predict    --checkpoint run/model.tck1 --image x.png
//! ```
//!
//! Every subcommand accepts `--config FILE` (JSON, see [`ConfigFile`]);
//! flags override file values. The resolved configuration is echoed as one
//! JSON line, and `run.json` in the output directory records it together
//! with the SHA-256 of every artifact written.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid data, 4 I/O, 5 internal error.

mod config;

pub use config::{ConfigFile, RunConfig, Size};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{
    load_manifest, save_manifest, stratified_split, synth_dataset, Manifest, SourceKind, Split,
    SplitRatios, SynthOptions,
};
use crate::imaging::{
    alpha_fuse, edge_overlay_msx, io, median_denoise, resize_bilinear, temp_to_color,
    unsharp_sharpen, ImageRGB, DEFAULT_MSX_GAIN,
};
use crate::metrics::{compute_metrics, render_report, FormulaSet, MetricsReport};
use crate::model::{
    build_network, evaluate, load_checkpoint, load_examples, predict, save_checkpoint, train,
    ArchitectureSpec,
};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RUN_FILE: &str = "run.json";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "thermocrack", version, about = "Crack severity from thermal imagery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled synthetic dataset with a manifest.
    Synth(SynthArgs),
    /// Blend or emboss a thermal render with a visible image.
    Fuse(FuseArgs),
    /// Resize, denoise and sharpen images.
    Preprocess(PreprocessArgs),
    /// Reassign the train/val/test split of a dataset.
    Split(SplitArgs),
    /// Train a classifier on a dataset's train split.
    Train(TrainArgs),
    /// Score checkpoints on a dataset split.
    Evaluate(EvaluateArgs),
    /// Classify one image.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_per_level: Option<usize>,
    /// msx_like, fusion, thermal or visible.
    #[arg(long)]
    source: Option<SourceKind>,
    /// Train,val,test fractions.
    #[arg(long, value_parser = parse_ratios)]
    split: Option<SplitRatios>,
    /// Let crack offsets reach the class thresholds.
    #[arg(long)]
    hard_boundaries: bool,
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[command(flatten)]
    common: Common,
    /// Thermal render (RGB), or a 16-bit radiometric PNG with its sidecar.
    #[arg(long)]
    thermal: PathBuf,
    #[arg(long)]
    visible: PathBuf,
    /// fusion for a 50/50 blend, msx_like for an edge overlay.
    #[arg(long)]
    source: Option<SourceKind>,
    #[arg(long, default_value_t = DEFAULT_MSX_GAIN)]
    gain: f64,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "fused.png")]
    output: String,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[command(flatten)]
    common: Common,
    /// Images to process; without any, the dataset in --data-dir is.
    #[arg(long)]
    image: Vec<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Target size as WIDTHxHEIGHT.
    #[arg(long)]
    resize: Option<Size>,
    #[arg(long)]
    no_denoise: bool,
    /// Unsharp-mask amount, 0 to disable.
    #[arg(long)]
    sharpen: Option<f64>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_ratios)]
    split: Option<SplitRatios>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Network input as WIDTHxHEIGHT.
    #[arg(long)]
    model_input: Option<Size>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset directory; repeat together with --checkpoint to compare runs.
    #[arg(long)]
    data_dir: Vec<PathBuf>,
    #[arg(long, required = true)]
    checkpoint: Vec<PathBuf>,
    #[arg(long, default_value = "test")]
    split: Split,
    /// Use the accuracy and F-measure formulas exactly as printed in the
    /// original report instead of the standard ones.
    #[arg(long)]
    paper_formulas: bool,
    /// Print the metrics as JSON instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_ratios(s: &str) -> std::result::Result<SplitRatios, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [train, val, test] => Ok(SplitRatios { train, val, test }),
        _ => Err(format!("expected TRAIN,VAL,TEST, got `{s}`")),
    }
}

impl Common {
    fn base(&self) -> Result<ConfigFile> {
        let file = match &self.config {
            Some(p) => {
                if !p.is_file() {
                    return Err(Error::Config(format!("config file not found: {}", p.display())));
                }
                ConfigFile::load(p).map_err(|e| match e {
                    Error::Parse { .. } => Error::Config(e.to_string()),
                    e => e,
                })?
            }
            None => ConfigFile::default(),
        };
        Ok(file.overlay(ConfigFile {
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            ..Default::default()
        }))
    }
}

/// Map an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::Io { .. } => EXIT_IO,
        Error::Image { source, .. } => match source {
            image::ImageError::IoError(_) => EXIT_IO,
            _ => EXIT_DATA,
        },
        Error::Build { .. } | Error::Diverged(_) => EXIT_INTERNAL,
        _ => EXIT_DATA,
    }
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the exit code. Diagnostics go to stderr as a single line.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => cmd_synth(a),
        Command::Fuse(a) => cmd_fuse(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
    }
}

/// Artifacts written by one subcommand, keyed by path relative to the
/// output directory.
struct Run {
    command: &'static str,
    config: RunConfig,
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    artifacts: &'a BTreeMap<String, String>,
}

impl Run {
    fn start(command: &'static str, config: RunConfig, quiet: bool) -> Result<Self> {
        let line = serde_json::to_string(&config).expect("config serialises");
        if quiet {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
        fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
        Ok(Run {
            command,
            config,
            artifacts: BTreeMap::new(),
        })
    }

    fn out(&self, name: impl AsRef<Path>) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn record(&mut self, name: impl AsRef<Path>) -> Result<()> {
        let name = name.as_ref();
        let digest = sha256_file(&self.out(name))?;
        self.artifacts
            .insert(name.to_string_lossy().replace('\\', "/"), digest);
        Ok(())
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.record(name)
    }

    fn finish(self) -> Result<()> {
        let rec = RunRecord {
            command: self.command,
            seed: self.config.seed,
            config: &self.config,
            artifacts: &self.artifacts,
        };
        let path = self.out(RUN_FILE);
        let text = serde_json::to_string_pretty(&rec).expect("run record serialises");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} not found: {}", path.display())))
    }
}

fn open_dataset(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    require_file(&path, "manifest")?;
    load_manifest(&path)
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            n_per_level: a.n_per_level,
            source_kind: a.source,
            split: a.split,
            hard_boundaries: a.hard_boundaries.then_some(true),
            ..Default::default()
        })
        .resolve()?;
    let mut run = Run::start("synth", cfg, false)?;
    let c = &run.config;
    let opts = SynthOptions {
        hard_boundaries: c.hard_boundaries,
        split: c.split,
        ..SynthOptions::default()
    };
    let manifest = synth_dataset(c.seed, c.n_per_level, c.source_kind, &c.out_dir, &opts)?;
    for r in manifest.records() {
        run.record(&r.image_path)?;
    }
    run.record(MANIFEST_FILE)?;
    println!(
        "wrote {} {} samples and {}",
        manifest.len(),
        run.config.source_kind,
        run.out(MANIFEST_FILE).display()
    );
    run.finish()
}

fn load_thermal_render(path: &Path) -> Result<ImageRGB> {
    if io::sidecar_path(path).is_file() {
        temp_to_color(&io::load_thermal(path)?)
    } else {
        io::load_png(path)
    }
}

fn cmd_fuse(a: FuseArgs) -> Result<()> {
    require_file(&a.thermal, "thermal image")?;
    require_file(&a.visible, "visible image")?;
    let cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            source_kind: a.source,
            ..Default::default()
        })
        .resolve()?;
    let mut run = Run::start("fuse", cfg, false)?;
    let thermal = load_thermal_render(&a.thermal)?;
    let visible = io::load_png(&a.visible)?;
    let fused = match run.config.source_kind {
        SourceKind::Fusion => alpha_fuse(&thermal, &visible)?,
        SourceKind::MsxLike => edge_overlay_msx(&thermal, &visible, a.gain)?,
        other => {
            return Err(Error::Config(format!(
                "fuse needs --source fusion or msx_like, got {other}"
            )))
        }
    };
    io::save_png(&fused, run.out(&a.output))?;
    run.record(&a.output)?;
    println!("wrote {}", run.out(&a.output).display());
    run.finish()
}

fn preprocess_image(img: &ImageRGB, cfg: &RunConfig) -> Result<ImageRGB> {
    let mut img = resize_bilinear(img, cfg.resize.width, cfg.resize.height)?;
    if cfg.denoise {
        img = median_denoise(&img);
    }
    if cfg.sharpen > 0.0 {
        img = unsharp_sharpen(&img, cfg.sharpen);
    }
    Ok(img)
}

fn cmd_preprocess(a: PreprocessArgs) -> Result<()> {
    for p in &a.image {
        require_file(p, "image")?;
    }
    let cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            data_dir: a.data_dir,
            resize: a.resize,
            denoise: a.no_denoise.then_some(false),
            sharpen: a.sharpen,
            ..Default::default()
        })
        .resolve()?;

    if !a.image.is_empty() {
        let mut run = Run::start("preprocess", cfg, false)?;
        for p in &a.image {
            let name = p
                .file_name()
                .ok_or_else(|| Error::Validation(format!("not a file: {}", p.display())))?;
            let img = preprocess_image(&io::load_png(p)?, &run.config)?;
            io::save_png(&img, run.out(name))?;
            run.record(name)?;
            println!("wrote {}", run.out(name).display());
        }
        return run.finish();
    }

    let manifest = open_dataset(&cfg.data_dir)?;
    if cfg.data_dir == cfg.out_dir {
        return Err(Error::Config(
            "preprocessing a dataset needs an --out-dir different from --data-dir".into(),
        ));
    }
    let mut run = Run::start("preprocess", cfg, false)?;
    for r in manifest.records() {
        let img = io::load_png(run.config.data_dir.join(&r.image_path))?;
        let img = preprocess_image(&img, &run.config)?;
        let dst = run.out(&r.image_path);
        if let Some(parent) = dst.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        io::save_png(&img, &dst)?;
        run.record(&r.image_path)?;
    }
    save_manifest(&manifest, run.out(MANIFEST_FILE))?;
    run.record(MANIFEST_FILE)?;
    println!("preprocessed {} images into {}", manifest.len(), run.config.out_dir.display());
    run.finish()
}

fn cmd_split(a: SplitArgs) -> Result<()> {
    let cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            data_dir: a.data_dir,
            split: a.split,
            ..Default::default()
        })
        .resolve()?;
    let manifest = open_dataset(&cfg.data_dir)?;
    let mut run = Run::start("split", cfg, false)?;
    let c = &run.config;
    let same_dir = fs::canonicalize(&c.data_dir).ok() == fs::canonicalize(&c.out_dir).ok();
    let mut records = manifest.into_records();
    if !same_dir {
        let base = fs::canonicalize(&c.data_dir).map_err(|e| Error::io(&c.data_dir, e))?;
        for r in &mut records {
            r.image_path = base.join(&r.image_path);
        }
    }
    let records = stratified_split(records, &c.split, c.seed)?;
    let manifest = Manifest::new(c.seed, records)?;
    save_manifest(&manifest, run.out(MANIFEST_FILE))?;
    run.record(MANIFEST_FILE)?;
    let counts = manifest.counts();
    for (level, row) in counts.iter().enumerate() {
        println!(
            "LEVEL_{}: train {} val {} test {}",
            level + 1,
            row[0],
            row[1],
            row[2]
        );
    }
    run.finish()
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            data_dir: a.data_dir,
            learning_rate: a.learning_rate,
            epochs: a.epochs,
            batch_size: a.batch_size,
            model_input: a.model_input,
            ..Default::default()
        })
        .resolve()?;
    let manifest = open_dataset(&cfg.data_dir)?;
    cfg.source_kind = single_source(&manifest)?;
    let mut run = Run::start("train", cfg, false)?;
    let c = &run.config;
    let tc = c.train_config();
    let spec = ArchitectureSpec::new(c.model_input.height, c.model_input.width);
    let train_set = load_examples(&manifest, &c.data_dir, Split::Train, tc.model_input)?;
    let val_set = load_examples(&manifest, &c.data_dir, Split::Val, tc.model_input)?;
    let init = build_network(&spec, c.seed)?;
    let (params, history) = train(&spec, &init, &train_set, &val_set, &tc)?;
    for s in &history {
        println!(
            "epoch {:>3}  lr {:.4}  loss {:.4}  val acc {:.4}",
            s.epoch,
            s.learning_rate,
            s.train_loss,
            s.val_accuracy
        );
    }
    save_checkpoint(&params, &spec, run.out("model.tck1"))?;
    run.record("model.tck1")?;
    let log = serde_json::to_vec_pretty(&history).expect("history serialises");
    run.write("train_log.json", &log)?;
    run.finish()
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    for p in &a.checkpoint {
        require_file(p, "checkpoint")?;
    }
    let cfg = a
        .common
        .base()?
        .overlay(ConfigFile {
            data_dir: a.data_dir.first().cloned(),
            paper_formulas: a.paper_formulas.then_some(true),
            ..Default::default()
        })
        .resolve()?;
    let data_dirs = if a.data_dir.is_empty() {
        vec![cfg.data_dir.clone()]
    } else {
        a.data_dir.clone()
    };
    if data_dirs.len() != a.checkpoint.len() {
        return Err(Error::Config(format!(
            "got {} --data-dir values for {} --checkpoint values",
            data_dirs.len(),
            a.checkpoint.len()
        )));
    }
    let manifests = data_dirs
        .iter()
        .map(|d| open_dataset(d))
        .collect::<Result<Vec<_>>>()?;
    let mut run = Run::start("evaluate", cfg, a.json)?;
    let formulas = if run.config.paper_formulas {
        FormulaSet::Printed
    } else {
        FormulaSet::Standard
    };

    let mut reports: BTreeMap<SourceKind, MetricsReport> = BTreeMap::new();
    for ((dir, manifest), ckpt) in data_dirs.iter().zip(&manifests).zip(&a.checkpoint) {
        let kind = single_source(manifest)?;
        if reports.contains_key(&kind) {
            return Err(Error::Config(format!("source {kind} given more than once")));
        }
        let (params, spec) = load_checkpoint(ckpt)?;
        let examples = load_examples(manifest, dir, a.split, (spec.input.height, spec.input.width))?;
        let cm = evaluate(&spec, &params, &examples)?;
        reports.insert(kind, compute_metrics(&cm, formulas)?);
    }

    let json = serde_json::to_string_pretty(&reports).expect("reports serialise");
    let text = render_report(&reports);
    run.write("metrics.json", json.as_bytes())?;
    run.write("report.txt", text.as_bytes())?;
    if a.json {
        println!("{json}");
    } else {
        print!("{text}");
    }
    run.finish()
}

fn single_source(manifest: &Manifest) -> Result<SourceKind> {
    let mut kinds = manifest.records().iter().map(|r| r.source_kind);
    let first = kinds
        .next()
        .ok_or_else(|| Error::Validation("manifest has no records".into()))?;
    if kinds.any(|k| k != first) {
        return Err(Error::Validation("manifest mixes source kinds".into()));
    }
    Ok(first)
}

#[derive(Serialize)]
struct Prediction {
    level: String,
    probabilities: [f32; 3],
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    require_file(&a.checkpoint, "checkpoint")?;
    require_file(&a.image, "image")?;
    let cfg = a.common.base()?.resolve()?;
    let mut run = Run::start("predict", cfg, a.json)?;
    let (params, spec) = load_checkpoint(&a.checkpoint)?;
    let img = io::load_png(&a.image)?;
    let (level, probs) = predict(&spec, &params, &img)?;
    let p = probs.data();
    let out = Prediction {
        level: level.to_string(),
        probabilities: [p[0], p[1], p[2]],
    };
    let json = serde_json::to_string(&out).expect("prediction serialises");
    run.write("prediction.json", json.as_bytes())?;
    if a.json {
        println!("{json}");
    } else {
        println!("{level}");
        for (k, v) in p.iter().enumerate() {
            println!("LEVEL_{}\t{v:.6}", k + 1);
        }
    }
    run.finish()
}
