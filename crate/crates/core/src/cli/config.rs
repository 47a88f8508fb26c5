use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{SourceKind, SplitRatios};
use crate::model::{StepDecay, TrainConfig};
use crate::{Error, Result};

/// Image size written as `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("invalid dimension `{v}` in `{s}`"))
        };
        Ok(Size {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Values a config file may set. Every field is optional; missing ones fall
/// back to the defaults of [`RunConfig`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub data_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub source_kind: Option<SourceKind>,
    pub n_per_level: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr_decay: Option<StepDecay>,
    pub model_input: Option<Size>,
    pub split: Option<SplitRatios>,
    pub hard_boundaries: Option<bool>,
    pub denoise: Option<bool>,
    pub sharpen: Option<f64>,
    pub resize: Option<Size>,
    pub paper_formulas: Option<bool>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub source_kind: SourceKind,
    pub n_per_level: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_decay: Option<StepDecay>,
    pub model_input: Size,
    pub split: SplitRatios,
    pub hard_boundaries: bool,
    pub denoise: bool,
    /// Unsharp-mask amount; zero disables sharpening.
    pub sharpen: f64,
    pub resize: Size,
    pub paper_formulas: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        RunConfig {
            seed: t.seed,
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            source_kind: SourceKind::Fusion,
            n_per_level: 200,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            lr_decay: t.lr_decay,
            model_input: Size {
                width: t.model_input.1,
                height: t.model_input.0,
            },
            split: SplitRatios::default(),
            hard_boundaries: false,
            denoise: true,
            sharpen: 1.0,
            resize: Size {
                width: 1080,
                height: 1440,
            },
            paper_formulas: false,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Values present in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            seed, data_dir, out_dir, source_kind, n_per_level, learning_rate, epochs, batch_size,
            lr_decay, model_input, split, hard_boundaries, denoise, sharpen, resize,
            paper_formulas
        )
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            seed: self.seed.unwrap_or(d.seed),
            data_dir: self.data_dir.unwrap_or(d.data_dir),
            out_dir: self.out_dir.unwrap_or(d.out_dir),
            source_kind: self.source_kind.unwrap_or(d.source_kind),
            n_per_level: self.n_per_level.unwrap_or(d.n_per_level),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            lr_decay: self.lr_decay.or(d.lr_decay),
            model_input: self.model_input.unwrap_or(d.model_input),
            split: self.split.unwrap_or(d.split),
            hard_boundaries: self.hard_boundaries.unwrap_or(d.hard_boundaries),
            denoise: self.denoise.unwrap_or(d.denoise),
            sharpen: self.sharpen.unwrap_or(d.sharpen),
            resize: self.resize.unwrap_or(d.resize),
            paper_formulas: self.paper_formulas.unwrap_or(d.paper_formulas),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_level == 0 {
            return Err(Error::Config("n_per_level must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.sharpen >= 0.0 && self.sharpen.is_finite()) {
            return Err(Error::Config(format!(
                "sharpen must be non-negative, got {}",
                self.sharpen
            )));
        }
        if self.resize.width == 0 || self.resize.height == 0 {
            return Err(Error::Config("resize dimensions must be positive".into()));
        }
        self.split
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.train_config().validate()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            model_input: (self.model_input.height, self.model_input.width),
            lr_decay: self.lr_decay,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ConfigFile> {
        ConfigFile::parse(s, Path::new("cfg.json"))
    }

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse("{}").unwrap().resolve().unwrap();
        assert_eq!(c.learning_rate, 0.1);
        assert_eq!(c.batch_size, 16);
        assert_eq!(c.split, SplitRatios::default());
        assert_eq!(c.resize, Size { width: 1080, height: 1440 });
    }

    #[test]
    fn flags_win_over_file() {
        let file = parse(r#"{"learning_rate": 0.1, "epochs": 3}"#).unwrap();
        let flags = ConfigFile {
            learning_rate: Some(0.01),
            ..Default::default()
        };
        let c = file.overlay(flags).resolve().unwrap();
        assert_eq!(c.learning_rate, 0.01);
        assert_eq!(c.epochs, 3);
    }

    #[test]
    fn type_mismatch_and_unknown_key() {
        let e = parse(r#"{"learning_rate": "fast"}"#).unwrap_err().to_string();
        assert!(e.contains("expected f64"), "{e}");
        let e = parse(r#"{"learning_rte": 0.1}"#).unwrap_err().to_string();
        assert!(e.contains("learning_rte"), "{e}");
    }

    #[test]
    fn size_parsing() {
        assert_eq!("1080x1440".parse(), Ok(Size { width: 1080, height: 1440 }));
        assert!("1080".parse::<Size>().is_err());
        assert!("0x4".parse::<Size>().is_err());
    }

    #[test]
    fn resolved_config_roundtrips_through_json() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }
}
