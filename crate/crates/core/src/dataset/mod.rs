//! Labels, synthetic samples, manifests and splits.

mod level;
mod manifest;
mod split;
mod synth;

pub use level::{classify_delta_t, CrackLevel};
pub use manifest::{load_manifest, save_manifest, Manifest, SampleRecord, MANIFEST_VERSION};
pub use split::{split_counts, stratified_split, SplitRatios};
pub use synth::{synth_dataset, synth_sample, visible_texture, SynthOptions, SynthSample, MAX_DELTA_RETRIES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Which rendering of a scene a sample image is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Thermal render with visible-light edges embossed on it.
    MsxLike,
    /// 50/50 blend of thermal render and visible image.
    Fusion,
    Thermal,
    Visible,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::MsxLike,
        SourceKind::Fusion,
        SourceKind::Thermal,
        SourceKind::Visible,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::MsxLike => "msx_like",
            SourceKind::Fusion => "fusion",
            SourceKind::Thermal => "thermal",
            SourceKind::Visible => "visible",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SourceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown source kind `{s}` (expected msx_like, fusion, thermal or visible)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Split::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown split `{s}` (expected train, val or test)")))
    }
}
