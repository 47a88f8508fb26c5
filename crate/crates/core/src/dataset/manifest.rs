//! JSON Lines dataset index.
//!
//! Line 1 is a header `{"version":1,"seed":…,"counts":{"1":{"train":…,"val":…,"test":…},…}}`;
//! every following line is one record
//! `{"path":…,"source":…,"level":1|2|3,"delta_t":…,"split":"train"|"val"|"test"}`.
//! Paths are relative to the directory containing the manifest.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{classify_delta_t, CrackLevel, SourceKind, Split};
use crate::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    #[serde(rename = "path")]
    pub image_path: PathBuf,
    #[serde(rename = "source")]
    pub source_kind: SourceKind,
    pub level: CrackLevel,
    pub delta_t: f64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitCounts {
    train: usize,
    val: usize,
    test: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    seed: u64,
    counts: BTreeMap<String, SplitCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    seed: u64,
    records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn new(seed: u64, records: Vec<SampleRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            validate_record(r).map_err(|m| Error::Validation(format!("record {i}: {m}")))?;
            if !seen.insert(&r.image_path) {
                return Err(Error::Validation(format!(
                    "duplicate image path {}",
                    r.image_path.display()
                )));
            }
        }
        Ok(Manifest { seed, records })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SampleRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// `counts()[level][split]`, indexed by `CrackLevel::index` and
    /// `Split::index`.
    pub fn counts(&self) -> [[usize; 3]; 3] {
        let mut c = [[0; 3]; 3];
        for r in &self.records {
            c[r.level.index()][r.split.index()] += 1;
        }
        c
    }
}

fn validate_record(r: &SampleRecord) -> std::result::Result<(), String> {
    let level = classify_delta_t(r.delta_t).map_err(|e| e.to_string())?;
    if level != r.level {
        return Err(format!(
            "ΔT {} °C classifies as {level}, but record says {}",
            r.delta_t, r.level
        ));
    }
    Ok(())
}

fn header_for(m: &Manifest) -> Header {
    let counts = CrackLevel::ALL
        .iter()
        .zip(m.counts())
        .map(|(l, [train, val, test])| (l.number().to_string(), SplitCounts { train, val, test }))
        .collect();
    Header {
        version: MANIFEST_VERSION,
        seed: m.seed,
        counts,
    }
}

pub fn save_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = serde_json::to_string(&header_for(manifest)).expect("header serialises");
    out.push('\n');
    for r in &manifest.records {
        out.push_str(&serde_json::to_string(r).expect("record serialises"));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, head) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header line".into()))?;
    let header: Header = serde_json::from_str(head).map_err(|e| parse_err(1, e.to_string()))?;
    if header.version != MANIFEST_VERSION {
        return Err(parse_err(
            1,
            format!("unsupported manifest version {}", header.version),
        ));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (no, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let r: SampleRecord = serde_json::from_str(l).map_err(|e| parse_err(no, e.to_string()))?;
        validate_record(&r).map_err(|m| Error::Validation(format!("{}:{no}: {m}", path.display())))?;
        if !seen.insert(r.image_path.clone()) {
            return Err(Error::Validation(format!(
                "{}:{no}: duplicate image path {}",
                path.display(),
                r.image_path.display()
            )));
        }
        records.push(r);
    }

    let manifest = Manifest::new(header.seed, records)?;
    if header_for(&manifest).counts != header.counts {
        return Err(Error::Validation(format!(
            "{}: header counts do not match the records",
            path.display()
        )));
    }
    Ok(manifest)
}
