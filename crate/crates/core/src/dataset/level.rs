use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Crack severity, ordered from least to most concerning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CrackLevel {
    Level1,
    Level2,
    Level3,
}

impl CrackLevel {
    pub const ALL: [CrackLevel; 3] = [CrackLevel::Level1, CrackLevel::Level2, CrackLevel::Level3];

    /// Zero-based class index used by the classifier.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::domain(format!("class index {i} out of range 0..3")))
    }

    /// One-based level number as written in manifests.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u64) -> Result<Self> {
        match n {
            1..=3 => Self::from_index(n as usize - 1),
            _ => Err(Error::domain(format!("crack level must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl fmt::Display for CrackLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LEVEL_{}", self.number())
    }
}

impl Serialize for CrackLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for CrackLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = u64::deserialize(d)?;
        CrackLevel::from_number(n).map_err(serde::de::Error::custom)
    }
}

/// Severity from the crack/surroundings temperature difference.
///
/// Below 2 °C is level 1, above 4 °C is level 3; both boundaries belong to
/// level 2.
pub fn classify_delta_t(delta_t: f64) -> Result<CrackLevel> {
    if !(delta_t.is_finite() && delta_t >= 0.0) {
        return Err(Error::domain(format!(
            "ΔT must be finite and non-negative, got {delta_t}"
        )));
    }
    Ok(if delta_t < 2.0 {
        CrackLevel::Level1
    } else if delta_t <= 4.0 {
        CrackLevel::Level2
    } else {
        CrackLevel::Level3
    })
}
