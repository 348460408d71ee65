use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::label::Label;

/// Spoofing algorithm identifier, S1..S10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attack(u8);

impl Attack {
    pub const MAX: u8 = 10;

    pub fn new(index: u8) -> Option<Self> {
        (1..=Self::MAX).contains(&index).then_some(Self(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Attack> {
        (1..=Self::MAX).map(Attack)
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

impl FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('S')
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(Attack::new)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown attack type {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    Train,
    Dev,
    Eval,
}

impl Partition {
    pub fn name(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Dev => "dev",
            Partition::Eval => "eval",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Partition::Train),
            "dev" => Ok(Partition::Dev),
            "eval" => Ok(Partition::Eval),
            other => Err(Error::InvalidArgument(format!(
                "unknown partition {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub utt_id: String,
    pub path: String,
    pub label: Label,
    pub attack: Option<Attack>,
    pub partition: Partition,
}

impl ManifestEntry {
    /// Class name used for LDA projections: `human` or the attack id.
    pub fn class_name(&self) -> String {
        match self.attack {
            Some(a) => a.to_string(),
            None => self.label.to_string(),
        }
    }
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest_str(&text, &path.display().to_string())
}

/// Parses tab-separated `utt_id path label attack partition` lines.
/// `source` names the input in error messages.
pub fn parse_manifest_str(text: &str, source: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let err = |reason: String| Error::Parse {
            path: source.to_string(),
            line: lineno,
            reason,
        };
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 5 {
            return Err(err(format!(
                "expected 5 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let label: Label = fields[2].parse().map_err(|e: Error| err(e.to_string()))?;
        let attack = match fields[3] {
            "-" | "none" => None,
            a => Some(a.parse::<Attack>().map_err(|e| err(e.to_string()))?),
        };
        match (label, attack) {
            (Label::Human, Some(a)) => {
                return Err(err(format!("human utterance cannot carry attack {a}")))
            }
            (Label::Spoof, None) => return Err(err("spoof utterance needs an attack type".into())),
            _ => {}
        }
        let partition: Partition = fields[4].parse().map_err(|e: Error| err(e.to_string()))?;
        let utt_id = fields[0].to_string();
        if utt_id.is_empty() {
            return Err(err("empty utterance id".into()));
        }
        if !seen.insert(utt_id.clone()) {
            return Err(err(format!("duplicate utterance id {utt_id:?}")));
        }
        entries.push(ManifestEntry {
            utt_id,
            path: fields[1].to_string(),
            label,
            attack,
            partition,
        });
    }
    Ok(entries)
}
