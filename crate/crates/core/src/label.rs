use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Ground-truth class of an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Human,
    Spoof,
}

impl Label {
    /// +1 for human, −1 for spoof (scores are oriented so higher = human).
    pub fn sign(self) -> f64 {
        match self {
            Label::Human => 1.0,
            Label::Spoof => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Spoof => "spoof",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "human" | "genuine" => Ok(Label::Human),
            "spoof" => Ok(Label::Spoof),
            other => Err(Error::InvalidArgument(format!("unknown label {other:?}"))),
        }
    }
}

/// Returns an error unless both classes occur in `labels`.
pub(crate) fn require_both_classes(labels: &[Label]) -> Result<(), Error> {
    let human = labels.contains(&Label::Human);
    let spoof = labels.contains(&Label::Spoof);
    if human && spoof {
        Ok(())
    } else {
        Err(Error::SingleClass)
    }
}
