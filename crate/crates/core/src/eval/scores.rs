use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::classify::Score;
use crate::error::{Error, Result};

/// Renders `utt_id<TAB>score` lines sorted by utterance id.
pub fn format_scores(scores: &[Score]) -> String {
    let mut sorted: Vec<&Score> = scores.iter().collect();
    sorted.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    let mut out = String::new();
    for s in sorted {
        writeln!(out, "{}\t{:.6}", s.utt_id, s.value).unwrap();
    }
    out
}

pub fn write_scores(path: impl AsRef<Path>, scores: &[Score]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_scores(scores)).map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<Score>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores_str(&text, &path.display().to_string())
}

pub fn parse_scores_str(text: &str, source: &str) -> Result<Vec<Score>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let err = |reason: String| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            reason,
        };
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, value) = line
            .split_once('\t')
            .ok_or_else(|| err("expected utt_id<TAB>score".into()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("bad score {value:?}")))?;
        if !value.is_finite() {
            return Err(err("score is not finite".into()));
        }
        if !seen.insert(id.to_string()) {
            return Err(err(format!("duplicate utterance id {id:?}")));
        }
        out.push(Score {
            utt_id: id.to_string(),
            value,
        });
    }
    Ok(out)
}
