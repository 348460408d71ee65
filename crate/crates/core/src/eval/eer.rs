use std::collections::{BTreeMap, HashMap};

use crate::classify::Score;
use crate::error::{Error, Result};
use crate::label::Label;

use super::manifest::{Attack, ManifestEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct EerResult {
    /// Percent.
    pub eer_overall: f64,
    /// Percent, only for attacks with at least one scored trial.
    pub eer_by_attack: BTreeMap<Attack, f64>,
    pub threshold_at_eer: f64,
}

/// EER in percent for higher-is-human scores.
///
/// Candidate thresholds are the midpoints between consecutive distinct
/// scores plus one point below the minimum and one above the maximum.
/// FRR(t) counts genuine scores `< t`, FAR(t) spoof scores `>= t`. The
/// result is read off where FAR − FRR first drops to zero or below,
/// interpolating linearly between neighboring thresholds.
pub fn compute_eer(genuine: &[f64], spoof: &[f64]) -> Result<EerResult> {
    if genuine.is_empty() {
        return Err(Error::EmptyClass("genuine"));
    }
    if spoof.is_empty() {
        return Err(Error::EmptyClass("spoof"));
    }
    if genuine.iter().chain(spoof).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }

    let mut g = genuine.to_vec();
    let mut s = spoof.to_vec();
    g.sort_by(f64::total_cmp);
    s.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = g.iter().chain(&s).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();

    let mut thresholds = Vec::with_capacity(all.len() + 1);
    thresholds.push(all[0] - 1.0);
    thresholds.extend(all.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    thresholds.push(all[all.len() - 1] + 1.0);

    let (ng, ns) = (g.len() as f64, s.len() as f64);
    // Thresholds ascend, so both cursors only move forward.
    let (mut gi, mut si) = (0usize, 0usize);
    let mut rates = |t: f64| {
        while gi < g.len() && g[gi] < t {
            gi += 1;
        }
        while si < s.len() && s[si] < t {
            si += 1;
        }
        (gi as f64 / ng, (s.len() - si) as f64 / ns)
    };

    let mut prev = (thresholds[0], rates(thresholds[0]));
    for &t in &thresholds[1..] {
        let (frr, far) = rates(t);
        let diff = far - frr;
        if diff == 0.0 {
            return Ok(overall(100.0 * frr, t));
        }
        if diff < 0.0 {
            let (t0, (frr0, far0)) = prev;
            let d0 = far0 - frr0;
            let alpha = d0 / (d0 - diff);
            let eer = frr0 + alpha * (frr - frr0);
            return Ok(overall(100.0 * eer, t0 + alpha * (t - t0)));
        }
        prev = (t, (frr, far));
    }
    unreachable!("FAR - FRR reaches -1 at the last threshold")
}

fn overall(eer: f64, threshold: f64) -> EerResult {
    EerResult {
        eer_overall: eer.clamp(0.0, 100.0),
        eer_by_attack: BTreeMap::new(),
        threshold_at_eer: threshold,
    }
}

/// Overall EER plus one EER per attack, each against the full genuine pool.
pub fn eer_by_attack(scores: &[Score], manifest: &[ManifestEntry]) -> Result<EerResult> {
    let by_id: HashMap<&str, &ManifestEntry> =
        manifest.iter().map(|e| (e.utt_id.as_str(), e)).collect();
    let mut missing: Vec<&str> = scores
        .iter()
        .map(|s| s.utt_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() {
        missing.sort_unstable();
        return Err(Error::UnmatchedUtterance(missing.join(", ")));
    }

    // Sorting by id makes the pools independent of input order.
    let mut sorted: Vec<&Score> = scores.iter().collect();
    sorted.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));

    let mut genuine = Vec::new();
    let mut spoof = Vec::new();
    let mut per_attack: BTreeMap<Attack, Vec<f64>> = BTreeMap::new();
    for score in sorted {
        let entry = by_id[score.utt_id.as_str()];
        match entry.label {
            Label::Human => genuine.push(score.value),
            Label::Spoof => {
                spoof.push(score.value);
                if let Some(a) = entry.attack {
                    per_attack.entry(a).or_default().push(score.value);
                }
            }
        }
    }

    let mut result = compute_eer(&genuine, &spoof)?;
    for (attack, pool) in per_attack {
        let r = compute_eer(&genuine, &pool)?;
        result.eer_by_attack.insert(attack, r.eer_overall);
    }
    Ok(result)
}
