use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::eer::EerResult;
use super::manifest::Attack;

/// EER table with one row per system and one column per attack seen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EerReport {
    pub rows: Vec<(String, EerResult)>,
}

impl EerReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, system: impl Into<String>, result: EerResult) {
        self.rows.push((system.into(), result));
    }

    fn attacks(&self) -> Vec<Attack> {
        let set: BTreeSet<Attack> = self
            .rows
            .iter()
            .flat_map(|(_, r)| r.eer_by_attack.keys().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Human-readable table followed by an `All:` summary line per system.
    pub fn to_text(&self) -> String {
        let attacks = self.attacks();
        let name_w = self
            .rows
            .iter()
            .map(|(n, _)| n.len())
            .chain(std::iter::once("System".len()))
            .max()
            .unwrap_or(6);
        let mut out = String::new();
        write!(out, "{:<name_w$}", "System").unwrap();
        for a in &attacks {
            write!(out, " {:>7}", a.to_string()).unwrap();
        }
        writeln!(out, " {:>7}", "All").unwrap();
        for (name, r) in &self.rows {
            write!(out, "{name:<name_w$}").unwrap();
            for a in &attacks {
                match r.eer_by_attack.get(a) {
                    Some(v) => write!(out, " {v:>7.2}").unwrap(),
                    None => write!(out, " {:>7}", "-").unwrap(),
                }
            }
            writeln!(out, " {:>7.2}", r.eer_overall).unwrap();
        }
        out.push('\n');
        for (name, r) in &self.rows {
            writeln!(out, "{name} All: {:.2}", r.eer_overall).unwrap();
        }
        out
    }

    /// Tab-separated copy: `system`, one column per attack, `All`, `threshold`.
    pub fn to_tsv(&self) -> String {
        let attacks = self.attacks();
        let mut out = String::from("system");
        for a in &attacks {
            write!(out, "\t{a}").unwrap();
        }
        out.push_str("\tAll\tthreshold\n");
        for (name, r) in &self.rows {
            out.push_str(name);
            for a in &attacks {
                match r.eer_by_attack.get(a) {
                    Some(v) => write!(out, "\t{v:.6}").unwrap(),
                    None => out.push_str("\t-"),
                }
            }
            writeln!(out, "\t{:.6}\t{:.6}", r.eer_overall, r.threshold_at_eer).unwrap();
        }
        out
    }
}
