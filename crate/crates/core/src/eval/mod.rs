//! Protocol manifests, score files, EER and LDA projection export.

mod eer;
mod lda;
mod manifest;
mod report;
mod scores;

pub use eer::{compute_eer, eer_by_attack, EerResult};
pub use lda::{lda_fit_project, LdaProjection};
pub use manifest::{parse_manifest, parse_manifest_str, Attack, ManifestEntry, Partition};
pub use report::EerReport;
pub use scores::{format_scores, parse_scores_str, read_scores, write_scores};
