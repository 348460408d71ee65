//! Batch pipeline behind the `spoofguard` binary.

pub mod config;
pub mod models;
pub mod pipeline;
pub mod synth;

pub use config::{ClassifierKind, Overrides, PipelineConfig, Preset};
pub use models::{Classifier, SystemModels};
pub use pipeline::{cmd_eval, cmd_project_lda, cmd_score, cmd_train, TrainSummary};
