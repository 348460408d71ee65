//! Human-vs-spoof classifiers over fused, normalized i-vectors.
//! Both produce scores where higher means more human-like.

mod dbn;
mod svm;

pub use dbn::{
    dbn_score, dbn_train, rbm_pretrain, DbnGradient, DbnModel, DbnParams, DenseLayer, RbmLayer,
    RbmPretraining,
};
pub use svm::{svm_objective, svm_score, svm_train, LinearSvmModel, SvmParams};

/// Score assigned to utterances rejected by the zero-run pre-detector.
pub const PREDETECTOR_SCORE: f64 = -1e9;

/// A per-utterance detection score (higher = more human-like).
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub utt_id: String,
    pub value: f64,
}
