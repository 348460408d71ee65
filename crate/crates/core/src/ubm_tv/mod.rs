//! GMM-UBM training, Baum-Welch statistics, total-variability subspace
//! training, i-vector extraction, post-processing and fusion.

mod gmm;
mod ivector;
mod stats;
mod tv;

pub use gmm::{gmm_em_train, gmm_posteriors, DiagonalGmm, GmmTraining};
pub use ivector::{fuse_ivectors, ivector_mean, postprocess_ivector, IVector};
pub use stats::{collect_bw_stats, BwStats};
pub use tv::{extract_ivector, tv_train, TvModel, TvTraining};
