//! Voice anti-spoofing toolkit: acoustic front-ends, GMM-UBM / total
//! variability i-vector modeling, linear SVM and DBN classifiers, and
//! equal-error-rate evaluation.

pub mod classify;
pub mod container;
pub mod error;
pub mod eval;
pub mod features;
pub mod label;
mod linalg;
pub mod signal;
pub mod transforms;
pub mod ubm_tv;

pub use error::{Error, Result};
pub use label::Label;
pub use nalgebra;
pub use ndarray;
