//! Reusable transforms shared by the feature extractors.

mod dct;
mod mel;
mod pca;
mod tke;
mod wavelet;

pub use dct::apply_dct;
pub use mel::{build_mel_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};
pub use pca::{pca_fit, PcaModel};
pub use tke::tke;
pub use wavelet::{wpt_decompose, wpt_reconstruct, WaveletPacketTree, DB4_LOW_PASS};
