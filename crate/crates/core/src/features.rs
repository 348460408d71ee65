//! The four front-end extractors. Each yields 36-dimensional frames:
//! 12 static coefficients followed by their deltas and delta-deltas.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::signal::{self, Waveform, N_BINS, SAMPLE_RATE};
use crate::transforms::{
    apply_dct, build_mel_filterbank, pca_fit, tke, wpt_decompose, MelFilterbank, PcaModel,
    WaveletPacketTree,
};

pub const N_MEL: usize = 24;
pub const N_STATIC: usize = 12;
pub const FEATURE_DIM: usize = 3 * N_STATIC;
pub const LOG_FLOOR: f64 = 1e-10;
const DELTA_WINDOW: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureType {
    Mfcc,
    Mfpc,
    CosPhasePc,
    Mwpc,
}

impl FeatureType {
    pub const ALL: [FeatureType; 4] = [
        FeatureType::Mfcc,
        FeatureType::Mfpc,
        FeatureType::CosPhasePc,
        FeatureType::Mwpc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureType::Mfcc => "MFCC",
            FeatureType::Mfpc => "MFPC",
            FeatureType::CosPhasePc => "CosPhasePC",
            FeatureType::Mwpc => "MWPC",
        }
    }

    /// Stable numeric code used in model files.
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Dimension of the per-frame vector fed to PCA (or DCT for MFCC).
    pub fn raw_dim(self) -> usize {
        match self {
            FeatureType::CosPhasePc => N_BINS,
            _ => N_MEL,
        }
    }

    pub fn uses_pca(self) -> bool {
        self != FeatureType::Mfcc
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature type {s:?}")))
    }
}

/// Per-utterance feature frames (F × 36).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_type: FeatureType,
    pub data: Array2<f64>,
    pub utt_id: String,
}

impl FeatureMatrix {
    pub fn with_utt_id(mut self, utt_id: impl Into<String>) -> Self {
        self.utt_id = utt_id.into();
        self
    }

    pub fn n_frames(&self) -> usize {
        self.data.nrows()
    }
}

/// Fixed filterbanks plus the PCA bases learned on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndModels {
    pub mel_fb: MelFilterbank,
    pub wpt: WaveletPacketTree,
    /// Mel-triangle weights of each wavelet-packet leaf (`N_MEL` × leaves).
    pub leaf_pool: Array2<f64>,
    pub pca_mfpc: Option<PcaModel>,
    pub pca_cosphase: Option<PcaModel>,
    pub pca_mwpc: Option<PcaModel>,
}

impl FrontEndModels {
    /// Filterbanks only; PCA bases are attached with [`FrontEndModels::set_pca`].
    pub fn new() -> Result<Self> {
        let nyquist = f64::from(SAMPLE_RATE) / 2.0;
        let mel_fb = build_mel_filterbank(N_MEL, N_BINS, nyquist)?;
        let wpt = WaveletPacketTree::default();
        let leaves = wpt.n_leaves();
        let leaf_width = nyquist / leaves as f64;
        let leaf_pool = Array2::from_shape_fn((N_MEL, leaves), |(i, b)| {
            mel_fb.triangle_weight(i, (b as f64 + 0.5) * leaf_width)
        });
        if let Some(i) = leaf_pool
            .rows()
            .into_iter()
            .position(|r| r.iter().all(|&w| w <= 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "mel band {i} covers no wavelet packet leaf"
            )));
        }
        Ok(Self {
            mel_fb,
            wpt,
            leaf_pool,
            pca_mfpc: None,
            pca_cosphase: None,
            pca_mwpc: None,
        })
    }

    pub fn pca(&self, ft: FeatureType) -> Option<&PcaModel> {
        match ft {
            FeatureType::Mfcc => None,
            FeatureType::Mfpc => self.pca_mfpc.as_ref(),
            FeatureType::CosPhasePc => self.pca_cosphase.as_ref(),
            FeatureType::Mwpc => self.pca_mwpc.as_ref(),
        }
    }

    pub fn set_pca(&mut self, ft: FeatureType, model: PcaModel) -> Result<()> {
        if model.input_dim() != ft.raw_dim() {
            return Err(Error::DimensionMismatch {
                expected: ft.raw_dim(),
                actual: model.input_dim(),
            });
        }
        if model.output_dim() != N_STATIC {
            return Err(Error::DimensionMismatch {
                expected: N_STATIC,
                actual: model.output_dim(),
            });
        }
        let slot = match ft {
            FeatureType::Mfcc => {
                return Err(Error::InvalidArgument("MFCC has no PCA stage".into()))
            }
            FeatureType::Mfpc => &mut self.pca_mfpc,
            FeatureType::CosPhasePc => &mut self.pca_cosphase,
            FeatureType::Mwpc => &mut self.pca_mwpc,
        };
        *slot = Some(model);
        Ok(())
    }

    fn require_pca(&self, ft: FeatureType) -> Result<&PcaModel> {
        let pca = self.pca(ft).ok_or(Error::MissingModel(ft.name()))?;
        if pca.input_dim() != ft.raw_dim() {
            return Err(Error::DimensionMismatch {
                expected: ft.raw_dim(),
                actual: pca.input_dim(),
            });
        }
        Ok(pca)
    }
}

fn floored_ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// Log mel-filterbank energies, F × 24.
pub fn log_mel_frames(w: &Waveform, models: &FrontEndModels) -> Result<Array2<f64>> {
    let spec = signal::spectrum(&signal::frame_and_window(w)?);
    let mut out = Array2::zeros((spec.power.nrows(), models.mel_fb.n_filters));
    for (t, p) in spec.power.rows().into_iter().enumerate() {
        let e = models.mel_fb.energies(p.as_slice().unwrap());
        for (j, v) in e.into_iter().enumerate() {
            out[[t, j]] = floored_ln(v);
        }
    }
    Ok(out)
}

/// Cosine of the unwrapped phase spectrum, F × 129.
pub fn cos_phase_frames(w: &Waveform) -> Result<Array2<f64>> {
    let spec = signal::spectrum(&signal::frame_and_window(w)?);
    Ok(spec.phase_unwrapped.mapv(f64::cos))
}

/// Mean Teager-Kaiser energy of each wavelet-packet leaf, in frequency order.
pub fn leaf_tke_means(frame: &[f64], tree: &WaveletPacketTree) -> Result<Vec<f64>> {
    wpt_decompose(frame, tree)?
        .iter()
        .map(|leaf| {
            let e = tke(leaf)?;
            Ok(e.iter().sum::<f64>() / e.len() as f64)
        })
        .collect()
}

/// Leaf TKE means pooled into the mel bands, before the log.
pub fn pooled_tke(frame: &[f64], models: &FrontEndModels) -> Result<Vec<f64>> {
    let means = leaf_tke_means(frame, &models.wpt)?;
    Ok(models
        .leaf_pool
        .rows()
        .into_iter()
        .map(|w| w.iter().zip(&means).map(|(a, b)| a * b).sum())
        .collect())
}

/// Log mel-pooled TKE of wavelet-packet leaves, F × 24.
pub fn log_pooled_tke_frames(w: &Waveform, models: &FrontEndModels) -> Result<Array2<f64>> {
    let fs = signal::frame_and_window(w)?;
    let mut out = Array2::zeros((fs.n_frames(), N_MEL));
    for (t, frame) in fs.frames.rows().into_iter().enumerate() {
        let pooled = pooled_tke(frame.as_slice().unwrap(), models)?;
        for (j, v) in pooled.into_iter().enumerate() {
            out[[t, j]] = floored_ln(v);
        }
    }
    Ok(out)
}

/// The per-frame vectors that feed the decorrelating transform of `ft`.
pub fn raw_frames(ft: FeatureType, w: &Waveform, models: &FrontEndModels) -> Result<Array2<f64>> {
    match ft {
        FeatureType::Mfcc | FeatureType::Mfpc => log_mel_frames(w, models),
        FeatureType::CosPhasePc => cos_phase_frames(w),
        FeatureType::Mwpc => log_pooled_tke_frames(w, models),
    }
}

/// Fits a front-end PCA basis keeping the 12 leading components.
pub fn fit_front_end_pca(ft: FeatureType, pool: ArrayView2<'_, f64>) -> Result<PcaModel> {
    if pool.ncols() != ft.raw_dim() {
        return Err(Error::DimensionMismatch {
            expected: ft.raw_dim(),
            actual: pool.ncols(),
        });
    }
    pca_fit(pool, N_STATIC)
}

fn project(raw: &Array2<f64>, pca: &PcaModel) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((raw.nrows(), N_STATIC));
    for (t, row) in raw.rows().into_iter().enumerate() {
        let p = pca.apply(row.as_slice().unwrap())?;
        out.row_mut(t).assign(&ndarray::ArrayView1::from(&p[..]));
    }
    Ok(out)
}

/// Static coefficients (F × 12) before delta augmentation.
pub fn static_coefficients(
    ft: FeatureType,
    w: &Waveform,
    models: &FrontEndModels,
) -> Result<Array2<f64>> {
    let pca = if ft.uses_pca() {
        Some(models.require_pca(ft)?)
    } else {
        None
    };
    let raw = raw_frames(ft, w, models)?;
    match pca {
        Some(pca) => project(&raw, pca),
        None => {
            let mut out = Array2::zeros((raw.nrows(), N_STATIC));
            for (t, row) in raw.rows().into_iter().enumerate() {
                let c = apply_dct(row.as_slice().unwrap());
                for j in 0..N_STATIC {
                    out[[t, j]] = c[j + 1];
                }
            }
            Ok(out)
        }
    }
}

pub fn extract(ft: FeatureType, w: &Waveform, models: &FrontEndModels) -> Result<FeatureMatrix> {
    let statics = static_coefficients(ft, w, models)?;
    let data = add_deltas(statics.view());
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix"));
    }
    Ok(FeatureMatrix {
        feature_type: ft,
        data,
        utt_id: String::new(),
    })
}

pub fn extract_mfcc(w: &Waveform, models: &FrontEndModels) -> Result<FeatureMatrix> {
    extract(FeatureType::Mfcc, w, models)
}

pub fn extract_mfpc(w: &Waveform, models: &FrontEndModels) -> Result<FeatureMatrix> {
    extract(FeatureType::Mfpc, w, models)
}

pub fn extract_cosphasepc(w: &Waveform, models: &FrontEndModels) -> Result<FeatureMatrix> {
    extract(FeatureType::CosPhasePc, w, models)
}

pub fn extract_mwpc(w: &Waveform, models: &FrontEndModels) -> Result<FeatureMatrix> {
    extract(FeatureType::Mwpc, w, models)
}

fn regression(c: ArrayView2<'_, f64>) -> Array2<f64> {
    let (f, k) = c.dim();
    let last = f as isize - 1;
    let norm: f64 = 2.0 * (1..=DELTA_WINDOW).map(|n| (n * n) as f64).sum::<f64>();
    let at = |t: isize| t.clamp(0, last) as usize;
    Array2::from_shape_fn((f, k), |(t, j)| {
        let t = t as isize;
        (1..=DELTA_WINDOW as isize)
            .map(|n| n as f64 * (c[[at(t + n), j]] - c[[at(t - n), j]]))
            .sum::<f64>()
            / norm
    })
}

/// Appends delta and delta-delta columns (±2 frame regression, edge replication).
pub fn add_deltas(statics: ArrayView2<'_, f64>) -> Array2<f64> {
    let (f, k) = statics.dim();
    let delta = regression(statics);
    let delta2 = regression(delta.view());
    let mut out = Array2::zeros((f, 3 * k));
    out.slice_mut(s![.., 0..k]).assign(&statics);
    out.slice_mut(s![.., k..2 * k]).assign(&delta);
    out.slice_mut(s![.., 2 * k..]).assign(&delta2);
    out
}
