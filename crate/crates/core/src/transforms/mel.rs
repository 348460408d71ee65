use ndarray::Array2;

use crate::error::{Error, Result};

/// HTK-style mel scale.
pub fn hz_to_mel(f: f64) -> Result<f64> {
    if f.is_nan() || f < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "frequency must be nonnegative, got {f}"
        )));
    }
    Ok(2595.0 * (1.0 + f / 700.0).log10())
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel axis between 0 Hz and
/// `f_max`, sampled at `n_bins` linearly spaced DFT bin frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_filters: usize,
    /// `n_filters` × `n_bins`, not area-normalized.
    pub weights: Array2<f64>,
    pub center_freqs: Vec<f64>,
    /// `n_filters + 2` band edges in Hz; filter `i` spans `edges[i]..edges[i + 2]`.
    pub edges: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_bins(&self) -> usize {
        self.weights.ncols()
    }

    /// Value of filter `i`'s triangle at an arbitrary frequency.
    pub fn triangle_weight(&self, i: usize, freq: f64) -> f64 {
        triangle(self.edges[i], self.edges[i + 1], self.edges[i + 2], freq)
    }

    /// Applies the filterbank to one power-spectrum frame.
    pub fn energies(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .map(|w| w.iter().zip(power).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn triangle(lo: f64, mid: f64, hi: f64, f: f64) -> f64 {
    if f <= lo || f >= hi {
        0.0
    } else if f <= mid {
        (f - lo) / (mid - lo)
    } else {
        (hi - f) / (hi - mid)
    }
}

pub fn build_mel_filterbank(n_filters: usize, n_bins: usize, f_max: f64) -> Result<MelFilterbank> {
    if n_filters == 0 {
        return Err(Error::InvalidArgument(
            "n_filters must be at least 1".into(),
        ));
    }
    if n_bins < 2 || f_max.is_nan() || f_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins and a positive f_max (got {n_bins}, {f_max})"
        )));
    }
    let mel_max = hz_to_mel(f_max)?;
    let step = mel_max / (n_filters + 1) as f64;
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(step * i as f64))
        .collect();
    let bin_hz = f_max / (n_bins - 1) as f64;
    let weights = Array2::from_shape_fn((n_filters, n_bins), |(i, k)| {
        triangle(edges[i], edges[i + 1], edges[i + 2], k as f64 * bin_hz)
    });
    if let Some(i) = weights
        .rows()
        .into_iter()
        .position(|row| row.iter().all(|&w| w <= 0.0))
    {
        return Err(Error::InvalidArgument(format!(
            "{n_filters} mel filters are too many for {n_bins} bins: filter {i} has no support"
        )));
    }
    Ok(MelFilterbank {
        n_filters,
        weights,
        center_freqs: edges[1..=n_filters].to_vec(),
        edges,
    })
}
