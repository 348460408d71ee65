//! Audio ingestion, the zero-run pre-detector, framing and short-time spectra.
//!
//! Everything here operates on 16 kHz mono audio cut into 256-sample
//! Hamming-windowed frames with a 128-sample hop.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use ndarray::{Array2, ArrayView1};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
pub const FRAME_LEN: usize = 256;
pub const HOP: usize = 128;
/// Number of non-redundant DFT bins of a real 256-point frame.
pub const N_BINS: usize = FRAME_LEN / 2 + 1;
/// 100 ms at 16 kHz.
pub const DEFAULT_MIN_ZERO_RUN: usize = 1600;

/// Decoded mono PCM audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate != SAMPLE_RATE {
            return Err(Error::InvalidWaveform(format!(
                "sample rate {sample_rate} Hz, expected {SAMPLE_RATE} Hz"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::InvalidWaveform(format!(
                "sample {i} is {} (must be finite and within [-1, 1])",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reads a 16-bit PCM mono 16 kHz RIFF/WAVE file.
pub fn load_waveform(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        let kind = match spec.sample_format {
            hound::SampleFormat::Int => "integer",
            hound::SampleFormat::Float => "float",
        };
        return Err(Error::UnsupportedEncoding {
            path: path.to_owned(),
            encoding: format!("{}-bit {kind}", spec.bits_per_sample),
        });
    }
    if spec.channels != 1 {
        return Err(Error::UnsupportedChannels {
            path: path.to_owned(),
            channels: spec.channels,
        });
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(Error::UnsupportedSampleRate {
            path: path.to_owned(),
            rate: spec.sample_rate,
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| wav_error(path, e))?;
    Ok(Waveform {
        samples,
        sample_rate: SAMPLE_RATE,
    })
}

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.to_owned(),
            encoding: "non-PCM format".into(),
        },
        other => Error::MalformedWav {
            path: path.to_owned(),
            reason: other.to_string(),
        },
    }
}

/// Returns true (spoof) when the waveform holds at least `min_run`
/// consecutive samples that are exactly zero.
pub fn predetect_zero_run(w: &Waveform, min_run: usize) -> bool {
    let min_run = min_run.max(1);
    let mut run = 0usize;
    for &s in w.samples() {
        if s == 0.0 {
            run += 1;
            if run >= min_run {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// Symmetric Hamming window, `0.54 - 0.46 cos(2πn / (N - 1))`.
pub fn hamming_window() -> &'static [f64; FRAME_LEN] {
    static WINDOW: OnceLock<[f64; FRAME_LEN]> = OnceLock::new();
    WINDOW.get_or_init(|| {
        let mut w = [0.0; FRAME_LEN];
        let denom = (FRAME_LEN - 1) as f64;
        for (n, v) in w.iter_mut().enumerate() {
            *v = 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos();
        }
        w
    })
}

/// Windowed analysis frames, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub frames: Array2<f64>,
    pub hop: usize,
}

impl FrameSet {
    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }
}

/// Number of whole frames that fit in `len` samples.
pub fn frame_count(len: usize) -> usize {
    if len < FRAME_LEN {
        0
    } else {
        (len - FRAME_LEN) / HOP + 1
    }
}

pub fn frame_and_window(w: &Waveform) -> Result<FrameSet> {
    let samples = w.samples();
    let n = frame_count(samples.len());
    if n == 0 {
        return Err(Error::SignalTooShort {
            len: samples.len(),
            min: FRAME_LEN,
        });
    }
    let window = hamming_window();
    let frames = Array2::from_shape_fn((n, FRAME_LEN), |(f, i)| samples[f * HOP + i] * window[i]);
    Ok(FrameSet { frames, hop: HOP })
}

/// Per-frame power and frequency-unwrapped phase over bins 0..=128.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrames {
    pub power: Array2<f64>,
    pub phase_unwrapped: Array2<f64>,
}

fn fft256() -> Arc<dyn Fft<f64>> {
    static PLAN: OnceLock<Arc<dyn Fft<f64>>> = OnceLock::new();
    PLAN.get_or_init(|| FftPlanner::new().plan_fft_forward(FRAME_LEN))
        .clone()
}

/// DFT of one frame, returning the non-redundant half spectrum.
pub fn frame_dft(frame: ArrayView1<'_, f64>) -> Vec<Complex64> {
    assert_eq!(
        frame.len(),
        FRAME_LEN,
        "frame must hold {FRAME_LEN} samples"
    );
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft256().process(&mut buf);
    buf.truncate(N_BINS);
    buf
}

/// Phase of a DFT bin, with arg(0) defined as 0.
pub fn bin_phase(x: Complex64) -> f64 {
    if x.re == 0.0 && x.im == 0.0 {
        0.0
    } else {
        x.im.atan2(x.re)
    }
}

/// Wraps an angle into (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = x - two_pi * ((x + PI) / two_pi).floor();
    if r <= -PI {
        r + two_pi
    } else {
        r
    }
}

/// Unwraps a phase sequence by adding multiples of 2π so that every step
/// between neighbours lies in (-π, π].
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let Some(&first) = phase.first() else {
        return out;
    };
    out.push(first);
    let mut acc = first;
    for pair in phase.windows(2) {
        acc += wrap_phase(pair[1] - pair[0]);
        out.push(acc);
    }
    out
}

pub fn spectrum(fs: &FrameSet) -> SpectrumFrames {
    let n = fs.n_frames();
    let mut power = Array2::zeros((n, N_BINS));
    let mut phase_unwrapped = Array2::zeros((n, N_BINS));
    for (t, frame) in fs.frames.rows().into_iter().enumerate() {
        let bins = frame_dft(frame);
        let wrapped: Vec<f64> = bins.iter().map(|&x| bin_phase(x)).collect();
        for (k, x) in bins.iter().enumerate() {
            power[[t, k]] = x.norm_sqr();
        }
        for (k, p) in unwrap_phase(&wrapped).into_iter().enumerate() {
            phase_unwrapped[[t, k]] = p;
        }
    }
    SpectrumFrames {
        power,
        phase_unwrapped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform::new(samples, SAMPLE_RATE).unwrap()
    }

    #[test]
    fn rejects_bad_samples_and_rates() {
        assert!(Waveform::new(vec![0.0], 8000).is_err());
        assert!(Waveform::new(vec![1.5], SAMPLE_RATE).is_err());
        assert!(Waveform::new(vec![f64::NAN], SAMPLE_RATE).is_err());
    }

    #[test]
    fn predetector_on_runs() {
        assert!(predetect_zero_run(&wave(vec![0.0; 3200]), 1600));
        let mut s: Vec<f64> = (0..5000).map(|i| 0.1 + 0.001 * (i % 7) as f64).collect();
        assert!(!predetect_zero_run(&wave(s.clone()), 1600));
        for v in &mut s[1000..2599] {
            *v = 0.0;
        }
        assert!(!predetect_zero_run(&wave(s.clone()), 1600));
        s[2599] = 0.0;
        assert!(predetect_zero_run(&wave(s.clone()), 1600));
        assert!(predetect_zero_run(&wave(vec![0.2, 0.0, 0.3]), 1));
        assert!(!predetect_zero_run(&wave(vec![0.2, -0.1, 0.3]), 1));
    }

    #[test]
    fn hamming_endpoints_and_symmetry() {
        let fs = frame_and_window(&wave(vec![1.0; 256])).unwrap();
        assert_eq!(fs.n_frames(), 1);
        let f = fs.frames.row(0);
        assert!((f[0] - 0.08).abs() < 1e-15);
        for n in 0..FRAME_LEN {
            assert!((f[n] - f[FRAME_LEN - 1 - n]).abs() < 1e-12);
        }
    }

    #[test]
    fn framing_counts_and_offsets() {
        let samples: Vec<f64> = (0..384).map(|i| i as f64 / 1000.0).collect();
        let fs = frame_and_window(&wave(samples.clone())).unwrap();
        assert_eq!(fs.n_frames(), 2);
        let w = hamming_window();
        assert_eq!(fs.frames[[1, 10]], samples[138] * w[10]);
        assert_eq!(frame_count(1000), (1000 - 256) / 128 + 1);
        assert!(matches!(
            frame_and_window(&wave(vec![0.0; 255])),
            Err(Error::SignalTooShort { .. })
        ));
    }

    #[test]
    fn zero_frame_spectrum() {
        let fs = FrameSet {
            frames: Array2::zeros((1, FRAME_LEN)),
            hop: HOP,
        };
        let sp = spectrum(&fs);
        assert!(sp.power.iter().all(|&p| p == 0.0));
        assert!(sp.phase_unwrapped.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn impulse_spectrum_is_flat() {
        let mut frames = Array2::zeros((1, FRAME_LEN));
        frames[[0, 0]] = hamming_window()[0];
        let sp = spectrum(&FrameSet { frames, hop: HOP });
        for &p in sp.power.iter() {
            assert!((p - 0.0064).abs() < 1e-15);
        }
    }

    #[test]
    fn spectrum_matches_direct_dft() {
        let frame: Array1<f64> = (0..FRAME_LEN)
            .map(|n| ((n * 37 % 101) as f64 / 101.0) - 0.5)
            .collect();
        let bins = frame_dft(frame.view());
        for (k, x) in bins.iter().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &v) in frame.iter().enumerate() {
                let ang = -2.0 * PI * (k * n) as f64 / FRAME_LEN as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            assert!((x.re - re).abs() < 1e-10 && (x.im - im).abs() < 1e-10);
        }
    }

    #[test]
    fn unwrap_adds_whole_turns() {
        let wrapped = [3.0, -3.0, 3.0, -3.0];
        let u = unwrap_phase(&wrapped);
        for (a, b) in u.iter().zip(&wrapped) {
            assert!((wrap_phase(*a) - b).abs() < 1e-12);
        }
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() <= PI);
        }
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
    }
}
