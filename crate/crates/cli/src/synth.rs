//! Seeded synthetic corpus: harmonic-rich filtered-noise mixtures play the
//! human class and band-limited tones play the spoof class.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofguard_core::signal::SAMPLE_RATE;

use crate::pipeline::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_human: usize,
    pub n_spoof: usize,
    pub seconds: f64,
    pub seed: u64,
    /// Attacks cycle through S1..S`n_attacks` over the spoof utterances.
    pub n_attacks: u8,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_human: 200,
            n_spoof: 200,
            seconds: 1.0,
            seed: 0,
            n_attacks: 5,
        }
    }
}

const PEAK: f64 = 0.5;

/// Syllable-rate gain between `floor` and 1.
fn envelope(rate: f64, phase: f64, floor: f64, time: f64) -> f64 {
    floor + (1.0 - floor) * (TAU * rate * time + phase).sin().powi(2)
}

/// Adds white noise at `snr_db` below the signal's RMS level.
fn add_room_noise(rng: &mut impl Rng, x: &mut [f64], snr_db: f64) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    let gain = rms * 10f64.powf(-snr_db / 20.0) * 3f64.sqrt();
    for v in x.iter_mut() {
        *v += gain * rng.random_range(-1.0..1.0);
    }
}

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= PEAK / peak);
    }
    x
}

/// Voiced harmonic source with vibrato and a syllable-rate envelope, mixed
/// with low-passed white noise.
///
/// Both classes share a white room-noise floor 20-35 dB below the signal.
pub fn human_signal(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let fs = f64::from(SAMPLE_RATE);
    let f0 = rng.random_range(90.0..250.0);
    let vib_rate = rng.random_range(3.0..7.0);
    let vib_depth = rng.random_range(0.01..0.04);
    let syll_rate = rng.random_range(2.0..5.0);
    let syll_phase = rng.random_range(0.0..TAU);
    let n_harm = ((7000.0 / f0) as usize).max(1);
    let formant = rng.random_range(400.0..900.0);
    let amps: Vec<f64> = (1..=n_harm)
        .map(|k| {
            let f = k as f64 * f0;
            let bump = 1.0 + 2.0 * (-((f - formant) / 300.0).powi(2)).exp();
            bump * rng.random_range(0.4..1.0) / k as f64
        })
        .collect();
    let phases: Vec<f64> = (0..n_harm).map(|_| rng.random_range(0.0..TAU)).collect();
    let smooth = rng.random_range(0.3..0.9);
    let noise_gain = rng.random_range(0.2..0.5);

    let mut out = Vec::with_capacity(n);
    let mut theta = 0.0;
    let mut lp = 0.0;
    for t in 0..n {
        let time = t as f64 / fs;
        let inst_f0 = f0 * (1.0 + vib_depth * (TAU * vib_rate * time).sin());
        theta += TAU * inst_f0 / fs;
        let voiced: f64 = amps
            .iter()
            .zip(&phases)
            .enumerate()
            .map(|(k, (a, p))| a * ((k + 1) as f64 * theta + p).sin())
            .sum();
        let white: f64 = rng.random_range(-1.0..1.0);
        lp = smooth * lp + (1.0 - smooth) * white;
        let env = envelope(syll_rate, syll_phase, 0.05, time);
        out.push(env * (voiced + noise_gain * lp));
    }
    let snr = rng.random_range(20.0..35.0);
    add_room_noise(rng, &mut out, snr);
    normalize(out)
}

/// One to three steady tones inside an attack-specific band, gated by a
/// syllable-rate envelope.
pub fn spoof_signal(rng: &mut impl Rng, attack: u8, n: usize) -> Vec<f64> {
    let fs = f64::from(SAMPLE_RATE);
    let lo = 200.0 + 300.0 * f64::from(attack.saturating_sub(1));
    let hi = lo + 1500.0;
    let n_tones = 1 + usize::from(attack % 3);
    let tones: Vec<(f64, f64, f64)> = (0..n_tones)
        .map(|_| {
            (
                rng.random_range(lo..hi),
                rng.random_range(0.3..1.0),
                rng.random_range(0.0..TAU),
            )
        })
        .collect();
    let syll_rate = rng.random_range(2.0..5.0);
    let syll_phase = rng.random_range(0.0..TAU);
    let mut out: Vec<f64> = (0..n)
        .map(|t| {
            let time = t as f64 / fs;
            let tone: f64 = tones
                .iter()
                .map(|(f, a, p)| a * (TAU * f * time + p).sin())
                .sum();
            envelope(syll_rate, syll_phase, 0.05, time) * tone
        })
        .collect();
    let snr = rng.random_range(20.0..35.0);
    add_room_noise(rng, &mut out, snr);
    normalize(out)
}

pub fn write_wav(path: &Path, samples: &[f64]) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)
        .with_context(|| format!("creating {}", path.display()))?;
    for &x in samples {
        let q = (x * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(q)?;
    }
    w.finalize()?;
    Ok(())
}

/// Writes `wav/*.wav` and `manifest.tsv` under `dir`; returns the manifest
/// path. Even-numbered utterances of each class go to `train`, odd ones
/// to `eval`.
pub fn write_corpus(dir: &Path, spec: &SynthSpec) -> Result<PathBuf> {
    let wav_dir = dir.join("wav");
    std::fs::create_dir_all(&wav_dir).with_context(|| format!("creating {}", wav_dir.display()))?;
    let n = (spec.seconds * f64::from(SAMPLE_RATE)).round() as usize;
    let mut manifest = String::from("# utt_id\tpath\tlabel\tattack\tpartition\n");
    let partition = |i: usize| if i.is_multiple_of(2) { "train" } else { "eval" };

    for i in 0..spec.n_human {
        let id = format!("hum_{i:04}");
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 2 * i as u64));
        let x = human_signal(&mut rng, n);
        write_wav(&wav_dir.join(format!("{id}.wav")), &x)?;
        writeln!(manifest, "{id}\twav/{id}.wav\thuman\t-\t{}", partition(i)).unwrap();
    }
    for i in 0..spec.n_spoof {
        let id = format!("spf_{i:04}");
        let attack = 1 + (i % usize::from(spec.n_attacks.max(1))) as u8;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 2 * i as u64 + 1));
        let x = spoof_signal(&mut rng, attack, n);
        write_wav(&wav_dir.join(format!("{id}.wav")), &x)?;
        writeln!(
            manifest,
            "{id}\twav/{id}.wav\tspoof\tS{attack}\t{}",
            partition(i)
        )
        .unwrap();
    }
    let path = dir.join("manifest.tsv");
    std::fs::write(&path, manifest).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signals_are_bounded_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        let x = human_signal(&mut a, 4000);
        assert_eq!(x, human_signal(&mut b, 4000));
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - PEAK).abs() < 1e-12);
        let s = spoof_signal(&mut a, 3, 4000);
        assert!(s.iter().all(|v| v.abs() <= PEAK + 1e-12));
    }
}
