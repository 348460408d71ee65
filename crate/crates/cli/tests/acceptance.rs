//! Acceptance criteria 1-11. Runs without the libtest harness so that each
//! criterion prints exactly one PASS / FAIL / SKIP line.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofguard_cli::config::{PipelineConfig, Preset};
use spoofguard_cli::pipeline::{cmd_score, cmd_train};
use spoofguard_cli::synth::{write_corpus, SynthSpec};
use spoofguard_core::classify::{DbnModel, DenseLayer};
use spoofguard_core::eval::{compute_eer, eer_by_attack, parse_manifest, Partition};
use spoofguard_core::features::FeatureType;
use spoofguard_core::nalgebra::{DMatrix, DVector};
use spoofguard_core::ndarray::Array2;
use spoofguard_core::signal::{predetect_zero_run, Waveform, DEFAULT_MIN_ZERO_RUN, SAMPLE_RATE};
use spoofguard_core::transforms::{
    apply_dct, pca_fit, tke, wpt_decompose, wpt_reconstruct, WaveletPacketTree,
};
use spoofguard_core::ubm_tv::{
    extract_ivector, gmm_em_train, tv_train, BwStats, DiagonalGmm, TvModel,
};
use spoofguard_core::Label;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng)
}

fn c1_end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_corpus(
        dir.path(),
        &SynthSpec {
            n_human: 200,
            n_spoof: 200,
            seconds: 1.0,
            seed: 2015,
            n_attacks: 5,
        },
    )
    .map_err(|e| format!("{e:#}"))?;
    let mut cfg = PipelineConfig::from_preset(Preset::Desk);
    cfg.ubm_components = 32;
    cfg.tv_rank = 20;
    cfg.seed = 1;
    cfg.partition = Some(Partition::Eval);
    let models = dir.path().join("models");
    let scores_path = dir.path().join("scores.tsv");
    cmd_train(&cfg, &manifest, &models).map_err(|e| format!("{e:#}"))?;
    let scores = cmd_score(&cfg, &manifest, &models, &scores_path).map_err(|e| format!("{e:#}"))?;
    let entries = parse_manifest(&manifest).map_err(|e| e.to_string())?;
    let eer = eer_by_attack(&scores, &entries).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(scores.len() == 200, || {
        format!("{} eval scores, expected 200", scores.len())
    })?;
    check(eer.eer_overall <= 5.0, || {
        format!("held-out EER {:.2}% > 5%", eer.eer_overall)
    })?;
    check(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:.1?}")
    })?;
    Ok(format!(
        "held-out EER {:.2}% on 200 eval utterances in {:.1?}",
        eer.eer_overall, elapsed
    ))
}

fn c2_em_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let centers: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..36).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let x = Array2::from_shape_fn((1000, 36), |(i, j)| centers[i % 4][j] + gaussian(&mut rng));
    let t = gmm_em_train(x.view(), 8, 10, 7).map_err(|e| e.to_string())?;
    check(t.log_likelihoods.len() == 11, || {
        "missing log-likelihood entries".into()
    })?;
    for (i, w) in t.log_likelihoods.windows(2).enumerate() {
        let dip = (w[0] - w[1]) / w[0].abs();
        check(dip <= 1e-8, || {
            format!("iteration {}: {} -> {}", i + 1, w[0], w[1])
        })?;
    }
    Ok(format!(
        "log-likelihood {:.3} -> {:.3} over 10 iterations",
        t.log_likelihoods[0], t.log_likelihoods[10]
    ))
}

fn random_ubm(rng: &mut ChaCha8Rng, c: usize, d: usize) -> DiagonalGmm {
    let raw: Vec<f64> = (0..c).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / s).collect();
    let means = Array2::from_shape_fn((c, d), |_| rng.random_range(-2.0..2.0));
    let vars = Array2::from_shape_fn((c, d), |_| rng.random_range(0.3..2.0));
    DiagonalGmm::new(weights, means, vars).unwrap()
}

fn c3_ivector_oracle() -> Outcome {
    let (c, d, r) = (2, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let ubm = random_ubm(&mut rng, c, d);
        let t = DMatrix::from_fn(c * d, r, |_, _| rng.random_range(-1.5..1.5));
        let model = TvModel::new(t.clone(), ubm.clone()).map_err(|e| e.to_string())?;
        let n: Vec<f64> = (0..c).map(|_| rng.random_range(0.0..50.0)).collect();
        let f = Array2::from_shape_fn((c, d), |(k, _)| n[k] * rng.random_range(-3.0..3.0));
        let stats = BwStats {
            n: n.clone(),
            f: f.clone(),
        };
        let got = extract_ivector(&model, &stats).map_err(|e| e.to_string())?;

        // Dense assembly: N and Σ⁻¹ as full CD × CD diagonal matrices.
        let cd = c * d;
        let big_n = DMatrix::from_fn(cd, cd, |i, j| if i == j { n[i / d] } else { 0.0 });
        let sigma_inv = DMatrix::from_fn(cd, cd, |i, j| {
            if i == j {
                1.0 / ubm.variances()[[i / d, i % d]]
            } else {
                0.0
            }
        });
        let centered = DVector::from_fn(cd, |i, _| {
            f[[i / d, i % d]] - n[i / d] * ubm.means()[[i / d, i % d]]
        });
        let precision = DMatrix::identity(r, r) + t.transpose() * &sigma_inv * &big_n * &t;
        let rhs = t.transpose() * &sigma_inv * centered;
        let want = precision.lu().solve(&rhs).ok_or("oracle solve failed")?;
        for (a, b) in got.values.iter().zip(want.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-8, || format!("max abs error {worst:.3e}"))?;
    Ok(format!("100 instances, max abs error {worst:.1e}"))
}

fn c4_transforms() -> Outcome {
    // DCT Gram matrix
    let mut dct_err = 0.0f64;
    for n in [12usize, 24, 129] {
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                apply_dct(&e)
            })
            .collect();
        let m = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        let gram = m.transpose() * &m;
        dct_err = dct_err.max((gram - DMatrix::identity(n, n)).amax());
    }
    check(dct_err <= 1e-10, || format!("DCT Gram error {dct_err:.3e}"))?;

    // PCA against a Jacobi eigen-decomposition of an independently built covariance
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mix = DMatrix::from_fn(8, 8, |_, _| gaussian(&mut rng));
    let scales = [8.0, 6.0, 4.5, 3.0, 2.0, 1.2, 0.6, 0.3];
    let x = Array2::from_shape_fn((50, 8), |_| 0.0);
    let mut x = x;
    for i in 0..50 {
        let z = DVector::from_fn(8, |j, _| scales[j] * gaussian(&mut rng));
        let row = &mix * z;
        for j in 0..8 {
            x[[i, j]] = row[j] + 1.5;
        }
    }
    let mut pca_angle = 0.0f64;
    for k in [1usize, 3, 5] {
        let model = pca_fit(x.view(), k).map_err(|e| e.to_string())?;
        let mean: Vec<f64> = (0..8).map(|j| x.column(j).sum() / 50.0).collect();
        let cov = DMatrix::from_fn(8, 8, |a, b| {
            (0..50)
                .map(|i| (x[[i, a]] - mean[a]) * (x[[i, b]] - mean[b]))
                .sum::<f64>()
                / 49.0
        });
        let (_, vecs) = common::jacobi_eigen(&cov);
        let oracle = vecs.columns(0, k).into_owned();
        pca_angle = pca_angle.max(common::max_principal_angle(&model.basis, &oracle));
    }
    check(pca_angle < 1e-6, || {
        format!("PCA subspace angle {pca_angle:.3e}")
    })?;

    // WPT energy and perfect reconstruction
    let tree = WaveletPacketTree::default();
    let (mut energy_err, mut recon_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let frame: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let leaves = wpt_decompose(&frame, &tree).map_err(|e| e.to_string())?;
        let e_in: f64 = frame.iter().map(|v| v * v).sum();
        let e_out: f64 = leaves.iter().flatten().map(|v| v * v).sum();
        energy_err = energy_err.max((e_in - e_out).abs() / e_in);
        let back = wpt_reconstruct(&leaves, &tree).map_err(|e| e.to_string())?;
        for (a, b) in frame.iter().zip(&back) {
            recon_err = recon_err.max((a - b).abs());
        }
    }
    check(energy_err <= 1e-8, || {
        format!("WPT energy error {energy_err:.3e}")
    })?;
    check(recon_err <= 1e-8, || {
        format!("WPT reconstruction error {recon_err:.3e}")
    })?;
    Ok(format!(
        "DCT {dct_err:.1e}, PCA angle {pca_angle:.1e}, WPT energy {energy_err:.1e}, recon {recon_err:.1e}"
    ))
}

fn c5_tke() -> Outcome {
    let constant = tke(&[0.37; 64]).map_err(|e| e.to_string())?;
    check(constant.iter().all(|&v| v == 0.0), || {
        "constant input is not exactly 0".into()
    })?;
    let ramp: Vec<f64> = (0..64).map(|t| t as f64).collect();
    let r = tke(&ramp).map_err(|e| e.to_string())?;
    check(r.iter().all(|&v| v == 1.0), || {
        "ramp input is not exactly 1".into()
    })?;
    let (a, omega, phi) = (0.7f64, 0.3f64, 0.4f64);
    let s: Vec<f64> = (0..512)
        .map(|t| a * (omega * t as f64 + phi).cos())
        .collect();
    let want = a * a * omega.sin().powi(2);
    let got = tke(&s).map_err(|e| e.to_string())?;
    let err = got.iter().map(|v| (v - want).abs()).fold(0.0, f64::max);
    check(err <= 1e-9, || format!("sinusoid max error {err:.3e}"))?;
    Ok(format!("sinusoid max error {err:.1e}"))
}

fn c6_eer_oracle() -> Outcome {
    let examples: [(&[f64], &[f64], f64); 3] = [
        (&[0.9, 0.8], &[0.1, 0.2], 0.0),
        (&[0.1], &[0.9], 100.0),
        (&[0.8, 0.4], &[0.6, 0.2], 50.0),
    ];
    for (g, s, want) in examples {
        let got = compute_eer(g, s).map_err(|e| e.to_string())?.eer_overall;
        check((got - want).abs() <= 1e-12, || {
            format!("{g:?} vs {s:?}: {got} != {want}")
        })?;
        check((common::eer_oracle(g, s) - want).abs() <= 1e-12, || {
            "oracle disagrees with worked example".into()
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let ng = rng.random_range(1..=50);
        let ns = rng.random_range(1..=50);
        // Every third instance draws from a coarse grid to force ties.
        let mut draw = |shift: f64| -> f64 {
            if i % 3 == 0 {
                f64::from(rng.random_range(0..12)) * 0.25
            } else {
                rng.random_range(-1.0..1.0) + shift
            }
        };
        let shift = if i % 2 == 0 { 0.5 } else { 0.0 };
        let g: Vec<f64> = (0..ng).map(|_| draw(shift)).collect();
        let s: Vec<f64> = (0..ns).map(|_| draw(0.0)).collect();
        let got = compute_eer(&g, &s).map_err(|e| e.to_string())?.eer_overall;
        let want = common::eer_oracle(&g, &s);
        worst = worst.max((got - want).abs());
    }
    check(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!(
        "3 worked examples + 1000 random sets, max deviation {worst:.1e}"
    ))
}

fn c7_dbn_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut layer = |o: usize, i: usize| DenseLayer {
        weights: DMatrix::from_fn(o, i, |_, _| rng.random_range(-1.0..1.0)),
        bias: DVector::from_fn(o, |_, _| rng.random_range(-0.5..0.5)),
    };
    let mut net = DbnModel {
        hidden: vec![layer(4, 5), layer(3, 4)],
        head: layer(2, 3),
    };
    let x = Array2::from_shape_fn((6, 5), |_| rng.random_range(-1.0..1.0));
    let y: Vec<Label> = (0..6)
        .map(|i| {
            if i % 2 == 0 {
                Label::Human
            } else {
                Label::Spoof
            }
        })
        .collect();
    let (_, grad) = net.loss_and_gradient(x.view(), &y, 0.0);
    let analytic = grad.flat_params();
    let base = net.flat_params();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        net.set_flat_params(&p);
        let up = net.loss_and_gradient(x.view(), &y, 0.0).0;
        p[i] = base[i] - h;
        net.set_flat_params(&p);
        let down = net.loss_and_gradient(x.view(), &y, 0.0).0;
        let numeric = (up - down) / (2.0 * h);
        let rel = (numeric - analytic[i]).abs() / (numeric.abs() + analytic[i].abs()).max(1e-8);
        worst = worst.max(rel);
    }
    net.set_flat_params(&base);
    check(worst < 1e-4, || {
        format!("max relative gradient error {worst:.3e}")
    })?;
    let mut sum_err = 0.0f64;
    for _ in 0..200 {
        let v: Vec<f64> = (0..5).map(|_| rng.random_range(-20.0..20.0)).collect();
        let p = net.probabilities(&v).map_err(|e| e.to_string())?;
        sum_err = sum_err.max((p[0] + p[1] - 1.0).abs());
    }
    check(sum_err <= 1e-12, || {
        format!("softmax sum error {sum_err:.3e}")
    })?;
    Ok(format!(
        "{} parameters, max relative error {worst:.1e}, softmax sum error {sum_err:.1e}",
        base.len()
    ))
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn c8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_corpus(
        dir.path(),
        &SynthSpec {
            n_human: 24,
            n_spoof: 24,
            seconds: 0.5,
            seed: 8,
            n_attacks: 3,
        },
    )
    .map_err(|e| format!("{e:#}"))?;
    let mut cfg = PipelineConfig::from_preset(Preset::Contrastive1);
    cfg.ubm_components = 8;
    cfg.tv_rank = 6;
    cfg.tv_iters = 3;
    cfg.seed = 42;
    let mut runs = Vec::new();
    for (run, jobs) in [(0, Some(1)), (1, Some(4))] {
        cfg.jobs = jobs;
        let models = dir.path().join(format!("models{run}"));
        let scores = dir.path().join(format!("scores{run}.tsv"));
        cmd_train(&cfg, &manifest, &models).map_err(|e| format!("{e:#}"))?;
        cmd_score(&cfg, &manifest, &models, &scores).map_err(|e| format!("{e:#}"))?;
        runs.push((dir_files(&models), std::fs::read(&scores).unwrap()));
    }
    let (a, b) = (&runs[0], &runs[1]);
    check(a.0.len() == 8, || {
        format!("expected 8 model files, found {}", a.0.len())
    })?;
    for ((na, ba), (nb, bb)) in a.0.iter().zip(&b.0) {
        check(na == nb && ba == bb, || {
            format!("model file {na} differs between runs")
        })?;
    }
    check(a.1 == b.1, || "score files differ between runs".into())?;
    Ok(format!(
        "{} model files and the score file are bit-identical (1 vs 4 threads)",
        a.0.len()
    ))
}

fn c9_subspace_recovery() -> Outcome {
    let (c, d, r) = (2, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ubm = random_ubm(&mut rng, c, d);
    let t_true = DMatrix::from_fn(c * d, r, |_, _| rng.random_range(-2.0..2.0));
    let stats: Vec<BwStats> = (0..500)
        .map(|_| {
            let w = DVector::from_fn(r, |_, _| gaussian(&mut rng));
            let shift = &t_true * w;
            let n: Vec<f64> = (0..c)
                .map(|_| f64::from(rng.random_range(20..200)))
                .collect();
            // Sum of n_c frames drawn from N(m_c + T_c w, Σ_c).
            let f = Array2::from_shape_fn((c, d), |(k, j)| {
                let mean = ubm.means()[[k, j]] + shift[k * d + j];
                n[k] * mean + (n[k] * ubm.variances()[[k, j]]).sqrt() * gaussian(&mut rng)
            });
            BwStats { n, f }
        })
        .collect();
    let trained = tv_train(&stats, &ubm, r, 20, 99).map_err(|e| e.to_string())?;
    let angle = common::max_principal_angle(&trained.model.t_matrix, &t_true);
    check(angle < 0.1, || {
        format!("largest principal angle {angle:.4} rad")
    })?;
    Ok(format!(
        "largest principal angle {angle:.2e} rad after 20 iterations"
    ))
}

fn c10_predetector() -> Outcome {
    let n = SAMPLE_RATE as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let quantize = |x: f64| (x * 32767.0).round() / 32768.0;
    let mut detected = 0;
    let mut cases = 0;
    let zeros = Waveform::new(vec![0.0; n], SAMPLE_RATE).map_err(|e| e.to_string())?;
    cases += 1;
    detected += usize::from(predetect_zero_run(&zeros, DEFAULT_MIN_ZERO_RUN));
    for i in 0..200 {
        let run = DEFAULT_MIN_ZERO_RUN + (i * 37) % 6000;
        let start = rng.random_range(0..=n - run);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                let v = quantize(rng.random_range(-0.3..0.3));
                if v == 0.0 {
                    1.0 / 32768.0
                } else {
                    v
                }
            })
            .collect();
        x[start..start + run].iter_mut().for_each(|v| *v = 0.0);
        let w = Waveform::new(x, SAMPLE_RATE).map_err(|e| e.to_string())?;
        cases += 1;
        detected += usize::from(predetect_zero_run(&w, DEFAULT_MIN_ZERO_RUN));
    }
    check(detected == cases, || {
        format!("detected {detected} of {cases} zero-run signals")
    })?;

    let mut false_alarms = 0;
    for _ in 0..1000 {
        // Low-level noise plus triangular dither, quantized to 16 bits.
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let signal = rng.random_range(-1e-4..1e-4);
                let dither = (rng.random::<f64>() - rng.random::<f64>()) / 32768.0;
                quantize(signal + dither)
            })
            .collect();
        let w = Waveform::new(x, SAMPLE_RATE).map_err(|e| e.to_string())?;
        false_alarms += usize::from(predetect_zero_run(&w, DEFAULT_MIN_ZERO_RUN));
    }
    check(false_alarms == 0, || {
        format!("{false_alarms} false alarms on dithered noise")
    })?;
    Ok(format!(
        "{detected}/{cases} zero-run signals flagged, 0/1000 false alarms"
    ))
}

const CORPUS_ENV: &str = "SPOOFGUARD_ASVSPOOF_MANIFEST";

/// `None` means skipped because no corpus was supplied.
fn c11_corpus_ordering() -> Option<Outcome> {
    let manifest = std::env::var_os(CORPUS_ENV)?;
    let manifest = Path::new(&manifest);
    let run = || -> Outcome {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let entries = parse_manifest(manifest).map_err(|e| e.to_string())?;
        let mut eers = Vec::new();
        for ft in [
            FeatureType::Mfcc,
            FeatureType::Mfpc,
            FeatureType::CosPhasePc,
            FeatureType::Mwpc,
        ] {
            let mut cfg = PipelineConfig::from_preset(Preset::Desk);
            cfg.feature_set = vec![ft];
            cfg.partition = Some(Partition::Dev);
            let models = dir.path().join(ft.name());
            let scores = dir.path().join(format!("{}.tsv", ft.name()));
            cmd_train(&cfg, manifest, &models).map_err(|e| format!("{e:#}"))?;
            let s = cmd_score(&cfg, manifest, &models, &scores).map_err(|e| format!("{e:#}"))?;
            let eer = eer_by_attack(&s, &entries).map_err(|e| e.to_string())?;
            eers.push((ft, eer.eer_overall));
        }
        let ordered = eers.windows(2).all(|w| w[0].1 > w[1].1);
        let summary = eers
            .iter()
            .map(|(f, e)| format!("{f} {e:.3}%"))
            .collect::<Vec<_>>()
            .join(", ");
        check(ordered, || format!("ordering violated: {summary}"))?;
        Ok(summary)
    };
    Some(run())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "end-to-end synthetic experiment", c1_end_to_end),
        (2, "UBM EM monotonicity", c2_em_monotone),
        (3, "i-vector dense-solve oracle", c3_ivector_oracle),
        (4, "transform exactness", c4_transforms),
        (5, "TKE identities", c5_tke),
        (6, "EER exhaustive oracle", c6_eer_oracle),
        (7, "DBN gradient check", c7_dbn_gradient),
        (8, "train + score determinism", c8_determinism),
        (9, "T-subspace recovery", c9_subspace_recovery),
        (10, "zero-run pre-detector", c10_predetector),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected = |n: u32| filter.is_empty() || filter.iter().any(|f| f == &n.to_string());

    let mut failures = 0;
    for (n, name, f) in criteria {
        if !selected(n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2} ({name}): {detail} [{secs:.1}s]"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {n:>2} ({name}): {why} [{secs:.1}s]");
            }
        }
    }
    if selected(11) {
        match c11_corpus_ordering() {
            None => println!(
                "SKIP criterion 11 (corpus EER ordering): set {CORPUS_ENV} to an ASVspoof 2015 manifest to run it"
            ),
            Some(Ok(detail)) => println!("PASS criterion 11 (corpus EER ordering): {detail}"),
            Some(Err(why)) => {
                failures += 1;
                println!("FAIL criterion 11 (corpus EER ordering): {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
