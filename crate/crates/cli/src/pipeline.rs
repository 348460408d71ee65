//! Subcommand implementations: train, score, eval and project-lda.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spoofguard_core::classify::{
    dbn_train, rbm_pretrain, svm_train, DbnParams, Score, SvmParams, PREDETECTOR_SCORE,
};
use spoofguard_core::eval::{
    eer_by_attack, lda_fit_project, parse_manifest, read_scores, write_scores, EerReport,
    LdaProjection, ManifestEntry,
};
use spoofguard_core::features::{
    extract, fit_front_end_pca, raw_frames, FeatureType, FrontEndModels,
};
use spoofguard_core::ndarray::{Array2, Axis};
use spoofguard_core::signal::{frame_count, load_waveform, predetect_zero_run, Waveform};
use spoofguard_core::ubm_tv::{
    collect_bw_stats, extract_ivector, fuse_ivectors, gmm_em_train, ivector_mean,
    postprocess_ivector, tv_train, IVector, TvModel,
};
use spoofguard_core::Label;

use crate::config::{ClassifierKind, PipelineConfig};
use crate::models::{Classifier, SystemModels};

/// Independent stream seeds for the stages of one run (splitmix64).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stage_tag(stage: u64, ft: FeatureType) -> u64 {
    stage * 16 + u64::from(ft.code())
}

const TAG_PCA_POOL: u64 = 1;
const TAG_UBM_POOL: u64 = 2;
const TAG_UBM: u64 = 3;
const TAG_TV: u64 = 4;
const TAG_CLASSIFIER: u64 = 5;

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Manifest entries with audio paths resolved against the manifest directory.
pub struct Corpus {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Corpus {
    pub fn load(manifest: &Path) -> Result<Self> {
        let mut entries = parse_manifest(manifest)
            .with_context(|| format!("reading manifest {}", manifest.display()))?;
        entries.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
        let base_dir = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { base_dir, entries })
    }

    pub fn audio_path(&self, e: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&e.path)
    }

    pub fn waveform(&self, e: &ManifestEntry) -> Result<Waveform> {
        load_waveform(self.audio_path(e)).with_context(|| format!("utterance {}", e.utt_id))
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainSummary {
    pub n_utterances: usize,
    pub n_predetected: usize,
    pub ubm_log_likelihoods: Vec<(FeatureType, Vec<f64>)>,
    pub tv_objectives: Vec<(FeatureType, Vec<f64>)>,
}

/// Per-utterance row indices to keep so that at most `cap` rows survive.
fn select_rows(counts: &[usize], cap: usize, seed: u64) -> Vec<Option<Vec<usize>>> {
    let total: usize = counts.iter().sum();
    if total <= cap {
        return vec![None; counts.len()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, total, cap).into_vec();
    picked.sort_unstable();
    let mut out = vec![Some(Vec::new()); counts.len()];
    let (mut utt, mut offset) = (0usize, 0usize);
    for g in picked {
        while g >= offset + counts[utt] {
            offset += counts[utt];
            utt += 1;
        }
        out[utt].as_mut().unwrap().push(g - offset);
    }
    out
}

fn stack_rows(parts: &[Array2<f64>], keep: &[Option<Vec<usize>>], dim: usize) -> Array2<f64> {
    let n: usize = parts
        .iter()
        .zip(keep)
        .map(|(p, k)| k.as_ref().map_or(p.nrows(), Vec::len))
        .sum();
    let mut out = Array2::zeros((n, dim));
    let mut r = 0;
    for (p, k) in parts.iter().zip(keep) {
        match k {
            None => {
                out.slice_mut(spoofguard_core::ndarray::s![r..r + p.nrows(), ..])
                    .assign(p);
                r += p.nrows();
            }
            Some(rows) => {
                for &i in rows {
                    out.row_mut(r).assign(&p.row(i));
                    r += 1;
                }
            }
        }
    }
    out
}

fn fit_pca(
    cfg: &PipelineConfig,
    corpus: &Corpus,
    train: &[&ManifestEntry],
    counts: &[usize],
    ft: FeatureType,
    front_end: &mut FrontEndModels,
) -> Result<()> {
    let keep = select_rows(
        counts,
        cfg.max_pca_frames,
        derive_seed(cfg.seed, stage_tag(TAG_PCA_POOL, ft)),
    );
    let fe = &*front_end;
    let parts: Vec<Array2<f64>> = train
        .par_iter()
        .zip(&keep)
        .map(|(e, k)| {
            let raw = raw_frames(ft, &corpus.waveform(e)?, fe)
                .with_context(|| format!("utterance {}", e.utt_id))?;
            Ok(match k {
                None => raw,
                Some(rows) => raw.select(Axis(0), rows),
            })
        })
        .collect::<Result<_>>()?;
    let all = vec![None; parts.len()];
    let pool = stack_rows(&parts, &all, ft.raw_dim());
    log::info!("{ft}: fitting PCA on {} frames", pool.nrows());
    let pca = fit_front_end_pca(ft, pool.view())?;
    front_end.set_pca(ft, pca)?;
    Ok(())
}

fn train_feature(
    cfg: &PipelineConfig,
    corpus: &Corpus,
    train: &[&ManifestEntry],
    ft: FeatureType,
    front_end: &FrontEndModels,
    summary: &mut TrainSummary,
) -> Result<(TvModel, Vec<IVector>)> {
    let feats: Vec<Array2<f64>> = train
        .par_iter()
        .map(|e| {
            let w = corpus.waveform(e)?;
            Ok(extract(ft, &w, front_end)
                .with_context(|| format!("utterance {}", e.utt_id))?
                .data)
        })
        .collect::<Result<_>>()
        .with_context(|| format!("stage features.{ft}"))?;

    let counts: Vec<usize> = feats.iter().map(Array2::nrows).collect();
    let keep = select_rows(
        &counts,
        cfg.max_ubm_frames,
        derive_seed(cfg.seed, stage_tag(TAG_UBM_POOL, ft)),
    );
    let pool = stack_rows(&feats, &keep, feats[0].ncols());
    let ubm = gmm_em_train(
        pool.view(),
        cfg.ubm_components,
        cfg.ubm_iters,
        derive_seed(cfg.seed, stage_tag(TAG_UBM, ft)),
    )
    .with_context(|| format!("stage ubm.{ft}"))?;
    drop(pool);
    log::info!(
        "{ft}: UBM ({} components, {} frames) log-likelihood {:.4} -> {:.4}",
        cfg.ubm_components,
        counts.iter().sum::<usize>().min(cfg.max_ubm_frames),
        ubm.log_likelihoods.first().copied().unwrap_or(f64::NAN),
        ubm.log_likelihoods.last().copied().unwrap_or(f64::NAN),
    );
    summary.ubm_log_likelihoods.push((ft, ubm.log_likelihoods));
    let gmm = ubm.gmm;

    let stats = feats
        .par_iter()
        .map(|f| collect_bw_stats(&gmm, f.view()))
        .collect::<spoofguard_core::Result<Vec<_>>>()
        .with_context(|| format!("stage stats.{ft}"))?;
    drop(feats);

    let tv = tv_train(
        &stats,
        &gmm,
        cfg.tv_rank,
        cfg.tv_iters,
        derive_seed(cfg.seed, stage_tag(TAG_TV, ft)),
    )
    .with_context(|| format!("stage tv.{ft}"))?;
    log::info!(
        "{ft}: TV rank {} objective {:.4} -> {:.4}",
        cfg.tv_rank,
        tv.objective.first().copied().unwrap_or(f64::NAN),
        tv.objective.last().copied().unwrap_or(f64::NAN),
    );
    summary.tv_objectives.push((ft, tv.objective));
    let model = tv.model;

    let ivectors = stats
        .par_iter()
        .map(|s| extract_ivector(&model, s))
        .collect::<spoofguard_core::Result<Vec<_>>>()
        .with_context(|| format!("stage ivectors.{ft}"))?;
    Ok((model, ivectors))
}

/// Fits every stage on the training partition; nothing is written.
pub fn train_models(cfg: &PipelineConfig, manifest: &Path) -> Result<(SystemModels, TrainSummary)> {
    cfg.validate()?;
    let corpus = Corpus::load(manifest)?;
    let candidates: Vec<&ManifestEntry> = corpus
        .entries
        .iter()
        .filter(|e| e.partition == cfg.train_partition)
        .collect();
    if candidates.is_empty() {
        bail!("manifest has no {} partition", cfg.train_partition);
    }

    let scan: Vec<(bool, usize)> = candidates
        .par_iter()
        .map(|e| {
            let w = corpus.waveform(e)?;
            let flagged = cfg.predetector && predetect_zero_run(&w, cfg.min_zero_run);
            Ok((flagged, frame_count(w.len())))
        })
        .collect::<Result<_>>()
        .context("stage load")?;
    let mut summary = TrainSummary::default();
    let mut train = Vec::new();
    let mut counts = Vec::new();
    for (e, (flagged, n)) in candidates.iter().zip(scan) {
        if flagged {
            summary.n_predetected += 1;
        } else {
            train.push(*e);
            counts.push(n);
        }
    }
    if summary.n_predetected > 0 {
        log::info!(
            "pre-detector removed {} training utterances",
            summary.n_predetected
        );
    }
    for label in [Label::Human, Label::Spoof] {
        if !train.iter().any(|e| e.label == label) {
            bail!("training partition has no {label} utterances");
        }
    }
    summary.n_utterances = train.len();
    log::info!(
        "training {} on {} utterances (features {})",
        cfg.preset
            .map_or("custom system".to_string(), |p| format!("preset {p}")),
        train.len(),
        cfg.feature_names()
    );

    let mut front_end = FrontEndModels::new()?;
    for &ft in cfg.feature_set.iter().filter(|f| f.uses_pca()) {
        fit_pca(cfg, &corpus, &train, &counts, ft, &mut front_end)
            .with_context(|| format!("stage pca.{ft}"))?;
    }

    let mut tvs = Vec::new();
    let mut per_feature = Vec::new();
    for &ft in &cfg.feature_set {
        let (tv, iv) = train_feature(cfg, &corpus, &train, ft, &front_end, &mut summary)?;
        tvs.push(tv);
        per_feature.push(iv);
    }

    let fused: Vec<IVector> = (0..train.len())
        .map(|i| {
            let parts: Vec<IVector> = per_feature.iter().map(|v| v[i].clone()).collect();
            fuse_ivectors(&parts)
        })
        .collect::<spoofguard_core::Result<_>>()
        .context("stage fusion")?;
    let mean = ivector_mean(&fused).context("stage fusion")?;
    let normalized = fused
        .iter()
        .map(|v| postprocess_ivector(v, &mean))
        .collect::<spoofguard_core::Result<Vec<_>>>()
        .context("stage normalization")?;
    let dim = mean.len();
    let x = Array2::from_shape_fn((normalized.len(), dim), |(i, j)| normalized[i].values[j]);
    let y: Vec<Label> = train.iter().map(|e| e.label).collect();

    let seed = derive_seed(cfg.seed, TAG_CLASSIFIER);
    let classifier = match cfg.classifier {
        ClassifierKind::Svm => {
            let params = SvmParams {
                c: cfg.svm_c,
                ..Default::default()
            };
            let m = svm_train(x.view(), &y, &params, seed).context("stage svm")?;
            log::info!(
                "SVM objective {:.6}",
                spoofguard_core::classify::svm_objective(&m, x.view(), &y, &params)
            );
            Classifier::Svm(m)
        }
        ClassifierKind::Dbn => {
            let pre = rbm_pretrain(x.view(), &cfg.dbn_hidden, cfg.rbm_epochs, cfg.rbm_lr, seed)
                .context("stage rbm")?;
            for (i, curve) in pre.reconstruction_errors.iter().enumerate() {
                if let (Some(a), Some(b)) = (curve.first(), curve.last()) {
                    log::info!("RBM layer {i} reconstruction error {a:.6} -> {b:.6}");
                }
            }
            let params = DbnParams {
                epochs: cfg.dbn_epochs,
                lr: cfg.dbn_lr,
                weight_decay: cfg.dbn_weight_decay,
                ..Default::default()
            };
            let m = dbn_train(&pre.layers, x.view(), &y, &params, derive_seed(seed, 1))
                .context("stage dbn")?;
            Classifier::Dbn(m)
        }
    };

    Ok((
        SystemModels {
            features: cfg.feature_set.clone(),
            front_end,
            tv: tvs,
            ivector_mean: mean,
            classifier,
            predetector: cfg.predetector,
        },
        summary,
    ))
}

pub fn cmd_train(cfg: &PipelineConfig, manifest: &Path, models_dir: &Path) -> Result<TrainSummary> {
    with_jobs(cfg.jobs, || {
        let (models, summary) = train_models(cfg, manifest)?;
        models.save(models_dir)?;
        log::info!("models written to {}", models_dir.display());
        Ok(summary)
    })?
}

/// Fused, not yet normalized i-vector of `w` over `features`.
pub fn raw_ivector(
    models: &SystemModels,
    w: &Waveform,
    features: &[FeatureType],
) -> Result<IVector> {
    let parts = features
        .iter()
        .map(|ft| {
            let i = feature_index(models, *ft)?;
            let f = extract(*ft, w, &models.front_end)?;
            let tv = &models.tv[i];
            let stats = collect_bw_stats(&tv.ubm, f.data.view())?;
            Ok(extract_ivector(tv, &stats)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fuse_ivectors(&parts)?)
}

fn feature_index(models: &SystemModels, ft: FeatureType) -> Result<usize> {
    models
        .features
        .iter()
        .position(|f| *f == ft)
        .ok_or_else(|| anyhow!("models were not trained with {ft}"))
}

fn mean_slice(models: &SystemModels, features: &[FeatureType]) -> Result<Vec<f64>> {
    let r = models.tv_rank();
    let mut out = Vec::with_capacity(r * features.len());
    for ft in features {
        let i = feature_index(models, *ft)?;
        out.extend_from_slice(&models.ivector_mean[i * r..(i + 1) * r]);
    }
    Ok(out)
}

pub fn check_compatible(cfg: &PipelineConfig, models: &SystemModels) -> Result<()> {
    if cfg.feature_set != models.features {
        let names = |f: &[FeatureType]| f.iter().map(|x| x.name()).collect::<Vec<_>>().join(",");
        bail!(
            "model/config mismatch: models use features {}, configuration requests {}",
            names(&models.features),
            names(&cfg.feature_set)
        );
    }
    Ok(())
}

fn selected<'a>(cfg: &PipelineConfig, corpus: &'a Corpus) -> Vec<&'a ManifestEntry> {
    corpus
        .entries
        .iter()
        .filter(|e| cfg.partition.is_none_or(|p| e.partition == p))
        .collect()
}

/// Scores every selected entry; the result is sorted by utterance id.
pub fn score_corpus(
    cfg: &PipelineConfig,
    corpus: &Corpus,
    models: &SystemModels,
) -> Result<Vec<Score>> {
    check_compatible(cfg, models)?;
    let entries = selected(cfg, corpus);
    let mut scores = entries
        .par_iter()
        .map(|e| {
            let w = corpus.waveform(e)?;
            let value = if cfg.predetector && predetect_zero_run(&w, cfg.min_zero_run) {
                PREDETECTOR_SCORE
            } else {
                let raw = raw_ivector(models, &w, &models.features)
                    .with_context(|| format!("utterance {}", e.utt_id))?;
                let v = postprocess_ivector(&raw, &models.ivector_mean)
                    .with_context(|| format!("utterance {}", e.utt_id))?;
                models.classifier.score(&v.values)?
            };
            Ok(Score {
                utt_id: e.utt_id.clone(),
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    Ok(scores)
}

pub fn cmd_score(
    cfg: &PipelineConfig,
    manifest: &Path,
    models_dir: &Path,
    out: &Path,
) -> Result<Vec<Score>> {
    with_jobs(cfg.jobs, || {
        let corpus = Corpus::load(manifest)?;
        let models = SystemModels::load(models_dir)?;
        let scores = score_corpus(cfg, &corpus, &models)?;
        write_scores(out, &scores).with_context(|| format!("writing {}", out.display()))?;
        log::info!("{} scores written to {}", scores.len(), out.display());
        Ok(scores)
    })?
}

/// One report row per score file, named after the file stem.
pub fn cmd_eval(score_files: &[PathBuf], manifest: &Path, out: Option<&Path>) -> Result<EerReport> {
    if score_files.is_empty() {
        bail!("no score files given");
    }
    let corpus = Corpus::load(manifest)?;
    let mut report = EerReport::new();
    for path in score_files {
        let scores = read_scores(path).with_context(|| format!("reading {}", path.display()))?;
        let result = eer_by_attack(&scores, &corpus.entries)
            .with_context(|| format!("evaluating {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        report.push(name, result);
    }
    if let Some(out) = out {
        std::fs::write(out, report.to_tsv())
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(report)
}

/// LDA of normalized fused i-vectors, classes `human` / attack id.
/// Uses the configured feature subset when it differs from the models'.
pub fn cmd_project_lda(
    cfg: &PipelineConfig,
    manifest: &Path,
    models_dir: &Path,
    out: &Path,
) -> Result<LdaProjection> {
    with_jobs(cfg.jobs, || {
        let corpus = Corpus::load(manifest)?;
        let models = SystemModels::load(models_dir)?;
        let features = if cfg.explicit_system {
            cfg.feature_set.clone()
        } else {
            models.features.clone()
        };
        let mean = mean_slice(&models, &features)?;
        let entries = selected(cfg, &corpus);
        let vectors = entries
            .par_iter()
            .map(|e| {
                let w = corpus.waveform(e)?;
                let raw = raw_ivector(&models, &w, &features)
                    .with_context(|| format!("utterance {}", e.utt_id))?;
                Ok(postprocess_ivector(&raw, &mean)?.values)
            })
            .collect::<Result<Vec<_>>>()?;
        if vectors.is_empty() {
            bail!("no utterances selected for projection");
        }
        let x = Array2::from_shape_fn((vectors.len(), mean.len()), |(i, j)| vectors[i][j]);
        let classes: Vec<String> = entries.iter().map(|e| e.class_name()).collect();
        let proj = lda_fit_project(x.view(), &classes, cfg.lda_dims).context("stage lda")?;
        if proj.k() < cfg.lda_dims {
            log::warn!(
                "projection has {} axes (requested {})",
                proj.k(),
                cfg.lda_dims
            );
        }
        let ids: Vec<String> = entries.iter().map(|e| e.utt_id.clone()).collect();
        proj.write_tsv(out, &ids)
            .with_context(|| format!("writing {}", out.display()))?;
        Ok(proj)
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_selection() {
        assert_eq!(select_rows(&[3, 4], 10, 0), vec![None, None]);
        let keep = select_rows(&[5, 0, 7, 3], 6, 11);
        let total: usize = keep.iter().map(|k| k.as_ref().unwrap().len()).sum();
        assert_eq!(total, 6);
        assert!(keep[1].as_ref().unwrap().is_empty());
        for (k, n) in keep.iter().zip([5, 0, 7, 3]) {
            let k = k.as_ref().unwrap();
            assert!(k.windows(2).all(|w| w[0] < w[1]));
            assert!(k.iter().all(|&i| i < n));
        }
        assert_eq!(select_rows(&[5, 0, 7, 3], 6, 11), keep);
    }

    #[test]
    fn seeds_differ_by_tag() {
        let a = derive_seed(1, 1);
        assert_ne!(a, derive_seed(1, 2));
        assert_ne!(a, derive_seed(2, 1));
        assert_eq!(a, derive_seed(1, 1));
    }
}
