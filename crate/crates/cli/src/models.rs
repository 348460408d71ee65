//! Trained system state and its on-disk form (one container per stage).
//!
//! ```text
//! frontend.spgd        PCA bases of the PCA-based feature types
//! ubm.<FEATURE>.spgd   diagonal UBM
//! tv.<FEATURE>.spgd    total-variability matrix
//! backend.spgd         system metadata, fused i-vector mean, classifier
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use spoofguard_core::classify::{dbn_score, svm_score, DbnModel, DenseLayer, LinearSvmModel};
use spoofguard_core::container::ModelContainer;
use spoofguard_core::features::{FeatureType, FrontEndModels, FEATURE_DIM};
use spoofguard_core::nalgebra::DVector;
use spoofguard_core::transforms::PcaModel;
use spoofguard_core::ubm_tv::{DiagonalGmm, TvModel};

use crate::config::ClassifierKind;

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Svm(LinearSvmModel),
    Dbn(DbnModel),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Svm(_) => ClassifierKind::Svm,
            Classifier::Dbn(_) => ClassifierKind::Dbn,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Classifier::Svm(m) => m.dim(),
            Classifier::Dbn(m) => m.input_dim(),
        }
    }

    pub fn score(&self, x: &[f64]) -> spoofguard_core::Result<f64> {
        match self {
            Classifier::Svm(m) => svm_score(m, x),
            Classifier::Dbn(m) => dbn_score(m, x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SystemModels {
    pub features: Vec<FeatureType>,
    pub front_end: FrontEndModels,
    /// One TV model (with its UBM) per entry of `features`.
    pub tv: Vec<TvModel>,
    pub ivector_mean: Vec<f64>,
    pub classifier: Classifier,
    /// Pre-detector setting used at training time.
    pub predetector: bool,
}

pub fn frontend_path(dir: &Path) -> PathBuf {
    dir.join("frontend.spgd")
}

pub fn ubm_path(dir: &Path, ft: FeatureType) -> PathBuf {
    dir.join(format!("ubm.{}.spgd", ft.name()))
}

pub fn tv_path(dir: &Path, ft: FeatureType) -> PathBuf {
    dir.join(format!("tv.{}.spgd", ft.name()))
}

pub fn backend_path(dir: &Path) -> PathBuf {
    dir.join("backend.spgd")
}

fn feature_codes(features: &[FeatureType]) -> Vec<f64> {
    features.iter().map(|f| f64::from(f.code())).collect()
}

fn features_from_codes(codes: &[f64]) -> Result<Vec<FeatureType>> {
    codes
        .iter()
        .map(|&c| {
            (c >= 0.0 && c.fract() == 0.0)
                .then(|| FeatureType::from_code(c as u32))
                .flatten()
                .ok_or_else(|| anyhow!("unknown feature code {c}"))
        })
        .collect()
}

fn read_container(path: &Path, known: impl Fn(&str) -> bool) -> Result<ModelContainer> {
    let c = ModelContainer::read(path).with_context(|| format!("loading {}", path.display()))?;
    c.check_sections(known)
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(c)
}

fn write_container(c: &ModelContainer, path: &Path) -> Result<()> {
    c.write(path)
        .with_context(|| format!("writing {}", path.display()))
}

fn pca_sections(ft: FeatureType) -> [String; 3] {
    let n = ft.name();
    [
        format!("pca.{n}.mean"),
        format!("pca.{n}.basis"),
        format!("pca.{n}.eigenvalues"),
    ]
}

fn dense_to(c: &mut ModelContainer, prefix: &str, l: &DenseLayer) -> Result<()> {
    c.insert_matrix(format!("{prefix}.weights"), &l.weights)?;
    c.insert_vector(format!("{prefix}.bias"), l.bias.as_slice())?;
    Ok(())
}

fn dense_from(c: &ModelContainer, prefix: &str) -> Result<DenseLayer> {
    let weights = c.matrix(&format!("{prefix}.weights"))?;
    let bias = DVector::from_vec(c.vector(&format!("{prefix}.bias"))?);
    if bias.len() != weights.nrows() {
        bail!(
            "{prefix}: bias length {} != {} outputs",
            bias.len(),
            weights.nrows()
        );
    }
    Ok(DenseLayer { weights, bias })
}

impl SystemModels {
    pub fn ubm_components(&self) -> usize {
        self.tv.first().map_or(0, |t| t.ubm.n_components())
    }

    pub fn tv_rank(&self) -> usize {
        self.tv.first().map_or(0, |t| t.rank)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating model directory {}", dir.display()))?;

        let mut fe = ModelContainer::new();
        fe.insert_vector("meta.features", &feature_codes(&self.features))?;
        for &ft in self.features.iter().filter(|f| f.uses_pca()) {
            let pca = self
                .front_end
                .pca(ft)
                .ok_or_else(|| anyhow!("no PCA basis for {ft}"))?;
            let [mean, basis, eig] = pca_sections(ft);
            fe.insert_vector(mean, &pca.mean)?;
            fe.insert_matrix(basis, &pca.basis)?;
            fe.insert_vector(eig, &pca.eigenvalues)?;
        }
        write_container(&fe, &frontend_path(dir))?;

        for (ft, tv) in self.features.iter().zip(&self.tv) {
            let mut u = ModelContainer::new();
            u.insert_vector("weights", tv.ubm.weights())?;
            u.insert_array2("means", tv.ubm.means().view())?;
            u.insert_array2("variances", tv.ubm.variances().view())?;
            write_container(&u, &ubm_path(dir, *ft))?;

            let mut t = ModelContainer::new();
            t.insert_matrix("t_matrix", &tv.t_matrix)?;
            write_container(&t, &tv_path(dir, *ft))?;
        }

        let mut b = ModelContainer::new();
        b.insert_vector("meta.features", &feature_codes(&self.features))?;
        b.insert_scalar("meta.ubm_components", self.ubm_components() as f64)?;
        b.insert_scalar("meta.tv_rank", self.tv_rank() as f64)?;
        b.insert_scalar("meta.predetector", if self.predetector { 1.0 } else { 0.0 })?;
        b.insert_vector("ivector.mean", &self.ivector_mean)?;
        match &self.classifier {
            Classifier::Svm(m) => {
                b.insert_scalar("meta.classifier", 0.0)?;
                b.insert_vector("svm.weights", &m.weights)?;
                b.insert_scalar("svm.bias", m.bias)?;
                b.insert_scalar("svm.c", m.c_param)?;
            }
            Classifier::Dbn(m) => {
                b.insert_scalar("meta.classifier", 1.0)?;
                b.insert_scalar("dbn.layers", m.hidden.len() as f64)?;
                for (i, l) in m.hidden.iter().enumerate() {
                    dense_to(&mut b, &format!("dbn.hidden{i}"), l)?;
                }
                dense_to(&mut b, "dbn.head", &m.head)?;
            }
        }
        write_container(&b, &backend_path(dir))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let b = read_container(&backend_path(dir), |n| {
            n.starts_with("meta.")
                || n == "ivector.mean"
                || n.starts_with("svm.")
                || n.starts_with("dbn.")
        })?;
        let features = features_from_codes(&b.vector("meta.features")?)?;
        if features.is_empty() {
            bail!("backend lists no feature types");
        }
        let components = b.count("meta.ubm_components")?;
        let rank = b.count("meta.tv_rank")?;
        let predetector = b.scalar("meta.predetector")? != 0.0;

        let fe = read_container(&frontend_path(dir), |n| {
            n == "meta.features" || n.starts_with("pca.")
        })?;
        if features_from_codes(&fe.vector("meta.features")?)? != features {
            bail!("front-end and backend models list different feature types");
        }
        let mut front_end = FrontEndModels::new()?;
        for &ft in features.iter().filter(|f| f.uses_pca()) {
            let [mean, basis, eig] = pca_sections(ft);
            let pca =
                PcaModel::from_parts(fe.vector(&mean)?, fe.matrix(&basis)?, fe.vector(&eig)?)?;
            front_end
                .set_pca(ft, pca)
                .with_context(|| format!("front-end PCA for {ft}"))?;
        }

        let mut tv = Vec::with_capacity(features.len());
        for &ft in &features {
            let u = read_container(&ubm_path(dir, ft), |n| {
                matches!(n, "weights" | "means" | "variances")
            })?;
            let ubm = DiagonalGmm::new(
                u.vector("weights")?,
                u.array2("means")?,
                u.array2("variances")?,
            )
            .with_context(|| format!("UBM for {ft}"))?;
            if ubm.dim() != FEATURE_DIM || ubm.n_components() != components {
                bail!(
                    "UBM for {ft} is {}x{}, expected {components}x{FEATURE_DIM}",
                    ubm.n_components(),
                    ubm.dim()
                );
            }
            let t = read_container(&tv_path(dir, ft), |n| n == "t_matrix")?;
            let model = TvModel::new(t.matrix("t_matrix")?, ubm)
                .with_context(|| format!("TV model for {ft}"))?;
            if model.rank != rank {
                bail!("TV model for {ft} has rank {}, expected {rank}", model.rank);
            }
            tv.push(model);
        }

        let ivector_mean = b.vector("ivector.mean")?;
        if ivector_mean.len() != rank * features.len() {
            bail!(
                "fused i-vector mean has length {}, expected {}",
                ivector_mean.len(),
                rank * features.len()
            );
        }
        let classifier = match b.count("meta.classifier")? {
            0 => Classifier::Svm(LinearSvmModel {
                weights: b.vector("svm.weights")?,
                bias: b.scalar("svm.bias")?,
                c_param: b.scalar("svm.c")?,
            }),
            1 => {
                let n = b.count("dbn.layers")?;
                let hidden = (0..n)
                    .map(|i| dense_from(&b, &format!("dbn.hidden{i}")))
                    .collect::<Result<Vec<_>>>()?;
                let m = DbnModel {
                    hidden,
                    head: dense_from(&b, "dbn.head")?,
                };
                m.validate()?;
                Classifier::Dbn(m)
            }
            k => bail!("unknown classifier code {k}"),
        };
        if classifier.input_dim() != ivector_mean.len() {
            bail!(
                "classifier expects {}-dimensional input, fused i-vectors have {}",
                classifier.input_dim(),
                ivector_mean.len()
            );
        }
        Ok(Self {
            features,
            front_end,
            tv,
            ivector_mean,
            classifier,
            predetector,
        })
    }

    pub fn files(&self, dir: &Path) -> Vec<PathBuf> {
        let mut out = vec![frontend_path(dir)];
        for &ft in &self.features {
            out.push(ubm_path(dir, ft));
            out.push(tv_path(dir, ft));
        }
        out.push(backend_path(dir));
        out
    }
}
