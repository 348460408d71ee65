//! Pipeline configuration: presets, `key = value` files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use spoofguard_core::eval::Partition;
use spoofguard_core::features::FeatureType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Primary,
    Contrastive1,
    Contrastive2,
    Desk,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Primary,
        Preset::Contrastive1,
        Preset::Contrastive2,
        Preset::Desk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Primary => "primary",
            Preset::Contrastive1 => "contrastive1",
            Preset::Contrastive2 => "contrastive2",
            Preset::Desk => "desk",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                anyhow!(
                    "unknown preset {s:?} (expected primary, contrastive1, contrastive2 or desk)"
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Svm,
    Dbn,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Dbn => "dbn",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ClassifierKind::Svm),
            "dbn" => Ok(ClassifierKind::Dbn),
            _ => bail!("unknown classifier {s:?} (expected svm or dbn)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub preset: Option<Preset>,
    pub feature_set: Vec<FeatureType>,
    pub ubm_components: usize,
    pub tv_rank: usize,
    pub classifier: ClassifierKind,
    pub predetector: bool,
    pub seed: u64,
    pub manifest: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,

    pub ubm_iters: usize,
    pub tv_iters: usize,
    /// Cap on frames pooled for each front-end PCA fit.
    pub max_pca_frames: usize,
    /// Cap on frames pooled for each UBM fit.
    pub max_ubm_frames: usize,
    /// Shortest zero run (samples) flagged by the pre-detector.
    pub min_zero_run: usize,
    pub svm_c: f64,
    pub dbn_hidden: Vec<usize>,
    pub rbm_epochs: usize,
    pub rbm_lr: f64,
    pub dbn_epochs: usize,
    pub dbn_lr: f64,
    pub dbn_weight_decay: f64,
    pub lda_dims: usize,
    pub train_partition: Partition,
    /// Restricts scoring and projection to one partition; all entries otherwise.
    pub partition: Option<Partition>,
    /// Feature set or preset came from the user rather than defaults.
    pub explicit_system: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mut cfg = Self {
            preset: None,
            feature_set: Vec::new(),
            ubm_components: 0,
            tv_rank: 0,
            classifier: ClassifierKind::Svm,
            predetector: false,
            seed: 0,
            manifest: None,
            models: None,
            out: None,
            jobs: None,
            ubm_iters: 10,
            tv_iters: 5,
            max_pca_frames: 500_000,
            max_ubm_frames: 500_000,
            min_zero_run: spoofguard_core::signal::DEFAULT_MIN_ZERO_RUN,
            svm_c: 1.0,
            dbn_hidden: vec![256, 256],
            rbm_epochs: 10,
            rbm_lr: 0.01,
            dbn_epochs: 50,
            dbn_lr: 0.1,
            dbn_weight_decay: 0.0,
            lda_dims: 3,
            train_partition: Partition::Train,
            partition: None,
            explicit_system: false,
        };
        cfg.apply_preset(Preset::Desk);
        cfg.preset = None;
        cfg
    }
}

/// Values given on the command line; each one overrides the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub features: Option<Vec<FeatureType>>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub manifest: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn parse_feature_list(s: &str) -> Result<Vec<FeatureType>> {
    let list = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<FeatureType>().map_err(|e| anyhow!("{e}")))
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        bail!("feature list is empty");
    }
    Ok(list)
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| anyhow!("{t:?}: {e}")))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => bail!("expected on/off, got {s:?}"),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| anyhow!("{s:?}: {e}"))
}

impl PipelineConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let mut cfg = Self::default();
        cfg.apply_preset(preset);
        cfg.explicit_system = true;
        cfg
    }

    /// Sets the system fields a preset controls; everything else is kept.
    pub fn apply_preset(&mut self, preset: Preset) {
        use FeatureType::*;
        let (features, c, r, classifier, predetector) = match preset {
            Preset::Primary => (
                vec![Mfcc, Mfpc, CosPhasePc],
                1024,
                400,
                ClassifierKind::Svm,
                true,
            ),
            Preset::Contrastive1 => (
                vec![Mfpc, CosPhasePc, Mwpc],
                1024,
                400,
                ClassifierKind::Svm,
                false,
            ),
            Preset::Contrastive2 => (
                vec![Mfpc, CosPhasePc, Mwpc],
                256,
                200,
                ClassifierKind::Dbn,
                false,
            ),
            Preset::Desk => (vec![Mwpc], 256, 200, ClassifierKind::Svm, false),
        };
        self.preset = Some(preset);
        self.feature_set = features;
        self.ubm_components = c;
        self.tv_rank = r;
        self.classifier = classifier;
        self.predetector = predetector;
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "preset" => {
                self.apply_preset(v.parse()?);
                self.explicit_system = true;
            }
            "features" | "feature_set" => {
                self.feature_set = parse_feature_list(v)?;
                self.explicit_system = true;
            }
            "ubm_components" => self.ubm_components = parse_num(v)?,
            "tv_rank" => self.tv_rank = parse_num(v)?,
            "classifier" => self.classifier = v.parse()?,
            "predetector" => self.predetector = parse_bool(v)?,
            "seed" => self.seed = parse_num(v)?,
            "manifest" => self.manifest = Some(PathBuf::from(v)),
            "models" => self.models = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "jobs" => self.jobs = Some(parse_num(v)?),
            "ubm_iters" => self.ubm_iters = parse_num(v)?,
            "tv_iters" => self.tv_iters = parse_num(v)?,
            "max_pca_frames" => self.max_pca_frames = parse_num(v)?,
            "max_ubm_frames" => self.max_ubm_frames = parse_num(v)?,
            "min_zero_run" => self.min_zero_run = parse_num(v)?,
            "svm_c" => self.svm_c = parse_num(v)?,
            "dbn_hidden" => self.dbn_hidden = parse_list(v)?,
            "rbm_epochs" => self.rbm_epochs = parse_num(v)?,
            "rbm_lr" => self.rbm_lr = parse_num(v)?,
            "dbn_epochs" => self.dbn_epochs = parse_num(v)?,
            "dbn_lr" => self.dbn_lr = parse_num(v)?,
            "dbn_weight_decay" => self.dbn_weight_decay = parse_num(v)?,
            "lda_dims" => self.lda_dims = parse_num(v)?,
            "train_partition" => self.train_partition = v.parse().map_err(|e| anyhow!("{e}"))?,
            "partition" => {
                self.partition = match v {
                    "all" | "" => None,
                    p => Some(p.parse().map_err(|e| anyhow!("{e}"))?),
                }
            }
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. The `preset` key
    /// is applied first so that explicit keys refine it.
    pub fn parse_file_text(text: &str, source: &str) -> Result<Vec<(usize, String, String)>> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{source}:{}: expected key = value", i + 1))?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        pairs.sort_by_key(|(_, k, _)| k != "preset");
        Ok(pairs)
    }

    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = Self::default();
        let mut pairs = Vec::new();
        let mut source = String::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            source = path.display().to_string();
            pairs = Self::parse_file_text(&text, &source)?;
        }
        if let Some(p) = overrides.preset {
            cfg.apply_preset(p);
            cfg.explicit_system = true;
            pairs.retain(|(_, k, _)| k != "preset");
        }
        for (line, k, v) in &pairs {
            cfg.set(k, v)
                .with_context(|| format!("{source}:{line}: bad value for {k}"))?;
        }
        if let Some(f) = &overrides.features {
            cfg.feature_set = f.clone();
            cfg.explicit_system = true;
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(j) = overrides.jobs {
            cfg.jobs = Some(j);
        }
        if let Some(p) = &overrides.manifest {
            cfg.manifest = Some(p.clone());
        }
        if let Some(p) = &overrides.models {
            cfg.models = Some(p.clone());
        }
        if let Some(p) = &overrides.out {
            cfg.out = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_set.is_empty() {
            bail!("feature set is empty");
        }
        let mut seen = self.feature_set.clone();
        seen.sort_by_key(|f| f.code());
        seen.dedup();
        if seen.len() != self.feature_set.len() {
            bail!("feature set lists a feature twice");
        }
        if self.ubm_components == 0 {
            bail!("ubm_components must be positive");
        }
        if self.tv_rank == 0 {
            bail!("tv_rank must be positive");
        }
        if self.svm_c.is_nan() || self.svm_c <= 0.0 {
            bail!("svm_c must be positive");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be positive");
        }
        if self.max_pca_frames < 2 || self.max_ubm_frames < 2 {
            bail!("frame caps must be at least 2");
        }
        if self.lda_dims == 0 {
            bail!("lda_dims must be positive");
        }
        if self.classifier == ClassifierKind::Dbn && self.dbn_hidden.contains(&0) {
            bail!("dbn_hidden layer sizes must be positive");
        }
        Ok(())
    }

    pub fn feature_names(&self) -> String {
        self.feature_set
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FeatureType::*;

    #[test]
    fn presets() {
        let p = PipelineConfig::from_preset(Preset::Primary);
        assert_eq!(p.feature_set, vec![Mfcc, Mfpc, CosPhasePc]);
        assert_eq!((p.ubm_components, p.tv_rank), (1024, 400));
        assert!(p.predetector);
        assert_eq!(p.classifier, ClassifierKind::Svm);

        let c1 = PipelineConfig::from_preset(Preset::Contrastive1);
        assert_eq!(c1.feature_set, vec![Mfpc, CosPhasePc, Mwpc]);
        assert!(!c1.predetector);
        assert_eq!(c1.classifier, ClassifierKind::Svm);

        let c2 = PipelineConfig::from_preset(Preset::Contrastive2);
        assert_eq!((c2.ubm_components, c2.tv_rank), (256, 200));
        assert_eq!(c2.classifier, ClassifierKind::Dbn);
        assert!(!c2.predetector);

        let d = PipelineConfig::from_preset(Preset::Desk);
        assert_eq!(d.feature_set, vec![Mwpc]);
        assert_eq!((d.ubm_components, d.tv_rank), (256, 200));

        assert_eq!(
            PipelineConfig::from_preset(Preset::Contrastive2),
            PipelineConfig::from_preset(Preset::Contrastive2)
        );
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# desk run\ntv_rank = 20\npreset = primary\nseed = 7 # trailing\npredetector = off\n",
        )
        .unwrap();
        let cfg = PipelineConfig::resolve(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(cfg.preset, Some(Preset::Primary));
        assert_eq!(cfg.tv_rank, 20);
        assert_eq!(cfg.ubm_components, 1024);
        assert_eq!(cfg.seed, 7);
        assert!(!cfg.predetector);
        assert!(cfg.explicit_system);

        let o = Overrides {
            seed: Some(9),
            features: Some(vec![Mwpc, Mfcc]),
            ..Default::default()
        };
        let cfg = PipelineConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.feature_set, vec![Mwpc, Mfcc]);

        let o = Overrides {
            preset: Some(Preset::Desk),
            ..Default::default()
        };
        let cfg = PipelineConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!(cfg.feature_set, vec![Mwpc]);
        assert_eq!(cfg.tv_rank, 20);
    }

    #[test]
    fn bad_inputs() {
        let mut cfg = PipelineConfig::default();
        assert!(!cfg.explicit_system);
        assert!(cfg.set("nonsense", "1").is_err());
        assert!(cfg.set("tv_rank", "x").is_err());
        assert!(cfg.set("predetector", "maybe").is_err());
        assert!(parse_feature_list("MWPC,LPCC").is_err());
        assert!(parse_feature_list(" , ").is_err());
        cfg.feature_set = vec![Mwpc, Mwpc];
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::parse_file_text("just words", "c").is_err());
        assert!("fancy".parse::<Preset>().is_err());
    }
}
