//! Training pipeline and the persisted model file.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::corpus::{split_train_test, Class, LabeledSample, Normalizer, SplitCorpus, VectorKind};
use crate::detectors::{build_combined, generate_detector_set, CombinedDetector, DetectorSet};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Generation seed for one class, so the two populations draw from different
/// candidate orders under the same run seed.
pub fn generation_seed(seed: u64, class: Class) -> u64 {
    match class {
        Class::Spam => seed ^ 0x7370_616d,
        Class::NonSpam => seed ^ 0x6e6f_6e73,
    }
}

/// Everything produced by one training run.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub combined: CombinedDetector,
    /// The spam set as generated, before cross-pruning.
    pub unpruned_spam: DetectorSet,
    pub normalization: Option<Normalizer>,
    /// Train/test split in normalized units.
    pub split: SplitCorpus,
}

impl TrainedModel {
    pub fn train_of(&self, class: Class) -> Vec<LabeledSample> {
        self.split.train_of(class)
    }
}

/// Split, normalize (numeric corpora), generate both detector populations
/// and cross-prune them.
pub fn train(corpus: &[LabeledSample], config: &Config) -> Result<TrainedModel> {
    config.validate()?;
    let rule = config.rule()?;
    let expected = rule.mode.vector_kind();
    if let Some(s) = corpus.iter().find(|s| s.vector.kind() != expected) {
        return Err(Error::VariantMismatch {
            left: expected,
            right: s.vector.kind(),
        });
    }
    let raw = split_train_test(corpus, config.split_ratio, config.seed)?;
    let (split, normalization) = match expected {
        VectorKind::Numeric => {
            let norm = Normalizer::fit(&raw.train)?;
            let split = SplitCorpus {
                train: norm.apply_all(&raw.train)?,
                test: norm.apply_all(&raw.test)?,
                ..raw
            };
            (split, Some(norm))
        }
        VectorKind::Tokens => (raw, None),
    };

    let spam_train = split.train_of(Class::Spam);
    let nonspam_train = split.train_of(Class::NonSpam);
    let spam = generate_detector_set(
        &spam_train,
        &nonspam_train,
        Class::Spam,
        &rule,
        config.generation(generation_seed(config.seed, Class::Spam)),
    )?
    .with_normalization(normalization.clone());
    let nonspam = generate_detector_set(
        &nonspam_train,
        &spam_train,
        Class::NonSpam,
        &rule,
        config.generation(generation_seed(config.seed, Class::NonSpam)),
    )?
    .with_normalization(normalization.clone());

    let combined = build_combined(spam.clone(), nonspam, config.cross_theta())?;
    Ok(TrainedModel {
        combined,
        unpruned_spam: spam,
        normalization,
        split,
    })
}

/// Where the training data came from, so corrections can re-derive the
/// censoring samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSource {
    pub corpus: String,
    pub seed: u64,
    pub split_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub config: Config,
    pub training: TrainingSource,
    pub detector: CombinedDetector,
}

impl ModelFile {
    pub fn new(
        config: &Config,
        corpus: impl Into<String>,
        detector: CombinedDetector,
    ) -> ModelFile {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            config: config.resolved(),
            training: TrainingSource {
                corpus: corpus.into(),
                seed: config.seed,
                split_ratio: config.split_ratio,
            },
            detector,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<ModelFile> {
        let probe: serde_json::Value = serde_json::from_str(text)?;
        match probe.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(v) => return Err(Error::Model(format!("unsupported format version {v}"))),
            None => return Err(Error::Model("missing format_version".into())),
        }
        let model: ModelFile = serde_json::from_value(probe)?;
        model.detector.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ModelFile::from_json(&text)
    }

    /// Writes to a temporary file in the target directory and renames it over
    /// `path`, so readers never see a partial model.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = self.to_json()?;
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(json.as_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }
}
