//! Spam filtering with two negative-selection detector populations.
//!
//! Spam detectors are censored against non-spam training data and vice
//! versa. The spam population is then pruned against the non-spam one, and
//! a message is called spam only when its spam evidence clears the threshold
//! and beats the non-spam evidence.
//!
//! ```
//! use aisfilter_core::{
//!     build_combined, classify_improved, Class, DetectorSet, FeatureVector, MatchMode, MatchRule,
//! };
//!
//! let rule = MatchRule::new(MatchMode::TokenOverlap, 0.5, 0.0, 0.1).unwrap();
//! let tokens = |s: &str| FeatureVector::tokens(s.split(' '));
//! let spam = DetectorSet::from_centers(Class::Spam, rule, [tokens("cheap pills now")]).unwrap();
//! let ham = DetectorSet::from_centers(Class::NonSpam, rule, [tokens("team meeting monday")]).unwrap();
//! let cd = build_combined(spam, ham, 0.5).unwrap();
//! assert_eq!(classify_improved(&cd, &tokens("cheap pills today")).unwrap().label, Class::Spam);
//! ```

pub mod affinity;
pub mod classifier;
pub mod config;
pub mod corpus;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod model;

pub use affinity::{
    affinity, center_distance, detector_matches, AffinityRecord, MatchMode, MatchRule,
};
pub use classifier::{classify_baseline, classify_improved, correct_error, Decision};
pub use config::Config;
pub use corpus::{
    load_email, load_email_corpus, load_feature_rows, load_spambase, parse_spambase,
    preprocess_email, split_train_test, Class, FeatureVector, InputRow, LabeledSample, Normalizer,
    SampleId, SplitCorpus, VectorKind,
};
pub use detectors::{
    add_detector_from_sample, build_combined, cross_affinities, generate_detector_set,
    CombinedDetector, Detector, DetectorId, DetectorMatch, DetectorSet, GenerationParams,
    GenerationStats, Insertion,
};
pub use error::{Error, Result};
pub use eval::{
    accuracy, confusion, fn_rate, fp_rate, run_experiment, ConfusionCounts, ExperimentReport,
    Method, RateSummary, RunMetrics,
};
pub use model::{train, ModelFile, TrainedModel, TrainingSource};
