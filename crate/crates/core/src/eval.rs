//! Metrics and the seed sweep comparing the combined detector against the
//! spam-only baseline.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_baseline, classify_improved, Decision};
use crate::config::Config;
use crate::corpus::{Class, LabeledSample};
use crate::error::{Error, Result};
use crate::model::train;

/// Reference false-positive rates (best, average, worst) for the combined
/// detector, in percent. Reported next to sweep results for comparison.
pub const REFERENCE_IMPROVED_FP: [f64; 3] = [1.2, 1.6, 2.4];
/// Reference false-positive rates (best, average, worst) for the baseline.
pub const REFERENCE_BASELINE_FP: [f64; 3] = [3.0, 3.8, 4.8];

/// Confusion counts with spam as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: Class, actual: Class) {
        match (actual, predicted) {
            (Class::Spam, Class::Spam) => self.tp += 1,
            (Class::Spam, Class::NonSpam) => self.fn_ += 1,
            (Class::NonSpam, Class::Spam) => self.fp += 1,
            (Class::NonSpam, Class::NonSpam) => self.tn += 1,
        }
    }

    /// Total true spam.
    pub fn s(&self) -> u64 {
        self.tp + self.fn_
    }

    /// Total true non-spam.
    pub fn ns(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.s() + self.ns()
    }
}

pub fn confusion(decisions: &[(Decision, Class)]) -> Result<ConfusionCounts> {
    if decisions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = ConfusionCounts::default();
    for (d, actual) in decisions {
        c.record(d.label, *actual);
    }
    Ok(c)
}

/// `part / whole * 100` with a single rounding step.
fn percent(part: u64, whole: u64, what: &'static str) -> Result<f64> {
    if whole == 0 {
        return Err(Error::DivisionByZero(what));
    }
    Ok((100 * part) as f64 / whole as f64)
}

/// `(TP + TN) / (S + NS) * 100`.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    percent(c.tp + c.tn, c.total(), "accuracy")
}

/// Share of true non-spam classified as spam, in percent.
pub fn fp_rate(c: &ConfusionCounts) -> Result<f64> {
    percent(c.fp, c.ns(), "false-positive rate")
}

/// Share of true spam classified as non-spam, in percent.
pub fn fn_rate(c: &ConfusionCounts) -> Result<f64> {
    percent(c.fn_, c.s(), "false-negative rate")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Improved,
    Baseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Improved => "improved",
            Method::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorCounts {
    pub spam: usize,
    pub nonspam: usize,
    pub pruned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub method: Method,
    pub counts: ConfusionCounts,
    pub accuracy_pct: f64,
    pub fp_rate_pct: f64,
    pub fn_rate_pct: f64,
    pub detector_counts: DetectorCounts,
}

impl RunMetrics {
    pub fn new(
        seed: u64,
        method: Method,
        counts: ConfusionCounts,
        detector_counts: DetectorCounts,
    ) -> Result<RunMetrics> {
        Ok(RunMetrics {
            seed,
            method,
            accuracy_pct: accuracy(&counts)?,
            fp_rate_pct: fp_rate(&counts)?,
            fn_rate_pct: fn_rate(&counts)?,
            counts,
            detector_counts,
        })
    }
}

/// Best / mean / worst false-positive rate over a sweep, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub best_fp: f64,
    pub avg_fp: f64,
    pub worst_fp: f64,
    pub avg_fn: f64,
    pub avg_accuracy: f64,
}

impl RateSummary {
    fn over<'a>(runs: impl Iterator<Item = &'a RunMetrics>) -> RateSummary {
        let runs: Vec<_> = runs.collect();
        let n = runs.len().max(1) as f64;
        let fp = runs.iter().map(|r| r.fp_rate_pct);
        RateSummary {
            best_fp: fp.clone().fold(f64::INFINITY, f64::min),
            avg_fp: fp.clone().sum::<f64>() / n,
            worst_fp: fp.fold(f64::NEG_INFINITY, f64::max),
            avg_fn: runs.iter().map(|r| r.fn_rate_pct).sum::<f64>() / n,
            avg_accuracy: runs.iter().map(|r| r.accuracy_pct).sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunMetrics>,
    pub improved: RateSummary,
    pub baseline: RateSummary,
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    seeds: &'a [u64],
    improved: &'a RateSummary,
    baseline: &'a RateSummary,
    paper_improved: [f64; 3],
    paper_baseline: [f64; 3],
}

pub const CSV_HEADER: &str = "seed,method,tp,fn,fp,tn,accuracy_pct,fp_rate_pct,fn_rate_pct";

impl ExperimentReport {
    pub fn from_runs(seeds: Vec<u64>, runs: Vec<RunMetrics>) -> ExperimentReport {
        let improved = RateSummary::over(runs.iter().filter(|r| r.method == Method::Improved));
        let baseline = RateSummary::over(runs.iter().filter(|r| r.method == Method::Baseline));
        ExperimentReport {
            seeds,
            runs,
            improved,
            baseline,
        }
    }

    pub fn summary(&self, method: Method) -> &RateSummary {
        match method {
            Method::Improved => &self.improved,
            Method::Baseline => &self.baseline,
        }
    }

    /// One row per (seed, method), rates with ten decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.runs {
            let c = &r.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.10},{:.10},{:.10}",
                r.seed,
                r.method.as_str(),
                c.tp,
                c.fn_,
                c.fp,
                c.tn,
                r.accuracy_pct,
                r.fp_rate_pct,
                r.fn_rate_pct
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&JsonSummary {
            seeds: &self.seeds,
            improved: &self.improved,
            baseline: &self.baseline,
            paper_improved: REFERENCE_IMPROVED_FP,
            paper_baseline: REFERENCE_BASELINE_FP,
        })?;
        s.push('\n');
        Ok(s)
    }

    /// Side-by-side best / average / worst table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "false-positive rate over {} seed(s), percent",
            self.seeds.len()
        );
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8} {:>8} {:>9}",
            "method", "best", "average", "worst", "avg FN", "accuracy"
        );
        for (name, s, reference) in [
            ("improved", &self.improved, REFERENCE_IMPROVED_FP),
            ("baseline", &self.baseline, REFERENCE_BASELINE_FP),
        ] {
            let _ = writeln!(
                out,
                "{:<10} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>9.3}",
                name, s.best_fp, s.avg_fp, s.worst_fp, s.avg_fn, s.avg_accuracy
            );
            let _ = writeln!(
                out,
                "{:<10} {:>8.1} {:>8.1} {:>8.1}",
                "  (ref.)", reference[0], reference[1], reference[2]
            );
        }
        out
    }
}

/// Trains on one seed's split and scores every test sample with both rules.
pub fn run_seed(corpus: &[LabeledSample], config: &Config, seed: u64) -> Result<[RunMetrics; 2]> {
    let config = Config {
        seed,
        ..config.clone()
    };
    let model = train(corpus, &config)?;
    let mut improved = ConfusionCounts::default();
    let mut baseline = ConfusionCounts::default();
    for s in &model.split.test {
        improved.record(
            classify_improved(&model.combined, &s.vector)?.label,
            s.label,
        );
        baseline.record(
            classify_baseline(&model.unpruned_spam, &s.vector)?.label,
            s.label,
        );
    }
    let nonspam = model.combined.nonspam_set().len();
    let pruned = model.combined.pruned_ids().len();
    Ok([
        RunMetrics::new(
            seed,
            Method::Improved,
            improved,
            DetectorCounts {
                spam: model.combined.spam_set().len(),
                nonspam,
                pruned,
            },
        )?,
        RunMetrics::new(
            seed,
            Method::Baseline,
            baseline,
            DetectorCounts {
                spam: model.unpruned_spam.len(),
                nonspam,
                pruned: 0,
            },
        )?,
    ])
}

/// Runs every seed (in parallel), merging results in seed-list order.
pub fn run_experiment(
    corpus: &[LabeledSample],
    config: &Config,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    config.validate()?;
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            run_seed(corpus, config, seed).map_err(|e| Error::Seed {
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = per_seed.into_iter().flatten().collect();
    Ok(ExperimentReport::from_runs(seeds.to_vec(), runs))
}
