//! Detector populations: negative-selection generation with coverage
//! spreading, match counters, insertion of corrected samples, and the
//! cross-pruned spam / non-spam pair used as one combined detector.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::{affinity, center_distance, detector_matches, AffinityRecord, MatchRule};
use crate::corpus::{Class, FeatureVector, LabeledSample, Normalizer, SampleId};
use crate::error::{Error, Result};

/// Candidates whose censoring checks are evaluated in parallel before the
/// sequential acceptance pass.
const CENSOR_BATCH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetectorId(pub u64);

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub id: DetectorId,
    pub class: Class,
    pub center: FeatureVector,
    /// Per-detector threshold; when unset the set's `theta` applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_override: Option<f64>,
    pub matched_count: u64,
    pub detected_count: u64,
}

impl Detector {
    pub fn new(id: DetectorId, center: FeatureVector, class: Class) -> Detector {
        Detector {
            id,
            class,
            center,
            radius_override: None,
            matched_count: 0,
            detected_count: 0,
        }
    }

    pub fn effective_threshold(&self, rule: &MatchRule) -> f64 {
        self.radius_override.unwrap_or(rule.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationParams {
    pub target_count: usize,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            target_count: 100,
            max_attempts: 5000,
            seed: 1,
        }
    }
}

/// Bookkeeping from generation: how many candidates were drawn and why the
/// rejected ones were dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub attempts: usize,
    pub accepted: usize,
    pub censored: usize,
    pub crowded: usize,
}

/// A detector that matched a vector during a counter update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorMatch {
    pub id: DetectorId,
    pub affinity: f64,
}

/// Outcome of trying to add a detector built from one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum Insertion {
    Accepted(DetectorId),
    /// The candidate matched this opposite-class training sample.
    Censored(SampleId),
    /// The candidate lies closer than `min_separation` to this detector.
    Crowded(DetectorId),
}

impl Insertion {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Insertion::Accepted(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSet {
    class: Class,
    rule: MatchRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalization: Option<Normalizer>,
    next_id: u64,
    stats: GenerationStats,
    detectors: Vec<Detector>,
}

fn check_labels(samples: &[LabeledSample], expected: Class) -> Result<()> {
    match samples.iter().find(|s| s.label != expected) {
        Some(s) => Err(Error::ClassMismatch {
            id: s.id.to_string(),
            expected,
            found: s.label,
        }),
        None => Ok(()),
    }
}

/// First opposite-class sample the candidate matches, if any.
fn censoring_hit<'a>(
    candidate: &Detector,
    opposite: &'a [LabeledSample],
    rule: &MatchRule,
) -> Result<Option<&'a LabeledSample>> {
    for s in opposite {
        if detector_matches(candidate, &s.vector, rule)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

impl DetectorSet {
    /// Wraps hand-chosen centers without censoring. Ids are assigned in order.
    pub fn from_centers(
        class: Class,
        rule: MatchRule,
        centers: impl IntoIterator<Item = FeatureVector>,
    ) -> Result<DetectorSet> {
        rule.validate()?;
        let detectors: Vec<Detector> = centers
            .into_iter()
            .enumerate()
            .map(|(i, c)| Detector::new(DetectorId(i as u64), c, class))
            .collect();
        for d in &detectors {
            if d.center.kind() != rule.mode.vector_kind() {
                return Err(Error::VariantMismatch {
                    left: rule.mode.vector_kind(),
                    right: d.center.kind(),
                });
            }
        }
        Ok(DetectorSet {
            class,
            rule,
            normalization: None,
            next_id: detectors.len() as u64,
            stats: GenerationStats {
                accepted: detectors.len(),
                attempts: detectors.len(),
                ..Default::default()
            },
            detectors,
        })
    }

    pub fn with_normalization(mut self, normalization: Option<Normalizer>) -> DetectorSet {
        self.normalization = normalization;
        self
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn rule(&self) -> &MatchRule {
        &self.rule
    }

    pub fn normalization(&self) -> Option<&Normalizer> {
        self.normalization.as_ref()
    }

    pub fn stats(&self) -> GenerationStats {
        self.stats
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    pub fn get(&self, id: DetectorId) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.id == id)
    }

    /// Sets a per-detector threshold. Returns false if the id is unknown.
    pub fn set_radius(&mut self, id: DetectorId, radius: Option<f64>) -> Result<bool> {
        if let Some(r) = radius {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidRule(format!("radius {r} outside [0,1]")));
            }
        }
        Ok(match self.detectors.iter_mut().find(|d| d.id == id) {
            Some(d) => {
                d.radius_override = radius;
                true
            }
            None => false,
        })
    }

    /// Nearest accepted detector closer than `min_separation`, if any.
    fn crowding(&self, center: &FeatureVector) -> Result<Option<DetectorId>> {
        for d in &self.detectors {
            if center_distance(&d.center, center)? < self.rule.min_separation {
                return Ok(Some(d.id));
            }
        }
        Ok(None)
    }

    fn push(&mut self, center: FeatureVector) -> DetectorId {
        let id = DetectorId(self.next_id);
        self.next_id += 1;
        self.detectors.push(Detector::new(id, center, self.class));
        id
    }

    /// Records `v` against every detector: `detected_count` always grows,
    /// `matched_count` grows for detectors that match. Returns the matches.
    pub fn update_counters(&mut self, v: &FeatureVector) -> Result<Vec<DetectorMatch>> {
        let rule = self.rule;
        let scored = self
            .detectors
            .iter()
            .map(|d| {
                let a = affinity(&d.center, v, &rule)?;
                Ok((a, a > d.effective_threshold(&rule)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut matches = Vec::new();
        for (d, (a, hit)) in self.detectors.iter_mut().zip(scored) {
            d.detected_count += 1;
            if hit {
                d.matched_count += 1;
                matches.push(DetectorMatch {
                    id: d.id,
                    affinity: a,
                });
            }
        }
        Ok(matches)
    }

    /// Adds a detector centered on `sample` if it passes the censoring and
    /// spreading gates. The set is untouched on rejection.
    pub fn try_insert(
        &mut self,
        sample: &LabeledSample,
        opposite: &[LabeledSample],
    ) -> Result<Insertion> {
        if sample.label != self.class {
            return Err(Error::ClassMismatch {
                id: sample.id.to_string(),
                expected: self.class,
                found: sample.label,
            });
        }
        let candidate = Detector::new(DetectorId(self.next_id), sample.vector.clone(), self.class);
        if let Some(hit) = censoring_hit(&candidate, opposite, &self.rule)? {
            return Ok(Insertion::Censored(hit.id.clone()));
        }
        if let Some(near) = self.crowding(&candidate.center)? {
            return Ok(Insertion::Crowded(near));
        }
        Ok(Insertion::Accepted(self.push(candidate.center)))
    }

    /// Every (detector, opposite sample) pair that violates censoring.
    pub fn censoring_violations(&self, opposite: &[LabeledSample]) -> Result<Vec<AffinityRecord>> {
        let rule = self.rule;
        let per_detector = self
            .detectors
            .par_iter()
            .map(|d| {
                let mut hits = Vec::new();
                for s in opposite {
                    let a = affinity(&d.center, &s.vector, &rule)?;
                    if a > d.effective_threshold(&rule) {
                        hits.push(AffinityRecord {
                            x_id: d.id.to_string(),
                            y_id: s.id.to_string(),
                            affinity: a,
                        });
                    }
                }
                Ok(hits)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(per_detector.into_iter().flatten().collect())
    }

    /// Smallest pairwise center distance, `None` for fewer than two detectors.
    pub fn min_center_distance(&self) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for (i, a) in self.detectors.iter().enumerate() {
            for b in &self.detectors[i + 1..] {
                let d = center_distance(&a.center, &b.center)?;
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        Ok(best)
    }

    /// Checks the structural invariants of a set read from disk.
    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        for d in &self.detectors {
            if d.class != self.class {
                return Err(Error::IncompatibleSets(format!(
                    "detector {} is {} inside a {} set",
                    d.id, d.class, self.class
                )));
            }
            if d.center.kind() != self.rule.mode.vector_kind() {
                return Err(Error::VariantMismatch {
                    left: self.rule.mode.vector_kind(),
                    right: d.center.kind(),
                });
            }
            if d.matched_count > d.detected_count {
                return Err(Error::IncompatibleSets(format!(
                    "detector {} matched more vectors than it saw",
                    d.id
                )));
            }
            if d.id.0 >= self.next_id {
                return Err(Error::IncompatibleSets(format!(
                    "detector id {} not below next id {}",
                    d.id, self.next_id
                )));
            }
            if let Some(r) = d.radius_override {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidRule(format!("radius {r} outside [0,1]")));
                }
            }
        }
        Ok(())
    }
}

/// Negative selection over own-class exemplars.
///
/// Candidates are the own-class training vectors in a seeded random order,
/// at most `max_attempts` of them. A candidate is dropped if it matches any
/// opposite-class sample (censoring) or lies within `rule.min_separation` of a
/// detector already accepted (spreading). Generation stops at
/// `target_count` detectors.
pub fn generate_detector_set(
    own: &[LabeledSample],
    opposite: &[LabeledSample],
    class: Class,
    rule: &MatchRule,
    params: GenerationParams,
) -> Result<DetectorSet> {
    rule.validate()?;
    if own.is_empty() {
        return Err(Error::InsufficientSamples { class });
    }
    if params.target_count == 0 || params.max_attempts < params.target_count {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= target_count <= max_attempts, got {} and {}",
            params.target_count, params.max_attempts
        )));
    }
    check_labels(own, class)?;
    check_labels(opposite, class.opposite())?;

    let mut order: Vec<usize> = (0..own.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    order.truncate(params.max_attempts);

    let mut set = DetectorSet::from_centers(class, *rule, [])?;
    let mut stats = GenerationStats::default();
    'batches: for batch in order.chunks(CENSOR_BATCH) {
        let censored = batch
            .par_iter()
            .map(|&i| {
                let probe = Detector::new(DetectorId(0), own[i].vector.clone(), class);
                Ok(censoring_hit(&probe, opposite, rule)?.is_some())
            })
            .collect::<Result<Vec<bool>>>()?;
        for (&i, censored) in batch.iter().zip(censored) {
            stats.attempts += 1;
            if censored {
                stats.censored += 1;
                continue;
            }
            if set.crowding(&own[i].vector)?.is_some() {
                stats.crowded += 1;
                continue;
            }
            set.push(own[i].vector.clone());
            stats.accepted += 1;
            if set.len() == params.target_count {
                break 'batches;
            }
        }
    }
    if set.is_empty() {
        return Err(Error::NoDetectorsGenerated {
            class,
            attempts: stats.attempts,
            censored: stats.censored,
            crowded: stats.crowded,
        });
    }
    set.stats = stats;
    Ok(set)
}

/// Returns a copy of `set` with a detector built from `sample` added, plus the
/// outcome. On rejection the copy equals the input.
pub fn add_detector_from_sample(
    set: &DetectorSet,
    sample: &LabeledSample,
    opposite: &[LabeledSample],
) -> Result<(DetectorSet, Insertion)> {
    let mut next = set.clone();
    let outcome = next.try_insert(sample, opposite)?;
    Ok((next, outcome))
}

/// The cross-pruned spam set paired with the intact non-spam set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedDetector {
    spam_set: DetectorSet,
    nonspam_set: DetectorSet,
    cross_theta: f64,
    pruned_ids: Vec<DetectorId>,
}

impl CombinedDetector {
    pub fn spam_set(&self) -> &DetectorSet {
        &self.spam_set
    }

    pub fn nonspam_set(&self) -> &DetectorSet {
        &self.nonspam_set
    }

    pub fn cross_theta(&self) -> f64 {
        self.cross_theta
    }

    /// Spam detector ids removed by cross-pruning, in removal order.
    pub fn pruned_ids(&self) -> &[DetectorId] {
        &self.pruned_ids
    }

    pub fn rule(&self) -> &MatchRule {
        self.spam_set.rule()
    }

    pub fn normalization(&self) -> Option<&Normalizer> {
        self.spam_set.normalization()
    }

    pub fn into_sets(self) -> (DetectorSet, DetectorSet) {
        (self.spam_set, self.nonspam_set)
    }

    /// Largest affinity from each spam detector to the non-spam set.
    pub fn cross_affinities(&self) -> Result<Vec<AffinityRecord>> {
        cross_affinities(&self.spam_set, &self.nonspam_set)
    }

    /// Re-checks set compatibility and the cross-pruning invariant.
    pub fn validate(&self) -> Result<()> {
        self.spam_set.validate()?;
        self.nonspam_set.validate()?;
        check_compatible(&self.spam_set, &self.nonspam_set, self.cross_theta)?;
        if self.spam_set.is_empty() {
            return Err(Error::EmptySpamSet {
                pruned: self.pruned_ids.len(),
            });
        }
        for r in self.cross_affinities()? {
            if r.affinity > self.cross_theta {
                return Err(Error::IncompatibleSets(format!(
                    "spam detector {} has cross-affinity {} above {}",
                    r.x_id, r.affinity, self.cross_theta
                )));
            }
        }
        Ok(())
    }
}

fn check_compatible(spam: &DetectorSet, nonspam: &DetectorSet, cross_theta: f64) -> Result<()> {
    if spam.class != Class::Spam || nonspam.class != Class::NonSpam {
        return Err(Error::IncompatibleSets(format!(
            "expected a spam and a nonspam set, got {} and {}",
            spam.class, nonspam.class
        )));
    }
    if spam.rule.mode != nonspam.rule.mode {
        return Err(Error::IncompatibleSets(format!(
            "match modes differ ({:?} vs {:?})",
            spam.rule.mode, nonspam.rule.mode
        )));
    }
    if spam.normalization != nonspam.normalization {
        return Err(Error::IncompatibleSets(
            "sets were built with different normalization".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cross_theta) {
        return Err(Error::InvalidRule(format!(
            "cross_theta {cross_theta} outside [0,1]"
        )));
    }
    Ok(())
}

/// For every spam detector, its nearest non-spam detector and their affinity.
/// An empty non-spam set yields affinity 0 against an empty id.
pub fn cross_affinities(spam: &DetectorSet, nonspam: &DetectorSet) -> Result<Vec<AffinityRecord>> {
    let rule = spam.rule;
    spam.detectors
        .par_iter()
        .map(|s| {
            let mut best = AffinityRecord {
                x_id: s.id.to_string(),
                y_id: String::new(),
                affinity: 0.0,
            };
            for n in &nonspam.detectors {
                let a = affinity(&s.center, &n.center, &rule)?;
                if a > best.affinity || best.y_id.is_empty() {
                    best.affinity = a;
                    best.y_id = n.id.to_string();
                }
            }
            Ok(best)
        })
        .collect()
}

/// Removes every spam detector whose affinity to some non-spam detector
/// exceeds `cross_theta`, and pairs the survivors with the non-spam set.
pub fn build_combined(
    mut spam_set: DetectorSet,
    nonspam_set: DetectorSet,
    cross_theta: f64,
) -> Result<CombinedDetector> {
    check_compatible(&spam_set, &nonspam_set, cross_theta)?;
    let cross = cross_affinities(&spam_set, &nonspam_set)?;
    let mut pruned_ids = Vec::new();
    let mut keep = cross.iter().map(|r| r.affinity <= cross_theta);
    spam_set.detectors.retain(|d| {
        let kept = keep.next().unwrap_or(true);
        if !kept {
            pruned_ids.push(d.id);
        }
        kept
    });
    if spam_set.is_empty() {
        return Err(Error::EmptySpamSet {
            pruned: pruned_ids.len(),
        });
    }
    Ok(CombinedDetector {
        spam_set,
        nonspam_set,
        cross_theta,
        pruned_ids,
    })
}

/// Rebuilds the pairing after one of the sets changed, keeping the prune
/// history of `previous`.
pub(crate) fn recombine(
    previous: &CombinedDetector,
    spam_set: DetectorSet,
    nonspam_set: DetectorSet,
) -> Result<CombinedDetector> {
    let mut cd = build_combined(spam_set, nonspam_set, previous.cross_theta)?;
    let mut history = previous.pruned_ids.clone();
    history.append(&mut cd.pruned_ids);
    cd.pruned_ids = history;
    Ok(cd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::MatchMode;

    fn tokens(s: &str) -> FeatureVector {
        FeatureVector::tokens(s.split_whitespace())
    }

    fn rule(theta: f64, min_separation: f64) -> MatchRule {
        MatchRule::new(MatchMode::TokenOverlap, theta, 0.0, min_separation).unwrap()
    }

    fn sample(id: &str, text: &str, label: Class) -> LabeledSample {
        LabeledSample::new(id, tokens(text), label)
    }

    fn params(target: usize) -> GenerationParams {
        GenerationParams {
            target_count: target,
            max_attempts: 50 * target,
            seed: 3,
        }
    }

    #[test]
    fn candidate_identical_to_opposite_sample_is_censored() {
        let own = [sample("s1", "cheap pills", Class::Spam)];
        let opp = [sample("h1", "cheap pills", Class::NonSpam)];
        let err =
            generate_detector_set(&own, &opp, Class::Spam, &rule(0.5, 0.0), params(1)).unwrap_err();
        assert!(
            matches!(err, Error::NoDetectorsGenerated { censored: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn duplicate_candidate_is_crowded_out() {
        let own = [
            sample("s1", "cheap pills", Class::Spam),
            sample("s2", "cheap pills", Class::Spam),
        ];
        let set =
            generate_detector_set(&own, &[], Class::Spam, &rule(0.5, 0.1), params(2)).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(
            set.stats(),
            GenerationStats {
                attempts: 2,
                accepted: 1,
                censored: 0,
                crowded: 1
            }
        );
    }

    #[test]
    fn generation_errors() {
        let r = rule(0.5, 0.0);
        assert!(matches!(
            generate_detector_set(&[], &[], Class::Spam, &r, params(1)),
            Err(Error::InsufficientSamples { class: Class::Spam })
        ));
        let own = [sample("h", "a b", Class::NonSpam)];
        assert!(matches!(
            generate_detector_set(&own, &[], Class::Spam, &r, params(1)),
            Err(Error::ClassMismatch { .. })
        ));
        let own = [sample("s", "a b", Class::Spam)];
        let bad = GenerationParams {
            target_count: 5,
            max_attempts: 4,
            seed: 0,
        };
        assert!(generate_detector_set(&own, &[], Class::Spam, &r, bad).is_err());
    }

    #[test]
    fn generation_stops_at_target() {
        let own: Vec<_> = (0..20)
            .map(|i| sample(&format!("s{i}"), &format!("tok{i} other{i}"), Class::Spam))
            .collect();
        let set =
            generate_detector_set(&own, &[], Class::Spam, &rule(0.5, 0.1), params(5)).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(set.stats().attempts, 5);
        let ids: Vec<u64> = set.detectors().iter().map(|d| d.id.0).collect();
        assert_eq!(ids, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn max_attempts_caps_candidates() {
        let own: Vec<_> = (0..20)
            .map(|i| sample(&format!("s{i}"), &format!("tok{i} x{i}"), Class::Spam))
            .collect();
        let p = GenerationParams {
            target_count: 3,
            max_attempts: 3,
            seed: 9,
        };
        let opp: Vec<_> = own
            .iter()
            .map(|s| LabeledSample {
                label: Class::NonSpam,
                ..s.clone()
            })
            .collect();
        let err = generate_detector_set(&own, &opp, Class::Spam, &rule(0.5, 0.0), p).unwrap_err();
        assert!(matches!(
            err,
            Error::NoDetectorsGenerated { attempts: 3, .. }
        ));
    }

    #[test]
    fn counters_follow_matches() {
        let mut set = DetectorSet::from_centers(
            Class::Spam,
            rule(0.5, 0.0),
            [tokens("a b c"), tokens("x y z")],
        )
        .unwrap();
        let hits = set.update_counters(&tokens("a b c")).unwrap();
        assert_eq!(
            hits,
            [DetectorMatch {
                id: DetectorId(0),
                affinity: 1.0
            }]
        );
        assert_eq!(set.detectors()[0].matched_count, 1);
        assert_eq!(set.detectors()[0].detected_count, 1);
        assert_eq!(set.detectors()[1].matched_count, 0);
        assert_eq!(set.detectors()[1].detected_count, 1);

        assert!(set.update_counters(&tokens("q r s")).unwrap().is_empty());
        assert!(set.detectors().iter().all(|d| d.detected_count == 2));
        assert_eq!(set.detectors()[0].matched_count, 1);

        // a failing update leaves the counters alone
        assert!(set
            .update_counters(&FeatureVector::Numeric(vec![1.0]))
            .is_err());
        assert!(set.detectors().iter().all(|d| d.detected_count == 2));
    }

    #[test]
    fn insertion_gates() {
        let r = rule(0.5, 0.1);
        let mut set =
            DetectorSet::from_centers(Class::Spam, r, [tokens("win cash prize")]).unwrap();
        let opposite = [sample("h1", "meeting agenda monday", Class::NonSpam)];

        let fresh = sample("s9", "cheap pills online", Class::Spam);
        let out = set.try_insert(&fresh, &opposite).unwrap();
        assert_eq!(out, Insertion::Accepted(DetectorId(1)));
        assert_eq!(set.len(), 2);

        // second insertion of the same sample: distance 0 < min_separation
        let before = set.clone();
        let out = set.try_insert(&fresh, &opposite).unwrap();
        assert_eq!(out, Insertion::Crowded(DetectorId(1)));
        assert_eq!(set, before);

        let censored = sample("s10", "meeting agenda monday", Class::Spam);
        let out = set.try_insert(&censored, &opposite).unwrap();
        assert_eq!(out, Insertion::Censored(SampleId::from("h1")));
        assert_eq!(set, before);

        let wrong = sample("h2", "hello there", Class::NonSpam);
        assert!(set.try_insert(&wrong, &opposite).is_err());
    }

    #[test]
    fn add_detector_from_sample_leaves_input_alone() {
        let r = rule(0.5, 0.1);
        let set = DetectorSet::from_centers(Class::Spam, r, [tokens("win cash")]).unwrap();
        let s = sample("s", "cheap pills", Class::Spam);
        let (next, out) = add_detector_from_sample(&set, &s, &[]).unwrap();
        assert!(out.is_accepted());
        assert_eq!(set.len(), 1);
        assert_eq!(next.len(), 2);
    }

    #[test]
    fn disjoint_sets_prune_nothing() {
        let r = rule(0.5, 0.0);
        let spam =
            DetectorSet::from_centers(Class::Spam, r, [tokens("a b"), tokens("c d")]).unwrap();
        let ham = DetectorSet::from_centers(Class::NonSpam, r, [tokens("x y")]).unwrap();
        let cd = build_combined(spam, ham, 0.5).unwrap();
        assert!(cd.pruned_ids().is_empty());
        assert_eq!(cd.spam_set().len(), 2);
    }

    #[test]
    fn shared_center_is_pruned() {
        let r = rule(0.5, 0.0);
        let spam =
            DetectorSet::from_centers(Class::Spam, r, [tokens("a b"), tokens("c d")]).unwrap();
        let ham = DetectorSet::from_centers(Class::NonSpam, r, [tokens("c d")]).unwrap();
        let cd = build_combined(spam, ham, 0.99).unwrap();
        assert_eq!(cd.pruned_ids(), [DetectorId(1)]);
    }

    #[test]
    fn pruning_everything_is_an_error() {
        let r = rule(0.5, 0.0);
        let spam = DetectorSet::from_centers(Class::Spam, r, [tokens("a b")]).unwrap();
        let ham = DetectorSet::from_centers(Class::NonSpam, r, [tokens("a b")]).unwrap();
        assert!(matches!(
            build_combined(spam, ham, 0.5),
            Err(Error::EmptySpamSet { pruned: 1 })
        ));
    }

    #[test]
    fn combining_rejects_mismatched_sets() {
        let r = rule(0.5, 0.0);
        let a = DetectorSet::from_centers(Class::Spam, r, [tokens("a b")]).unwrap();
        let b = DetectorSet::from_centers(Class::Spam, r, [tokens("c d")]).unwrap();
        assert!(build_combined(a.clone(), b, 0.5).is_err());
        let num = MatchRule::new(MatchMode::AttributeInterval, 0.5, 0.1, 0.0).unwrap();
        let n = DetectorSet::from_centers(Class::NonSpam, num, [FeatureVector::Numeric(vec![0.0])])
            .unwrap();
        assert!(build_combined(a.clone(), n, 0.5).is_err());
        let h = DetectorSet::from_centers(Class::NonSpam, r, [tokens("c d")]).unwrap();
        assert!(build_combined(a, h, 1.5).is_err());
    }

    #[test]
    fn from_centers_rejects_wrong_variant() {
        let r = rule(0.5, 0.0);
        assert!(
            DetectorSet::from_centers(Class::Spam, r, [FeatureVector::Numeric(vec![1.0])]).is_err()
        );
    }

    #[test]
    fn radius_must_lie_in_unit_interval() {
        let mut set =
            DetectorSet::from_centers(Class::Spam, rule(0.5, 0.0), [tokens("a b")]).unwrap();
        assert!(set.set_radius(DetectorId(0), Some(0.7)).unwrap());
        assert!(!set.set_radius(DetectorId(5), Some(0.7)).unwrap());
        assert!(set.set_radius(DetectorId(0), Some(1.2)).is_err());
        assert_eq!(set.detectors()[0].radius_override, Some(0.7));
    }
}
