//! Decision rules: the combined spam / non-spam rule and the spam-only
//! baseline, plus user error correction.

use serde::{Deserialize, Serialize};

use crate::affinity::affinity;
use crate::corpus::{Class, FeatureVector, LabeledSample};
use crate::detectors::{
    add_detector_from_sample, recombine, CombinedDetector, DetectorId, DetectorSet, Insertion,
};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Class,
    /// Highest affinity to a spam detector, 0 for an empty set.
    pub spam_score: f64,
    /// Highest affinity to a non-spam detector; always 0 for the baseline.
    pub nonspam_score: f64,
    pub matched_spam_ids: Vec<DetectorId>,
    pub matched_nonspam_ids: Vec<DetectorId>,
}

/// Max affinity over the set and the detectors whose threshold was exceeded.
fn score(set: &DetectorSet, v: &FeatureVector) -> Result<(f64, Vec<DetectorId>)> {
    let rule = set.rule();
    let mut best = 0.0f64;
    let mut matched = Vec::new();
    for d in set.detectors() {
        let a = affinity(&d.center, v, rule)?;
        best = best.max(a);
        if a > d.effective_threshold(rule) {
            matched.push(d.id);
        }
    }
    Ok((best, matched))
}

/// Spam only when the spam evidence clears `theta` and beats the non-spam
/// evidence; ties go to non-spam.
pub fn classify_improved(cd: &CombinedDetector, v: &FeatureVector) -> Result<Decision> {
    let theta = cd.rule().theta;
    let (spam_score, matched_spam_ids) = score(cd.spam_set(), v)?;
    let (nonspam_score, matched_nonspam_ids) = score(cd.nonspam_set(), v)?;
    let label = if spam_score > theta && spam_score > nonspam_score {
        Class::Spam
    } else {
        Class::NonSpam
    };
    Ok(Decision {
        label,
        spam_score,
        nonspam_score,
        matched_spam_ids,
        matched_nonspam_ids,
    })
}

/// Single-set threshold rule over spam detectors alone.
pub fn classify_baseline(spam_set: &DetectorSet, v: &FeatureVector) -> Result<Decision> {
    let (spam_score, matched_spam_ids) = score(spam_set, v)?;
    let label = if spam_score > spam_set.rule().theta {
        Class::Spam
    } else {
        Class::NonSpam
    };
    Ok(Decision {
        label,
        spam_score,
        nonspam_score: 0.0,
        matched_spam_ids,
        matched_nonspam_ids: Vec::new(),
    })
}

/// Adds a detector built from a misclassified sample to the set of its true
/// class, then re-runs cross-pruning. `opposite_train` is the training data of
/// the other class, used for censoring. The input is never modified; on
/// rejection the returned detector equals it.
pub fn correct_error(
    cd: &CombinedDetector,
    sample: &LabeledSample,
    opposite_train: &[LabeledSample],
) -> Result<(CombinedDetector, Insertion)> {
    let (spam, nonspam, outcome) = match sample.label {
        Class::Spam => {
            let (spam, outcome) = add_detector_from_sample(cd.spam_set(), sample, opposite_train)?;
            (spam, cd.nonspam_set().clone(), outcome)
        }
        Class::NonSpam => {
            let (nonspam, outcome) =
                add_detector_from_sample(cd.nonspam_set(), sample, opposite_train)?;
            (cd.spam_set().clone(), nonspam, outcome)
        }
    };
    if !outcome.is_accepted() {
        return Ok((cd.clone(), outcome));
    }
    Ok((recombine(cd, spam, nonspam)?, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::{MatchMode, MatchRule};
    use crate::detectors::build_combined;

    fn tokens(s: &str) -> FeatureVector {
        FeatureVector::tokens(s.split_whitespace())
    }

    fn rule(theta: f64) -> MatchRule {
        MatchRule::new(MatchMode::TokenOverlap, theta, 0.0, 0.1).unwrap()
    }

    fn combined(spam: &[&str], ham: &[&str], theta: f64, cross_theta: f64) -> CombinedDetector {
        let r = rule(theta);
        let s = DetectorSet::from_centers(Class::Spam, r, spam.iter().map(|t| tokens(t))).unwrap();
        let h =
            DetectorSet::from_centers(Class::NonSpam, r, ham.iter().map(|t| tokens(t))).unwrap();
        build_combined(s, h, cross_theta).unwrap()
    }

    #[test]
    fn exact_spam_center_is_spam() {
        let cd = combined(&["cheap pills now"], &["meeting agenda monday"], 0.5, 0.5);
        let d = classify_improved(&cd, &tokens("cheap pills now")).unwrap();
        assert_eq!(d.label, Class::Spam);
        assert_eq!(d.spam_score, 1.0);
        assert_eq!(d.matched_spam_ids, [DetectorId(0)]);
        assert!(d.matched_nonspam_ids.is_empty());
    }

    #[test]
    fn no_match_is_nonspam() {
        let cd = combined(&["cheap pills now"], &["meeting agenda monday"], 0.5, 0.5);
        let d = classify_improved(&cd, &tokens("garden tomato seeds")).unwrap();
        assert_eq!(d.label, Class::NonSpam);
        assert_eq!((d.spam_score, d.nonspam_score), (0.0, 0.0));
    }

    #[test]
    fn stronger_nonspam_evidence_wins() {
        // spam affinity 7/10, non-spam affinity 9/10, theta 0.5
        let cd = combined(
            &["a b c d e f g h i j"],
            &["a b c d e f g x y w"],
            0.5,
            0.95,
        );
        let v = tokens("a b c d e f g x y z");
        let d = classify_improved(&cd, &v).unwrap();
        assert_eq!(d.spam_score, 0.7);
        assert_eq!(d.nonspam_score, 0.9);
        assert_eq!(d.label, Class::NonSpam);
        // the baseline only looks at the spam side
        assert_eq!(
            classify_baseline(cd.spam_set(), &v).unwrap().label,
            Class::Spam
        );
    }

    #[test]
    fn equal_scores_go_to_nonspam() {
        let cd = combined(&["a b c d"], &["a b c e"], 0.5, 0.99);
        let d = classify_improved(&cd, &tokens("a b c z")).unwrap();
        assert_eq!(d.spam_score, d.nonspam_score);
        assert_eq!(d.label, Class::NonSpam);
    }

    #[test]
    fn baseline_threshold_is_strict() {
        let r = rule(0.5);
        let s = DetectorSet::from_centers(Class::Spam, r, [tokens("a b")]).unwrap();
        assert_eq!(
            classify_baseline(&s, &tokens("a b")).unwrap().label,
            Class::Spam
        );
        let d = classify_baseline(&s, &tokens("a z")).unwrap();
        assert_eq!(d.spam_score, 0.5);
        assert_eq!(d.label, Class::NonSpam);
        assert_eq!(d.nonspam_score, 0.0);
    }

    #[test]
    fn correcting_a_false_negative() {
        let cd = combined(&["cheap pills now"], &["meeting agenda monday"], 0.5, 0.5);
        let missed = LabeledSample::new("fn1", tokens("lottery winner claim"), Class::Spam);
        assert_eq!(
            classify_improved(&cd, &missed.vector).unwrap().label,
            Class::NonSpam
        );
        let ham_train = [LabeledSample::new(
            "h1",
            tokens("meeting agenda monday"),
            Class::NonSpam,
        )];
        let (fixed, out) = correct_error(&cd, &missed, &ham_train).unwrap();
        assert!(out.is_accepted());
        assert_eq!(fixed.spam_set().len(), 2);
        assert_eq!(
            classify_improved(&fixed, &missed.vector).unwrap().label,
            Class::Spam
        );
    }

    #[test]
    fn correcting_a_false_positive() {
        // v scores 0.75 against the spam detector and nothing on the non-spam side
        let cd = combined(
            &["deal offer cheap today"],
            &["meeting agenda monday"],
            0.5,
            0.8,
        );
        let v = tokens("deal offer cheap invoice");
        assert_eq!(classify_improved(&cd, &v).unwrap().label, Class::Spam);

        let ham = LabeledSample::new("fp1", v.clone(), Class::NonSpam);
        let spam_train = [LabeledSample::new(
            "s1",
            tokens("lottery winner"),
            Class::Spam,
        )];
        let (fixed, out) = correct_error(&cd, &ham, &spam_train).unwrap();
        assert!(out.is_accepted());
        assert_eq!(fixed.nonspam_set().len(), 2);
        // cross-affinity of the new pair is 0.75 <= 0.8, so the spam detector stays
        assert_eq!(fixed.spam_set().len(), 1);
        let d = classify_improved(&fixed, &v).unwrap();
        assert_eq!(d.nonspam_score, 1.0);
        assert_eq!(d.label, Class::NonSpam);
    }

    #[test]
    fn rejected_correction_is_a_no_op() {
        let cd = combined(&["cheap pills now"], &["meeting agenda monday"], 0.5, 0.5);
        let s = LabeledSample::new("x", tokens("meeting agenda monday"), Class::Spam);
        let ham_train = [LabeledSample::new(
            "h1",
            tokens("meeting agenda monday"),
            Class::NonSpam,
        )];
        let (same, out) = correct_error(&cd, &s, &ham_train).unwrap();
        assert!(!out.is_accepted());
        assert_eq!(same, cd);
    }
}
