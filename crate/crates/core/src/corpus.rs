//! Corpus ingestion: Spambase rows, raw e-mail text, normalization and the
//! stratified train/test split.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of numeric attributes in a Spambase row (the label is the 58th field).
pub const SPAMBASE_ATTRIBUTES: usize = 57;

/// Tokens shorter than this (in characters) are dropped by the tokenizer.
pub const MIN_TOKEN_LEN: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Spam,
    NonSpam,
}

impl Class {
    pub fn opposite(self) -> Class {
        match self {
            Class::Spam => Class::NonSpam,
            Class::NonSpam => Class::Spam,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Spam => "spam",
            Class::NonSpam => "nonspam",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Class {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spam" | "1" => Ok(Class::Spam),
            "nonspam" | "non-spam" | "ham" | "0" => Ok(Class::NonSpam),
            other => Err(format!(
                "unknown class `{other}` (expected spam or nonspam)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VectorKind {
    Tokens,
    Numeric,
}

impl fmt::Display for VectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VectorKind::Tokens => "token-list",
            VectorKind::Numeric => "numeric",
        })
    }
}

/// One e-mail as seen by the matcher: either its word tokens or a fixed-length
/// attribute vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureVector {
    Tokens(Vec<String>),
    Numeric(Vec<f64>),
}

impl FeatureVector {
    pub fn kind(&self) -> VectorKind {
        match self {
            FeatureVector::Tokens(_) => VectorKind::Tokens,
            FeatureVector::Numeric(_) => VectorKind::Numeric,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureVector::Tokens(t) => t.len(),
            FeatureVector::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        FeatureVector::Tokens(tokens.into_iter().map(Into::into).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleId(pub String);

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SampleId {
    fn from(s: &str) -> Self {
        SampleId(s.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: SampleId,
    pub vector: FeatureVector,
    pub label: Class,
}

impl LabeledSample {
    pub fn new(id: impl Into<String>, vector: FeatureVector, label: Class) -> Self {
        LabeledSample {
            id: SampleId(id.into()),
            vector,
            label,
        }
    }
}

/// A row read for classification: the label column is optional.
#[derive(Clone, Debug, PartialEq)]
pub struct InputRow {
    pub id: SampleId,
    pub vector: FeatureVector,
    pub label: Option<Class>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_attribute(field: &str, row: usize, column: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("attribute {column} is not numeric: `{}`", field.trim()),
    })?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::MalformedRow {
            row,
            reason: format!("attribute {column} must be finite and non-negative, got {value}"),
        });
    }
    Ok(value)
}

fn parse_label(field: &str, row: usize) -> Result<Class> {
    match field.trim().parse::<f64>() {
        Ok(1.0) => Ok(Class::Spam),
        Ok(0.0) => Ok(Class::NonSpam),
        _ => Err(Error::MalformedRow {
            row,
            reason: format!("label must be 0 or 1, got `{}`", field.trim()),
        }),
    }
}

fn parse_rows(text: &str, allow_unlabeled: bool) -> Result<Vec<InputRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let labeled = match fields.len() {
            n if n == SPAMBASE_ATTRIBUTES + 1 => true,
            n if n == SPAMBASE_ATTRIBUTES && allow_unlabeled => false,
            n => {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!("expected {} fields, found {n}", SPAMBASE_ATTRIBUTES + 1),
                })
            }
        };
        let values = fields[..SPAMBASE_ATTRIBUTES]
            .iter()
            .enumerate()
            .map(|(col, f)| parse_attribute(f, row, col + 1))
            .collect::<Result<Vec<_>>>()?;
        let label = if labeled {
            Some(parse_label(fields[SPAMBASE_ATTRIBUTES], row)?)
        } else {
            None
        };
        rows.push(InputRow {
            id: SampleId(format!("row-{row}")),
            vector: FeatureVector::Numeric(values),
            label,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(rows)
}

/// Parses Spambase CSV text: 57 numeric attributes followed by a 0/1 label,
/// no header row. Sample ids are `row-<line number>`.
pub fn parse_spambase(text: &str) -> Result<Vec<LabeledSample>> {
    Ok(parse_rows(text, false)?
        .into_iter()
        .map(|r| LabeledSample {
            id: r.id,
            vector: r.vector,
            label: r.label.expect("labeled rows only"),
        })
        .collect())
}

pub fn load_spambase(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    parse_spambase(&read_text(path.as_ref())?)
}

/// Reads Spambase-format rows for classification. Rows may carry the label
/// column (58 fields) or omit it (57 fields).
pub fn load_feature_rows(path: impl AsRef<Path>) -> Result<Vec<InputRow>> {
    parse_rows(&read_text(path.as_ref())?, true)
}

/// Splits a message at its first blank line. A message without a blank line
/// is treated as all body.
fn split_header_body(text: &str) -> (&str, &str) {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_end_matches(['\r', '\n']).is_empty() {
            return (&text[..offset], &text[offset + line.len()..]);
        }
        offset += line.len();
    }
    ("", text)
}

/// Replaces every `<...>` tag with a space. An unterminated `<` is kept as text.
fn strip_markup(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(open) = rest.find('<') {
        match rest[open..].find('>') {
            Some(close) => {
                out.push_str(&rest[..open]);
                out.push(' ');
                rest = &rest[open + close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn push_tokens(text: &str, tokens: &mut Vec<String>) {
    tokens.extend(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= MIN_TOKEN_LEN)
            .map(str::to_lowercase),
    );
}

/// Turns a raw message into its token list: header/body split, markup removed
/// from the body, lowercase tokens on non-alphanumeric boundaries, tokens
/// shorter than two characters dropped. Never fails; junk input yields an
/// empty list.
pub fn preprocess_email(raw: &[u8]) -> FeatureVector {
    let text = String::from_utf8_lossy(raw);
    let (header, body) = split_header_body(&text);
    let mut tokens = Vec::new();
    push_tokens(header, &mut tokens);
    push_tokens(&strip_markup(body), &mut tokens);
    FeatureVector::Tokens(tokens)
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads a directory of raw messages laid out as `<dir>/spam/*` and
/// `<dir>/nonspam/*` (`ham/` is accepted as an alias). Files are read in
/// name order.
pub fn load_email_corpus(dir: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    let dir = dir.as_ref();
    let mut samples = Vec::new();
    for (sub, label) in [
        ("spam", Class::Spam),
        ("nonspam", Class::NonSpam),
        ("ham", Class::NonSpam),
    ] {
        let class_dir = dir.join(sub);
        if !class_dir.is_dir() {
            continue;
        }
        for path in sorted_files(&class_dir)? {
            let raw = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            samples.push(LabeledSample::new(
                format!("{sub}/{name}"),
                preprocess_email(&raw),
                label,
            ));
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(samples)
}

pub fn load_email(path: impl AsRef<Path>) -> Result<InputRow> {
    let path = path.as_ref();
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(InputRow {
        id: SampleId(
            path.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        ),
        vector: preprocess_email(&raw),
        label: None,
    })
}

/// Per-attribute min-max scaling fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(samples: &[LabeledSample]) -> Result<Normalizer> {
        let mut iter = samples.iter().map(|s| match &s.vector {
            FeatureVector::Numeric(v) => Ok(v),
            other => Err(Error::VariantMismatch {
                left: VectorKind::Numeric,
                right: other.kind(),
            }),
        });
        let first = iter.next().ok_or(Error::EmptyFile)??;
        let mut min = first.clone();
        let mut max = first.clone();
        for v in iter {
            let v = v?;
            if v.len() != min.len() {
                return Err(Error::LengthMismatch {
                    left: min.len(),
                    right: v.len(),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        Ok(Normalizer { min, max })
    }

    pub fn dimension(&self) -> usize {
        self.min.len()
    }

    /// Scales into [0,1]; values outside the training range are clamped and
    /// constant attributes map to 0. Token lists are returned unchanged.
    pub fn apply(&self, vector: &FeatureVector) -> Result<FeatureVector> {
        let values = match vector {
            FeatureVector::Tokens(_) => return Ok(vector.clone()),
            FeatureVector::Numeric(v) => v,
        };
        if values.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                left: self.dimension(),
                right: values.len(),
            });
        }
        let scaled = values
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                let range = hi - lo;
                if range > 0.0 {
                    ((x - lo) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(FeatureVector::Numeric(scaled))
    }

    pub fn apply_all(&self, samples: &[LabeledSample]) -> Result<Vec<LabeledSample>> {
        samples
            .iter()
            .map(|s| {
                Ok(LabeledSample {
                    id: s.id.clone(),
                    vector: self.apply(&s.vector)?,
                    label: s.label,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCorpus {
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
    pub seed: u64,
    pub ratio: f64,
}

impl SplitCorpus {
    pub fn train_of(&self, class: Class) -> Vec<LabeledSample> {
        self.train
            .iter()
            .filter(|s| s.label == class)
            .cloned()
            .collect()
    }
}

/// Stratified split: each class is shuffled with a seeded ChaCha stream and
/// `round(n_class * ratio)` of its samples go to training. Both halves keep
/// the input order.
pub fn split_train_test(samples: &[LabeledSample], ratio: f64, seed: u64) -> Result<SplitCorpus> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; samples.len()];
    for class in [Class::Spam, Class::NonSpam] {
        let mut members: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].label == class)
            .collect();
        let n_train = (members.len() as f64 * ratio).round() as usize;
        if n_train == 0 {
            return Err(Error::DegenerateSplit(class));
        }
        members.shuffle(&mut rng);
        for &i in &members[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) =
        samples.iter().zip(in_train).partition(|(_, train)| *train);
    Ok(SplitCorpus {
        train: train.into_iter().map(|(s, _)| s.clone()).collect(),
        test: test.into_iter().map(|(s, _)| s.clone()).collect(),
        seed,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(v: &FeatureVector) -> Vec<&str> {
        match v {
            FeatureVector::Tokens(t) => t.iter().map(String::as_str).collect(),
            _ => panic!("expected tokens"),
        }
    }

    fn spambase_row(values: &[f64], label: u8) -> String {
        let mut fields: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        fields.push(label.to_string());
        fields.join(",")
    }

    #[test]
    fn header_and_body_tokens() {
        let v = preprocess_email(b"Subject: hi\n\nBuy NOW!!");
        assert_eq!(tokens(&v), ["subject", "hi", "buy", "now"]);
    }

    #[test]
    fn markup_is_stripped_from_body() {
        let v = preprocess_email(b"From: a@b.example\n\n<b>free</b> money");
        assert_eq!(tokens(&v), ["from", "example", "free", "money"]);
        let v = preprocess_email(b"<b>free</b>money");
        assert_eq!(tokens(&v), ["free", "money"]);
    }

    #[test]
    fn crlf_blank_line_splits_header() {
        let v = preprocess_email(b"Subject: X\r\n\r\n<p>Hello</p>");
        assert_eq!(tokens(&v), ["subject", "hello"]);
    }

    #[test]
    fn degenerate_input_is_empty() {
        assert!(preprocess_email(b"").is_empty());
        assert!(preprocess_email(b"! ? a b c\n\n<tag> ...").is_empty());
        // invalid UTF-8 is decoded lossily
        let v = preprocess_email(b"ok \xff\xfe go");
        assert_eq!(tokens(&v), ["ok", "go"]);
    }

    #[test]
    fn unterminated_tag_kept_as_text() {
        let v = preprocess_email(b"\n\nprice <50 dollars");
        assert_eq!(tokens(&v), ["price", "50", "dollars"]);
    }

    #[test]
    fn single_all_zero_spam_row() {
        let text = spambase_row(&[0.0; SPAMBASE_ATTRIBUTES], 1);
        let samples = parse_spambase(&text).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].label, Class::Spam);
        assert_eq!(samples[0].id.0, "row-1");
        assert_eq!(
            samples[0].vector,
            FeatureVector::Numeric(vec![0.0; SPAMBASE_ATTRIBUTES])
        );
    }

    #[test]
    fn attribute_order_is_preserved() {
        let values: Vec<f64> = (0..SPAMBASE_ATTRIBUTES).map(|i| i as f64 * 0.5).collect();
        let samples = parse_spambase(&spambase_row(&values, 0)).unwrap();
        assert_eq!(samples[0].vector, FeatureVector::Numeric(values));
        assert_eq!(samples[0].label, Class::NonSpam);
    }

    #[test]
    fn malformed_rows_report_row_number() {
        let good = spambase_row(&[0.0; SPAMBASE_ATTRIBUTES], 0);
        let short = ["0"; 10].join(",");
        let err = parse_spambase(&format!("{good}\n{short}\n")).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }), "{err}");

        let mut bad_label = good.clone();
        bad_label.pop();
        bad_label.push('2');
        let err = parse_spambase(&bad_label).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 1, .. }), "{err}");

        let non_numeric = good.replacen("0", "abc", 1);
        let err = parse_spambase(&non_numeric).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 1, .. }), "{err}");

        let negative = good.replacen("0", "-1", 1);
        assert!(parse_spambase(&negative).is_err());
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse_spambase(""), Err(Error::EmptyFile)));
        assert!(matches!(parse_spambase("\n\n"), Err(Error::EmptyFile)));
    }

    #[test]
    fn unlabeled_rows_accepted_for_classification() {
        let row = vec!["0.5"; SPAMBASE_ATTRIBUTES].join(",");
        let rows = parse_rows(&row, true).unwrap();
        assert_eq!(rows[0].label, None);
        assert!(parse_rows(&row, false).is_err());
    }

    fn labeled(n_spam: usize, n_ham: usize) -> Vec<LabeledSample> {
        (0..n_spam + n_ham)
            .map(|i| {
                let label = if i < n_spam {
                    Class::Spam
                } else {
                    Class::NonSpam
                };
                LabeledSample::new(
                    format!("s{i}"),
                    FeatureVector::Numeric(vec![i as f64]),
                    label,
                )
            })
            .collect()
    }

    #[test]
    fn ten_sample_split() {
        let split = split_train_test(&labeled(5, 5), 0.6, 7).unwrap();
        assert_eq!(split.train.len(), 6);
        assert_eq!(split.test.len(), 4);
        assert_eq!(split.train_of(Class::Spam).len(), 3);
        assert_eq!(split.train_of(Class::NonSpam).len(), 3);
        assert_eq!(split, split_train_test(&labeled(5, 5), 0.6, 7).unwrap());
    }

    #[test]
    fn degenerate_split() {
        assert!(matches!(
            split_train_test(&labeled(1, 5), 0.4, 1),
            Err(Error::DegenerateSplit(Class::Spam))
        ));
        assert!(matches!(
            split_train_test(&labeled(4, 0), 0.5, 1),
            Err(Error::DegenerateSplit(Class::NonSpam))
        ));
        assert!(matches!(
            split_train_test(&labeled(4, 4), 1.0, 1),
            Err(Error::InvalidRatio(_))
        ));
    }

    #[test]
    fn normalizer_scales_and_clamps() {
        let train = vec![
            LabeledSample::new(
                "a",
                FeatureVector::Numeric(vec![0.0, 2.0, 5.0]),
                Class::Spam,
            ),
            LabeledSample::new(
                "b",
                FeatureVector::Numeric(vec![4.0, 2.0, 10.0]),
                Class::NonSpam,
            ),
        ];
        let norm = Normalizer::fit(&train).unwrap();
        let v = norm
            .apply(&FeatureVector::Numeric(vec![1.0, 7.0, 20.0]))
            .unwrap();
        // constant attribute -> 0, above-range value clamped to 1
        assert_eq!(v, FeatureVector::Numeric(vec![0.25, 0.0, 1.0]));
        assert!(norm.apply(&FeatureVector::Numeric(vec![1.0])).is_err());
    }

    #[test]
    fn class_parsing() {
        assert_eq!("spam".parse::<Class>().unwrap(), Class::Spam);
        assert_eq!("NonSpam".parse::<Class>().unwrap(), Class::NonSpam);
        assert_eq!("ham".parse::<Class>().unwrap(), Class::NonSpam);
        assert!("maybe".parse::<Class>().is_err());
    }
}
