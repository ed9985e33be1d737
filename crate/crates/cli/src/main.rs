//! `aisfilter`: train, apply and evaluate the two-population spam filter.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aisfilter_core::{
    classify_improved, correct_error, load_email, load_email_corpus, load_feature_rows,
    load_spambase, run_experiment, split_train_test, train, Class, CombinedDetector, Config, Error,
    InputRow, Insertion, LabeledSample, MatchMode, ModelFile,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aisfilter", version, about = "Negative-selection spam filter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Raw e-mail, compared as token lists.
    Token,
    /// Spambase-style attribute rows.
    Numeric,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> MatchMode {
        match m {
            ModeArg::Token => MatchMode::TokenOverlap,
            ModeArg::Numeric => MatchMode::AttributeInterval,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate both detector populations and write a model file.
    Train {
        /// Spambase-format file, or a directory with spam/ and nonspam/ (or ham/) subdirectories.
        corpus: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config mode. A directory corpus defaults to token mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label rows of a feature file, or raw messages with --raw-email.
    Classify {
        model: PathBuf,
        /// Feature file, or a message file / directory of messages with --raw-email.
        input: PathBuf,
        #[arg(long)]
        raw_email: bool,
    },
    /// Run train/test over several seeds and report false-positive rates for
    /// the combined detector and the spam-only baseline.
    Sweep {
        corpus: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Comma list (`1,4,9`) or inclusive range (`1..10`).
        #[arg(long, default_value = "1..10")]
        seeds: String,
        /// Output base path; writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Add a detector for a misclassified sample and rewrite the model.
    Correct {
        model: PathBuf,
        /// One feature row, or one raw message with --raw-email.
        sample: PathBuf,
        /// spam or nonspam.
        true_label: Class,
        #[arg(long)]
        raw_email: bool,
        /// Training corpus, if it moved since the model was trained.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

enum Failure {
    /// Stdout was closed under us (e.g. piped into `head`); stop quietly.
    Closed,
    Usage(String),
    Data(Error),
    Model(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Closed => 0,
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Model(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Closed => f.write_str("stdout closed"),
            Failure::Usage(m) => f.write_str(m),
            Failure::Data(e) => write!(f, "{e}"),
            Failure::Model(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// `println!` that reports a closed pipe instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        match writeln!(std::io::stdout().lock(), $($arg)*) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Err(Failure::Closed),
            Err(e) => Err(Failure::Data(Error::Io { path: "<stdout>".into(), source: e })),
            Ok(()) => Ok(()),
        }?
    }};
}

fn data<T>(r: aisfilter_core::Result<T>) -> CliResult<T> {
    r.map_err(Failure::Data)
}

fn model_err<T>(r: aisfilter_core::Result<T>) -> CliResult<T> {
    r.map_err(Failure::Model)
}

fn load_model(path: &Path) -> CliResult<ModelFile> {
    ModelFile::load(path).map_err(|e| match e {
        Error::Io { .. } => Failure::Model(e),
        e => Failure::Model(Error::Model(format!("{}: {e}", path.display()))),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Train {
            corpus,
            config,
            mode,
            out,
        } => cmd_train(&corpus, config.as_deref(), mode, &out),
        Command::Classify {
            model,
            input,
            raw_email,
        } => cmd_classify(&model, &input, raw_email),
        Command::Sweep {
            corpus,
            config,
            mode,
            seeds,
            out,
        } => cmd_sweep(&corpus, config.as_deref(), mode, &seeds, &out),
        Command::Correct {
            model,
            sample,
            true_label,
            raw_email,
            corpus,
        } => cmd_correct(&model, &sample, true_label, raw_email, corpus.as_deref()),
    };
    match outcome {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("aisfilter: error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn load_config(path: Option<&Path>, mode: Option<ModeArg>, corpus: &Path) -> CliResult<Config> {
    let mut config = match path {
        Some(p) => data(Config::load(p))?,
        None => Config::default(),
    };
    match mode {
        Some(m) => config.mode = m.into(),
        None if path.is_none() && corpus.is_dir() => config.mode = MatchMode::TokenOverlap,
        None => {}
    }
    data(config.validate())?;
    Ok(config)
}

fn load_corpus(path: &Path, mode: MatchMode) -> CliResult<Vec<LabeledSample>> {
    data(match mode {
        MatchMode::TokenOverlap => load_email_corpus(path),
        MatchMode::AttributeInterval => load_spambase(path),
    })
}

fn stored_path(path: &Path) -> String {
    fs::canonicalize(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}

fn cmd_train(
    corpus_path: &Path,
    config_path: Option<&Path>,
    mode: Option<ModeArg>,
    out: &Path,
) -> CliResult<()> {
    let config = load_config(config_path, mode, corpus_path)?;
    let corpus = load_corpus(corpus_path, config.mode)?;
    let trained = data(train(&corpus, &config))?;
    let cd = &trained.combined;

    for (name, set) in [
        ("spam", &trained.unpruned_spam),
        ("nonspam", cd.nonspam_set()),
    ] {
        let st = set.stats();
        out!(
            "{name}: {} detectors ({} candidates drawn, {} censored, {} crowded)",
            set.len(),
            st.attempts,
            st.censored,
            st.crowded
        );
    }
    out!(
        "combined: {} spam detectors kept, {} pruned at cross_theta {}",
        cd.spam_set().len(),
        cd.pruned_ids().len(),
        cd.cross_theta()
    );

    let spam_hits = data(
        cd.spam_set()
            .censoring_violations(&trained.train_of(Class::NonSpam)),
    )?;
    let nonspam_hits = data(
        cd.nonspam_set()
            .censoring_violations(&trained.train_of(Class::Spam)),
    )?;
    let violations = spam_hits.len() + nonspam_hits.len();
    if violations > 0 {
        return Err(Failure::Model(Error::Model(format!(
            "censoring check failed: {violations} detector/sample matches across classes"
        ))));
    }
    out!("censoring check: ok (no detector matches an opposite-class training sample)");

    let file = ModelFile::new(&config, stored_path(corpus_path), trained.combined);
    model_err(file.save(out))?;
    out!("model written to {}", out.display());
    Ok(())
}

/// Inputs in the representation the model expects, normalized if numeric.
fn read_inputs(cd: &CombinedDetector, input: &Path, raw_email: bool) -> CliResult<Vec<InputRow>> {
    let kind = cd.rule().mode.vector_kind();
    let rows = if raw_email {
        if input.is_dir() {
            let mut paths: Vec<PathBuf> = data(
                fs::read_dir(input)
                    .and_then(|d| d.map(|e| e.map(|e| e.path())).collect())
                    .map_err(|e| Error::Io {
                        path: input.to_path_buf(),
                        source: e,
                    }),
            )?;
            paths.retain(|p| p.is_file());
            paths.sort();
            paths
                .iter()
                .map(|p| data(load_email(p)))
                .collect::<CliResult<Vec<_>>>()?
        } else {
            vec![data(load_email(input))?]
        }
    } else {
        data(load_feature_rows(input))?
    };
    if let Some(r) = rows.iter().find(|r| r.vector.kind() != kind) {
        return Err(Failure::Data(Error::VariantMismatch {
            left: kind,
            right: r.vector.kind(),
        }));
    }
    match cd.normalization() {
        Some(norm) => rows
            .into_iter()
            .map(|r| {
                Ok(InputRow {
                    vector: data(norm.apply(&r.vector))?,
                    ..r
                })
            })
            .collect(),
        None => Ok(rows),
    }
}

fn cmd_classify(model_path: &Path, input: &Path, raw_email: bool) -> CliResult<()> {
    let model = load_model(model_path)?;
    let cd = &model.detector;
    for row in read_inputs(cd, input, raw_email)? {
        let d = data(classify_improved(cd, &row.vector))?;
        out!(
            "{} {} {:?} {:?}",
            row.id,
            d.label,
            d.spam_score,
            d.nonspam_score
        );
    }
    Ok(())
}

fn parse_seeds(arg: &str) -> CliResult<Vec<u64>> {
    let bad = || Failure::Usage(format!("bad --seeds `{arg}`: use `1,2,3` or `1..10`"));
    let seeds: Vec<u64> = if let Some((a, b)) = arg.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        arg.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| {
        Failure::Data(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn cmd_sweep(
    corpus_path: &Path,
    config_path: Option<&Path>,
    mode: Option<ModeArg>,
    seeds: &str,
    out: &Path,
) -> CliResult<()> {
    let seeds = parse_seeds(seeds)?;
    let config = load_config(config_path, mode, corpus_path)?;
    let corpus = load_corpus(corpus_path, config.mode)?;
    let report = data(run_experiment(&corpus, &config, &seeds))?;
    let csv = with_suffix(out, "csv");
    let json = with_suffix(out, "json");
    write_file(&csv, &report.to_csv())?;
    write_file(&json, &data(report.to_json())?)?;
    out!("{}", report.render_table().trim_end());
    out!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_correct(
    model_path: &Path,
    sample_path: &Path,
    label: Class,
    raw_email: bool,
    corpus_override: Option<&Path>,
) -> CliResult<()> {
    let model = load_model(model_path)?;
    let cd = &model.detector;

    let mut rows = read_inputs(cd, sample_path, raw_email)?;
    if rows.len() != 1 {
        return Err(Failure::Usage(format!(
            "{} holds {} samples; correct takes exactly one",
            sample_path.display(),
            rows.len()
        )));
    }
    let row = rows.remove(0);
    let sample = LabeledSample {
        id: row.id,
        vector: row.vector,
        label,
    };

    // Censoring needs the opposite-class training split the model was built on.
    let corpus_path = corpus_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&model.training.corpus));
    let corpus = load_corpus(&corpus_path, model.config.mode)?;
    let split = data(split_train_test(
        &corpus,
        model.training.split_ratio,
        model.training.seed,
    ))?;
    let mut opposite = split.train_of(label.opposite());
    if let Some(norm) = cd.normalization() {
        opposite = data(norm.apply_all(&opposite))?;
    }

    let before = data(classify_improved(cd, &sample.vector))?;
    let (updated, outcome) = data(correct_error(cd, &sample, &opposite))?;
    match outcome {
        Insertion::Accepted(id) => {
            let after = data(classify_improved(&updated, &sample.vector))?;
            let file = ModelFile {
                detector: updated,
                ..model
            };
            model_err(file.save(model_path))?;
            out!(
                "accepted: added {label} detector {id} ({} -> {})",
                before.label,
                after.label
            );
        }
        Insertion::Censored(by) => {
            out!(
                "rejected: the sample matches {} training sample {by}",
                label.opposite()
            );
        }
        Insertion::Crowded(near) => {
            out!("rejected: too close to existing detector {near}");
        }
    }
    Ok(())
}
