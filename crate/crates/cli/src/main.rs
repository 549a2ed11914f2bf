mod config;
mod error;
mod pipeline;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Parser, Subcommand};
use policy2label::classify::{classify_all, train, Backend, Hyperparameters, TrainingExample};
use policy2label::document::{fetch_policy, MediaKind};
use policy2label::eval::{detect_underclaims, detection_rate, EvalReport, UnderclaimFinding};
use policy2label::generate::CostStats;
use policy2label::schema::{LabelSchema, PrivacyLabel};
use policy2label::DataPracticeCategory;
use serde::{Deserialize, Serialize};

use config::RunOptions;
use error::CliError;
use pipeline::{
    corpus_entries, document_pipeline, load_classifier, load_embedder, load_schema, process_file,
    segments_json, to_json, write_atomic, Client, Resources,
};

#[derive(Parser)]
#[command(name = "policy2label", version, about = "Generate privacy nutrition labels from privacy policies")]
struct Cli {
    /// JSON file with default values for the run options; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download a policy page into the output directory.
    Fetch {
        /// URL of the policy.
        #[arg(long)]
        policy: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean, gate and segment a policy; writes segments.json.
    Segment {
        #[arg(long)]
        policy: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Segment and classify a policy; writes segments.json with categories.
    Classify {
        #[arg(long)]
        policy: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Run the whole pipeline; writes segments.json, label.json and cost.json.
    Generate {
        #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
        policy: Option<PathBuf>,
        /// Directory of policies; each gets a subdirectory of the output.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// App name shown to the model; defaults to the file stem.
        #[arg(long)]
        app: Option<String>,
        /// Also write every model answer to this replay file.
        #[arg(long)]
        record: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// List practices in ground truth that declared labels leave out.
    Audit {
        #[command(flatten)]
        labels: LabelDirs,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Score generated labels against ground truth.
    Eval {
        #[command(flatten)]
        labels: LabelDirs,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Fit the linear classifier on labelled sentences.
    TrainClassifier {
        /// JSON list of {"text": ..., "categories": [...]}.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        opts: RunOptions,
    },
}

/// Label directories hold `<app>.json` files, or `<app>/label.json` as
/// written by `generate --corpus`.
#[derive(clap::Args)]
struct LabelDirs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    generated: PathBuf,
    #[arg(long)]
    declared: Option<PathBuf>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(tracing_subscriber::filter::LevelFilter::WARN)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => RunOptions::load_file(path)?,
        None => RunOptions::default(),
    };
    match cli.command {
        Command::Fetch { policy, out } => fetch(&policy, out.or(file.out)),
        Command::Segment { policy, opts } => segment(&policy, &opts.or(file), false),
        Command::Classify { policy, opts } => segment(&policy, &opts.or(file), true),
        Command::Generate {
            policy,
            corpus,
            app,
            record,
            opts,
        } => generate(policy, corpus, app, record, opts.or(file)),
        Command::Audit { labels, opts } => audit(&labels, &opts.or(file)),
        Command::Eval { labels, opts } => eval(&labels, &opts.or(file)),
        Command::TrainClassifier {
            train,
            epochs,
            learning_rate,
            l2,
            seed,
            opts,
        } => {
            let mut hyper = Hyperparameters::default();
            hyper.epochs = epochs.unwrap_or(hyper.epochs);
            hyper.learning_rate = learning_rate.unwrap_or(hyper.learning_rate);
            hyper.l2 = l2.unwrap_or(hyper.l2);
            hyper.seed = seed.unwrap_or(hyper.seed);
            train_classifier(&train, &hyper, &opts.or(file))
        }
    }
}

fn fetch(url: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let doc = fetch_policy(url, Duration::from_secs(30))?;
    let ext = match doc.media_kind {
        MediaKind::Html => "html",
        MediaKind::PlainText => "txt",
    };
    let path = out.unwrap_or_else(|| PathBuf::from(".")).join(format!("{}.{ext}", doc.source_id));
    write_atomic(&path, doc.content())?;
    println!("{}", path.display());
    Ok(())
}

fn segment(policy: &Path, opts: &RunOptions, with_categories: bool) -> Result<(), CliError> {
    opts.check()?;
    let embedder = load_embedder(opts)?;
    let pipeline = document_pipeline(opts)?;
    let stem = policy.file_stem().and_then(|s| s.to_str()).unwrap_or("policy");
    let classifier = with_categories.then(|| load_classifier(opts, stem)).transpose()?;
    let mut processed = process_file(policy, &pipeline, embedder.as_ref())?;
    if let Some(model) = &classifier {
        classify_all(model, &mut processed.segments)?;
    }
    write_atomic(&opts.out_dir().join("segments.json"), segments_json(&processed))?;
    eprintln!(
        "{}: {} sentences, {} segments",
        processed.source_id,
        processed.sentences.len(),
        processed.segments.len()
    );
    Ok(())
}

fn generate(
    policy: Option<PathBuf>,
    corpus: Option<PathBuf>,
    app: Option<String>,
    record: Option<PathBuf>,
    opts: RunOptions,
) -> Result<(), CliError> {
    let out = opts.out_dir();
    let jobs = opts.jobs;
    let res = Resources::load(opts, record.is_some())?;
    let result = match (policy, corpus) {
        (Some(path), _) => {
            let app = app.unwrap_or_else(|| {
                path.file_stem().and_then(|s| s.to_str()).unwrap_or("policy").to_string()
            });
            res.generate_one(&path, &app, &out).map(|cost| {
                eprintln!("{}: {} prompts, {} prompt words", app, cost.prompts_sent, cost.prompt_words);
            })
        }
        (None, Some(dir)) => generate_corpus(&res, &dir, &out, jobs),
        (None, None) => Err(CliError::Config("give --policy or --corpus".into())),
    };
    if let (Some(path), Client::Recording(rec)) = (&record, &res.llm) {
        write_atomic(path, rec.to_json())?;
    }
    result
}

fn generate_corpus(res: &Resources, dir: &Path, out: &Path, jobs: Option<usize>) -> Result<(), CliError> {
    let entries = corpus_entries(dir)?;
    let default_jobs = std::thread::available_parallelism().map_or(1, |n| n.get().min(4));
    let workers = jobs.unwrap_or(default_jobs).min(entries.len()).max(1);
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<Result<CostStats, CliError>>>> =
        Mutex::new((0..entries.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((path, app)) = entries.get(i) else { break };
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("policy");
                let r = res.generate_one(path, app, &out.join(stem));
                outcomes.lock().expect("outcomes lock")[i] = Some(r);
            });
        }
    });
    let mut failed = Vec::new();
    let mut total = CostStats::default();
    for ((path, _), outcome) in entries.iter().zip(outcomes.into_inner().expect("outcomes lock")) {
        match outcome.expect("every document ran") {
            Ok(cost) => total += cost,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                failed.push(e.exit_code());
            }
        }
    }
    eprintln!(
        "{} of {} documents labelled; {} prompts, {} prompt words",
        entries.len() - failed.len(),
        entries.len(),
        total.prompts_sent,
        total.prompt_words
    );
    match failed.first() {
        None => Ok(()),
        Some(code) => Err(CliError::Corpus(failed.len(), entries.len(), *code)),
    }
}

/// Loads `<app>.json` or `<app>/label.json` from `dir`.
fn find_label(dir: &Path, app: &str, schema: &LabelSchema) -> Result<PrivacyLabel, CliError> {
    for candidate in [dir.join(format!("{app}.json")), dir.join(app).join("label.json")] {
        if candidate.exists() {
            return Ok(PrivacyLabel::load(&candidate, schema)?);
        }
    }
    Err(CliError::Config(format!("no label for {app} in {}", dir.display())))
}

/// App ids are the stems of the `.json` files in the truth directory.
fn truth_apps(dir: &Path) -> Result<Vec<String>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!("{} is not a directory", dir.display())));
    }
    let mut apps = BTreeSet::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                apps.insert(stem.to_string());
            }
        }
    }
    Ok(apps.into_iter().collect())
}

fn findings(
    labels: &LabelDirs,
    declared_dir: &Path,
    apps: &[String],
    schema: &LabelSchema,
    exclude_omnibus: bool,
) -> Result<Vec<UnderclaimFinding>, CliError> {
    let mut out = Vec::new();
    for app in apps {
        let truth = find_label(&labels.truth, app, schema)?;
        let declared = find_label(declared_dir, app, schema)?;
        let generated = find_label(&labels.generated, app, schema)?;
        out.extend(detect_underclaims(app, &truth, &declared, &generated, schema, exclude_omnibus)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct AuditFile<'a> {
    findings: &'a [UnderclaimFinding],
    detection_rate: Option<f64>,
}

fn audit(labels: &LabelDirs, opts: &RunOptions) -> Result<(), CliError> {
    let schema = load_schema(opts)?;
    let declared = labels
        .declared
        .as_ref()
        .ok_or_else(|| CliError::Config("audit needs --declared".into()))?;
    let apps = truth_apps(&labels.truth)?;
    let found = findings(labels, declared, &apps, &schema, opts.exclude_omnibus)?;
    let rate = detection_rate(&found);
    for f in &found {
        println!(
            "{}\t{}/{}\t{}",
            f.app_id,
            f.section,
            f.attribute,
            if f.detected { "detected" } else { "missed" }
        );
    }
    println!(
        "{} under-claims, detection rate {}",
        found.len(),
        rate.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"))
    );
    if opts.out.is_some() {
        write_atomic(
            &opts.out_dir().join("audit.json"),
            to_json(&AuditFile { findings: &found, detection_rate: rate }),
        )?;
    }
    Ok(())
}

fn eval(labels: &LabelDirs, opts: &RunOptions) -> Result<(), CliError> {
    let schema = load_schema(opts)?;
    let apps = truth_apps(&labels.truth)?;
    let pairs = apps
        .iter()
        .map(|app| Ok((find_label(&labels.generated, app, &schema)?, find_label(&labels.truth, app, &schema)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut report = EvalReport::build(&pairs, &schema)?;
    if let Some(declared) = &labels.declared {
        report = report.with_findings(findings(labels, declared, &apps, &schema, opts.exclude_omnibus)?);
    }
    let mut cost = CostStats::default();
    let mut any_cost = false;
    for app in &apps {
        let path = labels.generated.join(app).join("cost.json");
        if let Ok(text) = std::fs::read_to_string(&path) {
            let stats: CostStats = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            cost += stats;
            any_cost = true;
        }
    }
    report.cost = any_cost.then_some(cost);
    print!("{}", report.to_text());
    if opts.out.is_some() {
        write_atomic(&opts.out_dir().join("report.json"), report.to_json())?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct TrainingRow {
    text: String,
    categories: Vec<DataPracticeCategory>,
}

fn train_classifier(path: &Path, hyper: &Hyperparameters, opts: &RunOptions) -> Result<(), CliError> {
    opts.check()?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rows: Vec<TrainingRow> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let embedder = load_embedder(opts)?;
    let examples = rows
        .iter()
        .map(|r| {
            Ok(TrainingExample {
                embedding: embedder
                    .embed(&r.text)
                    .map_err(|e| CliError::Config(format!("embedding training text: {e}")))?,
                categories: r.categories.iter().copied().collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut model = train(&examples, hyper)?;
    if let Some(t) = opts.threshold {
        model = model.with_threshold(t)?;
    }
    let Backend::Linear(weights) = model.backend() else {
        unreachable!("training yields a linear model")
    };
    let out = opts.out_dir().join("classifier.json");
    write_atomic(&out, weights.to_json(model.threshold()))?;
    println!("{}", out.display());
    Ok(())
}
