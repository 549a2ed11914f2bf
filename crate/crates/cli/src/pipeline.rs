use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use policy2label::classify::{classify_all, Backend, ClassifierModel, ExternalScores, KeywordRules};
use policy2label::document::{DocumentPipeline, ProcessedPolicy, RawDocument, SegmenterConfig};
use policy2label::embeddings::{HashingEmbedder, SentenceEmbedder, WordVectorStore};
use policy2label::generate::{generate_label, CostStats, GenerationConfig, Strategy};
use policy2label::llm::{HttpCompletion, KeywordMock, LlmClient, Recorder, Replay};
use policy2label::schema::LabelSchema;
use serde::Serialize;

use crate::config::{LlmKind, RunOptions, StrategyArg};
use crate::error::CliError;

/// Writes to a temporary sibling, then renames over `path`, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_ref())?;
            f.sync_all()
        })
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

pub fn load_schema(opts: &RunOptions) -> Result<LabelSchema, CliError> {
    match opts.schema.as_deref() {
        None | Some("google") => Ok(LabelSchema::google()),
        Some("apple") => Ok(LabelSchema::apple()),
        Some(path) if Path::new(path).exists() => Ok(LabelSchema::load(path)?),
        Some(path) => Err(CliError::Config(format!("schema file {path} does not exist"))),
    }
}

pub fn load_embedder(opts: &RunOptions) -> Result<Box<dyn SentenceEmbedder>, CliError> {
    match &opts.vectors {
        Some(path) => WordVectorStore::load(path)
            .map(|s| Box::new(s) as Box<dyn SentenceEmbedder>)
            .map_err(|e| CliError::Config(format!("vectors {}: {e}", path.display()))),
        None => Ok(Box::new(HashingEmbedder::default())),
    }
}

/// Builds the classifier for one document. `external:` may name a file, or a
/// directory holding `<document stem>.json`.
pub fn load_classifier(opts: &RunOptions, stem: &str) -> Result<ClassifierModel, CliError> {
    let spec = opts.classifier.as_deref().unwrap_or("keyword");
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let model = match (kind, arg) {
        ("keyword", None) => ClassifierModel::keyword(),
        ("keyword", Some(path)) => ClassifierModel::new(
            Backend::Keyword(KeywordRules::load(path)?),
            ClassifierModel::DEFAULT_THRESHOLD,
        )?,
        ("linear", Some(path)) => ClassifierModel::load_linear(path)?,
        ("external", Some(path)) => {
            let p = Path::new(path);
            let file = if p.is_dir() { p.join(format!("{stem}.json")) } else { p.to_path_buf() };
            if !file.exists() {
                return Err(CliError::Config(format!("external scores {} do not exist", file.display())));
            }
            ClassifierModel::new(
                Backend::External(ExternalScores::load(file)?),
                ClassifierModel::DEFAULT_THRESHOLD,
            )?
        }
        _ => return Err(CliError::Config(format!("unknown classifier {spec:?}"))),
    };
    match opts.threshold {
        Some(t) => Ok(model.with_threshold(t)?),
        None => Ok(model),
    }
}

pub fn load_llm(opts: &RunOptions) -> Result<Box<dyn LlmClient>, CliError> {
    match opts.llm {
        None => Err(CliError::Config("choose a model backend with --llm".into())),
        Some(LlmKind::MockKeyword) => Ok(Box::new(KeywordMock::default())),
        Some(LlmKind::Replay) => {
            let path = opts
                .replay_file
                .as_ref()
                .ok_or_else(|| CliError::Config("--llm replay needs --replay-file".into()))?;
            Ok(Box::new(Replay::load(path)?))
        }
        Some(LlmKind::Http) => {
            let endpoint = opts
                .endpoint
                .as_deref()
                .ok_or_else(|| CliError::Config("--llm http needs --endpoint".into()))?;
            let model = opts
                .model
                .as_deref()
                .ok_or_else(|| CliError::Config("--llm http needs --model".into()))?;
            Ok(Box::new(HttpCompletion::from_env(endpoint, model)?))
        }
    }
}

pub fn document_pipeline(opts: &RunOptions) -> Result<DocumentPipeline, CliError> {
    let mut pipeline = DocumentPipeline::default();
    if let Some(tau) = opts.tau {
        pipeline.segmenter = SegmenterConfig::new(tau)?;
    }
    Ok(pipeline)
}

pub fn generation_config(opts: &RunOptions) -> Result<GenerationConfig, CliError> {
    let mut cfg = GenerationConfig::default();
    if let Some(limit) = opts.context_limit {
        cfg.context_word_limit = limit;
    }
    cfg.strategy = match opts.strategy.unwrap_or(StrategyArg::Hybrid) {
        StrategyArg::Hybrid => Strategy::Hybrid,
        StrategyArg::FullLlm => Strategy::FullLlm,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and segments a local policy file.
pub fn process_file(
    path: &Path,
    pipeline: &DocumentPipeline,
    embedder: &dyn SentenceEmbedder,
) -> Result<ProcessedPolicy, CliError> {
    if !path.exists() {
        return Err(CliError::Config(format!("policy {} does not exist", path.display())));
    }
    let doc = RawDocument::from_path(path)?;
    Ok(pipeline.process(&doc, embedder)?)
}

/// Segments as written to `segments.json`: embeddings are left out.
pub fn segments_json(policy: &ProcessedPolicy) -> String {
    let mut p = policy.clone();
    for s in &mut p.segments {
        s.embedding = None;
    }
    to_json(&p)
}

#[derive(Debug, Serialize)]
pub struct CostFile {
    pub strategy: Strategy,
    #[serde(flatten)]
    pub stats: CostStats,
    pub unmatched_retrieval_lines: usize,
}

/// Everything a `generate` run shares across documents.
pub struct Resources {
    pub opts: RunOptions,
    pub schema: LabelSchema,
    pub embedder: Box<dyn SentenceEmbedder>,
    pub llm: Client,
    pub pipeline: DocumentPipeline,
    pub generation: GenerationConfig,
}

pub enum Client {
    Plain(Box<dyn LlmClient>),
    /// Keeps every answer so the run can be replayed.
    Recording(Recorder<Box<dyn LlmClient>>),
}

impl Resources {
    pub fn load(opts: RunOptions, record: bool) -> Result<Self, CliError> {
        opts.check()?;
        let schema = load_schema(&opts)?;
        let embedder = load_embedder(&opts)?;
        let pipeline = document_pipeline(&opts)?;
        let generation = generation_config(&opts)?;
        // Fail early on a bad classifier spec rather than per document.
        if !opts.classifier.as_deref().unwrap_or("").starts_with("external:") {
            load_classifier(&opts, "")?;
        }
        let llm = load_llm(&opts)?;
        let llm = if record {
            Client::Recording(Recorder::new(llm))
        } else {
            Client::Plain(llm)
        };
        Ok(Self {
            opts,
            schema,
            embedder,
            llm,
            pipeline,
            generation,
        })
    }

    fn client(&self) -> &dyn LlmClient {
        match &self.llm {
            Client::Plain(c) => c.as_ref(),
            Client::Recording(r) => r,
        }
    }

    /// Full pipeline for one document; outputs go to `out` only on success.
    pub fn generate_one(&self, path: &Path, app_name: &str, out: &Path) -> Result<CostStats, CliError> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("policy");
        let classifier = load_classifier(&self.opts, stem)?;
        let mut policy = process_file(path, &self.pipeline, self.embedder.as_ref())?;
        classify_all(&classifier, &mut policy.segments)?;
        let generation = generate_label(&policy, app_name, &self.schema, &self.generation, self.client())?;
        let cost = CostFile {
            strategy: generation.strategy,
            stats: generation.cost,
            unmatched_retrieval_lines: generation.unmatched_retrieval_lines,
        };
        write_atomic(&out.join("segments.json"), segments_json(&policy))?;
        write_atomic(&out.join("cost.json"), to_json(&cost))?;
        write_atomic(&out.join("label.json"), generation.label.to_json())?;
        Ok(generation.cost)
    }
}

/// Policy files in a corpus directory, sorted, with their app names.
/// `apps.json` (`{"<file stem>": "<app name>"}`) overrides the default of
/// using the file stem.
pub fn corpus_entries(dir: &Path) -> Result<Vec<(PathBuf, String)>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!("corpus {} is not a directory", dir.display())));
    }
    let names: BTreeMap<String, String> = match std::fs::read_to_string(dir.join("apps.json")) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", dir.join("apps.json").display())))?,
        Err(_) => BTreeMap::new(),
    };
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("html" | "htm" | "xhtml" | "txt")) {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let app = names.get(&stem).cloned().unwrap_or_else(|| stem.clone());
        entries.push((path, app));
    }
    entries.sort();
    Ok(entries)
}
