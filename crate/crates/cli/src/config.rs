use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmKind {
    Http,
    MockKeyword,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Hybrid,
    FullLlm,
}

/// Settings shared by the pipeline subcommands. A `--config` JSON file may
/// supply any of them under the same names (snake_case); flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Label schema file, or `google` / `apple` for the bundled ones.
    #[arg(long)]
    pub schema: Option<String>,
    /// Word-vector text file; without it a hashing embedder is used.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// keyword | keyword:RULES | linear:MODEL | external:SCORES
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long, value_enum)]
    pub llm: Option<LlmKind>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub replay_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Similarity threshold for merging sentences into segments.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Category inclusion threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Most policy words per prompt.
    #[arg(long)]
    pub context_limit: Option<usize>,
    #[arg(long)]
    pub exclude_omnibus: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Documents processed in parallel in corpus mode.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl RunOptions {
    /// Fills unset fields from `file`.
    pub fn or(self, file: RunOptions) -> RunOptions {
        RunOptions {
            schema: self.schema.or(file.schema),
            vectors: self.vectors.or(file.vectors),
            classifier: self.classifier.or(file.classifier),
            llm: self.llm.or(file.llm),
            endpoint: self.endpoint.or(file.endpoint),
            model: self.model.or(file.model),
            replay_file: self.replay_file.or(file.replay_file),
            strategy: self.strategy.or(file.strategy),
            tau: self.tau.or(file.tau),
            threshold: self.threshold.or(file.threshold),
            context_limit: self.context_limit.or(file.context_limit),
            exclude_omnibus: self.exclude_omnibus || file.exclude_omnibus,
            out: self.out.or(file.out),
            jobs: self.jobs.or(file.jobs),
        }
    }

    pub fn load_file(path: &Path) -> Result<RunOptions, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Rejects references to files that do not exist and out-of-range numbers.
    pub fn check(&self) -> Result<(), CliError> {
        let must_exist = |p: &Path, what: &str| {
            if p.exists() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} {} does not exist", p.display())))
            }
        };
        if let Some(v) = &self.vectors {
            must_exist(v, "vectors file")?;
        }
        if let Some(r) = &self.replay_file {
            must_exist(r, "replay file")?;
        }
        if let Some(t) = self.tau {
            if !(-1.0..=1.0).contains(&t) {
                return Err(CliError::Config(format!("--tau {t} must lie in [-1, 1]")));
            }
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!("--threshold {t} must lie strictly between 0 and 1")));
            }
        }
        if self.context_limit == Some(0) {
            return Err(CliError::Config("--context-limit must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        Ok(())
    }
}
