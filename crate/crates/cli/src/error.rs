use policy2label::classify::ClassifyError;
use policy2label::document::DocumentError;
use policy2label::eval::EvalError;
use policy2label::generate::GenerateError;
use policy2label::llm::LlmError;
use policy2label::schema::{LabelError, SchemaError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0} of {1} documents failed")]
    Corpus(usize, usize, i32),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 rejected document, 3 model failure, 4 configuration, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Document(e) => match e {
                DocumentError::Rejected(_)
                | DocumentError::EmptyDocument
                | DocumentError::NonPrimaryLanguageDocument(_) => 2,
                DocumentError::InvalidUrl(_)
                | DocumentError::UnsupportedLanguage(_)
                | DocumentError::InvalidThreshold(_)
                | DocumentError::EmbeddingUnavailable(_) => 4,
                DocumentError::Network(_) | DocumentError::Http(_) | DocumentError::Io(_) => 1,
            },
            CliError::Generate(GenerateError::Llm { .. }) => 3,
            CliError::Llm(e) => match e {
                LlmError::Config(_) | LlmError::Io(_) => 4,
                _ => 3,
            },
            CliError::Config(_)
            | CliError::Schema(_)
            | CliError::Label(_)
            | CliError::Classify(_)
            | CliError::Generate(_)
            | CliError::Eval(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Corpus(_, _, code) => *code,
        }
    }
}
