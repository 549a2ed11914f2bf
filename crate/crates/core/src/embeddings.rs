//! Word-vector loading, sentence embedding and cosine similarity.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("word-vector format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("non-finite vector component")]
    NonFinite,
    #[error("embedding provider unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A dense vector with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, EmbeddingError> {
        if components.iter().all(|c| c.is_finite()) {
            Ok(Self(components))
        } else {
            Err(EmbeddingError::NonFinite)
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = EmbeddingError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

/// dot(a, b) / (|a| |b|), or 0.0 when either vector has zero norm.
pub fn cosine_similarity(a: &Vector, b: &Vector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Lowercased tokens split on non-alphanumeric boundaries.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Anything that can turn a piece of text into a fixed-dimension vector.
///
/// Implementations must be safe to call from several threads at once.
pub trait SentenceEmbedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vector, EmbeddingError>;
}

/// In-memory table of word vectors, immutable after loading.
#[derive(Debug, Clone)]
pub struct WordVectorStore {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl WordVectorStore {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    /// Parses the `<count> <dim>` header followed by one `token v1 .. vdim`
    /// row per word. Tokens are lowercased; when two rows collide after
    /// lowercasing, the first one wins.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let format = |line: usize, reason: String| EmbeddingError::Format { line, reason };

        let (count, dimension) = match lines.next() {
            Some((_, header)) => {
                let header = header?;
                let mut parts = header.split_ascii_whitespace();
                let parse = |p: Option<&str>| p.and_then(|s| s.parse::<usize>().ok());
                match (parse(parts.next()), parse(parts.next()), parts.next()) {
                    (Some(c), Some(d), None) if d > 0 => (c, d),
                    _ => return Err(format(1, format!("bad header {header:?}"))),
                }
            }
            None => return Err(format(1, "missing header".into())),
        };

        let mut entries = HashMap::with_capacity(count);
        let mut rows = 0usize;
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let token = parts.next().expect("non-empty line has a token");
            let mut values = Vec::with_capacity(dimension);
            for p in parts {
                let v: f64 = p
                    .parse()
                    .map_err(|_| format(line_no, format!("unparsable real {p:?}")))?;
                if !v.is_finite() {
                    return Err(format(line_no, format!("non-finite real {p:?}")));
                }
                values.push(v);
            }
            if values.len() != dimension {
                return Err(format(
                    line_no,
                    format!("expected {dimension} components, found {}", values.len()),
                ));
            }
            rows += 1;
            entries.entry(token.to_lowercase()).or_insert(values);
        }
        if rows != count {
            return Err(format(
                count + 2,
                format!("header declares {count} rows, found {rows}"),
            ));
        }
        Ok(Self { dimension, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors; the zero vector when no
    /// token is known.
    pub fn embed_sentence(&self, text: &str) -> Vector {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for token in tokenize(text) {
            if let Some(v) = self.entries.get(&token) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            let n = n as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        Vector(sum)
    }
}

impl SentenceEmbedder for WordVectorStore {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vector, EmbeddingError> {
        Ok(self.embed_sentence(text))
    }
}

/// Signed feature hashing of tokens into a fixed number of buckets.
///
/// Used when no word-vector file is configured: similarity then reflects
/// lexical overlap only.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    dimension: usize,
}

impl HashingEmbedder {
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "hashing dimension must be positive");
        Self { dimension }
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl SentenceEmbedder for HashingEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vector, EmbeddingError> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for token in tokenize(text) {
            let h = fnv1a(token.as_bytes());
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            sum[(h % self.dimension as u64) as usize] += sign;
            n += 1;
        }
        if n > 0 {
            let n = n as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        Ok(Vector(sum))
    }
}
