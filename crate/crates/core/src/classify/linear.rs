use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CategoryScores, ClassifierModel, ClassifyError};
use crate::category::DataPracticeCategory;
use crate::embeddings::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub embedding: Vector,
    pub categories: BTreeSet<DataPracticeCategory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on the weights (the bias is not penalised).
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            epochs: 200,
            l2: 1e-4,
            seed: 0x5eed,
        }
    }
}

/// One logistic regressor per category over the embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights {
    dimension: usize,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    dimension: usize,
    threshold: f64,
    weights: BTreeMap<DataPracticeCategory, Vec<f64>>,
    biases: BTreeMap<DataPracticeCategory, f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearWeights {
    pub fn zeros(dimension: usize) -> Self {
        Self {
            dimension,
            weights: vec![vec![0.0; dimension]; DataPracticeCategory::COUNT],
            biases: vec![0.0; DataPracticeCategory::COUNT],
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn weights(&self, category: DataPracticeCategory) -> &[f64] {
        &self.weights[category.index()]
    }

    pub fn bias(&self, category: DataPracticeCategory) -> f64 {
        self.biases[category.index()]
    }

    pub fn scores(&self, x: &Vector) -> Result<CategoryScores, ClassifyError> {
        if x.dim() != self.dimension {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dimension,
                found: x.dim(),
            });
        }
        let scores = DataPracticeCategory::ALL
            .into_iter()
            .map(|c| {
                let z = dot(&self.weights[c.index()], x.as_slice()) + self.biases[c.index()];
                (c, sigmoid(z))
            })
            .collect();
        CategoryScores::new(scores)
    }

    pub fn to_json(&self, threshold: f64) -> String {
        let file = ModelFile {
            dimension: self.dimension,
            threshold,
            weights: DataPracticeCategory::ALL
                .into_iter()
                .map(|c| (c, self.weights[c.index()].clone()))
                .collect(),
            biases: DataPracticeCategory::ALL
                .into_iter()
                .map(|c| (c, self.biases[c.index()]))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(src: &str) -> Result<(Self, f64), ClassifyError> {
        let file: ModelFile = serde_json::from_str(src)?;
        let mut out = Self::zeros(file.dimension);
        for c in DataPracticeCategory::ALL {
            let w = file
                .weights
                .get(&c)
                .ok_or_else(|| ClassifyError::InvalidModel(format!("no weights for {c}")))?;
            if w.len() != file.dimension {
                return Err(ClassifyError::DimensionMismatch {
                    expected: file.dimension,
                    found: w.len(),
                });
            }
            let b = *file
                .biases
                .get(&c)
                .ok_or_else(|| ClassifyError::InvalidModel(format!("no bias for {c}")))?;
            if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(ClassifyError::InvalidModel(format!("non-finite parameter for {c}")));
            }
            out.weights[c.index()] = w.clone();
            out.biases[c.index()] = b;
        }
        Ok((out, file.threshold))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, f64), ClassifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fits twelve independent L2-regularised logistic regressors by full-batch
/// gradient descent. Initial weights are drawn from a seeded generator, so
/// the result depends only on the examples, their order and `hyper`.
pub fn train(
    examples: &[TrainingExample],
    hyper: &Hyperparameters,
) -> Result<ClassifierModel, ClassifyError> {
    let weights = fit(examples, hyper)?;
    ClassifierModel::new(super::Backend::Linear(weights), ClassifierModel::DEFAULT_THRESHOLD)
}

fn fit(examples: &[TrainingExample], hyper: &Hyperparameters) -> Result<LinearWeights, ClassifyError> {
    let first = examples.first().ok_or(ClassifyError::InsufficientData)?;
    let dim = first.embedding.dim();
    if let Some(bad) = examples.iter().find(|e| e.embedding.dim() != dim) {
        return Err(ClassifyError::DimensionMismatch {
            expected: dim,
            found: bad.embedding.dim(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut model = LinearWeights::zeros(dim);
    for w in &mut model.weights {
        for v in w.iter_mut() {
            *v = rng.random_range(-0.01..0.01);
        }
    }

    let n = examples.len() as f64;
    let mut grad = vec![0.0; dim];
    for c in DataPracticeCategory::ALL {
        let k = c.index();
        for _ in 0..hyper.epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for ex in examples {
                let x = ex.embedding.as_slice();
                let y = if ex.categories.contains(&c) { 1.0 } else { 0.0 };
                let err = sigmoid(dot(&model.weights[k], x) + model.biases[k]) - y;
                for (g, xi) in grad.iter_mut().zip(x) {
                    *g += err * xi;
                }
                grad_b += err;
            }
            let w = &mut model.weights[k];
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= hyper.learning_rate * (g / n + hyper.l2 * *wi);
            }
            model.biases[k] -= hyper.learning_rate * grad_b / n;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{Backend, BackendKind};
    use DataPracticeCategory as C;

    fn example(x: Vec<f64>, cats: &[C]) -> TrainingExample {
        TrainingExample {
            embedding: Vector::new(x).unwrap(),
            categories: cats.iter().copied().collect(),
        }
    }

    fn weights(model: &ClassifierModel) -> &LinearWeights {
        match model.backend() {
            Backend::Linear(w) => w,
            _ => unreachable!(),
        }
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        let h = Hyperparameters::default();
        assert!(matches!(train(&[], &h), Err(ClassifyError::InsufficientData)));
        let ex = [example(vec![1.0], &[]), example(vec![1.0, 2.0], &[])];
        assert!(matches!(train(&ex, &h), Err(ClassifyError::DimensionMismatch { .. })));
    }

    #[test]
    fn separable_two_category_set() {
        let mut ex = Vec::new();
        for i in 0..10 {
            let t = i as f64 / 10.0;
            ex.push(example(vec![1.0 + t, t - 0.5], &[C::FirstPartyCollection]));
            ex.push(example(vec![-1.0 - t, 0.5 - t], &[C::ThirdPartySharing]));
        }
        let model = train(&ex, &Hyperparameters::default()).unwrap();
        assert_eq!(model.backend_kind(), BackendKind::Linear);
        for e in &ex {
            let (_, set) = classify_embedding(&model, &e.embedding);
            assert_eq!(set, e.categories);
        }
    }

    fn classify_embedding(model: &ClassifierModel, x: &Vector) -> (CategoryScores, BTreeSet<C>) {
        let s = weights(model).scores(x).unwrap();
        let set = s.above(model.threshold());
        (s, set)
    }

    /// Root of the 1-D regularised gradient for symmetric data, where the
    /// optimal bias is exactly zero; solved by bisection.
    fn one_dimensional_optimum(xs: &[f64], l2: f64) -> f64 {
        let g = |w: f64| {
            xs.iter()
                .map(|&x| (sigmoid(w * x) - if x > 0.0 { 1.0 } else { 0.0 }) * x)
                .sum::<f64>()
                / xs.len() as f64
                + l2 * w
        };
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn one_dimensional_matches_closed_form_root() {
        let xs: Vec<f64> = [-2.0, -1.0, 1.0, 2.0].repeat(5);
        let ex: Vec<_> = xs
            .iter()
            .map(|&x| example(vec![x], if x > 0.0 { &[C::DataSecurity] } else { &[] }))
            .collect();
        let hyper = Hyperparameters {
            epochs: 5000,
            l2: 0.05,
            ..Default::default()
        };
        let model = train(&ex, &hyper).unwrap();
        let w = weights(&model);
        let expected = one_dimensional_optimum(&xs, hyper.l2);
        assert!((w.weights(C::DataSecurity)[0] - expected).abs() < 1e-6);
        assert!(w.bias(C::DataSecurity).abs() < 1e-6);
        // Boundary -b/w sits between the two innermost points.
        assert!((-w.bias(C::DataSecurity) / w.weights(C::DataSecurity)[0]).abs() < 1.0);
        for e in &ex {
            assert_eq!(classify_embedding(&model, &e.embedding).1, e.categories);
        }
    }

    #[test]
    fn contradictory_duplicates_stay_bounded() {
        let ex = [
            example(vec![1.0, 1.0], &[C::DoNotTrack]),
            example(vec![1.0, 1.0], &[]),
            example(vec![1.0, 1.0], &[C::DoNotTrack, C::PolicyChange]),
        ];
        let model = train(&ex, &Hyperparameters::default()).unwrap();
        let (s, _) = classify_embedding(&model, &ex[0].embedding);
        assert!(s.iter().all(|(_, p)| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn deterministic_and_persistable() {
        let ex = [example(vec![0.3, -0.2], &[C::DataRetention]), example(vec![-0.1, 0.4], &[])];
        let a = train(&ex, &Hyperparameters::default()).unwrap();
        let b = train(&ex, &Hyperparameters::default()).unwrap();
        assert_eq!(weights(&a), weights(&b));
        let json = weights(&a).to_json(0.6);
        let (back, threshold) = LinearWeights::from_json(&json).unwrap();
        assert_eq!(threshold, 0.6);
        assert_eq!(&back, weights(&a));
        let other_seed = train(&ex, &Hyperparameters { seed: 1, ..Default::default() }).unwrap();
        assert_ne!(weights(&a), weights(&other_seed));
    }

    #[test]
    fn malformed_model_files() {
        assert!(LinearWeights::from_json(r#"{"dimension":1,"threshold":0.5,"weights":{},"biases":{}}"#).is_err());
        let mut json: serde_json::Value =
            serde_json::from_str(&LinearWeights::zeros(2).to_json(0.5)).unwrap();
        json["weights"]["Data Security"] = serde_json::json!([1.0]);
        assert!(matches!(
            LinearWeights::from_json(&json.to_string()),
            Err(ClassifyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dimension_checked_at_scoring() {
        let w = LinearWeights::zeros(3);
        assert!(w.scores(&Vector::zeros(2)).is_err());
    }
}
