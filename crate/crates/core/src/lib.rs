//! Classical text-classification pipelines for country-level dialect
//! identification.
//!
//! The crate covers the full non-neural route from corpus files to
//! shared-task scores: TSV corpus and label-registry loading, word and
//! character TF-IDF features, a zoo of base learners (multinomial and
//! Bernoulli Naive Bayes, logistic regression, a hinge-loss linear
//! classifier, a one-hidden-layer feed-forward net, KNN, a dummy
//! baseline, and per-class character n-gram language models), shuffle
//! augmentation, soft/hard voting and stacking ensembles, lexicon-rule
//! post-processing, and macro/micro-F1 evaluation with confusion
//! matrices. Probability matrices produced by external systems (for
//! example softmax exports of neural classifiers) enter through a CSV
//! format and can be ensembled like any in-toolkit model.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the file
//! formats and the CLI work in `f64` through the aliases below.

pub mod augment;
pub mod classifiers;
pub mod container;
pub mod corpus;
pub mod embedding;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod probability;
pub mod scalar;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` sparse feature vector, as used by the CLI.
pub type SparseVec = features::SparseVector<f64>;
/// Concrete `f64` probability matrix, as used by the file formats.
pub type ProbMatrix = probability::ProbabilityMatrix<f64>;
/// Concrete `f64` predictions.
pub type Preds = ensemble::Predictions<f64>;
/// Concrete `f64` evaluation report.
pub type EvalReport = eval::EvaluationReport<f64>;
/// Concrete `f64` embedding table.
pub type Embeddings = embedding::EmbeddingTable<f64>;
/// Concrete `f64` pipeline configuration.
pub type Config = pipeline::PipelineConfig<f64>;
