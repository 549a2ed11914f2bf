//! Privacy nutrition label generation from privacy-policy documents.
//!
//! The pipeline has three stages: [`document`] turns a policy into
//! sentence segments, [`classify`] tags each segment with data-practice
//! categories, and [`generate`] asks a language model one yes/no question
//! per label attribute over the relevant segments. [`eval`] scores
//! generated labels and finds under-claimed practices in declared ones.

pub mod category;
pub mod classify;
pub mod document;
pub mod embeddings;
pub mod eval;
pub mod generate;
pub mod llm;
pub mod schema;

pub use category::DataPracticeCategory;
