//! Sentiment classification of Sinhala social-media posts, supervised by
//! the reactions readers left on them.
//!
//! The pipeline runs: [`corpus`] loading and splitting, [`normalize`]
//! text cleaning, [`annotate`] reaction labeling, then either the
//! [`baseline`] token-average models or the recurrent classifiers in
//! [`neural`], scored by [`eval`].

pub mod annotate;
pub mod baseline;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod neural;
pub mod normalize;
pub mod persist;
pub mod records;
pub mod synthetic;

pub use error::{Error, Result};
