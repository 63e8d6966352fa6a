//! Recurrent sentiment classifiers trained by backpropagation through time.
//!
//! All arithmetic is in `f64`. A [`Classifier`] looks up token embeddings,
//! runs them through one to three recurrent layers (optionally
//! bidirectional), reduces the top layer to a readout vector and applies a
//! sigmoid head. Only the unpadded prefix of each sequence is processed,
//! so padding never changes a prediction.

mod cell;
mod gradcheck;
mod model;
mod network;
mod optim;
mod spec;
mod tensor;
mod train;

pub use cell::{cell_step, CellState, CellWeights};
pub use gradcheck::{
    gradient_check, random_instance, relative_error, Batch, CheckScope, GradCheckReport,
    DEFAULT_EPS, MAX_HIDDEN, MAX_SEQ_LEN,
};
pub use model::{
    balanced_class_weights, bce, loss, weighted_loss, Classifier, EmbeddingSetup, Example,
    Gradients, Prediction, StepOptions, PROB_EPS,
};
pub use network::Network;
pub use optim::Adam;
pub use spec::{all_specs, CellKind, ModelSpec, Readout, DEFAULT_HIDDEN, MAX_LAYERS};
pub use tensor::Tensor;
pub use train::{train, EarlyStopping, EpochRecord, History, TrainConfig, TrainedModel};
