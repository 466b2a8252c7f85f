//! Sentence-level stress classification from utterance transcriptions.
//!
//! The crate bundles everything the pipeline needs end to end:
//!
//! - [`tensor`]: dense f64 vectors/matrices and a finite-difference gradient checker
//! - [`layers`]: embedding, LSTM/BLSTM, word attention, dropout and the softmax head,
//!   each with analytic backward passes
//! - [`train`]: cross-entropy, Adam, minority oversampling and the two-phase
//!   pretrain/fine-tune schedule
//! - [`data`]: tokenization, vocabulary, padding and corpus file I/O
//! - [`distant`]: hashtag-lexicon tweet filtering and balanced sampling
//! - [`svm`]: mean-of-embeddings sentence vectors and an SMO-trained RBF SVM baseline
//! - [`metrics`]: confusion-matrix accuracy/precision/recall/f-score
//! - [`synth`]: synthetic indicator corpora for tests and demos

pub mod data;
pub mod distant;
pub mod error;
pub mod layers;
pub mod metrics;
pub mod rng;
pub mod serial;
pub mod svm;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
