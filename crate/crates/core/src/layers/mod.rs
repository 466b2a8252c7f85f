//! The neural architecture: embedding lookup, LSTM/BLSTM recurrences,
//! word-level attention pooling, dropout and the dense softmax head, each with
//! a forward pass and an analytic backward pass.

mod attention;
mod dropout;
mod embedding;
mod head;
mod lstm;
mod net;

pub use attention::{Attention, AttentionCache, AttentionGrads};
pub use dropout::{apply_mask, dropout_mask, Mode};
pub use embedding::Embedding;
pub use head::{DenseHead, HeadGrads};
pub use lstm::{LstmCell, LstmGrads, LstmTrace};
pub use net::{Arch, Forward, Grads, Net, NetConfig};

use crate::data::Example;
use crate::error::{Error, Result};

/// A batch of padded token-index sequences with real-token masks and labels.
#[derive(Debug, Clone)]
pub struct SequenceBatch {
    pub ids: Vec<Vec<usize>>,
    pub mask: Vec<Vec<bool>>,
    pub labels: Vec<u8>,
}

impl SequenceBatch {
    pub fn from_examples<'a, I>(examples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Example>,
    {
        let mut ids = Vec::new();
        let mut mask = Vec::new();
        let mut labels = Vec::new();
        for ex in examples {
            if ex.ids.len() != ex.mask.len() {
                return Err(Error::Shape(format!(
                    "example ids/mask length mismatch: {} vs {}",
                    ex.ids.len(),
                    ex.mask.len()
                )));
            }
            if !ex.mask.iter().any(|m| *m) {
                return Err(Error::Mask("example has no unmasked positions".into()));
            }
            ids.push(ex.ids.clone());
            mask.push(ex.mask.clone());
            labels.push(ex.label);
        }
        if ids.is_empty() {
            return Err(Error::Data("empty batch".into()));
        }
        let len = ids[0].len();
        if ids.iter().any(|row| row.len() != len) {
            return Err(Error::Shape("ragged batch: unequal sequence lengths".into()));
        }
        Ok(Self { ids, mask, labels })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.ids[0].len()
    }
}
