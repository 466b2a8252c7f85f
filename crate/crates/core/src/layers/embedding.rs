//! Trainable word-embedding table. Looking up row `j` is mathematically the
//! one-hot product with the table, done directly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::PAD;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// |V| x k. Row 0 is reserved for PAD and stays all-zero.
    pub table: Matrix,
}

impl Embedding {
    pub fn init(vocab_size: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut table = Matrix::zeros(vocab_size, dim);
        // Row 0 (PAD) stays zero; everything else uniform(-0.05, 0.05).
        for r in 1..vocab_size {
            for v in table.row_mut(r) {
                *v = rng.random_range(-0.05..0.05);
            }
        }
        Self { table }
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows
    }

    pub fn dim(&self) -> usize {
        self.table.cols
    }

    /// Embedding vectors for one sequence of token indices.
    pub fn forward(&self, ids: &[usize]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            if id >= self.table.rows {
                return Err(Error::Vocab(format!(
                    "token index {id} out of range for vocabulary of {}",
                    self.table.rows
                )));
            }
            out.push(self.table.row(id).to_vec());
        }
        Ok(out)
    }

    /// Scatter per-position input gradients back onto table rows. The PAD row
    /// is frozen: its gradient is forced to zero no matter what arrives.
    pub fn backward(&self, ids: &[usize], d_inputs: &[Vec<f64>], grad: &mut Matrix) {
        for (&id, dx) in ids.iter().zip(d_inputs) {
            if id == PAD || dx.is_empty() {
                continue;
            }
            for (g, d) in grad.row_mut(id).iter_mut().zip(dx) {
                *g += d;
            }
        }
    }
}
