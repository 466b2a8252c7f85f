//! Dense softmax output head mapping a pooled vector to the two class
//! probabilities (index 0 unstressed, index 1 stressed).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{softmax_slice, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseHead {
    /// 2 x d_v.
    pub w: Matrix,
    pub b: Vector,
}

#[derive(Debug, Clone)]
pub struct HeadGrads {
    pub w: Matrix,
    pub b: Vector,
}

impl HeadGrads {
    pub fn zeros_like(head: &DenseHead) -> Self {
        Self {
            w: Matrix::zeros(head.w.rows, head.w.cols),
            b: Vector::zeros(head.b.len()),
        }
    }
}

impl DenseHead {
    pub fn init(input_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut w = Matrix::zeros(2, input_dim);
        for v in &mut w.data {
            *v = rng.random_range(-0.08..0.08);
        }
        Self {
            w,
            b: Vector::zeros(2),
        }
    }

    pub fn logits(&self, v: &[f64]) -> Result<[f64; 2]> {
        if v.len() != self.w.cols {
            return Err(Error::Shape(format!(
                "head: input width {} does not match {}",
                v.len(),
                self.w.cols
            )));
        }
        let mut out = [self.b.data[0], self.b.data[1]];
        for (c, x) in self.w.row(0).iter().zip(v) {
            out[0] += c * x;
        }
        for (c, x) in self.w.row(1).iter().zip(v) {
            out[1] += c * x;
        }
        Ok(out)
    }

    pub fn probs(&self, v: &[f64]) -> Result<[f64; 2]> {
        let logits = self.logits(v)?;
        let p = softmax_slice(&logits)?;
        Ok([p[0], p[1]])
    }

    /// Class with the larger probability; an exact tie resolves to 0.
    pub fn predict_from_probs(probs: &[f64; 2]) -> usize {
        usize::from(probs[1] > probs[0])
    }

    /// Accumulates parameter gradients for one example and returns the
    /// gradient on the pooled input.
    pub fn backward(&self, v: &[f64], d_logits: &[f64; 2], grads: &mut HeadGrads) -> Vec<f64> {
        grads.w.add_outer(d_logits, v);
        grads.b.data[0] += d_logits[0];
        grads.b.data[1] += d_logits[1];
        let mut dv = vec![0.0; v.len()];
        self.w.matvec_t_acc(d_logits, &mut dv);
        dv
    }
}
