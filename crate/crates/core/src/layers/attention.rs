//! Word-level attention pooling. Each hidden state is projected through a
//! tanh layer, scored against a trainable context vector, and the scores are
//! softmax-normalized over unmasked positions only. Masked weights are
//! reported as exactly 0.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{softmax_slice, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Attention {
    /// Projection, d_a x d_h.
    pub w: Matrix,
    /// Projection bias, d_a.
    pub b: Vector,
    /// Context vector scored against each projected state, d_a.
    pub u: Vector,
}

/// Forward cache for one sequence.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    /// Projected tanh vectors; empty at masked positions.
    projected: Vec<Vec<f64>>,
    /// Normalized weights; 0.0 at masked positions.
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AttentionGrads {
    pub w: Matrix,
    pub b: Vector,
    pub u: Vector,
}

impl AttentionGrads {
    pub fn zeros_like(att: &Attention) -> Self {
        Self {
            w: Matrix::zeros(att.w.rows, att.w.cols),
            b: Vector::zeros(att.b.len()),
            u: Vector::zeros(att.u.len()),
        }
    }
}

impl Attention {
    pub fn init(hidden_dim: usize, proj_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut w = Matrix::zeros(proj_dim, hidden_dim);
        for v in &mut w.data {
            *v = rng.random_range(-0.08..0.08);
        }
        let b = Vector::zeros(proj_dim);
        let mut u = Vector::zeros(proj_dim);
        for v in &mut u.data {
            *v = rng.random_range(-0.08..0.08);
        }
        Self { w, b, u }
    }

    /// Pools `hiddens` into a context vector. Returns the vector and the
    /// per-position cache holding the weights.
    pub fn forward(&self, hiddens: &[Vec<f64>], mask: &[bool]) -> Result<(Vec<f64>, AttentionCache)> {
        if hiddens.len() != mask.len() {
            return Err(Error::Shape(format!(
                "attention: {} hiddens vs {} mask entries",
                hiddens.len(),
                mask.len()
            )));
        }
        let unmasked: Vec<usize> = (0..mask.len()).filter(|t| mask[*t]).collect();
        if unmasked.is_empty() {
            return Err(Error::Mask("attention over fully masked sequence".into()));
        }
        let d_h = self.w.cols;
        let d_a = self.w.rows;
        let mut projected = vec![Vec::new(); hiddens.len()];
        let mut scores = Vec::with_capacity(unmasked.len());
        let mut proj = vec![0.0; d_a];
        for &t in &unmasked {
            if hiddens[t].len() != d_h {
                return Err(Error::Shape(format!(
                    "attention: hidden width {} does not match projection input {}",
                    hiddens[t].len(),
                    d_h
                )));
            }
            self.w.matvec_into(&hiddens[t], &mut proj);
            let ut: Vec<f64> = proj
                .iter()
                .zip(&self.b.data)
                .map(|(p, b)| (p + b).tanh())
                .collect();
            scores.push(ut.iter().zip(&self.u.data).map(|(a, b)| a * b).sum());
            projected[t] = ut;
        }
        let weights = softmax_slice(&scores)?;
        let mut alphas = vec![0.0; hiddens.len()];
        for (w, &t) in weights.iter().zip(&unmasked) {
            alphas[t] = *w;
        }
        let mut context = vec![0.0; d_h];
        for &t in &unmasked {
            for (c, h) in context.iter_mut().zip(&hiddens[t]) {
                *c += alphas[t] * h;
            }
        }
        Ok((context, AttentionCache { projected, alphas }))
    }

    /// Backward pass for one sequence: `d_context` is the loss gradient on
    /// the pooled vector; per-position gradients are accumulated into
    /// `d_hiddens` and parameter gradients into `grads`.
    pub fn backward(
        &self,
        hiddens: &[Vec<f64>],
        cache: &AttentionCache,
        d_context: &[f64],
        grads: &mut AttentionGrads,
        d_hiddens: &mut [Vec<f64>],
    ) {
        let unmasked: Vec<usize> = (0..cache.alphas.len())
            .filter(|t| !cache.projected[*t].is_empty())
            .collect();
        // v = sum alpha_t h_t: direct path plus the score path through alpha.
        let mut d_alpha = vec![0.0; unmasked.len()];
        for (slot, &t) in unmasked.iter().enumerate() {
            d_alpha[slot] = d_context.iter().zip(&hiddens[t]).map(|(a, b)| a * b).sum();
            for (dh, dc) in d_hiddens[t].iter_mut().zip(d_context) {
                *dh += cache.alphas[t] * dc;
            }
        }
        // Softmax jacobian: ds_t = alpha_t (d_alpha_t - sum_j alpha_j d_alpha_j).
        let weighted: f64 = unmasked
            .iter()
            .enumerate()
            .map(|(slot, &t)| cache.alphas[t] * d_alpha[slot])
            .sum();
        for (slot, &t) in unmasked.iter().enumerate() {
            let ds = cache.alphas[t] * (d_alpha[slot] - weighted);
            let ut = &cache.projected[t];
            let mut dz = vec![0.0; ut.len()];
            for j in 0..ut.len() {
                grads.u.data[j] += ds * ut[j];
                // Score feeds u_t = tanh(z); chain through the tanh.
                dz[j] = ds * self.u.data[j] * (1.0 - ut[j] * ut[j]);
            }
            grads.w.add_outer(&dz, &hiddens[t]);
            for (b, d) in grads.b.data.iter_mut().zip(&dz) {
                *b += d;
            }
            self.w.matvec_t_acc(&dz, &mut d_hiddens[t]);
        }
    }
}
