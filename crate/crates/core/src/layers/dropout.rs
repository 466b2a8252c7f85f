//! Inverted dropout applied to per-position activations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Samples a multiplier per element: 0.0 with probability `rate`, otherwise
/// 1/(1-rate), so the expected output equals the input. Eval mode returns
/// all-ones. The multipliers are the mask reused by the backward pass.
pub fn dropout_mask(len: usize, rate: f64, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| if rng.random_range(0.0..1.0) < rate { 0.0 } else { keep })
        .collect())
}

pub fn apply_mask(values: &mut [f64], mask: &[f64]) {
    for (v, m) in values.iter_mut().zip(mask) {
        *v *= m;
    }
}
