//! Cross-entropy loss, Adam, the epoch loop with early stopping, minority
//! oversampling, and the two-phase schedule: balanced tweet pretraining
//! iterations followed by fine-tuning on the target utterances.

use std::fmt::Write as _;

use log::warn;

use crate::data::{Example, Labeled};
use crate::distant::sample_balanced;
use crate::error::{Error, Result};
use crate::layers::{Net, SequenceBatch};
use crate::rng;
use crate::tensor::log_sum_exp;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub pretrain_iterations: usize,
    pub tweets_per_class: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    /// Early-stop patience in epochs; 0 disables early stopping.
    pub patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            pretrain_iterations: 2,
            tweets_per_class: 49_000,
            pretrain_epochs: 10,
            finetune_epochs: 30,
            patience: 5,
            val_fraction: 0.1,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config(format!(
                "adam betas ({}, {}) must lie in [0, 1)",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "adam epsilon {} must be positive",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config(format!(
                "validation fraction {} outside [0, 1)",
                self.val_fraction
            )));
        }
        if self.tweets_per_class == 0 {
            return Err(Error::Config("tweets per class must be at least 1".into()));
        }
        Ok(())
    }
}

/// Loss for one example from the head logits: -log softmax(logits)[label],
/// evaluated through log-sum-exp. Also returns the logit gradient
/// softmax(logits) - onehot(label).
pub fn cross_entropy(logits: &[f64; 2], label: u8) -> (f64, [f64; 2]) {
    assert!(label < 2, "label {label} out of range");
    let lse = log_sum_exp(logits);
    let loss = lse - logits[label as usize];
    let mut d = [(logits[0] - lse).exp(), (logits[1] - lse).exp()];
    d[label as usize] -= 1.0;
    (loss, d)
}

/// Mean loss over a batch plus per-example logit gradients already scaled
/// by 1/n for the mean reduction.
pub fn batch_loss(logits: &[[f64; 2]], labels: &[u8]) -> (f64, Vec<[f64; 2]>) {
    let n = logits.len() as f64;
    let mut total = 0.0;
    let mut d = Vec::with_capacity(logits.len());
    for (lg, &label) in logits.iter().zip(labels) {
        let (loss, mut dl) = cross_entropy(lg, label);
        total += loss;
        dl[0] /= n;
        dl[1] /= n;
        d.push(dl);
    }
    (total / n, d)
}

/// First and second moment slots per parameter tensor plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    names: Vec<&'static str>,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(net: &Net) -> Self {
        let names = net.param_names();
        let m = names.iter().map(|n| vec![0.0; net.param(n).len()]).collect();
        let v = names.iter().map(|n| vec![0.0; net.param(n).len()]).collect();
        Self {
            names,
            m,
            v,
            t: 0,
        }
    }
}

/// Bias-corrected Adam update on one tensor: p -= lr * m_hat / (sqrt(v_hat) + eps).
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    config: &TrainConfig,
) {
    let bc1 = 1.0 - config.beta1.powi(t as i32);
    let bc2 = 1.0 - config.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

/// One optimizer step over every tensor. All gradients are checked for
/// finiteness before anything is mutated, so a rejected step leaves both the
/// model and the state untouched.
pub fn adam_step(
    net: &mut Net,
    grads: &crate::layers::Grads,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if state.names != net.param_names() {
        return Err(Error::Shape(
            "optimizer state was built for a different parameter set".into(),
        ));
    }
    for name in &state.names {
        let g = grads.param(name);
        if g.len() != net.param(name).len() {
            return Err(Error::Shape(format!(
                "gradient for {name} has {} entries, parameter has {}",
                g.len(),
                net.param(name).len()
            )));
        }
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient in {name}; step aborted"
            )));
        }
    }
    state.t += 1;
    for (i, name) in state.names.iter().enumerate() {
        let g = grads.param(name);
        adam_update(
            net.param_mut(name),
            g,
            &mut state.m[i],
            &mut state.v[i],
            state.t,
            config,
        );
    }
    Ok(())
}

/// Duplicates minority-class items uniformly with replacement until both
/// classes are equally sized, then shuffles. Every original item survives.
pub fn oversample<T: Labeled + Clone>(items: &[T], seed: u64) -> Result<Vec<T>> {
    let (zeros, ones): (Vec<&T>, Vec<&T>) = items.iter().partition(|x| x.label() == 0);
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::Data(format!(
            "oversample needs both classes, got {} unstressed / {} stressed",
            zeros.len(),
            ones.len()
        )));
    }
    let mut r = rng::stream(seed, "oversample", 0);
    let (majority, minority) = if zeros.len() >= ones.len() {
        (&zeros, &ones)
    } else {
        (&ones, &zeros)
    };
    let mut out: Vec<T> = items.to_vec();
    for _ in 0..majority.len() - minority.len() {
        let pick = rand::Rng::random_range(&mut r, 0..minority.len());
        out.push(minority[pick].clone());
    }
    rand::seq::SliceRandom::shuffle(out.as_mut_slice(), &mut r);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pretrain { iteration: usize },
    Finetune,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Pretrain { .. } => "pretrain",
            Phase::Finetune => "finetune",
        }
    }

    pub fn iteration(self) -> usize {
        match self {
            Phase::Pretrain { iteration } => iteration,
            Phase::Finetune => 0,
        }
    }

    fn tag(self) -> String {
        match self {
            Phase::Pretrain { iteration } => format!("pretrain{iteration}"),
            Phase::Finetune => "finetune".to_string(),
        }
    }

    fn epochs(self, config: &TrainConfig) -> usize {
        match self {
            Phase::Pretrain { .. } => config.pretrain_epochs,
            Phase::Finetune => config.finetune_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub phase: &'static str,
    pub iteration: usize,
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainLog {
    /// One tab-separated line per epoch:
    /// phase, iteration, epoch, mean-loss, train-acc, val-acc.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            let val = match e.val_acc {
                Some(v) => format!("{v:.6}"),
                None => "-".to_string(),
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
                e.phase, e.iteration, e.epoch, e.mean_loss, e.train_acc, val
            )
            .expect("string write");
        }
        out
    }
}

/// Predicted labels for a set of examples, evaluated in batches.
pub fn predict(net: &Net, examples: &[Example], batch_size: usize) -> Result<Vec<usize>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(examples.len());
    for chunk in examples.chunks(batch_size) {
        let batch = SequenceBatch::from_examples(chunk)?;
        out.extend(net.forward_eval(&batch)?.predictions());
    }
    Ok(out)
}

/// Classification accuracy on a set of examples.
pub fn accuracy(net: &Net, examples: &[Example], batch_size: usize) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Data("cannot score an empty example set".into()));
    }
    let refs: Vec<&Example> = examples.iter().collect();
    Ok(eval_in_chunks(net, &refs, batch_size)?.0)
}

fn eval_in_chunks(
    net: &Net,
    examples: &[&Example],
    batch_size: usize,
) -> Result<(f64, f64)> {
    let mut correct = 0usize;
    let mut total_loss = 0.0;
    for chunk in examples.chunks(batch_size) {
        let batch = SequenceBatch::from_examples(chunk.iter().copied())?;
        let fwd = net.forward_eval(&batch)?;
        for (e, pred) in fwd.predictions().iter().enumerate() {
            if *pred as u8 == batch.labels[e] {
                correct += 1;
            }
        }
        for (lg, &label) in fwd.logits.iter().zip(&batch.labels) {
            total_loss += cross_entropy(lg, label).0;
        }
    }
    let n = examples.len() as f64;
    Ok((correct as f64 / n, total_loss / n))
}

/// Runs one training phase: seeded per-epoch shuffles, mini-batches with the
/// final partial batch kept, dropout in train mode, Adam updates, and early
/// stopping on validation loss. Appends one log entry per epoch.
pub fn train_phase(
    net: &mut Net,
    examples: &[Example],
    config: &TrainConfig,
    phase: Phase,
    log: &mut TrainLog,
) -> Result<()> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::Data(format!(
            "{} phase received no examples",
            phase.name()
        )));
    }
    let tag = phase.tag();
    // Held-out slice for early stopping, drawn once per phase.
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut split_rng = rng::stream(config.seed, &format!("{tag}/val-split"), 0);
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut split_rng);
    let val_len = (examples.len() as f64 * config.val_fraction).floor() as usize;
    let val_idx: Vec<usize> = order[..val_len].to_vec();
    let mut train_idx: Vec<usize> = order[val_len..].to_vec();
    if train_idx.is_empty() {
        return Err(Error::Data(format!(
            "{} phase has no training examples after the validation split",
            phase.name()
        )));
    }
    let val_refs: Vec<&Example> = val_idx.iter().map(|&i| &examples[i]).collect();
    let train_refs: Vec<&Example> = train_idx.iter().map(|&i| &examples[i]).collect();

    let mut state = AdamState::new(net);
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;
    for epoch in 0..phase.epochs(config) {
        let mut shuffle_rng = rng::stream(config.seed, &format!("{tag}/shuffle"), epoch as u64);
        rand::seq::SliceRandom::shuffle(train_idx.as_mut_slice(), &mut shuffle_rng);
        let mut dropout_rng = rng::stream(config.seed, &format!("{tag}/dropout"), epoch as u64);
        let mut loss_sum = 0.0;
        for chunk in train_idx.chunks(config.batch_size) {
            let batch = SequenceBatch::from_examples(chunk.iter().map(|&i| &examples[i]))?;
            let fwd = net.forward_train(&batch, &mut dropout_rng)?;
            let (mean_loss, d_logits) = batch_loss(&fwd.logits, &batch.labels);
            loss_sum += mean_loss * chunk.len() as f64;
            let grads = net.backward(&batch, &fwd, &d_logits)?;
            let inf = grads.inf_norm(&net.param_names());
            if inf > 100.0 {
                warn!("{} epoch {epoch}: gradient inf-norm {inf:.2} exceeds 100", phase.name());
            }
            adam_step(net, &grads, &mut state, config)?;
        }
        let mean_loss = loss_sum / train_idx.len() as f64;
        let (train_acc, _) = eval_in_chunks(net, &train_refs, config.batch_size)?;
        let val = if val_refs.is_empty() {
            None
        } else {
            Some(eval_in_chunks(net, &val_refs, config.batch_size)?)
        };
        log.epochs.push(EpochLog {
            phase: phase.name(),
            iteration: phase.iteration(),
            epoch,
            mean_loss,
            train_acc,
            val_acc: val.map(|(acc, _)| acc),
        });
        if let Some((_, val_loss)) = val {
            if val_loss < best_val {
                best_val = val_loss;
                stale = 0;
            } else {
                stale += 1;
                if config.patience > 0 && stale >= config.patience {
                    break;
                }
            }
        }
    }
    Ok(())
}

/// The full schedule: for each pretraining iteration, draw a fresh balanced
/// tweet sample and run one phase; then fine-tune on the oversampled target
/// examples. With 0 iterations this reduces to the fine-tuning phase alone.
pub fn two_phase_train(
    net: &mut Net,
    twitter: &[Example],
    target_train: &[Example],
    config: &TrainConfig,
) -> Result<TrainLog> {
    config.validate()?;
    let mut log = TrainLog::default();
    for iteration in 0..config.pretrain_iterations {
        let sample = sample_balanced(
            twitter,
            config.tweets_per_class,
            rng::derive_seed(config.seed, "tweet-sample").wrapping_add(iteration as u64),
        )?;
        train_phase(net, &sample, config, Phase::Pretrain { iteration }, &mut log)?;
    }
    let balanced = oversample(target_train, rng::derive_seed(config.seed, "finetune-balance"))?;
    train_phase(net, &balanced, config, Phase::Finetune, &mut log)?;
    Ok(log)
}
