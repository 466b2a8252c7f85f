//! Full classifier: embedding lookup, one or two LSTM sweeps, dropout on the
//! recurrent outputs, attention or last-state pooling, dense softmax head.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::{
    dropout, Attention, AttentionCache, AttentionGrads, DenseHead, Embedding, HeadGrads, LstmCell,
    LstmGrads, LstmTrace, SequenceBatch,
};
use crate::layers::dropout::Mode;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Lstm,
    Blstm,
}

impl Arch {
    pub fn as_str(self) -> &'static str {
        match self {
            Arch::Lstm => "lstm",
            Arch::Blstm => "blstm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lstm" => Ok(Arch::Lstm),
            "blstm" => Ok(Arch::Blstm),
            other => Err(Error::Config(format!(
                "unknown architecture {other:?}, expected lstm or blstm"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub arch: Arch,
    pub attention: bool,
    pub dropout: f64,
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::Config(format!(
                "vocab size {} leaves no room for PAD and UNK",
                self.vocab_size
            )));
        }
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::Config("embed dim and hidden size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Net {
    pub config: NetConfig,
    pub embedding: Embedding,
    pub fwd: LstmCell,
    pub bwd: Option<LstmCell>,
    pub attention: Option<Attention>,
    pub head: DenseHead,
}

struct ExampleCache {
    embedded: Vec<Vec<f64>>,
    fwd_trace: LstmTrace,
    bwd_trace: Option<LstmTrace>,
    /// Per-position recurrent outputs after dropout, width h or 2h.
    hiddens: Vec<Vec<f64>>,
    drop_masks: Vec<Vec<f64>>,
    att_cache: Option<AttentionCache>,
    pooled: Vec<f64>,
}

/// Forward results plus the caches the backward pass needs.
pub struct Forward {
    pub logits: Vec<[f64; 2]>,
    pub probs: Vec<[f64; 2]>,
    caches: Vec<ExampleCache>,
}

impl Forward {
    /// Attention weights for one example; None when attention is off.
    pub fn alphas(&self, example: usize) -> Option<&[f64]> {
        self.caches[example]
            .att_cache
            .as_ref()
            .map(|c| c.alphas.as_slice())
    }

    pub fn predictions(&self) -> Vec<usize> {
        self.probs.iter().map(DenseHead::predict_from_probs).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Grads {
    pub embedding: Matrix,
    pub fwd: LstmGrads,
    pub bwd: Option<LstmGrads>,
    pub attention: Option<AttentionGrads>,
    pub head: HeadGrads,
}

impl Net {
    pub fn init(config: NetConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let embedding = Embedding::init(config.vocab_size, config.embed_dim, rng);
        let fwd = LstmCell::init(config.embed_dim, config.hidden, rng);
        let bwd = match config.arch {
            Arch::Lstm => None,
            Arch::Blstm => Some(LstmCell::init(config.embed_dim, config.hidden, rng)),
        };
        let width = match config.arch {
            Arch::Lstm => config.hidden,
            Arch::Blstm => 2 * config.hidden,
        };
        let attention = if config.attention {
            Some(Attention::init(width, width, rng))
        } else {
            None
        };
        let head = DenseHead::init(width, rng);
        Ok(Self {
            config,
            embedding,
            fwd,
            bwd,
            attention,
            head,
        })
    }

    /// Recurrent output width: h for lstm, 2h for blstm.
    pub fn hidden_width(&self) -> usize {
        match self.config.arch {
            Arch::Lstm => self.config.hidden,
            Arch::Blstm => 2 * self.config.hidden,
        }
    }

    pub fn forward_train(&self, batch: &SequenceBatch, rng: &mut ChaCha8Rng) -> Result<Forward> {
        self.run(batch, Mode::Train, rng)
    }

    pub fn forward_eval(&self, batch: &SequenceBatch) -> Result<Forward> {
        // Eval mode never draws from the stream.
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        self.run(batch, Mode::Eval, &mut unused)
    }

    fn run(&self, batch: &SequenceBatch, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Forward> {
        let width = self.hidden_width();
        let h = self.config.hidden;
        let mut logits = Vec::with_capacity(batch.len());
        let mut probs = Vec::with_capacity(batch.len());
        let mut caches = Vec::with_capacity(batch.len());
        for e in 0..batch.len() {
            let ids = &batch.ids[e];
            let mask = &batch.mask[e];
            let embedded = self.embedding.forward(ids)?;
            let fwd_trace = self.fwd.forward(&embedded, mask, false)?;
            let bwd_trace = match &self.bwd {
                Some(cell) => Some(cell.forward(&embedded, mask, true)?),
                None => None,
            };
            let seq_len = ids.len();
            let mut hiddens = vec![vec![0.0; width]; seq_len];
            for t in 0..seq_len {
                hiddens[t][..h].copy_from_slice(fwd_trace.hidden_at(t));
                if let Some(trace) = &bwd_trace {
                    hiddens[t][h..].copy_from_slice(trace.hidden_at(t));
                }
            }
            let mut drop_masks = Vec::with_capacity(seq_len);
            for hidden in &mut hiddens {
                let dm = dropout::dropout_mask(width, self.config.dropout, mode, rng)?;
                dropout::apply_mask(hidden, &dm);
                drop_masks.push(dm);
            }
            let (pooled, att_cache) = match &self.attention {
                Some(att) => {
                    let (v, cache) = att.forward(&hiddens, mask)?;
                    (v, Some(cache))
                }
                None => (self.last_state_pool(&hiddens), None),
            };
            let lg = self.head.logits(&pooled)?;
            let p = self.head.probs(&pooled)?;
            logits.push(lg);
            probs.push(p);
            caches.push(ExampleCache {
                embedded,
                fwd_trace,
                bwd_trace,
                hiddens,
                drop_masks,
                att_cache,
                pooled,
            });
        }
        Ok(Forward {
            logits,
            probs,
            caches,
        })
    }

    /// Pooling without attention: the forward sweep's final state, plus the
    /// backward sweep's state at position 0 for blstm. Mask pass-through
    /// makes both equal the states at the last and first unmasked tokens.
    fn last_state_pool(&self, hiddens: &[Vec<f64>]) -> Vec<f64> {
        let h = self.config.hidden;
        let last = hiddens.len() - 1;
        match self.config.arch {
            Arch::Lstm => hiddens[last].clone(),
            Arch::Blstm => {
                let mut v = Vec::with_capacity(2 * h);
                v.extend_from_slice(&hiddens[last][..h]);
                v.extend_from_slice(&hiddens[0][h..]);
                v
            }
        }
    }

    /// Accumulates gradients over the batch from per-example gradients on the
    /// head logits. The PAD embedding row never receives gradient.
    pub fn backward(
        &self,
        batch: &SequenceBatch,
        forward: &Forward,
        d_logits: &[[f64; 2]],
    ) -> Result<Grads> {
        if forward.caches.len() != batch.len() || d_logits.len() != batch.len() {
            return Err(Error::Shape(format!(
                "backward: batch {} vs cache {} vs gradient {}",
                batch.len(),
                forward.caches.len(),
                d_logits.len()
            )));
        }
        let h = self.config.hidden;
        let width = self.hidden_width();
        let mut grads = Grads {
            embedding: Matrix::zeros(self.config.vocab_size, self.config.embed_dim),
            fwd: LstmGrads::zeros_like(&self.fwd),
            bwd: self.bwd.as_ref().map(LstmGrads::zeros_like),
            attention: self.attention.as_ref().map(AttentionGrads::zeros_like),
            head: HeadGrads::zeros_like(&self.head),
        };
        for e in 0..batch.len() {
            let cache = &forward.caches[e];
            let seq_len = cache.hiddens.len();
            let dv = self.head.backward(&cache.pooled, &d_logits[e], &mut grads.head);
            let mut d_hiddens = vec![vec![0.0; width]; seq_len];
            match (&self.attention, &cache.att_cache) {
                (Some(att), Some(att_cache)) => {
                    let att_grads = grads.attention.as_mut().expect("attention grads");
                    att.backward(&cache.hiddens, att_cache, &dv, att_grads, &mut d_hiddens);
                }
                _ => match self.config.arch {
                    Arch::Lstm => {
                        for (d, g) in d_hiddens[seq_len - 1].iter_mut().zip(&dv) {
                            *d += g;
                        }
                    }
                    Arch::Blstm => {
                        for j in 0..h {
                            d_hiddens[seq_len - 1][j] += dv[j];
                            d_hiddens[0][h + j] += dv[h + j];
                        }
                    }
                },
            }
            for (dh, dm) in d_hiddens.iter_mut().zip(&cache.drop_masks) {
                dropout::apply_mask(dh, dm);
            }
            let mut d_embedded = vec![vec![0.0; self.config.embed_dim]; seq_len];
            let d_fwd: Vec<Vec<f64>> = d_hiddens.iter().map(|d| d[..h].to_vec()).collect();
            self.fwd.backward(
                &cache.embedded,
                &cache.fwd_trace,
                &d_fwd,
                &mut grads.fwd,
                &mut d_embedded,
            );
            if let (Some(cell), Some(trace)) = (&self.bwd, &cache.bwd_trace) {
                let d_bwd: Vec<Vec<f64>> = d_hiddens.iter().map(|d| d[h..].to_vec()).collect();
                cell.backward(
                    &cache.embedded,
                    trace,
                    &d_bwd,
                    grads.bwd.as_mut().expect("bwd grads"),
                    &mut d_embedded,
                );
            }
            self.embedding
                .backward(&batch.ids[e], &d_embedded, &mut grads.embedding);
        }
        Ok(grads)
    }

    /// Names of every parameter tensor, in the fixed registry order shared
    /// with [`Grads`] and the optimizer.
    pub fn param_names(&self) -> Vec<&'static str> {
        let mut names = vec!["embedding", "fwd.w_ih", "fwd.w_hh", "fwd.bias"];
        if self.bwd.is_some() {
            names.extend(["bwd.w_ih", "bwd.w_hh", "bwd.bias"]);
        }
        if self.attention.is_some() {
            names.extend(["att.w", "att.b", "att.u"]);
        }
        names.extend(["head.w", "head.b"]);
        names
    }

    pub fn param(&self, name: &str) -> &[f64] {
        match name {
            "embedding" => &self.embedding.table.data,
            "fwd.w_ih" => &self.fwd.w_ih.data,
            "fwd.w_hh" => &self.fwd.w_hh.data,
            "fwd.bias" => &self.fwd.bias.data,
            "bwd.w_ih" => &self.bwd.as_ref().expect("bwd").w_ih.data,
            "bwd.w_hh" => &self.bwd.as_ref().expect("bwd").w_hh.data,
            "bwd.bias" => &self.bwd.as_ref().expect("bwd").bias.data,
            "att.w" => &self.attention.as_ref().expect("attention").w.data,
            "att.b" => &self.attention.as_ref().expect("attention").b.data,
            "att.u" => &self.attention.as_ref().expect("attention").u.data,
            "head.w" => &self.head.w.data,
            "head.b" => &self.head.b.data,
            other => panic!("unknown parameter {other}"),
        }
    }

    pub fn param_mut(&mut self, name: &str) -> &mut [f64] {
        match name {
            "embedding" => &mut self.embedding.table.data,
            "fwd.w_ih" => &mut self.fwd.w_ih.data,
            "fwd.w_hh" => &mut self.fwd.w_hh.data,
            "fwd.bias" => &mut self.fwd.bias.data,
            "bwd.w_ih" => &mut self.bwd.as_mut().expect("bwd").w_ih.data,
            "bwd.w_hh" => &mut self.bwd.as_mut().expect("bwd").w_hh.data,
            "bwd.bias" => &mut self.bwd.as_mut().expect("bwd").bias.data,
            "att.w" => &mut self.attention.as_mut().expect("attention").w.data,
            "att.b" => &mut self.attention.as_mut().expect("attention").b.data,
            "att.u" => &mut self.attention.as_mut().expect("attention").u.data,
            "head.w" => &mut self.head.w.data,
            "head.b" => &mut self.head.b.data,
            other => panic!("unknown parameter {other}"),
        }
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for name in self.param_names() {
            out.extend_from_slice(self.param(name));
        }
        out
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        let total: usize = self.param_names().iter().map(|n| self.param(n).len()).sum();
        if values.len() != total {
            return Err(Error::Shape(format!(
                "expected {total} parameter values, got {}",
                values.len()
            )));
        }
        let mut offset = 0;
        for name in self.param_names() {
            let slot = self.param_mut(name);
            let next = offset + slot.len();
            slot.copy_from_slice(&values[offset..next]);
            offset = next;
        }
        Ok(())
    }
}

impl Grads {
    pub fn param(&self, name: &str) -> &[f64] {
        match name {
            "embedding" => &self.embedding.data,
            "fwd.w_ih" => &self.fwd.w_ih.data,
            "fwd.w_hh" => &self.fwd.w_hh.data,
            "fwd.bias" => &self.fwd.bias.data,
            "bwd.w_ih" => &self.bwd.as_ref().expect("bwd").w_ih.data,
            "bwd.w_hh" => &self.bwd.as_ref().expect("bwd").w_hh.data,
            "bwd.bias" => &self.bwd.as_ref().expect("bwd").bias.data,
            "att.w" => &self.attention.as_ref().expect("attention").w.data,
            "att.b" => &self.attention.as_ref().expect("attention").b.data,
            "att.u" => &self.attention.as_ref().expect("attention").u.data,
            "head.w" => &self.head.w.data,
            "head.b" => &self.head.b.data,
            other => panic!("unknown parameter {other}"),
        }
    }

    /// Largest absolute entry over every tensor.
    pub fn inf_norm(&self, names: &[&'static str]) -> f64 {
        names
            .iter()
            .flat_map(|n| self.param(n).iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
