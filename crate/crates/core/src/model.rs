//! The lineup-to-outcome network.
//!
//! Each player owns one row of a shared embedding table. The five offensive
//! rows and the five defensive rows are averaged separately, concatenated
//! (offense first), passed through one ReLU layer and a softmax over the 23
//! outcome classes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{sorted_matchup, Play, PLAYERS_PER_SIDE};
use crate::outcome::OUTCOME_COUNT;
use crate::rng::substream;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelConfig {
    /// Number of players (rows of the embedding table).
    pub vocab: usize,
    pub embed_dim: usize,
    pub per_side: usize,
    pub hidden: usize,
    pub outcomes: usize,
}

impl ModelConfig {
    pub fn new(vocab: usize, embed_dim: usize, hidden: usize) -> Self {
        ModelConfig {
            vocab,
            embed_dim,
            per_side: PLAYERS_PER_SIDE,
            hidden,
            outcomes: OUTCOME_COUNT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_side != PLAYERS_PER_SIDE {
            return Err(Error::arg(format!("players per side must be {PLAYERS_PER_SIDE}")));
        }
        if self.outcomes != OUTCOME_COUNT {
            return Err(Error::arg(format!("outcome count must be {OUTCOME_COUNT}, got {}", self.outcomes)));
        }
        if self.vocab < 2 * self.per_side {
            return Err(Error::arg(format!("need at least {} players, got {}", 2 * self.per_side, self.vocab)));
        }
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::arg("embedding and hidden widths must be positive"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        2 * self.embed_dim
    }
}

/// One tensor per learnable parameter, all row-major.
///
/// The same shape is reused for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// `vocab × embed_dim`
    pub embeddings: Vec<f64>,
    /// `2·embed_dim × hidden`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `hidden × outcomes`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ParamSet {
    pub fn zeros(config: &ModelConfig) -> Self {
        ParamSet {
            embeddings: vec![0.0; config.vocab * config.embed_dim],
            w1: vec![0.0; config.input_dim() * config.hidden],
            b1: vec![0.0; config.hidden],
            w2: vec![0.0; config.hidden * config.outcomes],
            b2: vec![0.0; config.outcomes],
        }
    }

    pub fn tensors(&self) -> [&[f64]; 5] {
        [&self.embeddings, &self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [&mut self.embeddings, &mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.fill(value);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

pub const TENSOR_NAMES: [&str; 5] = ["embeddings", "w1", "b1", "w2", "b2"];

/// A probability vector over the outcome classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutcomeDistribution([f64; OUTCOME_COUNT]);

impl OutcomeDistribution {
    pub fn uniform() -> Self {
        OutcomeDistribution([1.0 / OUTCOME_COUNT as f64; OUTCOME_COUNT])
    }

    /// Accepts a vector that is non-negative and sums to 1 within 1e-9.
    pub fn new(p: [f64; OUTCOME_COUNT]) -> Result<Self> {
        if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::value("probabilities must be finite and non-negative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::value(format!("probabilities sum to {total}, not 1")));
        }
        Ok(OutcomeDistribution(p))
    }

    pub fn probs(&self) -> &[f64; OUTCOME_COUNT] {
        &self.0
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for k in 1..OUTCOME_COUNT {
            if self.0[k] > self.0[best] {
                best = k;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for OutcomeDistribution {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Activations {
    pub input: Vec<f64>,
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Activations {
    pub fn new(config: &ModelConfig) -> Self {
        Activations {
            input: vec![0.0; config.input_dim()],
            pre: vec![0.0; config.hidden],
            hidden: vec![0.0; config.hidden],
            scores: vec![0.0; config.outcomes],
            probs: vec![0.0; config.outcomes],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    config: ModelConfig,
    params: ParamSet,
}

impl EmbeddingModel {
    /// A model with every parameter zero; it predicts the uniform distribution.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(EmbeddingModel {
            config,
            params: ParamSet::zeros(&config),
        })
    }

    /// Weights uniform in `±1/√fan_in` per layer, biases zero.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = substream(seed, &[0x1417]);
        let fan_ins = [config.embed_dim, config.input_dim(), config.hidden];
        let p = &mut model.params;
        for (tensor, fan_in) in [&mut p.embeddings, &mut p.w1, &mut p.w2].into_iter().zip(fan_ins) {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for x in tensor.iter_mut() {
                *x = rng.random_range(-bound..=bound);
            }
        }
        Ok(model)
    }

    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let expected = ParamSet::zeros(&config);
        for ((have, want), name) in params.tensors().iter().zip(expected.tensors()).zip(TENSOR_NAMES) {
            if have.len() != want.len() {
                return Err(Error::value(format!("{name} has {} entries, expected {}", have.len(), want.len())));
            }
        }
        if !params.is_finite() {
            return Err(Error::value("parameters must be finite"));
        }
        Ok(EmbeddingModel { config, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Direct parameter access. Tensor lengths must not change.
    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn embedding(&self, player: u32) -> &[f64] {
        let h = self.config.embed_dim;
        let start = player as usize * h;
        &self.params.embeddings[start..start + h]
    }

    pub fn embedding_mut(&mut self, player: u32) -> &mut [f64] {
        let h = self.config.embed_dim;
        let start = player as usize * h;
        &mut self.params.embeddings[start..start + h]
    }

    /// Checks ids against the vocabulary and returns both sides sorted.
    pub fn check_matchup(&self, offense: &[u32], defense: &[u32]) -> Result<([u32; 5], [u32; 5])> {
        if let Some(&id) = offense.iter().chain(defense).find(|&&id| id as usize >= self.config.vocab) {
            return Err(Error::UnknownPlayer(id));
        }
        sorted_matchup(offense, defense)
    }

    /// Predicted outcome distribution for a possession.
    pub fn forward(&self, offense: &[u32], defense: &[u32]) -> Result<OutcomeDistribution> {
        let (offense, defense) = self.check_matchup(offense, defense)?;
        Ok(self.forward_sorted(&offense, &defense))
    }

    /// Forward pass for lineups already validated and sorted.
    pub fn forward_sorted(&self, offense: &[u32; 5], defense: &[u32; 5]) -> OutcomeDistribution {
        let mut act = Activations::new(&self.config);
        self.forward_into(offense, defense, &mut act);
        let mut p = [0.0; OUTCOME_COUNT];
        p.copy_from_slice(&act.probs);
        OutcomeDistribution(p)
    }

    fn pool_into(&self, side: &[u32; 5], out: &mut [f64]) {
        out.fill(0.0);
        for &id in side {
            for (o, e) in out.iter_mut().zip(self.embedding(id)) {
                *o += e;
            }
        }
        let n = side.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }

    pub(crate) fn forward_into(&self, offense: &[u32; 5], defense: &[u32; 5], act: &mut Activations) {
        let ModelConfig { embed_dim: h, hidden, outcomes, .. } = self.config;
        let p = &self.params;
        let (off_half, def_half) = act.input.split_at_mut(h);
        self.pool_into(offense, off_half);
        self.pool_into(defense, def_half);

        act.pre.copy_from_slice(&p.b1);
        for (k, &x) in act.input.iter().enumerate() {
            if x != 0.0 {
                let row = &p.w1[k * hidden..(k + 1) * hidden];
                for (z, w) in act.pre.iter_mut().zip(row) {
                    *z += x * w;
                }
            }
        }
        for (a, &z) in act.hidden.iter_mut().zip(&act.pre) {
            *a = z.max(0.0);
        }

        act.scores.copy_from_slice(&p.b2);
        for (j, &a) in act.hidden.iter().enumerate() {
            if a != 0.0 {
                let row = &p.w2[j * outcomes..(j + 1) * outcomes];
                for (s, w) in act.scores.iter_mut().zip(row) {
                    *s += a * w;
                }
            }
        }
        softmax_into(&act.scores, &mut act.probs);
    }

    /// Adds this example's gradient of `-ln q[outcome]`, scaled by `weight`,
    /// into `grads` and returns the unscaled loss.
    pub(crate) fn accumulate_example(
        &self,
        offense: &[u32; 5],
        defense: &[u32; 5],
        outcome: usize,
        weight: f64,
        act: &mut Activations,
        grads: &mut ParamSet,
        d_hidden: &mut [f64],
    ) -> f64 {
        let ModelConfig { embed_dim: h, hidden, outcomes, .. } = self.config;
        self.forward_into(offense, defense, act);
        let loss = log_sum_exp(&act.scores) - act.scores[outcome];

        // d loss / d scores = q - onehot(y)
        let mut d_scores = [0.0; OUTCOME_COUNT];
        for (k, d) in d_scores.iter_mut().enumerate().take(outcomes) {
            *d = weight * (act.probs[k] - if k == outcome { 1.0 } else { 0.0 });
        }
        for (g, d) in grads.b2.iter_mut().zip(&d_scores) {
            *g += d;
        }
        for (j, &a) in act.hidden.iter().enumerate() {
            let w_row = &self.params.w2[j * outcomes..(j + 1) * outcomes];
            let g_row = &mut grads.w2[j * outcomes..(j + 1) * outcomes];
            let mut back = 0.0;
            for k in 0..outcomes {
                g_row[k] += a * d_scores[k];
                back += w_row[k] * d_scores[k];
            }
            // ReLU gate
            d_hidden[j] = if act.pre[j] > 0.0 { back } else { 0.0 };
        }
        for (g, d) in grads.b1.iter_mut().zip(d_hidden.iter()) {
            *g += d;
        }

        let pooled = 1.0 / PLAYERS_PER_SIDE as f64;
        for (k, &x) in act.input.iter().enumerate() {
            let w_row = &self.params.w1[k * hidden..(k + 1) * hidden];
            let g_row = &mut grads.w1[k * hidden..(k + 1) * hidden];
            let mut d_input = 0.0;
            for j in 0..hidden {
                g_row[j] += x * d_hidden[j];
                d_input += w_row[j] * d_hidden[j];
            }
            let (side, dim) = if k < h { (offense, k) } else { (defense, k - h) };
            for &id in side {
                grads.embeddings[id as usize * h + dim] += d_input * pooled;
            }
        }
        loss
    }

    /// Mean cross-entropy (nats) over `batch` and its exact gradient.
    pub fn loss_and_gradients(&self, batch: &[Play]) -> Result<(f64, ParamSet)> {
        if batch.is_empty() {
            return Err(Error::arg("empty batch"));
        }
        for play in batch {
            self.check_matchup(&play.offense, &play.defense)?;
            if play.outcome >= OUTCOME_COUNT {
                return Err(Error::Outcome(play.outcome as i64));
            }
        }
        let mut grads = ParamSet::zeros(&self.config);
        let loss = self.accumulate_batch(batch.iter(), batch.len(), &mut grads);
        Ok((loss, grads))
    }

    /// Accumulates the mean-loss gradient for `len` plays into `grads` and
    /// returns the mean loss. Contributions are summed in iteration order.
    pub(crate) fn accumulate_batch<'a>(
        &self,
        batch: impl Iterator<Item = &'a Play>,
        len: usize,
        grads: &mut ParamSet,
    ) -> f64 {
        let mut act = Activations::new(&self.config);
        let mut d_hidden = vec![0.0; self.config.hidden];
        let weight = 1.0 / len as f64;
        let mut total = 0.0;
        for play in batch {
            total += self.accumulate_example(
                &play.offense,
                &play.defense,
                play.outcome,
                weight,
                &mut act,
                grads,
                &mut d_hidden,
            );
        }
        total * weight
    }
}

pub fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}
