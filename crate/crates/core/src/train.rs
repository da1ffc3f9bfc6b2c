//! Mini-batch training with SGD or Adam.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Play;
use crate::model::{EmbeddingModel, ParamSet};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 512,
            epochs: 10,
            optimizer: Optimizer::adam(),
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::arg("learning rate must be positive"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::arg("batch size and epochs must be at least 1"));
        }
        if let Optimizer::Adam { beta1, beta2, epsilon } = self.optimizer {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && epsilon > 0.0) {
                return Err(Error::arg("adam betas must lie in [0, 1) and epsilon must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochReport {
    /// Zero-based.
    pub epoch: usize,
    /// Mean per-play cross-entropy (nats) over the epoch's batches.
    pub mean_loss: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub steps: usize,
    pub epochs: Vec<EpochReport>,
}

struct AdamState {
    m: ParamSet,
    v: ParamSet,
    t: i32,
}

/// Trains `model` in place. Deterministic given `cfg.seed`.
pub fn train(
    model: &mut EmbeddingModel,
    plays: &[Play],
    cfg: &TrainConfig,
    mut report: impl FnMut(&EpochReport),
) -> Result<TrainSummary> {
    cfg.validate()?;
    if plays.is_empty() {
        return Err(Error::arg("no training plays"));
    }
    for play in plays {
        model.check_matchup(&play.offense, &play.defense)?;
    }

    let config = *model.config();
    let mut grads = ParamSet::zeros(&config);
    let mut adam = match cfg.optimizer {
        Optimizer::Adam { .. } => Some(AdamState {
            m: ParamSet::zeros(&config),
            v: ParamSet::zeros(&config),
            t: 0,
        }),
        Optimizer::Sgd => None,
    };
    let mut order: Vec<usize> = (0..plays.len()).collect();
    let mut step = 0;
    let mut summary = TrainSummary { steps: 0, epochs: Vec::with_capacity(cfg.epochs) };

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut substream(cfg.seed, &[0x7a1, epoch as u64]));
        }
        let mut weighted_loss = 0.0;
        let epoch_start = step;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            let loss = model.accumulate_batch(batch.iter().map(|&i| &plays[i]), batch.len(), &mut grads);
            if !loss.is_finite() {
                return Err(Error::Divergence { step });
            }
            weighted_loss += loss * batch.len() as f64;
            apply_update(model.params_mut(), &grads, cfg, adam.as_mut());
            step += 1;
        }
        let epoch_report = EpochReport {
            epoch,
            mean_loss: weighted_loss / plays.len() as f64,
            steps: step - epoch_start,
        };
        report(&epoch_report);
        summary.epochs.push(epoch_report);
    }
    if !model.params().is_finite() {
        return Err(Error::Divergence { step });
    }
    summary.steps = step;
    Ok(summary)
}

fn apply_update(params: &mut ParamSet, grads: &ParamSet, cfg: &TrainConfig, adam: Option<&mut AdamState>) {
    let lr = cfg.learning_rate;
    match (cfg.optimizer, adam) {
        (Optimizer::Adam { beta1, beta2, epsilon }, Some(state)) => {
            state.t += 1;
            let c1 = 1.0 - beta1.powi(state.t);
            let c2 = 1.0 - beta2.powi(state.t);
            let tensors = params
                .tensors_mut()
                .into_iter()
                .zip(grads.tensors())
                .zip(state.m.tensors_mut().into_iter().zip(state.v.tensors_mut()));
            for ((p, g), (m, v)) in tensors {
                for i in 0..p.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    p[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
        _ => {
            for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
                for (x, d) in p.iter_mut().zip(g) {
                    *x -= lr * d;
                }
            }
        }
    }
}
