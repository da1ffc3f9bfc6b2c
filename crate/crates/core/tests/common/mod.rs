#![allow(dead_code)]

use courtvec_core::model::ModelConfig;
use courtvec_core::outcome::OUTCOME_COUNT;
use courtvec_core::rng::{substream, StreamRng};
use courtvec_core::{EmbeddingModel, Play};
use rand::seq::index::sample;
use rand::Rng;

pub fn rng(tag: u64) -> StreamRng {
    substream(0x7e57, &[tag])
}

/// Ten distinct ids from `0..vocab`, split into offense and defense.
pub fn random_matchup(rng: &mut StreamRng, vocab: usize) -> ([u32; 5], [u32; 5]) {
    let ids: Vec<u32> = sample(rng, vocab, 10).iter().map(|i| i as u32).collect();
    (ids[..5].try_into().unwrap(), ids[5..].try_into().unwrap())
}

pub fn random_plays(rng: &mut StreamRng, vocab: usize, count: usize) -> Vec<Play> {
    (0..count)
        .map(|i| {
            let (o, d) = random_matchup(rng, vocab);
            Play::new("g", i as u64, &o, &d, rng.random_range(0..OUTCOME_COUNT)).unwrap()
        })
        .collect()
}

/// Parameters drawn uniformly from `[-scale, scale]`.
pub fn random_model(rng: &mut StreamRng, vocab: usize, h: usize, hidden: usize, scale: f64) -> EmbeddingModel {
    let mut m = EmbeddingModel::zeros(ModelConfig::new(vocab, h, hidden)).unwrap();
    for t in m.params_mut().tensors_mut() {
        for x in t.iter_mut() {
            *x = rng.random_range(-scale..scale);
        }
    }
    m
}

/// Every matchup yields `class` with probability one.
pub fn forced(vocab: usize, class: usize) -> EmbeddingModel {
    let mut m = EmbeddingModel::zeros(ModelConfig::new(vocab, 2, 2)).unwrap();
    m.params_mut().b2[class] = 1000.0;
    m
}

/// Identical distribution `softmax(logits)` for every matchup.
pub fn constant(vocab: usize, logits: &[f64; OUTCOME_COUNT]) -> EmbeddingModel {
    let mut m = EmbeddingModel::zeros(ModelConfig::new(vocab, 2, 2)).unwrap();
    m.params_mut().b2.copy_from_slice(logits);
    m
}
