//! Synthetic corpora drawn from a known ("planted") model of the same
//! architecture, so that training, validation and simulation can be checked
//! against ground truth.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Normal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Play, PlayerRegistry, PLAYERS_PER_SIDE};
use crate::model::{EmbeddingModel, ModelConfig};
use crate::outcome::{is_made_field_goal, is_made_three, is_missed_field_goal, points_table, OUTCOME_COUNT};
use crate::rng::{substream, StreamRng};
use crate::sim::OutcomeSampler;

/// Standard deviation of the planted parameters.
pub const PARAM_STD: f64 = 0.5;
pub const MIN_PLAYERS: usize = 10;
/// Plays sampled per player to derive box-score metrics for the roster.
pub const BOX_SCORE_PLAYS_PER_PLAYER: usize = 100;
const MINUTES_PER_POSSESSION: f64 = 0.24;
const ASSIST_RATE: f64 = 0.6;
const OFFENSIVE_REBOUND_RATE: f64 = 0.25;
const CHUNK: usize = 4096;

/// Rough league-wide outcome frequencies; their logs seed the output bias so
/// generated outcomes are skewed like real possessions.
pub const LEAGUE_OUTCOME_RATES: [f64; OUTCOME_COUNT] = [
    0.085, 0.125, 0.004, 0.002, // mid-range
    0.160, 0.110, 0.012, 0.005, // close-range
    0.001, 0.002, 0.004, 0.012, 0.050, 0.0005, 0.001, 0.003, 0.006, // free throws
    0.085, 0.160, 0.0015, 0.001, // three-pointers
    0.130, 0.040, // turnover, foul
];

/// Raises the logits of `classes` by `amount` for every possession in which
/// `player` is on offense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleBias {
    pub player: u32,
    pub classes: Vec<usize>,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LineupSampling {
    /// Ten distinct players uniformly at random.
    Uniform,
    /// Two disjoint lineups from a fixed pool, each picked with probability
    /// proportional to `rank^-exponent`. Pool size 0 means twice the roster.
    Zipf { pool_size: usize, exponent: f64 },
}

impl LineupSampling {
    pub fn zipf() -> Self {
        LineupSampling::Zipf { pool_size: 0, exponent: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub players: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub seed: u64,
    pub style_bias: Vec<StyleBias>,
    pub sampling: LineupSampling,
}

impl SynthConfig {
    pub fn new(players: usize, embed_dim: usize, hidden: usize, seed: u64) -> Self {
        SynthConfig {
            players,
            embed_dim,
            hidden,
            seed,
            style_bias: Vec::new(),
            sampling: LineupSampling::Uniform,
        }
    }

    pub fn with_sampling(mut self, sampling: LineupSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_bias(mut self, player: u32, classes: &[usize], amount: f64) -> Self {
        self.style_bias.push(StyleBias { player, classes: classes.to_vec(), amount });
        self
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Uniform,
    Zipf { pool: Vec<[u32; 5]>, weights: WeightedIndex<f64> },
}

#[derive(Debug, Clone)]
pub struct PlantedGenerator {
    pub truth: EmbeddingModel,
    pub roster: PlayerRegistry,
    pub seed: u64,
    sampler: Sampler,
}

fn normal_fill(values: &mut [f64], rng: &mut StreamRng) {
    let dist = Normal::new(0.0, PARAM_STD).expect("valid std");
    for x in values {
        *x = dist.sample(rng);
    }
}

/// Wires one embedding column and one hidden unit per distinct class set so
/// that each biased player adds exactly `amount` to those logits on offense.
fn plant_styles(model: &mut EmbeddingModel, biases: &[StyleBias]) -> Result<()> {
    let mut channels: Vec<Vec<usize>> = Vec::new();
    for b in biases {
        let mut classes = b.classes.clone();
        classes.sort_unstable();
        classes.dedup();
        if classes.iter().any(|&c| c >= OUTCOME_COUNT) {
            return Err(Error::arg("style bias class out of range"));
        }
        if !(b.amount.is_finite() && b.amount >= 0.0) {
            return Err(Error::arg("style bias amount must be finite and non-negative"));
        }
        if b.player as usize >= model.config().vocab {
            return Err(Error::UnknownPlayer(b.player));
        }
        if !channels.contains(&classes) {
            channels.push(classes);
        }
    }
    let ModelConfig { vocab, embed_dim: h, hidden, outcomes, .. } = *model.config();
    if channels.len() >= h || channels.len() >= hidden {
        return Err(Error::arg(format!(
            "{} style channels need embedding and hidden widths above that count",
            channels.len()
        )));
    }
    let p = model.params_mut();
    for (c, classes) in channels.iter().enumerate() {
        let col = h - 1 - c;
        let unit = hidden - 1 - c;
        for id in 0..vocab {
            p.embeddings[id * h + col] = 0.0;
        }
        for j in 0..hidden {
            p.w1[col * hidden + j] = 0.0;
            p.w1[(h + col) * hidden + j] = 0.0;
        }
        for k in 0..2 * h {
            p.w1[k * hidden + unit] = 0.0;
        }
        // undo the mean over five players
        p.w1[col * hidden + unit] = PLAYERS_PER_SIDE as f64;
        p.b1[unit] = 0.0;
        for k in 0..outcomes {
            p.w2[unit * outcomes + k] = if classes.contains(&k) { 1.0 } else { 0.0 };
        }
    }
    for b in biases {
        let mut classes = b.classes.clone();
        classes.sort_unstable();
        classes.dedup();
        let c = channels.iter().position(|ch| *ch == classes).expect("channel exists");
        p.embeddings[b.player as usize * h + (h - 1 - c)] += b.amount;
    }
    Ok(())
}

fn build_pool(players: usize, pool_size: usize, rng: &mut StreamRng) -> Vec<[u32; 5]> {
    let mut ids: Vec<u32> = (0..players as u32).collect();
    let mut pool = Vec::with_capacity(pool_size);
    while pool.len() < pool_size {
        ids.shuffle(rng);
        for chunk in ids.chunks_exact(PLAYERS_PER_SIDE) {
            if pool.len() == pool_size {
                break;
            }
            let mut lineup: [u32; 5] = chunk.try_into().unwrap();
            lineup.sort_unstable();
            pool.push(lineup);
        }
    }
    pool
}

pub fn plant_generator(cfg: &SynthConfig) -> Result<PlantedGenerator> {
    if cfg.players < MIN_PLAYERS {
        return Err(Error::arg(format!("need at least {MIN_PLAYERS} players, got {}", cfg.players)));
    }
    let config = ModelConfig::new(cfg.players, cfg.embed_dim, cfg.hidden);
    let mut truth = EmbeddingModel::zeros(config)?;
    let mut rng = substream(cfg.seed, &[0x5e, 0]);
    {
        let p = truth.params_mut();
        for t in p.tensors_mut() {
            normal_fill(t, &mut rng);
        }
        for (b, rate) in p.b2.iter_mut().zip(LEAGUE_OUTCOME_RATES) {
            *b += rate.ln();
        }
    }
    plant_styles(&mut truth, &cfg.style_bias)?;

    let sampler = match cfg.sampling {
        LineupSampling::Uniform => Sampler::Uniform,
        LineupSampling::Zipf { pool_size, exponent } => {
            if !(exponent.is_finite() && exponent >= 0.0) {
                return Err(Error::arg("zipf exponent must be non-negative"));
            }
            let size = if pool_size == 0 { 2 * cfg.players } else { pool_size };
            if size < 2 {
                return Err(Error::arg("zipf pool needs at least two lineups"));
            }
            let pool = build_pool(cfg.players, size, &mut substream(cfg.seed, &[0x5e, 1]));
            let weights = WeightedIndex::new((1..=size).map(|r| (r as f64).powf(-exponent)))
                .map_err(|e| Error::arg(e.to_string()))?;
            Sampler::Zipf { pool, weights }
        }
    };

    let mut generator = PlantedGenerator {
        truth,
        roster: PlayerRegistry::synthetic(cfg.players),
        seed: cfg.seed,
        sampler,
    };
    generator.tally_box_scores(BOX_SCORE_PLAYS_PER_PLAYER * cfg.players);
    Ok(generator)
}

impl PlantedGenerator {
    pub fn sample_matchup(&self, rng: &mut StreamRng) -> ([u32; 5], [u32; 5]) {
        match &self.sampler {
            Sampler::Uniform => {
                let picked = sample(rng, self.truth.config().vocab, 2 * PLAYERS_PER_SIDE);
                let mut offense = [0u32; 5];
                let mut defense = [0u32; 5];
                for (slot, id) in picked.iter().enumerate() {
                    if slot < 5 {
                        offense[slot] = id as u32;
                    } else {
                        defense[slot - 5] = id as u32;
                    }
                }
                offense.sort_unstable();
                defense.sort_unstable();
                (offense, defense)
            }
            Sampler::Zipf { pool, weights } => {
                let offense = pool[weights.sample(rng)];
                loop {
                    let defense = pool[weights.sample(rng)];
                    if !offense.iter().any(|id| defense.contains(id)) {
                        return (offense, defense);
                    }
                }
            }
        }
    }

    fn sample_play(&self, rng: &mut StreamRng) -> ([u32; 5], [u32; 5], usize) {
        let (offense, defense) = self.sample_matchup(rng);
        let q = self.truth.forward_sorted(&offense, &defense);
        let outcome = OutcomeSampler::new(&q).sample(rng);
        (offense, defense, outcome)
    }

    fn tally_box_scores(&mut self, plays: usize) {
        let mut rng = substream(self.seed, &[0x5e, 2]);
        let points = points_table();
        let mut roster = std::mem::take(&mut self.roster);
        let players = roster.players_mut();
        for _ in 0..plays {
            let (offense, defense, y) = self.sample_play(&mut rng);
            for &id in offense.iter().chain(&defense) {
                players[id as usize].minutes += MINUTES_PER_POSSESSION;
            }
            let pts = points[y] as i64;
            for &id in &offense {
                players[id as usize].plus_minus += pts;
            }
            for &id in &defense {
                players[id as usize].plus_minus -= pts;
            }
            if is_made_field_goal(y) {
                let shooter = rng.random_range(0..PLAYERS_PER_SIDE);
                players[offense[shooter] as usize].fg_made += 1;
                if is_made_three(y) {
                    players[offense[shooter] as usize].threes_made += 1;
                }
                if rng.random_bool(ASSIST_RATE) {
                    let passer = (shooter + rng.random_range(1..PLAYERS_PER_SIDE)) % PLAYERS_PER_SIDE;
                    players[offense[passer] as usize].assists += 1;
                }
            } else if is_missed_field_goal(y) {
                let side = if rng.random_bool(OFFENSIVE_REBOUND_RATE) { &offense } else { &defense };
                players[side[rng.random_range(0..PLAYERS_PER_SIDE)] as usize].rebounds += 1;
            }
        }
        for p in players.iter_mut() {
            // keep the CSV representation exact
            p.minutes = (p.minutes * 100.0).round() / 100.0;
        }
        self.roster = roster;
    }
}

/// `count` plays spread evenly over `games` sequential games (the first
/// `count % games` games get one extra play).
pub fn generate_plays(generator: &PlantedGenerator, count: usize, games: usize) -> Result<Vec<Play>> {
    if count == 0 || games == 0 {
        return Err(Error::arg("need at least one play and one game"));
    }
    if games > count {
        return Err(Error::arg(format!("{games} games cannot share {count} plays")));
    }
    let chunk = |c: usize| -> Vec<([u32; 5], [u32; 5], usize)> {
        let mut rng = substream(generator.seed, &[0x9a, c as u64]);
        let len = CHUNK.min(count - c * CHUNK);
        (0..len).map(|_| generator.sample_play(&mut rng)).collect()
    };
    let chunks = count.div_ceil(CHUNK);
    #[cfg(feature = "parallel")]
    let drawn: Vec<Vec<_>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let drawn: Vec<Vec<_>> = (0..chunks).map(chunk).collect();

    let base = count / games;
    let extra = count % games;
    let mut plays = Vec::with_capacity(count);
    let mut draws = drawn.into_iter().flatten();
    for g in 0..games {
        let game_id = format!("G{g:05}");
        for seq in 0..base + usize::from(g < extra) {
            let (offense, defense, outcome) = draws.next().expect("count draws");
            plays.push(Play {
                game_id: game_id.clone(),
                seq: seq as u64,
                offense,
                defense,
                outcome,
            });
        }
    }
    Ok(plays)
}
