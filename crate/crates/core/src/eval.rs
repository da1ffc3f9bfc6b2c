//! Empirical outcome distributions per lineup matchup and K–L divergence
//! against model predictions.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{sorted_matchup, Play};
use crate::model::{EmbeddingModel, OutcomeDistribution};
use crate::outcome::OUTCOME_COUNT;
use crate::rng::substream;

pub const DEFAULT_MIN_PLAYS: usize = 15;

/// An ordered (offense, defense) pair of sorted lineups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MatchupKey {
    pub offense: [u32; 5],
    pub defense: [u32; 5],
}

impl MatchupKey {
    pub fn new(offense: &[u32], defense: &[u32]) -> Result<Self> {
        let (offense, defense) = sorted_matchup(offense, defense)?;
        Ok(MatchupKey { offense, defense })
    }

    pub fn of(play: &Play) -> Self {
        MatchupKey {
            offense: play.offense,
            defense: play.defense,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub counts: [u64; OUTCOME_COUNT],
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut counts = [0u64; OUTCOME_COUNT];
        let mut total = 0;
        for y in outcomes {
            *counts.get_mut(y).ok_or(Error::Outcome(y as i64))? += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::arg("empirical distribution needs at least one play"));
        }
        Ok(EmpiricalDistribution { counts, total })
    }

    pub fn probs(&self) -> [f64; OUTCOME_COUNT] {
        let n = self.total as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

pub fn empirical_distribution(plays: &[Play]) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::from_outcomes(plays.iter().map(|p| p.outcome))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogBase {
    /// Bits.
    Two,
    /// Nats.
    E,
}

/// `Σ p·log(p/q)` over the support of `p`.
pub fn kl_divergence(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::arg(format!("length mismatch: {} vs {}", p.len(), q.len())));
    }
    let mut nats = 0.0;
    for (k, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        if pk > 0.0 {
            if qk <= 0.0 {
                return Err(Error::Support { class: k });
            }
            nats += pk * (pk / qk).ln();
        }
    }
    Ok(match base {
        LogBase::E => nats,
        LogBase::Two => nats / std::f64::consts::LN_2,
    })
}

/// K–L in bits between an empirical distribution and a prediction.
pub fn kl_bits(empirical: &EmpiricalDistribution, q: &OutcomeDistribution) -> Result<f64> {
    kl_divergence(&empirical.probs(), q.probs(), LogBase::Two)
}

pub fn group_by_matchup(plays: &[Play]) -> BTreeMap<MatchupKey, Vec<&Play>> {
    let mut groups: BTreeMap<MatchupKey, Vec<&Play>> = BTreeMap::new();
    for play in plays {
        groups.entry(MatchupKey::of(play)).or_default().push(play);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchupScore {
    pub key: MatchupKey,
    pub plays: u64,
    pub kl_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample (n−1) standard deviation; 0 for a single matchup.
    pub std_dev: f64,
}

impl KlSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_dev = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(KlSummary { count: values.len(), mean, std_dev })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub min_plays: usize,
    /// Sorted by matchup key.
    pub matchups: Vec<MatchupScore>,
    /// `None` when no matchup has more than `min_plays` plays.
    pub summary: Option<KlSummary>,
}

/// Scores every matchup with strictly more than `min_plays` plays against
/// `predict`.
pub fn validate_with(
    plays: &[Play],
    min_plays: usize,
    mut predict: impl FnMut(&MatchupKey) -> Result<OutcomeDistribution>,
) -> Result<ValidationReport> {
    let mut matchups = Vec::new();
    for (key, group) in group_by_matchup(plays) {
        if group.len() <= min_plays {
            continue;
        }
        let empirical = EmpiricalDistribution::from_outcomes(group.iter().map(|p| p.outcome))?;
        let q = predict(&key)?;
        matchups.push(MatchupScore {
            key,
            plays: empirical.total,
            kl_bits: kl_bits(&empirical, &q)?,
        });
    }
    let values: Vec<f64> = matchups.iter().map(|m| m.kl_bits).collect();
    Ok(ValidationReport {
        min_plays,
        summary: KlSummary::of(&values),
        matchups,
    })
}

pub fn validate_matchups(model: &EmbeddingModel, plays: &[Play], min_plays: usize) -> Result<ValidationReport> {
    validate_with(plays, min_plays, |key| model.forward(&key.offense, &key.defense))
}

/// The same matchups scored against a uniform prediction.
pub fn uniform_baseline(plays: &[Play], min_plays: usize) -> Result<ValidationReport> {
    validate_with(plays, min_plays, |_| Ok(OutcomeDistribution::uniform()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub mean_kl_bits: f64,
}

/// Mean K–L of size-`n` subsamples, for `n = 1..=max_n`.
///
/// Each trial picks a matchup with at least `max_n` plays uniformly at random
/// and draws `n` of its plays without replacement.
pub fn kl_vs_plays_curve(
    model: &EmbeddingModel,
    plays: &[Play],
    max_n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if max_n == 0 || trials == 0 {
        return Err(Error::arg("max_n and trials must be positive"));
    }
    let groups = group_by_matchup(plays);
    let largest = groups.values().map(Vec::len).max().unwrap_or(0);
    if max_n > largest {
        return Err(Error::arg(format!(
            "max_n {max_n} exceeds the largest matchup group ({largest} plays)"
        )));
    }
    let qualifying: Vec<(OutcomeDistribution, Vec<usize>)> = groups
        .into_iter()
        .filter(|(_, g)| g.len() >= max_n)
        .map(|(key, g)| {
            let q = model.forward_sorted(&key.offense, &key.defense);
            (q, g.iter().map(|p| p.outcome).collect())
        })
        .collect();

    (1..=max_n)
        .map(|n| {
            let mut rng = substream(seed, &[0xc0, n as u64]);
            let mut total = 0.0;
            for _ in 0..trials {
                let (q, outcomes) = &qualifying[rng.random_range(0..qualifying.len())];
                let picked = sample(&mut rng, outcomes.len(), n);
                let emp = EmpiricalDistribution::from_outcomes(picked.iter().map(|i| outcomes[i]))?;
                total += kl_bits(&emp, q)?;
            }
            Ok(CurvePoint { n, mean_kl_bits: total / trials as f64 })
        })
        .collect()
}
