//! Ranks candidate fifth players for a lineup with four fixed players.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;
use crate::sim::{Lineup, Matchup, SeriesResult, DEFAULT_POSSESSIONS};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
pub struct FifthManQuery {
    pub fixed_four: Vec<u32>,
    pub opponent: Vec<u32>,
    pub candidates: Vec<u32>,
    pub sims: usize,
    #[serde(default = "default_possessions")]
    pub possessions: usize,
    pub seed: u64,
}

fn default_possessions() -> usize {
    DEFAULT_POSSESSIONS
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FifthManRow {
    pub candidate: u32,
    pub game_win_fraction: f64,
    pub series_win_fraction: f64,
    pub mean_margin: f64,
    pub margin_std: f64,
}

impl FifthManRow {
    fn from_result(candidate: u32, r: &SeriesResult) -> Self {
        FifthManRow {
            candidate,
            game_win_fraction: r.game_win_fraction_a,
            series_win_fraction: r.team_a_series_win_fraction,
            mean_margin: r.mean_margin,
            margin_std: r.margin_std,
        }
    }
}

impl FifthManQuery {
    /// Checks the query and returns the opponent lineup.
    pub fn validate(&self) -> Result<Lineup> {
        if self.fixed_four.len() != 4 {
            return Err(Error::lineup(format!("expected 4 fixed players, got {}", self.fixed_four.len())));
        }
        let opponent = Lineup::new(&self.opponent)?;
        let mut placed: Vec<u32> = self.fixed_four.clone();
        placed.sort_unstable();
        if placed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::lineup("fixed players must be distinct"));
        }
        if let Some(id) = placed.iter().find(|id| opponent.ids().contains(id)) {
            return Err(Error::lineup(format!("player {id} is both fixed and on the opponent lineup")));
        }
        if self.candidates.is_empty() {
            return Err(Error::arg("candidate list is empty"));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if placed.contains(c) || opponent.ids().contains(c) {
                return Err(Error::lineup(format!("candidate {c} is already on the floor")));
            }
            if self.candidates[..i].contains(c) {
                return Err(Error::arg(format!("candidate {c} listed twice")));
            }
        }
        Ok(opponent)
    }

    pub fn completed_lineup(&self, candidate: u32) -> Result<Lineup> {
        let mut ids = self.fixed_four.clone();
        ids.push(candidate);
        Lineup::new(&ids)
    }
}

/// Simulates every candidate against the opponent with the same base seed
/// (common random numbers) and sorts by game win fraction, then mean margin,
/// then id.
pub fn rank_fifth_man(model: &EmbeddingModel, query: &FifthManQuery) -> Result<Vec<FifthManRow>> {
    let opponent = query.validate()?;
    let evaluate = |&candidate: &u32| -> Result<FifthManRow> {
        let matchup = Matchup::new(model, query.completed_lineup(candidate)?, opponent)?;
        let result = matchup.simulate_series(query.sims, query.possessions, query.seed)?;
        Ok(FifthManRow::from_result(candidate, &result))
    };
    #[cfg(feature = "parallel")]
    let mut rows: Vec<FifthManRow> = {
        use rayon::prelude::*;
        query.candidates.par_iter().map(evaluate).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<FifthManRow> = query.candidates.iter().map(evaluate).collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        b.game_win_fraction
            .total_cmp(&a.game_win_fraction)
            .then(b.mean_margin.total_cmp(&a.mean_margin))
            .then(a.candidate.cmp(&b.candidate))
    });
    Ok(rows)
}
