//! Monte Carlo games and best-of-7 series sampled from the model's outcome
//! distributions.
//!
//! Each team keeps one lineup for the whole game. Team A's possessions are
//! drawn from `forward(A, B)` and team B's from `forward(B, A)`. Tied games
//! go to 10-possession overtimes.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{sorted_side, Play, PlayerRegistry};
use crate::model::{EmbeddingModel, OutcomeDistribution};
use crate::outcome::{points_table, OUTCOME_COUNT};
use crate::rng::{derive_seed, substream, StreamRng};

pub const DEFAULT_POSSESSIONS: usize = 100;
pub const DEFAULT_SIMS: usize = 1000;
pub const OVERTIME_POSSESSIONS: usize = 10;
pub const MAX_OVERTIMES: usize = 100;
pub const WINS_NEEDED: u32 = 4;

/// Five distinct players, sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Lineup([u32; 5]);

impl Lineup {
    pub fn new(ids: &[u32]) -> Result<Self> {
        sorted_side(ids, "lineup").map(Lineup)
    }

    pub fn ids(&self) -> &[u32; 5] {
        &self.0
    }

    pub fn overlaps(&self, other: &Lineup) -> bool {
        self.0.iter().any(|id| other.0.contains(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameResult {
    pub points_a: u32,
    pub points_b: u32,
    /// Regulation possessions per team.
    pub possessions_per_team: usize,
    pub overtimes: usize,
    pub winner: Side,
}

impl GameResult {
    pub fn margin(&self) -> i64 {
        self.points_a as i64 - self.points_b as i64
    }
}

/// Inverse-CDF sampler over the outcome classes.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    cumulative: [f64; OUTCOME_COUNT],
    last_positive: usize,
}

impl OutcomeSampler {
    pub fn new(dist: &OutcomeDistribution) -> Self {
        let mut cumulative = [0.0; OUTCOME_COUNT];
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (k, &p) in dist.probs().iter().enumerate() {
            acc += p;
            cumulative[k] = acc;
            if p > 0.0 {
                last_positive = k;
            }
        }
        OutcomeSampler { cumulative, last_positive }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive)
    }
}

/// Both directions of a lineup matchup, ready to sample.
#[derive(Debug, Clone)]
pub struct Matchup {
    pub a: Lineup,
    pub b: Lineup,
    pub a_on_offense: OutcomeDistribution,
    pub b_on_offense: OutcomeDistribution,
    sampler_a: OutcomeSampler,
    sampler_b: OutcomeSampler,
}

impl Matchup {
    pub fn new(model: &EmbeddingModel, a: Lineup, b: Lineup) -> Result<Self> {
        if a.overlaps(&b) {
            return Err(Error::lineup("the two lineups share a player"));
        }
        let a_on_offense = model.forward(a.ids(), b.ids())?;
        let b_on_offense = model.forward(b.ids(), a.ids())?;
        Ok(Matchup {
            a,
            b,
            sampler_a: OutcomeSampler::new(&a_on_offense),
            sampler_b: OutcomeSampler::new(&b_on_offense),
            a_on_offense,
            b_on_offense,
        })
    }

    fn play_block(
        &self,
        possessions: usize,
        rng: &mut StreamRng,
        score: &mut (u32, u32),
        observe: &mut impl FnMut(Side, usize),
    ) {
        let points = points_table();
        for _ in 0..possessions {
            let ya = self.sampler_a.sample(rng);
            observe(Side::A, ya);
            score.0 += points[ya];
            let yb = self.sampler_b.sample(rng);
            observe(Side::B, yb);
            score.1 += points[yb];
        }
    }

    /// One game; `observe` sees every sampled outcome in order.
    pub fn play_game_observed(
        &self,
        possessions: usize,
        rng: &mut StreamRng,
        mut observe: impl FnMut(Side, usize),
    ) -> Result<GameResult> {
        let mut score = (0, 0);
        self.play_block(possessions, rng, &mut score, &mut observe);
        let mut overtimes = 0;
        while score.0 == score.1 {
            if overtimes == MAX_OVERTIMES {
                return Err(Error::DegenerateModel { overtimes });
            }
            self.play_block(OVERTIME_POSSESSIONS, rng, &mut score, &mut observe);
            overtimes += 1;
        }
        Ok(GameResult {
            points_a: score.0,
            points_b: score.1,
            possessions_per_team: possessions,
            overtimes,
            winner: if score.0 > score.1 { Side::A } else { Side::B },
        })
    }

    pub fn play_game(&self, possessions: usize, rng: &mut StreamRng) -> Result<GameResult> {
        self.play_game_observed(possessions, rng, |_, _| {})
    }

    pub fn play_series(&self, possessions: usize, seed: u64, series: u64) -> Result<SeriesOutcome> {
        let mut out = SeriesOutcome::default();
        let mut game = 0u64;
        while out.wins_a < WINS_NEEDED && out.wins_b < WINS_NEEDED {
            let mut rng = substream(seed, &[series, game]);
            let result = self.play_game(possessions, &mut rng)?;
            match result.winner {
                Side::A => out.wins_a += 1,
                Side::B => out.wins_b += 1,
            }
            let margin = result.margin();
            out.margin_sum += margin;
            out.margin_sq_sum += (margin * margin) as u64;
            game += 1;
        }
        Ok(out)
    }

    pub fn simulate_series(&self, sims: usize, possessions: usize, seed: u64) -> Result<SeriesResult> {
        if sims == 0 {
            return Err(Error::arg("sims must be at least 1"));
        }
        if possessions == 0 {
            return Err(Error::arg("possessions must be at least 1"));
        }
        let run = |s: usize| self.play_series(possessions, seed, s as u64);
        #[cfg(feature = "parallel")]
        let outcomes: Vec<SeriesOutcome> = {
            use rayon::prelude::*;
            (0..sims).into_par_iter().map(run).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let outcomes: Vec<SeriesOutcome> = (0..sims).map(run).collect::<Result<_>>()?;
        Ok(SeriesResult::aggregate(&outcomes))
    }
}

pub fn simulate_game(
    model: &EmbeddingModel,
    a: &Lineup,
    b: &Lineup,
    possessions: usize,
    rng: &mut StreamRng,
) -> Result<GameResult> {
    Matchup::new(model, *a, *b)?.play_game(possessions, rng)
}

/// Tally of one best-of-7 series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeriesOutcome {
    pub wins_a: u32,
    pub wins_b: u32,
    pub margin_sum: i64,
    pub margin_sq_sum: u64,
}

impl SeriesOutcome {
    pub fn games(&self) -> u32 {
        self.wins_a + self.wins_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesResult {
    pub sims: usize,
    pub team_a_series_win_fraction: f64,
    pub team_b_series_win_fraction: f64,
    /// Mean games won per series by A and by B.
    pub mean_series_score: [f64; 2],
    /// Mean per-game point margin from A's side, over all games played.
    pub mean_margin: f64,
    /// Sample standard deviation of the per-game margin.
    pub margin_std: f64,
    pub game_win_fraction_a: f64,
    pub games_played: u64,
    pub mean_games_per_series: f64,
    /// How many series lasted 4, 5, 6 and 7 games.
    pub series_length_counts: [u64; 4],
}

impl SeriesResult {
    pub fn aggregate(outcomes: &[SeriesOutcome]) -> Self {
        let sims = outcomes.len();
        let n = sims as f64;
        let (mut series_a, mut wins_a, mut wins_b) = (0u64, 0u64, 0u64);
        let (mut margin_sum, mut margin_sq) = (0i128, 0u128);
        let mut lengths = [0u64; 4];
        for o in outcomes {
            series_a += u64::from(o.wins_a == WINS_NEEDED);
            wins_a += u64::from(o.wins_a);
            wins_b += u64::from(o.wins_b);
            margin_sum += i128::from(o.margin_sum);
            margin_sq += u128::from(o.margin_sq_sum);
            lengths[o.games() as usize - 4] += 1;
        }
        let games = wins_a + wins_b;
        let g = games as f64;
        let mean_margin = margin_sum as f64 / g;
        let margin_std = if games > 1 {
            let centered = margin_sq as f64 - (margin_sum as f64) * (margin_sum as f64) / g;
            (centered.max(0.0) / (g - 1.0)).sqrt()
        } else {
            0.0
        };
        SeriesResult {
            sims,
            team_a_series_win_fraction: series_a as f64 / n,
            team_b_series_win_fraction: (sims as u64 - series_a) as f64 / n,
            mean_series_score: [wins_a as f64 / n, wins_b as f64 / n],
            mean_margin,
            margin_std,
            game_win_fraction_a: wins_a as f64 / g,
            games_played: games,
            mean_games_per_series: g / n,
            series_length_counts: lengths,
        }
    }
}

pub fn simulate_series(
    model: &EmbeddingModel,
    a: &Lineup,
    b: &Lineup,
    sims: usize,
    possessions: usize,
    seed: u64,
) -> Result<SeriesResult> {
    Matchup::new(model, *a, *b)?.simulate_series(sims, possessions, seed)
}

/// Two teams identified by player names (or numeric ids).
#[derive(Debug, Clone, PartialEq, Eq, serde::Deserialize, Serialize)]
pub struct NamedMatchup {
    pub team_a: String,
    pub players_a: Vec<String>,
    pub team_b: String,
    pub players_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadToHeadRow {
    pub team_a: String,
    pub team_b: String,
    pub series_score: [f64; 2],
    pub mean_margin: f64,
    pub margin_std: f64,
    pub game_win_fraction_a: f64,
    pub series_win_fraction_a: f64,
}

fn format_wins(x: f64) -> String {
    if (x - x.round()).abs() < 0.005 {
        format!("{}", x.round())
    } else {
        format!("{x:.2}")
    }
}

impl HeadToHeadRow {
    pub fn from_result(team_a: &str, team_b: &str, r: &SeriesResult) -> Self {
        HeadToHeadRow {
            team_a: team_a.to_string(),
            team_b: team_b.to_string(),
            series_score: r.mean_series_score,
            mean_margin: r.mean_margin,
            margin_std: r.margin_std,
            game_win_fraction_a: r.game_win_fraction_a,
            series_win_fraction_a: r.team_a_series_win_fraction,
        }
    }

    /// `Team 1 | Team 2 | Series Score | Margin | Team 1 Game Win %`
    pub fn render(&self) -> String {
        format!(
            "{} | {} | {} vs. {} | {:+.2} | {:.1}%",
            self.team_a,
            self.team_b,
            format_wins(self.series_score[0]),
            format_wins(self.series_score[1]),
            self.mean_margin,
            100.0 * self.game_win_fraction_a,
        )
    }
}

/// One simulated series per named matchup. Row `r` uses a seed derived from
/// `seed` and `r`.
pub fn head_to_head_table(
    model: &EmbeddingModel,
    registry: &PlayerRegistry,
    matchups: &[NamedMatchup],
    sims: usize,
    possessions: usize,
    seed: u64,
) -> Result<Vec<HeadToHeadRow>> {
    let mut missing = Vec::new();
    let mut resolved = Vec::with_capacity(matchups.len());
    for m in matchups {
        let a = registry.resolve(&m.players_a);
        let b = registry.resolve(&m.players_b);
        match (a, b) {
            (Ok(a), Ok(b)) => resolved.push((a, b)),
            (a, b) => {
                for r in [a, b] {
                    if let Err(Error::Resolution(names)) = r {
                        missing.extend(names);
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Resolution(missing));
    }
    matchups
        .iter()
        .zip(resolved)
        .enumerate()
        .map(|(row, (m, (a, b)))| {
            let matchup = Matchup::new(model, Lineup::new(&a)?, Lineup::new(&b)?)?;
            let result = matchup.simulate_series(sims, possessions, derive_seed(seed, &[row as u64]))?;
            Ok(HeadToHeadRow::from_result(&m.team_a, &m.team_b, &result))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineupCount {
    pub lineup: Lineup,
    pub count: u64,
}

/// Most frequent exact 5-player lineups, counting offensive and defensive
/// appearances alike.
pub fn most_frequent_lineups(plays: &[Play], top: usize) -> Vec<LineupCount> {
    let mut counts: HashMap<[u32; 5], u64> = HashMap::new();
    for play in plays {
        *counts.entry(play.offense).or_default() += 1;
        *counts.entry(play.defense).or_default() += 1;
    }
    let mut ranked: Vec<LineupCount> = counts
        .into_iter()
        .map(|(ids, count)| LineupCount { lineup: Lineup(ids), count })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then(a.lineup.cmp(&b.lineup)));
    ranked.truncate(top);
    ranked
}

/// The `top` players by number of plays they appear in; ties go to lower ids.
pub fn most_common_players(plays: &[Play], top: usize) -> Vec<u32> {
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for play in plays {
        for id in play.players() {
            *counts.entry(id).or_default() += 1;
        }
    }
    let mut ranked: Vec<(u32, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().take(top).map(|(id, _)| id).collect()
}
