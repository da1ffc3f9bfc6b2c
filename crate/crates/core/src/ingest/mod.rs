//! Play-by-play ingestion: the play and player CSV formats, raw-feed outcome
//! mapping, and the chronological train/validation split.

mod registry;
mod rules;

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Serialize;

pub use registry::{build_registry, write_registry, PlayerInfo, PlayerRegistry, Position};
pub use rules::{
    map_raw_outcome, FreeThrows, MadeFlag, OutcomeMapping, OutcomeRule, RawEvent, RuleAction,
};

use crate::error::{Error, Result};
use crate::outcome::OUTCOME_COUNT;

pub const PLAYERS_PER_SIDE: usize = 5;

pub const PLAY_HEADER: [&str; 5] = ["game_id", "seq", "offense", "defense", "outcome"];
pub const RAW_HEADER: [&str; 7] = [
    "game_id",
    "seq",
    "offense",
    "defense",
    "description",
    "made",
    "free_throws",
];

/// One possession: who was on the floor and how it ended.
///
/// Both lineups are stored sorted ascending by player id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Play {
    pub game_id: String,
    pub seq: u64,
    pub offense: [u32; PLAYERS_PER_SIDE],
    pub defense: [u32; PLAYERS_PER_SIDE],
    pub outcome: usize,
}

impl Play {
    pub fn new(
        game_id: impl Into<String>,
        seq: u64,
        offense: &[u32],
        defense: &[u32],
        outcome: usize,
    ) -> Result<Self> {
        let (offense, defense) = sorted_matchup(offense, defense)?;
        if outcome >= OUTCOME_COUNT {
            return Err(Error::Outcome(outcome as i64));
        }
        Ok(Play {
            game_id: game_id.into(),
            seq,
            offense,
            defense,
            outcome,
        })
    }

    pub fn players(&self) -> impl Iterator<Item = u32> + '_ {
        self.offense.iter().chain(self.defense.iter()).copied()
    }
}

/// Validates a 5-vs-5 matchup and returns both sides sorted.
pub fn sorted_matchup(
    offense: &[u32],
    defense: &[u32],
) -> Result<([u32; PLAYERS_PER_SIDE], [u32; PLAYERS_PER_SIDE])> {
    let offense = sorted_side(offense, "offense")?;
    let defense = sorted_side(defense, "defense")?;
    if let Some(id) = offense.iter().find(|id| defense.contains(id)) {
        return Err(Error::lineup(format!(
            "player {id} appears on both offense and defense"
        )));
    }
    Ok((offense, defense))
}

pub(crate) fn sorted_side(ids: &[u32], side: &str) -> Result<[u32; PLAYERS_PER_SIDE]> {
    let mut out: [u32; PLAYERS_PER_SIDE] = ids.try_into().map_err(|_| {
        Error::lineup(format!(
            "{side} has {} players, expected {PLAYERS_PER_SIDE}",
            ids.len()
        ))
    })?;
    out.sort_unstable();
    if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::lineup(format!("player {} listed twice on {side}", w[0])));
    }
    Ok(out)
}

fn parse_lineup(field: &str, side: &str, line: u64) -> Result<Vec<u32>> {
    field
        .split(';')
        .map(|s| {
            s.trim().parse::<u32>().map_err(|_| Error::Parse {
                line,
                message: format!("bad {side} player id {s:?}"),
            })
        })
        .collect()
}

fn format_lineup(ids: &[u32]) -> String {
    ids.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(e, 1))?;
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}", expected.join(",")),
        });
    }
    Ok(())
}

fn csv_error(err: csv::Error, fallback_line: u64) -> Error {
    let line = err.position().map_or(fallback_line, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn csv_reader(source: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source)
}

fn read_records(
    source: impl Read,
    header: &[&str],
    mut each: impl FnMut(&csv::StringRecord, u64) -> Result<()>,
) -> Result<()> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, header)?;
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| csv_error(e, 0))?;
        if !more {
            return Ok(());
        }
        let line = record.position().map_or(0, |p| p.line());
        each(&record, line)?;
    }
}

fn parse_seq(field: &str, line: u64) -> Result<u64> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad seq {field:?}"),
    })
}

fn build_play(
    record: &csv::StringRecord,
    line: u64,
    outcome: usize,
    registry: &PlayerRegistry,
) -> Result<Play> {
    let offense = parse_lineup(&record[2], "offense", line)?;
    let defense = parse_lineup(&record[3], "defense", line)?;
    let play = Play::new(&record[0], parse_seq(&record[1], line)?, &offense, &defense, outcome)
        .map_err(|e| match e {
            Error::Lineup(msg) => Error::Lineup(format!("line {line}: {msg}")),
            other => other,
        })?;
    if let Some(id) = play.players().find(|&id| !registry.contains(id)) {
        return Err(Error::UnknownPlayer(id));
    }
    Ok(play)
}

/// Reads a normalized play file (`game_id,seq,offense,defense,outcome`).
pub fn parse_plays(source: impl Read, registry: &PlayerRegistry) -> Result<Vec<Play>> {
    let mut plays = Vec::new();
    read_records(source, &PLAY_HEADER, |record, line| {
        let raw = record[4].trim();
        let outcome: i64 = raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad outcome {raw:?}"),
        })?;
        if !(0..OUTCOME_COUNT as i64).contains(&outcome) {
            return Err(Error::Outcome(outcome));
        }
        plays.push(build_play(record, line, outcome as usize, registry)?);
        Ok(())
    })?;
    Ok(plays)
}

/// Writes plays in the canonical normalized format.
pub fn write_plays(plays: &[Play], sink: impl Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::value(format!("{kind:?}")),
    };
    writer.write_record(PLAY_HEADER).map_err(to_err)?;
    for play in plays {
        writer
            .write_record([
                play.game_id.as_str(),
                &play.seq.to_string(),
                &format_lineup(&play.offense),
                &format_lineup(&play.defense),
                &play.outcome.to_string(),
            ])
            .map_err(to_err)?;
    }
    writer.flush()?;
    Ok(())
}

/// Result of mapping a raw feed onto the outcome classes.
#[derive(Debug, Clone, Default)]
pub struct IngestSummary {
    pub plays: Vec<Play>,
    /// Rows removed by `drop` rules (rebounds, defensive events).
    pub dropped: usize,
}

/// Reads a raw feed (`game_id,seq,offense,defense,description,made,free_throws`)
/// and classifies every row with `mapping`.
pub fn ingest_raw(
    source: impl Read,
    registry: &PlayerRegistry,
    mapping: &OutcomeMapping,
) -> Result<IngestSummary> {
    let mut summary = IngestSummary::default();
    read_records(source, &RAW_HEADER, |record, line| {
        let event = RawEvent::from_fields(&record[4], &record[5], &record[6]).map_err(|message| {
            Error::Parse { line, message }
        })?;
        match map_raw_outcome(&event, mapping)? {
            RuleAction::Drop => summary.dropped += 1,
            RuleAction::Class(class) => summary.plays.push(build_play(record, line, class, registry)?),
        }
        Ok(())
    })?;
    Ok(summary)
}

/// Which of the two recognised play-file layouts a header describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayFileKind {
    Normalized,
    Raw,
}

pub fn detect_play_file(header_line: &str) -> Option<PlayFileKind> {
    let fields: Vec<&str> = header_line.trim_end().split(',').map(str::trim).collect();
    if fields == PLAY_HEADER {
        Some(PlayFileKind::Normalized)
    } else if fields == RAW_HEADER {
        Some(PlayFileKind::Raw)
    } else {
        None
    }
}

/// Game ids in order of first appearance.
pub fn game_order(plays: &[Play]) -> Vec<&str> {
    let mut seen = HashSet::new();
    plays
        .iter()
        .filter(|p| seen.insert(p.game_id.as_str()))
        .map(|p| p.game_id.as_str())
        .collect()
}

/// Holds out every play of the final `holdout_games` games.
pub fn chronological_split(plays: Vec<Play>, holdout_games: usize) -> Result<(Vec<Play>, Vec<Play>)> {
    let order = game_order(&plays);
    if holdout_games > order.len() {
        return Err(Error::arg(format!(
            "cannot hold out {holdout_games} games from {} games",
            order.len()
        )));
    }
    let held: HashSet<String> = order[order.len() - holdout_games..]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(plays.into_iter().partition(|p| !held.contains(&p.game_id)))
}
