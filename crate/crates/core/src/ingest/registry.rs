use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use super::read_records;
use crate::error::{Error, Result};

pub const PLAYER_HEADER: [&str; 9] = [
    "player_id",
    "name",
    "position",
    "minutes",
    "fg_made",
    "threes_made",
    "assists",
    "rebounds",
    "plus_minus",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Position {
    #[serde(rename = "G")]
    Guard,
    #[serde(rename = "F")]
    Forward,
    #[serde(rename = "C")]
    Center,
    #[serde(rename = "G-F")]
    GuardForward,
    #[serde(rename = "F-C")]
    ForwardCenter,
}

impl Position {
    pub const ALL: [Position; 5] = [
        Position::Guard,
        Position::Forward,
        Position::Center,
        Position::GuardForward,
        Position::ForwardCenter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Guard => "G",
            Position::Forward => "F",
            Position::Center => "C",
            Position::GuardForward => "G-F",
            Position::ForwardCenter => "F-C",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Position::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::value(format!("unknown position {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerInfo {
    pub id: u32,
    pub name: String,
    pub position: Position,
    pub minutes: f64,
    pub fg_made: u64,
    pub threes_made: u64,
    pub assists: u64,
    pub rebounds: u64,
    pub plus_minus: i64,
}

/// Players indexed by dense id `0..len()`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlayerRegistry {
    players: Vec<PlayerInfo>,
}

impl PlayerRegistry {
    /// Builds a registry from players whose ids must be exactly `0..players.len()`
    /// in some order.
    pub fn from_players(mut players: Vec<PlayerInfo>) -> Result<Self> {
        players.sort_by_key(|p| p.id);
        for pair in players.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicatePlayer(pair[0].id));
            }
        }
        for (index, p) in players.iter().enumerate() {
            if p.id as usize != index {
                return Err(Error::value(format!(
                    "player ids must be dense 0..{}; id {index} is missing",
                    players.len()
                )));
            }
            if !(p.minutes.is_finite() && p.minutes >= 0.0) {
                return Err(Error::value(format!("player {}: minutes must be non-negative", p.id)));
            }
        }
        Ok(PlayerRegistry { players })
    }

    /// Registry of `n` placeholder players, with positions assigned round-robin.
    pub fn synthetic(n: usize) -> Self {
        let players = (0..n)
            .map(|i| PlayerInfo {
                id: i as u32,
                name: format!("Player {i:03}"),
                position: Position::ALL[i % Position::ALL.len()],
                minutes: 0.0,
                fg_made: 0,
                threes_made: 0,
                assists: 0,
                rebounds: 0,
                plus_minus: 0,
            })
            .collect();
        PlayerRegistry { players }
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        (id as usize) < self.players.len()
    }

    pub fn get(&self, id: u32) -> Option<&PlayerInfo> {
        self.players.get(id as usize)
    }

    pub fn players(&self) -> &[PlayerInfo] {
        &self.players
    }

    pub(crate) fn players_mut(&mut self) -> &mut [PlayerInfo] {
        &mut self.players
    }

    /// Case-insensitive exact name lookup.
    pub fn find_by_name(&self, name: &str) -> Option<&PlayerInfo> {
        let name = name.trim();
        self.players.iter().find(|p| p.name.eq_ignore_ascii_case(name))
    }

    /// Resolves a list of names or numeric ids; reports every unresolved entry at once.
    pub fn resolve(&self, names: &[impl AsRef<str>]) -> Result<Vec<u32>> {
        let mut ids = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for name in names {
            let name = name.as_ref();
            let id = self.find_by_name(name).map(|p| p.id).or_else(|| {
                name.trim().parse::<u32>().ok().filter(|&id| self.contains(id))
            });
            match id {
                Some(id) => ids.push(id),
                None => missing.push(name.to_string()),
            }
        }
        if missing.is_empty() {
            Ok(ids)
        } else {
            Err(Error::Resolution(missing))
        }
    }

    pub fn name_index(&self) -> HashMap<&str, u32> {
        self.players.iter().map(|p| (p.name.as_str(), p.id)).collect()
    }
}

fn parse_count(field: &str, what: &str, line: u64) -> Result<u64> {
    let value: i64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} {field:?}"),
    })?;
    u64::try_from(value).map_err(|_| Error::value(format!("line {line}: {what} is negative ({value})")))
}

/// Reads the player CSV (`player_id,name,position,minutes,fg_made,threes_made,assists,rebounds,plus_minus`).
pub fn build_registry(source: impl Read) -> Result<PlayerRegistry> {
    let mut players = Vec::new();
    read_records(source, &PLAYER_HEADER, |r, line| {
        let id: u32 = r[0].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad player_id {:?}", &r[0]),
        })?;
        let minutes: f64 = r[3].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad minutes {:?}", &r[3]),
        })?;
        if !(minutes.is_finite() && minutes >= 0.0) {
            return Err(Error::value(format!("line {line}: minutes must be non-negative ({minutes})")));
        }
        let plus_minus: i64 = r[8].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad plus_minus {:?}", &r[8]),
        })?;
        players.push(PlayerInfo {
            id,
            name: r[1].trim().to_string(),
            position: r[2].parse()?,
            minutes,
            fg_made: parse_count(&r[4], "fg_made", line)?,
            threes_made: parse_count(&r[5], "threes_made", line)?,
            assists: parse_count(&r[6], "assists", line)?,
            rebounds: parse_count(&r[7], "rebounds", line)?,
            plus_minus,
        });
        Ok(())
    })?;
    PlayerRegistry::from_players(players)
}

pub fn write_registry(registry: &PlayerRegistry, sink: impl Write) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::value(format!("{kind:?}")),
    };
    writer.write_record(PLAYER_HEADER).map_err(to_err)?;
    for p in registry.players() {
        writer
            .write_record([
                p.id.to_string(),
                p.name.clone(),
                p.position.to_string(),
                p.minutes.to_string(),
                p.fg_made.to_string(),
                p.threes_made.to_string(),
                p.assists.to_string(),
                p.rebounds.to_string(),
                p.plus_minus.to_string(),
            ])
            .map_err(to_err)?;
    }
    writer.flush()?;
    Ok(())
}
