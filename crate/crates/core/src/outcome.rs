//! The 23 possession outcome classes and their point values.

use crate::error::{Error, Result};

pub const OUTCOME_COUNT: usize = 23;

pub const TURNOVER: usize = 21;
pub const FOUL: usize = 22;

/// Human-readable description of each class, indexed by class id.
pub const OUTCOME_LABELS: [&str; OUTCOME_COUNT] = [
    "Mid-range jump shot made",
    "Mid-range jump shot missed",
    "Mid-range jump shot made + 1 free throw made",
    "Mid-range jump shot made + 1 free throw missed",
    "Close-range shot made",
    "Close-range shot missed",
    "Close-range shot made + 1 free throw made",
    "Close-range shot made + 1 free throw missed",
    "0/1 FT made",
    "1/1 FT made",
    "0/2 FT made",
    "1/2 FT made",
    "2/2 FT made",
    "0/3 FT made",
    "1/3 FT made",
    "2/3 FT made",
    "3/3 FT made",
    "3PT shot made",
    "3PT shot missed",
    "3PT shot made + 1 free throw made",
    "3PT shot made + 1 free throw missed",
    "Turnover",
    "Foul",
];

const POINTS: [u32; OUTCOME_COUNT] = [
    2, 0, 3, 2, // mid-range
    2, 0, 3, 2, // close-range
    0, 1, 0, 1, 2, 0, 1, 2, 3, // free throws only
    3, 0, 4, 3, // three-pointers
    0, 0, // turnover, foul
];

/// Coarse grouping of the classes, used for chart sections and box-score tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeGroup {
    MidRange,
    CloseRange,
    FreeThrows,
    ThreePoint,
    Other,
}

pub fn outcome_group(class: usize) -> OutcomeGroup {
    match class {
        0..=3 => OutcomeGroup::MidRange,
        4..=7 => OutcomeGroup::CloseRange,
        8..=16 => OutcomeGroup::FreeThrows,
        17..=20 => OutcomeGroup::ThreePoint,
        _ => OutcomeGroup::Other,
    }
}

/// Points scored by the offense for a possession ending in `class`.
pub fn outcome_points(class: usize) -> Result<u32> {
    POINTS
        .get(class)
        .copied()
        .ok_or(Error::Outcome(class as i64))
}

pub(crate) fn points_table() -> &'static [u32; OUTCOME_COUNT] {
    &POINTS
}

/// True when the possession ended with a made field goal (with or without an and-one).
pub fn is_made_field_goal(class: usize) -> bool {
    matches!(class, 0 | 2 | 3 | 4 | 6 | 7 | 17 | 19 | 20)
}

pub fn is_made_three(class: usize) -> bool {
    matches!(class, 17 | 19 | 20)
}

pub fn is_missed_field_goal(class: usize) -> bool {
    matches!(class, 1 | 5 | 18)
}
