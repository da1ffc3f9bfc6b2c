use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::outcome::OUTCOME_COUNT;

const DEFAULT_RULES: &str = include_str!("../../data/default_rules.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MadeFlag {
    Made,
    Missed,
    /// Not a shot (turnover, foul, free-throw trip).
    NotApplicable,
}

impl FromStr for MadeFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "made" => Ok(MadeFlag::Made),
            "missed" => Ok(MadeFlag::Missed),
            "-" | "" | "–" => Ok(MadeFlag::NotApplicable),
            other => Err(format!("bad made flag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeThrows {
    pub made: u8,
    pub attempted: u8,
}

impl FreeThrows {
    pub fn new(made: u8, attempted: u8) -> Self {
        FreeThrows { made, attempted }
    }
}

impl fmt::Display for FreeThrows {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.made, self.attempted)
    }
}

fn parse_free_throws(s: &str) -> std::result::Result<Option<FreeThrows>, String> {
    let s = s.trim();
    if matches!(s, "-" | "" | "–") {
        return Ok(None);
    }
    let (made, attempted) = s.split_once('/').ok_or_else(|| format!("bad free-throw result {s:?}"))?;
    let made: u8 = made.trim().parse().map_err(|_| format!("bad free-throw result {s:?}"))?;
    let attempted: u8 = attempted.trim().parse().map_err(|_| format!("bad free-throw result {s:?}"))?;
    if made > attempted || attempted == 0 {
        return Err(format!("bad free-throw result {s:?}"));
    }
    Ok(Some(FreeThrows { made, attempted }))
}

/// A raw play-by-play event before classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub description: String,
    pub made: MadeFlag,
    pub free_throws: Option<FreeThrows>,
}

impl RawEvent {
    pub fn new(description: impl Into<String>, made: MadeFlag, free_throws: Option<FreeThrows>) -> Self {
        RawEvent {
            description: description.into(),
            made,
            free_throws,
        }
    }

    pub(crate) fn from_fields(description: &str, made: &str, free_throws: &str) -> std::result::Result<Self, String> {
        Ok(RawEvent {
            description: description.trim().to_string(),
            made: made.parse()?,
            free_throws: parse_free_throws(free_throws)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pattern {
    Any,
    Exact(String),
    Contains(String),
}

impl Pattern {
    fn matches(&self, description: &str) -> bool {
        let description = description.to_lowercase();
        match self {
            Pattern::Any => true,
            Pattern::Exact(p) => description == *p,
            Pattern::Contains(p) => description.contains(p.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FreeThrowMatch {
    Any,
    None,
    Exact(FreeThrows),
}

/// What a matching rule does with the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleAction {
    Class(usize),
    /// Remove the event from the corpus (rebounds, defensive plays).
    Drop,
}

/// `pattern|made_flag|ft_spec|class`.
///
/// `pattern` is a case-insensitive substring, `=text` for an exact match or
/// `*` for anything. `made_flag` is `made`, `missed`, `-` or `*`. `ft_spec` is
/// `k/m`, `-` (no free throws) or `*`. `class` is `0..=22` or `drop`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeRule {
    pattern: Pattern,
    made: Option<MadeFlag>,
    free_throws: FreeThrowMatch,
    pub action: RuleAction,
}

impl OutcomeRule {
    fn matches(&self, event: &RawEvent) -> bool {
        self.made.is_none_or(|m| m == event.made)
            && match self.free_throws {
                FreeThrowMatch::Any => true,
                FreeThrowMatch::None => event.free_throws.is_none(),
                FreeThrowMatch::Exact(ft) => event.free_throws == Some(ft),
            }
            && self.pattern.matches(&event.description)
    }
}

impl FromStr for OutcomeRule {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [pattern, made, ft, class] = fields[..] else {
            return Err(format!("expected 4 '|'-separated fields, got {}", fields.len()));
        };
        let pattern = match pattern {
            "" => return Err("empty pattern".into()),
            "*" => Pattern::Any,
            p => match p.strip_prefix('=') {
                Some(exact) => Pattern::Exact(exact.to_lowercase()),
                None => Pattern::Contains(p.to_lowercase()),
            },
        };
        let made = match made {
            "*" => None,
            m => Some(m.parse()?),
        };
        let free_throws = match ft {
            "*" => FreeThrowMatch::Any,
            spec => match parse_free_throws(spec)? {
                None => FreeThrowMatch::None,
                Some(ft) => FreeThrowMatch::Exact(ft),
            },
        };
        let action = if class.eq_ignore_ascii_case("drop") {
            RuleAction::Drop
        } else {
            let c: usize = class.parse().map_err(|_| format!("bad class {class:?}"))?;
            if c >= OUTCOME_COUNT {
                return Err(format!("class {c} is outside 0..=22"));
            }
            RuleAction::Class(c)
        };
        Ok(OutcomeRule {
            pattern,
            made,
            free_throws,
            action,
        })
    }
}

/// Ordered rule list; the first matching rule wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMapping {
    rules: Vec<OutcomeRule>,
}

impl OutcomeMapping {
    /// Parses a rules file. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (index, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rule = line.parse().map_err(|message| Error::Parse {
                line: index as u64 + 1,
                message,
            })?;
            rules.push(rule);
        }
        if rules.is_empty() {
            return Err(Error::value("outcome mapping has no rules"));
        }
        Ok(OutcomeMapping { rules })
    }

    pub fn default_rules() -> Self {
        Self::parse(DEFAULT_RULES).expect("bundled rules parse")
    }

    pub fn default_rules_text() -> &'static str {
        DEFAULT_RULES
    }

    pub fn rules(&self) -> &[OutcomeRule] {
        &self.rules
    }
}

pub fn map_raw_outcome(event: &RawEvent, mapping: &OutcomeMapping) -> Result<RuleAction> {
    mapping
        .rules
        .iter()
        .find(|rule| rule.matches(event))
        .map(|rule| rule.action)
        .ok_or_else(|| {
            let ft = event.free_throws.map_or("-".to_string(), |ft| ft.to_string());
            Error::UnmappedEvent(format!("{} ({:?}, free throws {ft})", event.description, event.made))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(description: &str, made: MadeFlag, ft: Option<(u8, u8)>) -> RuleAction {
        let event = RawEvent::new(description, made, ft.map(|(m, a)| FreeThrows::new(m, a)));
        map_raw_outcome(&event, &OutcomeMapping::default_rules()).unwrap()
    }

    #[test]
    fn documented_examples() {
        assert_eq!(classify("driving layup shot", MadeFlag::Made, None), RuleAction::Class(4));
        assert_eq!(classify("turnover", MadeFlag::NotApplicable, None), RuleAction::Class(21));
        assert_eq!(classify("jump shot", MadeFlag::Made, Some((1, 1))), RuleAction::Class(2));
    }

    #[test]
    fn close_range_family_groups_together() {
        for d in ["driving layup shot", "dunk shot", "reverse dunk shot", "hook shot"] {
            assert_eq!(classify(d, MadeFlag::Made, None), RuleAction::Class(4), "{d}");
            assert_eq!(classify(d, MadeFlag::Missed, None), RuleAction::Class(5), "{d}");
            assert_eq!(classify(d, MadeFlag::Made, Some((1, 1))), RuleAction::Class(6), "{d}");
            assert_eq!(classify(d, MadeFlag::Made, Some((0, 1))), RuleAction::Class(7), "{d}");
        }
    }

    #[test]
    fn three_pointers_beat_jump_shots() {
        assert_eq!(classify("3pt jump shot", MadeFlag::Made, None), RuleAction::Class(17));
        assert_eq!(classify("3PT Jump Shot", MadeFlag::Missed, None), RuleAction::Class(18));
        assert_eq!(classify("3pt pullup jump shot", MadeFlag::Made, Some((1, 1))), RuleAction::Class(19));
        assert_eq!(classify("3pt step back jump shot", MadeFlag::Made, Some((0, 1))), RuleAction::Class(20));
    }

    #[test]
    fn free_throw_trips() {
        let expected = [((0, 1), 8), ((1, 1), 9), ((0, 2), 10), ((1, 2), 11), ((2, 2), 12),
                        ((0, 3), 13), ((1, 3), 14), ((2, 3), 15), ((3, 3), 16)];
        for ((made, att), class) in expected {
            assert_eq!(classify("free throw", MadeFlag::NotApplicable, Some((made, att))), RuleAction::Class(class));
            assert_eq!(classify("jump shot", MadeFlag::Missed, Some((made, att))), RuleAction::Class(class));
        }
    }

    #[test]
    fn drops_rebounds_and_defensive_events() {
        assert_eq!(classify("offensive rebound", MadeFlag::NotApplicable, None), RuleAction::Drop);
        assert_eq!(classify("block", MadeFlag::NotApplicable, None), RuleAction::Drop);
        assert_eq!(classify("personal foul", MadeFlag::NotApplicable, None), RuleAction::Class(22));
    }

    #[test]
    fn first_matching_rule_wins() {
        let mapping = OutcomeMapping::parse("shot|*|*|1\n=dunk shot|*|*|4\n").unwrap();
        let event = RawEvent::new("dunk shot", MadeFlag::Made, None);
        assert_eq!(map_raw_outcome(&event, &mapping).unwrap(), RuleAction::Class(1));
    }

    #[test]
    fn exact_patterns_need_whole_description() {
        let mapping = OutcomeMapping::parse("=dunk|made|-|4\n").unwrap();
        assert!(map_raw_outcome(&RawEvent::new("Dunk", MadeFlag::Made, None), &mapping).is_ok());
        let err = map_raw_outcome(&RawEvent::new("dunk shot", MadeFlag::Made, None), &mapping).unwrap_err();
        assert!(matches!(err, Error::UnmappedEvent(ref d) if d.contains("dunk shot")));
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(OutcomeMapping::parse("shot|made|-|23\n").is_err());
        assert!(OutcomeMapping::parse("shot|made|-\n").is_err());
        assert!(OutcomeMapping::parse("shot|sometimes|-|1\n").is_err());
        assert!(OutcomeMapping::parse("shot|made|3/2|1\n").is_err());
        assert!(OutcomeMapping::parse("# only a comment\n").is_err());
    }
}
