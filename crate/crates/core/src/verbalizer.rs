//! Surface realization: template bank, transitions with verb conjugation,
//! text-level left/right flip, and the modifier lint.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::paircodes::{Direction, Magnitude, PairKind, TurnDirection, TurnMagnitude};
use crate::pipeline::{InstructionPlan, MoveComponent, PlanCode};
use crate::posecodes::{Bin, Category};
use crate::subjects::Subject;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Template bank
// ---------------------------------------------------------------------------

/// `kind.direction | template` lines; ≥2 templates per key.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    pub templates: BTreeMap<String, Vec<String>>,
    /// Source text, hashed into dataset manifests.
    pub source: String,
}

pub const DEFAULT_BANK_TEXT: &str = include_str!("../data/templates.txt");
pub const SIDE_GUARD_TEXT: &str = include_str!("../data/side_guard.txt");

static CANONICAL_BANK: OnceLock<TemplateBank> = OnceLock::new();

impl TemplateBank {
    pub fn canonical() -> &'static TemplateBank {
        CANONICAL_BANK.get_or_init(|| {
            TemplateBank::parse(DEFAULT_BANK_TEXT).expect("shipped templates.txt is valid")
        })
    }

    pub fn parse(text: &str) -> Result<TemplateBank> {
        let mut templates: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, template) = line.split_once('|').ok_or_else(|| Error::DataFormat {
                path: "templates".into(),
                msg: format!("line {}: expected `key | template`", lineno + 1),
            })?;
            templates
                .entry(key.trim().to_string())
                .or_default()
                .push(template.trim().to_string());
        }
        for (key, list) in &templates {
            if list.len() < 2 {
                return Err(Error::DataFormat {
                    path: "templates".into(),
                    msg: format!("key {key} has fewer than two templates"),
                });
            }
        }
        Ok(TemplateBank { templates, source: text.to_string() })
    }

    pub fn get(&self, key: &str) -> Result<&[String]> {
        self.templates
            .get(key)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UncoveredCode(key.to_string()))
    }

    /// First words of verb-initial templates; the conjugation lexicon.
    pub fn verbs(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .templates
            .values()
            .flatten()
            .filter(|t| !t.starts_with('{'))
            .filter_map(|t| t.split_whitespace().next())
            .map(|w| w.to_string())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Phrase tables (shared with the parser)
// ---------------------------------------------------------------------------

pub fn magnitude_adverb(m: Magnitude) -> &'static str {
    match m {
        Magnitude::Slight => "slightly",
        Magnitude::Moderate => "",
        Magnitude::Significant => "considerably",
    }
}

pub fn turn_magnitude_phrase(m: TurnMagnitude) -> &'static str {
    match m {
        TurnMagnitude::Slight => "slightly",
        TurnMagnitude::Quarter => "a quarter of the way",
        TurnMagnitude::Half => "halfway",
    }
}

/// Surface form of a displacement direction inside a {directions} list.
pub fn direction_phrase(d: Direction) -> &'static str {
    match d {
        Direction::Left => "to the left",
        Direction::Right => "to the right",
        Direction::Up => "up",
        Direction::Down => "down",
        Direction::Front => "forward",
        Direction::Back => "backward",
        _ => unreachable!("not a displacement direction"),
    }
}

/// Surface form of a posecode bin in a b-statement.
pub fn bin_phrase(b: Bin) -> &'static str {
    match b {
        Bin::Straight => "straight",
        Bin::SlightlyBent => "slightly bent",
        Bin::PartiallyBent => "partially bent",
        Bin::RightAngle => "bent at a right angle",
        Bin::Bent => "fully bent",
        Bin::Close => "close together",
        Bin::ShoulderWidth => "about shoulder width apart",
        Bin::Normal => "a normal distance apart",
        Bin::Wide => "wide apart",
        Bin::OnGround => "on the ground",
        Bin::OffGround => "off the ground",
        Bin::Negative | Bin::Neutral | Bin::Positive => unreachable!("relpos bins are not rendered"),
    }
}

/// Template-bank key for a plan item.
pub fn template_key(item: &PlanCode) -> Result<String> {
    Ok(match item {
        PlanCode::Pair(p) => match p.kind {
            PairKind::AngleChange => format!("angle_change.{}", p.direction.name()),
            PairKind::DistanceChange => {
                if p.subjects.len() == 2 {
                    format!("distance_change.{}2", p.direction.name())
                } else {
                    format!("distance_change.{}", p.direction.name())
                }
            }
            PairKind::Displacement => format!("displacement.{}", p.direction.name()),
        },
        PlanCode::MultiMove { .. } => "displacement.multi".to_string(),
        PlanCode::Both { kind, direction, .. } => match kind {
            PairKind::AngleChange => format!("angle_change.{}", direction.name()),
            PairKind::Displacement => format!("displacement.{}", direction.name()),
            PairKind::DistanceChange => {
                return Err(Error::UncoveredCode("mirror-merged distance".into()))
            }
        },
        PlanCode::Super(s) => format!("super.{}", s.intent),
        PlanCode::BStatement(b) => match b.code.category {
            Category::Angle => "bstmt.angle".to_string(),
            Category::Distance => "bstmt.distance".to_string(),
            Category::GroundContact => "bstmt.ground_contact".to_string(),
            other => return Err(Error::UncoveredCode(format!("bstmt for {}", other.name()))),
        },
    })
}

fn directions_phrase(moves: &[MoveComponent]) -> String {
    moves
        .iter()
        .map(|m| {
            let adv = magnitude_adverb(m.magnitude);
            if adv.is_empty() {
                direction_phrase(m.direction).to_string()
            } else {
                format!("{adv} {}", direction_phrase(m.direction))
            }
        })
        .collect::<Vec<_>>()
        .join(" and ")
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Clause {
    text: String, // capitalized, trailing period
    verb_initial: bool,
}

fn fill(template: &str, subject: Option<Subject>, subject2: Option<Subject>,
        magnitude: &str, directions: &str, bin: &str) -> String {
    let mut t = template.to_string();
    // magnitude slot always follows a space in the bank; drop both when empty
    if magnitude.is_empty() {
        t = t.replace(" {magnitude}", "");
    } else {
        t = t.replace("{magnitude}", magnitude);
    }
    if let Some(s) = subject {
        t = t.replace("{subject}", s.phrase());
    }
    if let Some(s) = subject2 {
        t = t.replace("{subject2}", s.phrase());
    }
    t = t.replace("{directions}", directions);
    t = t.replace("{bin}", bin);
    let mut chars = t.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => t,
    }
}

fn render_item(item: &PlanCode, bank: &TemplateBank, rng: &mut impl Rng) -> Result<Clause> {
    let key = template_key(item)?;
    let options = bank.get(&key)?;
    let template = &options[rng.gen_range(0..options.len())];
    let verb_initial = !template.starts_with('{');
    let text = match item {
        PlanCode::Pair(p) => fill(
            template,
            Some(p.subjects[0]),
            p.subjects.get(1).copied(),
            magnitude_adverb(p.magnitude),
            "",
            "",
        ),
        PlanCode::MultiMove { subject, moves } => {
            fill(template, Some(*subject), None, "", &directions_phrase(moves), "")
        }
        PlanCode::Both { subject, magnitude, .. } => {
            fill(template, Some(*subject), None, magnitude_adverb(*magnitude), "", "")
        }
        PlanCode::Super(s) => fill(template, Some(s.subject), None, "", "", ""),
        PlanCode::BStatement(b) => fill(
            template,
            Some(b.code.subjects[0]),
            None,
            "",
            "",
            bin_phrase(b.code.bin),
        ),
    };
    Ok(Clause { text, verb_initial })
}

/// Mechanical gerund formation for the bank's verb lexicon.
pub fn gerundize(verb: &str) -> String {
    let lower = verb.to_lowercase();
    match lower.as_str() {
        "get" => return "getting".to_string(),
        "drop" => return "dropping".to_string(),
        _ => {}
    }
    if lower.ends_with('e') && !lower.ends_with("ee") {
        format!("{}ing", &lower[..lower.len() - 1])
    } else {
        format!("{lower}ing")
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn gerundize_clause(clause: &str) -> String {
    match clause.split_once(' ') {
        Some((verb, rest)) => format!("{} {rest}", gerundize(verb)),
        None => {
            // one-word clause like "Crouch down." never occurs, but stay total
            let trimmed = clause.trim_end_matches('.');
            format!("{}.", gerundize(trimmed))
        }
    }
}

/// Render an instruction plan as the final modifier text.
/// Deterministic given (plan, bank, seed); empty plan → empty text.
pub fn verbalize(plan: &InstructionPlan, bank: &TemplateBank, seed: u64) -> Result<String> {
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut clauses: Vec<Clause> = Vec::new();
    if let Some(o) = &plan.orientation {
        let key = match o.direction {
            TurnDirection::Left => "turn.left",
            TurnDirection::Right => "turn.right",
        };
        let options = bank.get(key)?;
        let template = &options[rng.gen_range(0..options.len())];
        let text = fill(template, None, None, turn_magnitude_phrase(o.magnitude), "", "");
        clauses.push(Clause { text, verb_initial: true });
    }
    for item in &plan.items {
        clauses.push(render_item(item, bank, &mut rng)?);
    }
    if clauses.is_empty() {
        return Ok(String::new());
    }

    let mut out = clauses[0].text.clone();
    let mut joins_in_sentence = 0usize;
    for window in clauses.windows(2) {
        let (prev, next) = (&window[0], &window[1]);
        // transitions other than a sentence break need an imperative on both
        // sides, and at most one join per sentence
        let choice = if !prev.verb_initial || !next.verb_initial || joins_in_sentence > 0 {
            0
        } else {
            rng.gen_range(0..3)
        };
        match choice {
            1 => {
                out.pop(); // trailing period
                out.push_str(", then ");
                out.push_str(&lowercase_first(&next.text));
                joins_in_sentence += 1;
            }
            2 => {
                out.pop();
                out.push_str(" while ");
                out.push_str(&gerundize_clause(&lowercase_first(&next.text)));
                joins_in_sentence += 1;
            }
            _ => {
                out.push(' ');
                out.push_str(&next.text);
                joins_in_sentence = 0;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text-level left/right flip
// ---------------------------------------------------------------------------

/// Collocations in which "left"/"right" is not a side word.
fn side_guards() -> &'static Vec<(String, String)> {
    static GUARDS: OnceLock<Vec<(String, String)>> = OnceLock::new();
    GUARDS.get_or_init(|| {
        SIDE_GUARD_TEXT
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .filter_map(|l| {
                let mut it = l.split_whitespace();
                Some((it.next()?.to_string(), it.next()?.to_string()))
            })
            .collect()
    })
}

/// Swap side words left↔right outside guarded collocations; involution.
pub fn lr_flip_text(text: &str) -> String {
    let words: Vec<(usize, usize)> = {
        let mut spans = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i].is_ascii_alphabetic() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                spans.push((start, i));
            } else {
                i += 1;
            }
        }
        spans
    };
    let word_at = |idx: Option<usize>| -> String {
        idx.and_then(|i| words.get(i))
            .map(|&(s, e)| text[s..e].to_lowercase())
            .unwrap_or_default()
    };
    let guards = side_guards();
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (i, &(s, e)) in words.iter().enumerate() {
        let w = &text[s..e];
        let lower = w.to_lowercase();
        if lower == "left" || lower == "right" {
            let prev = word_at(i.checked_sub(1));
            let next = word_at(Some(i + 1));
            let guarded = guards.iter().any(|(a, b)| {
                (lower == *a && next == *b) || (lower == *b && prev == *a)
            });
            if !guarded {
                let swapped = if lower == "left" { "right" } else { "left" };
                out.push_str(&text[cursor..s]);
                if w.chars().next().is_some_and(char::is_uppercase) {
                    let mut c = swapped.chars();
                    out.push(c.next().unwrap().to_ascii_uppercase());
                    out.push_str(c.as_str());
                } else {
                    out.push_str(swapped);
                }
                cursor = e;
            }
        }
    }
    out.push_str(&text[cursor..]);
    out
}

// ---------------------------------------------------------------------------
// Lint
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintProfile {
    Human,
    Auto,
}

impl std::str::FromStr for LintProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<LintProfile> {
        match s {
            "human" => Ok(LintProfile::Human),
            "auto" => Ok(LintProfile::Auto),
            other => Err(Error::Config(format!("unknown lint profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintViolation {
    pub code: String,
    pub message: String,
}

/// Body-part words counted toward the aspects rule; plural/derived forms are
/// normalized onto the stem.
const BODY_PART_STEMS: &[(&str, &str)] = &[
    ("elbow", "elbow"),
    ("elbows", "elbow"),
    ("knee", "knee"),
    ("knees", "knee"),
    ("hand", "hand"),
    ("hands", "hand"),
    ("foot", "foot"),
    ("feet", "foot"),
    ("shoulder", "shoulder"),
    ("shoulders", "shoulder"),
    ("hip", "hip"),
    ("hips", "hip"),
    ("arm", "arm"),
    ("arms", "arm"),
    ("leg", "leg"),
    ("legs", "leg"),
    ("head", "head"),
    ("body", "body"),
    ("wrist", "wrist"),
    ("wrists", "wrist"),
    ("ankle", "ankle"),
    ("ankles", "ankle"),
    ("chest", "chest"),
    ("torso", "torso"),
];

const METRIC_UNITS: &[&str] = &[
    "meter", "meters", "metre", "metres", "cm", "mm", "centimeter", "centimeters",
    "centimetre", "centimetres", "millimeter", "millimeters", "inch", "inches", "km",
];

const NUMBER_WORDS: &[&str] = &[
    "a", "an", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "half",
];

/// Check a modifier against the annotation guidelines. Violations are data,
/// not failures; the auto profile drops the word-count floor.
pub fn lint_modifier(text: &str, profile: LintProfile) -> Vec<LintViolation> {
    let mut out = Vec::new();
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();

    if profile == LintProfile::Human && words.len() < 10 {
        out.push(LintViolation {
            code: "min_words".into(),
            message: format!("{} words, need at least 10", words.len()),
        });
    }

    let mut stems: Vec<&str> = Vec::new();
    for w in &words {
        if let Some((_, stem)) = BODY_PART_STEMS.iter().find(|(form, _)| form == w) {
            if !stems.contains(stem) {
                stems.push(stem);
            }
        }
    }
    if stems.len() < 3 {
        out.push(LintViolation {
            code: "min_aspects".into(),
            message: format!("{} distinct body parts mentioned, need at least 3", stems.len()),
        });
    }

    for (i, w) in words.iter().enumerate() {
        let explicit_unit = METRIC_UNITS.contains(&w.as_str());
        // "foot"/"feet" as a unit of length: preceded by a number
        let foot_as_unit = (w == "foot" || w == "feet")
            && i > 0
            && {
                let prev = &words[i - 1];
                prev.chars().all(|c| c.is_ascii_digit()) && !prev.is_empty()
                    || NUMBER_WORDS.contains(&prev.as_str())
            };
        if explicit_unit || foot_as_unit {
            out.push(LintViolation {
                code: "metric_unit".into(),
                message: format!("distance metric token `{w}`"),
            });
        }
    }
    out
}
