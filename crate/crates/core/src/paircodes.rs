//! Classified changes between pose A and pose B: paircodes, the
//! global-orientation turn code, and the super-paircode rule engine.

use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::posecodes::{
    measure_slot, Axis, Bin, Category, FrequencyTable, Inventory, Posecode, PosecodeSet,
};
use crate::skeleton::{wrap_angle, KeypointSet, SkeletonDef};
use crate::subjects::Subject;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    AngleChange,
    DistanceChange,
    Displacement,
}

impl PairKind {
    pub fn name(self) -> &'static str {
        match self {
            PairKind::AngleChange => "angle_change",
            PairKind::DistanceChange => "distance_change",
            PairKind::Displacement => "displacement",
        }
    }

    pub fn from_name(s: &str) -> Option<PairKind> {
        Some(match s {
            "angle_change" => PairKind::AngleChange,
            "distance_change" => PairKind::DistanceChange,
            "displacement" => PairKind::Displacement,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Bend,
    Straighten,
    Closer,
    Farther,
    Left,
    Right,
    Up,
    Down,
    Front,
    Back,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Bend => "bend",
            Direction::Straighten => "straighten",
            Direction::Closer => "closer",
            Direction::Farther => "farther",
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Front => "front",
            Direction::Back => "back",
        }
    }

    pub fn from_name(s: &str) -> Option<Direction> {
        [
            Direction::Bend,
            Direction::Straighten,
            Direction::Closer,
            Direction::Farther,
            Direction::Left,
            Direction::Right,
            Direction::Up,
            Direction::Down,
            Direction::Front,
            Direction::Back,
        ]
        .into_iter()
        .find(|d| d.name() == s)
    }

    /// Direction of the reverse pair (B, A).
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Bend => Direction::Straighten,
            Direction::Straighten => Direction::Bend,
            Direction::Closer => Direction::Farther,
            Direction::Farther => Direction::Closer,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Front => Direction::Back,
            Direction::Back => Direction::Front,
        }
    }

    /// Direction after an x-mirror: only left/right swap.
    pub fn mirrored(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    Slight,
    Moderate,
    Significant,
}

impl Magnitude {
    pub fn name(self) -> &'static str {
        match self {
            Magnitude::Slight => "slight",
            Magnitude::Moderate => "moderate",
            Magnitude::Significant => "significant",
        }
    }

    pub fn from_name(s: &str) -> Option<Magnitude> {
        Some(match s {
            "slight" => Magnitude::Slight,
            "moderate" => Magnitude::Moderate,
            "significant" => Magnitude::Significant,
            _ => return None,
        })
    }
}

/// A classified change between two poses; the atomic instruction unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paircode {
    pub kind: PairKind,
    pub subjects: Vec<Subject>,
    pub direction: Direction,
    pub magnitude: Magnitude,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub axis: Option<Axis>,
    /// Raw signed delta (degrees for angle changes, fractions of H otherwise);
    /// retained for selection ranking.
    pub raw_delta: f64,
    /// Position in the fixed pair-slot inventory; deterministic tie-break key.
    pub slot_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairClass {
    Is,
    Oos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnMagnitude {
    Slight,
    Quarter,
    Half,
}

impl TurnMagnitude {
    pub fn name(self) -> &'static str {
        match self {
            TurnMagnitude::Slight => "slight",
            TurnMagnitude::Quarter => "quarter",
            TurnMagnitude::Half => "half",
        }
    }
}

/// Global-orientation change, rendered at the start of the modifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationCode {
    pub direction: TurnDirection,
    pub magnitude: TurnMagnitude,
    pub raw_yaw_delta: f64,
}

/// A higher-level instruction combining paircodes with posecode conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperPaircode {
    pub rule_id: String,
    pub intent: String,
    pub subject: Subject,
    pub consumed: Vec<Paircode>,
}

/// A rare pose-B posecode promoted into the modifier as a "should be" sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BStatement {
    pub code: Posecode,
    pub slot: usize,
}

/// Full extraction output for one pair.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CodeSet {
    pub paircodes: Vec<Paircode>,
    pub super_paircodes: Vec<SuperPaircode>,
    pub orientation: Option<OrientationCode>,
    pub b_statements: Vec<BStatement>,
}

/// Keypoints whose per-axis motion is classified as displacement paircodes.
pub const DISPLACEMENT_TARGETS: &[(Subject, &str)] = &[
    (Subject::LeftHand, "left_wrist"),
    (Subject::RightHand, "right_wrist"),
    (Subject::LeftElbow, "left_elbow"),
    (Subject::RightElbow, "right_elbow"),
    (Subject::LeftKnee, "left_knee"),
    (Subject::RightKnee, "right_knee"),
    (Subject::LeftFoot, "left_foot"),
    (Subject::RightFoot, "right_foot"),
    (Subject::Head, "head"),
];

fn angle_magnitude(abs_deg: f64, thr: &Thresholds) -> Magnitude {
    if abs_deg >= thr.pair_angle_significant_deg {
        Magnitude::Significant
    } else if abs_deg >= thr.pair_angle_moderate_deg {
        Magnitude::Moderate
    } else {
        Magnitude::Slight
    }
}

fn dist_magnitude(abs_h: f64, thr: &Thresholds) -> Magnitude {
    if abs_h >= thr.pair_dist_significant_h {
        Magnitude::Significant
    } else if abs_h >= thr.pair_dist_moderate_h {
        Magnitude::Moderate
    } else {
        Magnitude::Slight
    }
}

fn axis_direction(axis: Axis, delta: f64) -> Direction {
    match (axis, delta > 0.0) {
        (Axis::X, true) => Direction::Left,
        (Axis::X, false) => Direction::Right,
        (Axis::Y, true) => Direction::Up,
        (Axis::Y, false) => Direction::Down,
        (Axis::Z, true) => Direction::Front,
        (Axis::Z, false) => Direction::Back,
    }
}

/// Emit a paircode for every inventory slot whose delta exceeds its
/// significance threshold. Both keypoint sets must already be
/// orientation-normalized per the pair's IS/OOS convention.
pub fn compute_paircodes(
    kps_a: &KeypointSet,
    kps_b: &KeypointSet,
    skel: &SkeletonDef,
    inv: &Inventory,
    thr: &Thresholds,
) -> Result<Vec<Paircode>> {
    let n = skel.joint_names.len();
    if kps_a.positions.len() != n || kps_b.positions.len() != n {
        return Err(Error::SkeletonMismatch("keypoint set size differs from skeleton".into()));
    }
    let h = skel.height;
    let mut out = Vec::new();
    let mut rank = 0usize;

    for slot in &inv.slots {
        match slot.category {
            Category::Angle => {
                let delta = measure_slot(slot, kps_b) - measure_slot(slot, kps_a);
                if delta.abs() >= thr.pair_angle_sig_deg {
                    out.push(Paircode {
                        kind: PairKind::AngleChange,
                        subjects: slot.subjects.clone(),
                        direction: if delta > 0.0 { Direction::Straighten } else { Direction::Bend },
                        magnitude: angle_magnitude(delta.abs(), thr),
                        axis: None,
                        raw_delta: delta,
                        slot_rank: rank,
                    });
                }
                rank += 1;
            }
            Category::Distance => {
                let delta = (measure_slot(slot, kps_b) - measure_slot(slot, kps_a)) / h;
                if delta.abs() >= thr.pair_dist_sig_h {
                    out.push(Paircode {
                        kind: PairKind::DistanceChange,
                        subjects: slot.subjects.clone(),
                        direction: if delta > 0.0 { Direction::Farther } else { Direction::Closer },
                        magnitude: dist_magnitude(delta.abs(), thr),
                        axis: None,
                        raw_delta: delta,
                        slot_rank: rank,
                    });
                }
                rank += 1;
            }
            _ => {}
        }
    }

    for (subject, joint) in DISPLACEMENT_TARGETS {
        let ji = skel
            .joint_index(joint)
            .ok_or_else(|| Error::SkeletonMismatch(format!("missing joint {joint}")))?;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let delta =
                (kps_b.positions[ji][axis.index()] - kps_a.positions[ji][axis.index()]) / h;
            if delta.abs() >= thr.pair_dist_sig_h {
                out.push(Paircode {
                    kind: PairKind::Displacement,
                    subjects: vec![*subject],
                    direction: axis_direction(axis, delta),
                    magnitude: dist_magnitude(delta.abs(), thr),
                    axis: Some(axis),
                    raw_delta: delta,
                    slot_rank: rank,
                });
            }
            rank += 1;
        }
    }
    Ok(out)
}

/// Turn code for IS pairs whose yaw change exceeds the orientation threshold.
/// OOS pairs never emit: both poses are normalized independently.
pub fn orientation_change_code(
    yaw_a: f64,
    yaw_b: f64,
    pair_class: PairClass,
    thr: &Thresholds,
) -> Option<OrientationCode> {
    if pair_class == PairClass::Oos {
        return None;
    }
    let delta = wrap_angle(yaw_b - yaw_a);
    let deg = delta.abs().to_degrees();
    if deg <= thr.orient_threshold_deg {
        return None;
    }
    let magnitude = if deg >= thr.orient_half_deg {
        TurnMagnitude::Half
    } else if deg >= thr.orient_quarter_deg {
        TurnMagnitude::Quarter
    } else {
        TurnMagnitude::Slight
    };
    Some(OrientationCode {
        // positive yaw delta is a counterclockwise rotation viewed from above
        direction: if delta > 0.0 { TurnDirection::Left } else { TurnDirection::Right },
        magnitude,
        raw_yaw_delta: delta,
    })
}

// ---------------------------------------------------------------------------
// Super-paircode rule table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PaircodeCond {
    pub kind: PairKind,
    pub subject: Subject,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseSide {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosecodeCond {
    pub side: PoseSide,
    pub category: Category,
    pub subject: Subject,
    pub bins: Vec<Bin>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleEffect {
    /// Consume the matched paircodes and emit one super-paircode.
    Super { intent: String },
    /// Keep the gated paircode only if the remaining conditions hold.
    Gate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    pub effect: RuleEffect,
    pub subject: Subject,
    pub paircode_conds: Vec<PaircodeCond>,
    pub posecode_conds: Vec<PosecodeCond>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    pub rules: Vec<Rule>,
}

pub const DEFAULT_RULES_TEXT: &str = include_str!("../data/rules.txt");

static CANONICAL_RULES: std::sync::OnceLock<RuleTable> = std::sync::OnceLock::new();

impl RuleTable {
    pub fn canonical() -> &'static RuleTable {
        CANONICAL_RULES
            .get_or_init(|| RuleTable::parse(DEFAULT_RULES_TEXT).expect("shipped rules.txt is valid"))
    }

    pub fn parse(text: &str) -> Result<RuleTable> {
        let bad = |lineno: usize, msg: String| Error::DataFormat {
            path: "rules".into(),
            msg: format!("line {}: {msg}", lineno + 1),
        };
        let mut rules: Vec<Rule> = Vec::new();
        let mut current: Option<Rule> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                if let Some(r) = current.take() {
                    rules.push(r);
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "rule" => {
                    if let Some(r) = current.take() {
                        rules.push(r);
                    }
                    let (effect, subject) = match tokens.as_slice() {
                        ["rule", _, "super", intent, subject] => (
                            RuleEffect::Super { intent: intent.to_string() },
                            *subject,
                        ),
                        ["rule", _, "gate", subject] => (RuleEffect::Gate, *subject),
                        _ => return Err(bad(lineno, format!("bad rule header `{line}`"))),
                    };
                    let subject = Subject::from_name(subject)
                        .ok_or_else(|| bad(lineno, format!("unknown subject `{subject}`")))?;
                    current = Some(Rule {
                        id: tokens[1].to_string(),
                        effect,
                        subject,
                        paircode_conds: Vec::new(),
                        posecode_conds: Vec::new(),
                    });
                }
                "when" => {
                    let rule = current
                        .as_mut()
                        .ok_or_else(|| bad(lineno, "`when` outside a rule".into()))?;
                    match tokens.as_slice() {
                        ["when", "paircode", kind, subject, direction] => {
                            rule.paircode_conds.push(PaircodeCond {
                                kind: PairKind::from_name(kind)
                                    .ok_or_else(|| bad(lineno, format!("unknown kind `{kind}`")))?,
                                subject: Subject::from_name(subject)
                                    .ok_or_else(|| bad(lineno, format!("unknown subject `{subject}`")))?,
                                direction: Direction::from_name(direction).ok_or_else(|| {
                                    bad(lineno, format!("unknown direction `{direction}`"))
                                })?,
                            });
                        }
                        ["when", src @ ("posecode_a" | "posecode_b"), category, subject, bins] => {
                            let side = if *src == "posecode_a" { PoseSide::A } else { PoseSide::B };
                            let category = Category::from_name(category)
                                .ok_or_else(|| bad(lineno, format!("unknown category `{category}`")))?;
                            let subject = Subject::from_name(subject)
                                .ok_or_else(|| bad(lineno, format!("unknown subject `{subject}`")))?;
                            let bins = bins
                                .split('|')
                                .map(|b| {
                                    Bin::from_name(b)
                                        .ok_or_else(|| bad(lineno, format!("unknown bin `{b}`")))
                                })
                                .collect::<Result<Vec<_>>>()?;
                            rule.posecode_conds.push(PosecodeCond { side, category, subject, bins });
                        }
                        _ => return Err(bad(lineno, format!("bad condition `{line}`"))),
                    }
                }
                other => return Err(bad(lineno, format!("unknown keyword `{other}`"))),
            }
        }
        if let Some(r) = current.take() {
            rules.push(r);
        }
        for r in &rules {
            let total = r.paircode_conds.len() + r.posecode_conds.len();
            if total < 2 {
                return Err(Error::DataFormat {
                    path: "rules".into(),
                    msg: format!("rule {} has fewer than two conditions", r.id),
                });
            }
            if r.paircode_conds.is_empty() {
                return Err(Error::DataFormat {
                    path: "rules".into(),
                    msg: format!("rule {} has no paircode condition", r.id),
                });
            }
        }
        Ok(RuleTable { rules })
    }
}

fn posecode_cond_holds(
    cond: &PosecodeCond,
    pc_a: &PosecodeSet,
    pc_b: &PosecodeSet,
    inv: &Inventory,
) -> bool {
    let Some(slot) = inv.find(cond.category, cond.subject) else {
        return false;
    };
    let bin = match cond.side {
        PoseSide::A => pc_a.bins[slot],
        PoseSide::B => pc_b.bins[slot],
    };
    cond.bins.contains(&bin)
}

/// Apply the rule table in order, then promote rare pose-B posecodes to
/// b-statements. Consumed paircodes leave the standalone list.
pub fn apply_superpaircode_rules(
    paircodes: Vec<Paircode>,
    orientation: Option<OrientationCode>,
    pc_a: &PosecodeSet,
    pc_b: &PosecodeSet,
    freq: &FrequencyTable,
    inv: &Inventory,
    thr: &Thresholds,
    rules: &RuleTable,
) -> CodeSet {
    let mut alive: Vec<Option<Paircode>> = paircodes.into_iter().map(Some).collect();
    let mut supers = Vec::new();

    for rule in &rules.rules {
        let pose_ok = rule
            .posecode_conds
            .iter()
            .all(|c| posecode_cond_holds(c, pc_a, pc_b, inv));
        // match each paircode condition against a distinct live code
        let mut matched: Vec<usize> = Vec::new();
        let all_matched = rule.paircode_conds.iter().all(|cond| {
            let found = (0..alive.len()).find(|&i| {
                !matched.contains(&i)
                    && alive[i].as_ref().is_some_and(|p| {
                        p.kind == cond.kind
                            && p.subjects[0] == cond.subject
                            && p.direction == cond.direction
                    })
            });
            match found {
                Some(i) => {
                    matched.push(i);
                    true
                }
                None => false,
            }
        });
        match &rule.effect {
            RuleEffect::Super { intent } => {
                if all_matched && pose_ok {
                    let consumed: Vec<Paircode> =
                        matched.iter().map(|&i| alive[i].take().unwrap()).collect();
                    supers.push(SuperPaircode {
                        rule_id: rule.id.clone(),
                        intent: intent.clone(),
                        subject: rule.subject,
                        consumed,
                    });
                }
            }
            RuleEffect::Gate => {
                // gated code is the first paircode condition; drop it unless
                // the remaining conditions hold
                if all_matched && !pose_ok {
                    alive[matched[0]] = None;
                }
            }
        }
    }

    let mut b_statements = Vec::new();
    for (slot_idx, slot) in inv.slots.iter().enumerate() {
        let renderable = match slot.category {
            Category::Angle | Category::GroundContact => true,
            // only the pair-noun distance slots have a b-statement surface form
            Category::Distance => slot.subjects.len() == 1,
            _ => false,
        };
        if !renderable {
            continue;
        }
        let bin = pc_b.bins[slot_idx];
        if freq.is_rare(slot_idx, bin, thr) {
            b_statements.push(BStatement {
                code: Posecode { category: slot.category, subjects: slot.subjects.clone(), bin },
                slot: slot_idx,
            });
        }
    }

    CodeSet {
        paircodes: alive.into_iter().flatten().collect(),
        super_paircodes: supers,
        orientation,
        b_statements,
    }
}
