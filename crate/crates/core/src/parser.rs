//! Round-trip verification: parse the constrained grammar emitted by the
//! verbalizer back into canonical codes. The grammar is induced from the
//! same template bank, so closure holds by construction.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::pipeline::{canonical_of_plan, CanonicalCode, InstructionPlan};
use crate::posecodes::{Axis, Bin, Category, Inventory};
use crate::skeleton::{KeypointSet, SkeletonDef};
use crate::subjects::{Subject, ALL_SUBJECTS};
use crate::verbalizer::{
    bin_phrase, direction_phrase, gerundize, TemplateBank,
};
use crate::Result;

// ---------------------------------------------------------------------------
// Grammar induction
// ---------------------------------------------------------------------------

const DISPLACEMENT_DIRS: &[&str] = &["left", "right", "up", "down", "front", "back"];

fn subject_class(key: &str) -> Vec<Subject> {
    use Subject::*;
    match key {
        k if k.starts_with("angle_change.") => {
            vec![LeftElbow, RightElbow, LeftKnee, RightKnee, BothElbows, BothKnees]
        }
        "distance_change.closer" | "distance_change.farther" | "bstmt.distance" => {
            vec![Hands, Feet, Knees]
        }
        "distance_change.closer2" | "distance_change.farther2" => vec![LeftHand, RightHand],
        k if k.starts_with("displacement.") => vec![
            LeftHand, RightHand, LeftElbow, RightElbow, LeftKnee, RightKnee, LeftFoot,
            RightFoot, Head, BothHands, BothElbows, BothKnees, BothFeet,
        ],
        "super.straighten_arm" | "super.bend_arm_fully" | "super.raise_arm_above_shoulder"
        | "super.lower_arm" => vec![LeftArm, RightArm],
        "super.straighten_leg" | "super.bend_leg_fully" => vec![LeftLeg, RightLeg],
        "super.kneel" => vec![LeftKnee, RightKnee],
        "bstmt.angle" => vec![LeftElbow, RightElbow, LeftKnee, RightKnee],
        "bstmt.ground_contact" => vec![LeftFoot, RightFoot, LeftKnee, RightKnee],
        _ => Vec::new(),
    }
}

fn subject2_class(key: &str) -> Vec<Subject> {
    use Subject::*;
    match key {
        "distance_change.closer2" | "distance_change.farther2" => {
            vec![LeftShoulder, RightShoulder, LeftHip, RightHip, LeftKnee, RightKnee, Head]
        }
        _ => Vec::new(),
    }
}

fn bin_class(key: &str) -> Vec<Bin> {
    match key {
        "bstmt.angle" => Category::Angle.bins().to_vec(),
        "bstmt.distance" => Category::Distance.bins().to_vec(),
        "bstmt.ground_contact" => Category::GroundContact.bins().to_vec(),
        _ => Vec::new(),
    }
}

/// Longest-first alternation so prefixes never shadow longer phrases.
fn alternation<S: AsRef<str>>(options: &[S]) -> String {
    let mut opts: Vec<&str> = options.iter().map(|s| s.as_ref()).collect();
    opts.sort_by_key(|s| std::cmp::Reverse(s.len()));
    opts.iter().map(|s| regex::escape(s)).collect::<Vec<_>>().join("|")
}

fn direction_component_pattern() -> String {
    let dirs: Vec<&str> = DISPLACEMENT_DIRS
        .iter()
        .map(|d| direction_phrase(crate::paircodes::Direction::from_name(d).unwrap()))
        .collect();
    format!("(?:(?:slightly|considerably) )?(?:{})", alternation(&dirs))
}

#[derive(Debug)]
struct GrammarRule {
    key: String,
    regex: Regex,
}

#[derive(Debug)]
pub struct Grammar {
    rules: Vec<GrammarRule>,
    /// gerund → bank verb, for unwinding "while" clauses
    degerund: BTreeMap<String, String>,
}

static CANONICAL_GRAMMAR: OnceLock<Grammar> = OnceLock::new();

impl Grammar {
    pub fn canonical() -> &'static Grammar {
        CANONICAL_GRAMMAR.get_or_init(|| {
            Grammar::from_bank(TemplateBank::canonical()).expect("shipped bank induces a grammar")
        })
    }

    pub fn from_bank(bank: &TemplateBank) -> Result<Grammar> {
        let mut rules = Vec::new();
        for (key, templates) in &bank.templates {
            let subj = subject_class(key);
            let subj2 = subject2_class(key);
            let bins = bin_class(key);
            let subj_alt = alternation(&subj.iter().map(|s| s.phrase()).collect::<Vec<_>>());
            let subj2_alt = alternation(&subj2.iter().map(|s| s.phrase()).collect::<Vec<_>>());
            let bin_alt = alternation(&bins.iter().map(|b| bin_phrase(*b)).collect::<Vec<_>>());
            let mag_pat = if key.starts_with("turn.") {
                " (?P<mag>slightly|a quarter of the way|halfway)".to_string()
            } else {
                "(?: (?P<mag>slightly|considerably))?".to_string()
            };
            for template in templates {
                // split on placeholders, escape the literal parts
                let mut pattern = String::from("^");
                let mut rest = template.as_str();
                while let Some(open) = rest.find('{') {
                    let close = match rest[open..].find('}') {
                        Some(c) => open + c,
                        None => break,
                    };
                    let mut literal = &rest[..open];
                    let placeholder = &rest[open + 1..close];
                    if placeholder == "magnitude" && literal.ends_with(' ') {
                        // the leading space is optional together with the adverb
                        literal = &literal[..literal.len() - 1];
                    }
                    pattern.push_str(&regex::escape(literal));
                    match placeholder {
                        "subject" => {
                            pattern.push_str(&format!("(?P<subj>{subj_alt})"));
                        }
                        "subject2" => {
                            pattern.push_str(&format!("(?P<subj2>{subj2_alt})"));
                        }
                        "magnitude" => pattern.push_str(&mag_pat),
                        "directions" => {
                            let comp = direction_component_pattern();
                            pattern.push_str(&format!("(?P<dirs>{comp}(?: and {comp})*)"));
                        }
                        "bin" => {
                            pattern.push_str(&format!("(?P<bin>{bin_alt})"));
                        }
                        other => {
                            return Err(crate::Error::DataFormat {
                                path: "templates".into(),
                                msg: format!("unknown placeholder {{{other}}} in key {key}"),
                            })
                        }
                    }
                    rest = &rest[close + 1..];
                }
                pattern.push_str(&regex::escape(rest));
                pattern.push('$');
                let regex = Regex::new(&format!("(?i){pattern}")).map_err(|e| {
                    crate::Error::DataFormat {
                        path: "templates".into(),
                        msg: format!("key {key}: {e}"),
                    }
                })?;
                rules.push(GrammarRule { key: key.clone(), regex });
            }
        }
        // single-direction displacement templates before the multi template,
        // so the collision (identical canonical output) resolves stably
        rules.sort_by_key(|r| r.key.ends_with(".multi"));
        let degerund = bank
            .verbs()
            .into_iter()
            .map(|v| (gerundize(&v), v))
            .collect();
        Ok(Grammar { rules, degerund })
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedEdit {
    pub kind: String,
    pub subjects: Vec<Subject>,
    pub direction: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub magnitude: Option<String>,
    /// Byte offsets of the source clause.
    pub span: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub edits: Vec<ParsedEdit>,
    pub unknown_spans: Vec<[usize; 2]>,
}

fn phrase_to_subject(phrase: &str) -> Option<Subject> {
    let lower = phrase.to_lowercase();
    ALL_SUBJECTS.iter().copied().find(|s| s.phrase() == lower)
}

fn adverb_to_magnitude(adv: Option<&str>) -> String {
    match adv.map(|a| a.to_lowercase()).as_deref() {
        Some("slightly") => "slight".to_string(),
        Some("considerably") => "significant".to_string(),
        _ => "moderate".to_string(),
    }
}

fn turn_phrase_to_magnitude(phrase: &str) -> String {
    match phrase.to_lowercase().as_str() {
        "a quarter of the way" => "quarter".to_string(),
        "halfway" => "half".to_string(),
        _ => "slight".to_string(),
    }
}

fn phrase_to_bin(phrase: &str) -> Option<Bin> {
    let lower = phrase.to_lowercase();
    [
        Bin::Straight,
        Bin::SlightlyBent,
        Bin::PartiallyBent,
        Bin::RightAngle,
        Bin::Bent,
        Bin::Close,
        Bin::ShoulderWidth,
        Bin::Normal,
        Bin::Wide,
        Bin::OnGround,
        Bin::OffGround,
    ]
    .into_iter()
    .find(|b| bin_phrase(*b) == lower)
}

fn dir_phrase_to_name(phrase: &str) -> Option<&'static str> {
    let lower = phrase.to_lowercase();
    DISPLACEMENT_DIRS.iter().copied().find(|d| {
        direction_phrase(crate::paircodes::Direction::from_name(d).unwrap()) == lower
    })
}

/// Expand a matched clause into edits. `both_*` subjects and multi-direction
/// lists expand to canonical singleton codes.
fn edits_of_match(key: &str, caps: &regex::Captures, span: [usize; 2]) -> Option<Vec<ParsedEdit>> {
    let subj = match caps.name("subj") {
        Some(m) => Some(phrase_to_subject(m.as_str())?),
        None => None,
    };
    let mag = adverb_to_magnitude(caps.name("mag").map(|m| m.as_str()));
    let singles =
        |s: Subject| -> Vec<Subject> { if s.name().starts_with("both_") { s.expand() } else { vec![s] } };

    let (kind, rest) = key.split_once('.')?;
    let mut out = Vec::new();
    match kind {
        "angle_change" => {
            for s in singles(subj?) {
                out.push(ParsedEdit {
                    kind: kind.to_string(),
                    subjects: vec![s],
                    direction: rest.to_string(),
                    magnitude: Some(mag.clone()),
                    span,
                });
            }
        }
        "distance_change" => {
            let direction = rest.trim_end_matches('2').to_string();
            let mut subjects = vec![subj?];
            if let Some(m) = caps.name("subj2") {
                subjects.push(phrase_to_subject(m.as_str())?);
            }
            out.push(ParsedEdit {
                kind: kind.to_string(),
                subjects,
                direction,
                magnitude: Some(mag),
                span,
            });
        }
        "displacement" => {
            let subjects = singles(subj?);
            if rest == "multi" {
                let dirs = caps.name("dirs")?.as_str();
                for comp in dirs.split(" and ") {
                    let (adv, dphrase) = match comp.split_once(' ') {
                        Some((first, tail))
                            if first.eq_ignore_ascii_case("slightly")
                                || first.eq_ignore_ascii_case("considerably") =>
                        {
                            (Some(first), tail)
                        }
                        _ => (None, comp),
                    };
                    let dname = dir_phrase_to_name(dphrase)?;
                    for &s in &subjects {
                        out.push(ParsedEdit {
                            kind: kind.to_string(),
                            subjects: vec![s],
                            direction: dname.to_string(),
                            magnitude: Some(adverb_to_magnitude(adv)),
                            span,
                        });
                    }
                }
            } else {
                for s in subjects {
                    out.push(ParsedEdit {
                        kind: kind.to_string(),
                        subjects: vec![s],
                        direction: rest.to_string(),
                        magnitude: Some(mag.clone()),
                        span,
                    });
                }
            }
        }
        "turn" => {
            out.push(ParsedEdit {
                kind: kind.to_string(),
                subjects: Vec::new(),
                direction: rest.to_string(),
                magnitude: Some(turn_phrase_to_magnitude(caps.name("mag")?.as_str())),
                span,
            });
        }
        "super" => {
            out.push(ParsedEdit {
                kind: kind.to_string(),
                subjects: vec![subj.unwrap_or(Subject::Body)],
                direction: rest.to_string(),
                magnitude: None,
                span,
            });
        }
        "bstmt" => {
            let bin = phrase_to_bin(caps.name("bin")?.as_str())?;
            out.push(ParsedEdit {
                kind: "bstatement".to_string(),
                subjects: vec![subj?],
                direction: bin.name().to_string(),
                magnitude: None,
                span,
            });
        }
        _ => return None,
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lead {
    Sentence,
    Then,
    While,
}

/// Split a modifier into clause spans with the transition that introduced
/// each clause.
fn split_clauses(text: &str) -> Vec<(usize, usize, Lead)> {
    const SEPS: &[(&str, Lead)] = &[(". ", Lead::Sentence), (", then ", Lead::Then), (" while ", Lead::While)];
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut lead = Lead::Sentence;
    loop {
        let rest = &text[start..];
        let next = SEPS
            .iter()
            .filter_map(|(sep, l)| rest.find(sep).map(|i| (i, sep.len(), *l)))
            .min_by_key(|(i, _, _)| *i);
        match next {
            Some((i, sep_len, next_lead)) => {
                // a sentence break keeps its period inside the clause
                let end = if next_lead == Lead::Sentence { start + i + 1 } else { start + i };
                if end > start {
                    out.push((start, end, lead));
                }
                start = start + i + sep_len;
                lead = next_lead;
            }
            None => {
                let trimmed = rest.trim_end();
                if !trimmed.is_empty() {
                    out.push((start, start + trimmed.len(), lead));
                }
                return out;
            }
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Parse a modifier; total over arbitrary input. Unknown clauses are
/// reported in the outcome, never dropped silently.
pub fn parse_modifier(text: &str, grammar: &Grammar) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    for (start, end, lead) in split_clauses(text) {
        let raw = &text[start..end];
        let mut clause = raw.trim().to_string();
        if !clause.ends_with('.') {
            clause.push('.');
        }
        if lead == Lead::While {
            // unwind the gerund back to the bank verb
            let mut known = false;
            if let Some((first, restc)) = clause.split_once(' ') {
                if let Some(base) = grammar.degerund.get(&first.to_lowercase()) {
                    clause = format!("{base} {restc}");
                    known = true;
                }
            }
            if !known {
                outcome.unknown_spans.push([start, end]);
                continue;
            }
        }
        let clause = capitalize(&clause);
        let matched = grammar.rules.iter().find_map(|rule| {
            rule.regex
                .captures(&clause)
                .and_then(|caps| edits_of_match(&rule.key, &caps, [start, end]))
        });
        match matched {
            Some(edits) => outcome.edits.extend(edits),
            None => outcome.unknown_spans.push([start, end]),
        }
    }
    outcome
}

// ---------------------------------------------------------------------------
// Round-trip check
// ---------------------------------------------------------------------------

pub fn canonical_of_edits(edits: &[ParsedEdit]) -> Vec<CanonicalCode> {
    let mut out: Vec<CanonicalCode> = edits
        .iter()
        .map(|e| CanonicalCode {
            kind: e.kind.clone(),
            subjects: e.subjects.iter().map(|s| s.name().to_string()).collect(),
            direction: e.direction.clone(),
            magnitude: e.magnitude.clone(),
        })
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub pass: bool,
    pub matched: Vec<CanonicalCode>,
    pub missing: Vec<CanonicalCode>,
    pub extra: Vec<CanonicalCode>,
    pub unknown_spans: Vec<[usize; 2]>,
}

fn multiset_diff(
    mut want: Vec<CanonicalCode>,
    mut got: Vec<CanonicalCode>,
) -> (Vec<CanonicalCode>, Vec<CanonicalCode>, Vec<CanonicalCode>) {
    want.sort();
    got.sort();
    let (mut matched, mut missing, mut extra) = (Vec::new(), Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < want.len() && j < got.len() {
        match want[i].cmp(&got[j]) {
            std::cmp::Ordering::Equal => {
                matched.push(want[i].clone());
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                missing.push(want[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                extra.push(got[j].clone());
                j += 1;
            }
        }
    }
    missing.extend_from_slice(&want[i..]);
    extra.extend_from_slice(&got[j..]);
    (matched, missing, extra)
}

/// Verbalize the plan, parse it back, and compare canonical code multisets.
pub fn roundtrip_check(
    plan: &InstructionPlan,
    bank: &TemplateBank,
    grammar: &Grammar,
    seed: u64,
) -> Result<RoundtripReport> {
    let text = crate::verbalizer::verbalize(plan, bank, seed)?;
    let outcome = parse_modifier(&text, grammar);
    let want = canonical_of_plan(plan);
    let got = canonical_of_edits(&outcome.edits);
    let (matched, missing, extra) = multiset_diff(want, got);
    Ok(RoundtripReport {
        pass: missing.is_empty() && extra.is_empty() && outcome.unknown_spans.is_empty(),
        matched,
        missing,
        extra,
        unknown_spans: outcome.unknown_spans,
    })
}

/// Geometric sign-consistency: every parsed direction must agree with the
/// sign of the recomputed delta between the stored keypoints.
pub fn check_direction_signs(
    edits: &[ParsedEdit],
    kps_a: &KeypointSet,
    kps_b: &KeypointSet,
    skel: &SkeletonDef,
    inv: &Inventory,
) -> Vec<String> {
    use crate::posecodes::measure_slot;
    let mut violations = Vec::new();
    let mut check = |ok: bool, edit: &ParsedEdit| {
        if !ok {
            violations.push(format!(
                "{} {} {:?} disagrees with the geometric delta",
                edit.kind, edit.direction, edit.subjects
            ));
        }
    };
    for edit in edits {
        match edit.kind.as_str() {
            "angle_change" => {
                let Some(slot) = inv.find(Category::Angle, edit.subjects[0]) else { continue };
                let slot = &inv.slots[slot];
                let delta = measure_slot(slot, kps_b) - measure_slot(slot, kps_a);
                check(if edit.direction == "bend" { delta < 0.0 } else { delta > 0.0 }, edit);
            }
            "distance_change" => {
                let Some(slot) = inv
                    .slots
                    .iter()
                    .find(|s| s.category == Category::Distance && s.subjects == edit.subjects)
                else {
                    continue;
                };
                let delta = measure_slot(slot, kps_b) - measure_slot(slot, kps_a);
                check(if edit.direction == "closer" { delta < 0.0 } else { delta > 0.0 }, edit);
            }
            "displacement" => {
                let Some(&(_, joint)) = crate::paircodes::DISPLACEMENT_TARGETS
                    .iter()
                    .find(|(s, _)| *s == edit.subjects[0])
                else {
                    continue;
                };
                let Some(ji) = skel.joint_index(joint) else { continue };
                let (axis, positive) = match edit.direction.as_str() {
                    "left" => (Axis::X, true),
                    "right" => (Axis::X, false),
                    "up" => (Axis::Y, true),
                    "down" => (Axis::Y, false),
                    "front" => (Axis::Z, true),
                    _ => (Axis::Z, false),
                };
                let delta =
                    kps_b.positions[ji][axis.index()] - kps_a.positions[ji][axis.index()];
                check(if positive { delta > 0.0 } else { delta < 0.0 }, edit);
            }
            _ => {}
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paircodes::{Direction, Magnitude, PairKind, Paircode};
    use crate::pipeline::PlanCode;

    fn parse(text: &str) -> ParseOutcome {
        parse_modifier(text, Grammar::canonical())
    }

    #[test]
    fn bend_left_elbow() {
        let out = parse("Bend your left elbow.");
        assert!(out.unknown_spans.is_empty());
        assert_eq!(out.edits.len(), 1);
        let e = &out.edits[0];
        assert_eq!(e.kind, "angle_change");
        assert_eq!(e.subjects, vec![Subject::LeftElbow]);
        assert_eq!(e.direction, "bend");
        assert_eq!(e.magnitude.as_deref(), Some("moderate"));
    }

    #[test]
    fn empty_text_is_empty() {
        let out = parse("");
        assert!(out.edits.is_empty() && out.unknown_spans.is_empty());
    }

    #[test]
    fn both_hands_expand() {
        let out = parse("Raise both hands.");
        assert!(out.unknown_spans.is_empty());
        let mut subs: Vec<Subject> = out.edits.iter().map(|e| e.subjects[0]).collect();
        subs.sort();
        assert_eq!(subs, vec![Subject::LeftHand, Subject::RightHand]);
        for e in &out.edits {
            assert_eq!(e.kind, "displacement");
            assert_eq!(e.direction, "up");
        }
    }

    #[test]
    fn transitions_and_gerunds() {
        let out = parse("Bend your left elbow, then raise your right hand while moving your head backward.");
        assert!(out.unknown_spans.is_empty(), "{:?}", out.unknown_spans);
        assert_eq!(out.edits.len(), 3);
        assert_eq!(out.edits[2].direction, "back");
        assert_eq!(out.edits[2].subjects, vec![Subject::Head]);
    }

    #[test]
    fn multi_direction_expands() {
        let out = parse("Move your right hand slightly up and to the left.");
        assert!(out.unknown_spans.is_empty());
        assert_eq!(out.edits.len(), 2);
        let dirs: Vec<&str> = out.edits.iter().map(|e| e.direction.as_str()).collect();
        assert!(dirs.contains(&"up") && dirs.contains(&"left"));
        let up = out.edits.iter().find(|e| e.direction == "up").unwrap();
        assert_eq!(up.magnitude.as_deref(), Some("slight"));
        let left = out.edits.iter().find(|e| e.direction == "left").unwrap();
        assert_eq!(left.magnitude.as_deref(), Some("moderate"));
    }

    #[test]
    fn unknown_clause_reported_with_span() {
        let text = "Bend your left elbow. Wave enthusiastically at the crowd.";
        let out = parse(text);
        assert_eq!(out.edits.len(), 1);
        assert_eq!(out.unknown_spans.len(), 1);
        let [s, e] = out.unknown_spans[0];
        assert_eq!(&text[s..e], "Wave enthusiastically at the crowd.");
    }

    #[test]
    fn parser_is_total_on_junk() {
        for junk in ["...", "while while while", "µ∆ø ƒ∂ß.", ", then ", "a. b. c", "\u{0}x"] {
            let _ = parse(junk);
        }
    }

    #[test]
    fn bstatement_and_turn_roundtrip_forms() {
        let out = parse("Your hands should be about shoulder width apart.");
        assert!(out.unknown_spans.is_empty());
        assert_eq!(out.edits[0].kind, "bstatement");
        assert_eq!(out.edits[0].subjects, vec![Subject::Hands]);
        assert_eq!(out.edits[0].direction, "shoulder_width");

        let out = parse("Turn a quarter of the way to the left.");
        assert_eq!(out.edits[0].kind, "turn");
        assert_eq!(out.edits[0].direction, "left");
        assert_eq!(out.edits[0].magnitude.as_deref(), Some("quarter"));
    }

    #[test]
    fn roundtrip_small_plan() {
        let plan = InstructionPlan {
            orientation: None,
            items: vec![
                PlanCode::Pair(Paircode {
                    kind: PairKind::AngleChange,
                    subjects: vec![Subject::LeftElbow],
                    direction: Direction::Bend,
                    magnitude: Magnitude::Significant,
                    axis: None,
                    raw_delta: -95.0,
                    slot_rank: 0,
                }),
                PlanCode::Pair(Paircode {
                    kind: PairKind::DistanceChange,
                    subjects: vec![Subject::LeftHand, Subject::Head],
                    direction: Direction::Closer,
                    magnitude: Magnitude::Slight,
                    axis: None,
                    raw_delta: -0.1,
                    slot_rank: 4,
                }),
            ],
            seed: 0,
        };
        for seed in 0..30 {
            let report = roundtrip_check(
                &plan,
                TemplateBank::canonical(),
                Grammar::canonical(),
                seed,
            )
            .unwrap();
            assert!(report.pass, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn empty_plan_roundtrips() {
        let plan = InstructionPlan { orientation: None, items: vec![], seed: 0 };
        let report =
            roundtrip_check(&plan, TemplateBank::canonical(), Grammar::canonical(), 5).unwrap();
        assert!(report.pass && report.matched.is_empty());
    }
}
