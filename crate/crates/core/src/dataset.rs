//! End-to-end triplet generation, manifests, statistics, and the round-trip
//! audit over emitted files.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Thresholds;
use crate::paircodes::{
    apply_superpaircode_rules, compute_paircodes, orientation_change_code, PairClass, RuleTable,
};
use crate::pairselect::{PairSpec, PairWay, PoseCorpus};
use crate::parser::{canonical_of_edits, parse_modifier, Grammar};
use crate::pipeline::{
    aggregate_codes, canonical_of_plan, order_codes, select_codes, BodyPartGraph, CanonicalCode,
    PlanSet,
};
use crate::posecodes::{build_frequency_table, compute_posecodes, FrequencyTable, Inventory};
use crate::skeleton::{forward_kinematics, normalize_orientation, Pose, PoseJson, SkeletonDef};
use crate::verbalizer::{lint_modifier, verbalize, LintProfile, LintViolation, TemplateBank};
use crate::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Records and manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TripletRecord {
    pub pair_id: u64,
    pub kind: PairClass,
    pub way: PairWay,
    pub pose_a: PoseJson,
    pub pose_b: PoseJson,
    pub text: String,
    pub seed: u64,
    pub codes: Vec<CanonicalCode>,
    pub lint: Vec<LintViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetManifest {
    pub global_seed: u64,
    pub thresholds: Thresholds,
    pub rules_sha256: String,
    pub bank_sha256: String,
    pub counts: DatasetCounts,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetCounts {
    pub records: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub by_way: BTreeMap<String, usize>,
    pub empty_text: usize,
}

fn sha256_hex(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    format!("{:x}", h.finalize())
}

// ---------------------------------------------------------------------------
// Per-pair pipeline
// ---------------------------------------------------------------------------

/// Everything immutable shared across pair generation.
pub struct Engine<'a> {
    pub skel: &'a SkeletonDef,
    pub inv: &'a Inventory,
    pub thr: &'a Thresholds,
    pub rules: &'a RuleTable,
    pub bank: &'a TemplateBank,
    pub graph: &'a BodyPartGraph,
    pub freq: FrequencyTable,
}

impl<'a> Engine<'a> {
    pub fn with_uniform_frequencies(
        skel: &'a SkeletonDef,
        inv: &'a Inventory,
        thr: &'a Thresholds,
    ) -> Engine<'a> {
        Engine {
            skel,
            inv,
            thr,
            rules: RuleTable::canonical(),
            bank: TemplateBank::canonical(),
            graph: BodyPartGraph::canonical(),
            freq: FrequencyTable::uniform(inv),
        }
    }

    /// Run the full modifier pipeline for one pose pair.
    /// In-sequence pairs share pose A's frame so the turn code survives;
    /// out-of-sequence pairs are orientation-normalized independently.
    pub fn describe_pair(
        &self,
        pose_a: &Pose,
        pose_b: &Pose,
        class: PairClass,
        seed: u64,
    ) -> Result<(String, crate::pipeline::InstructionPlan)> {
        let (norm_a, yaw_a) = normalize_orientation(pose_a, self.skel)?;
        let (norm_b, yaw_b) = normalize_orientation(pose_b, self.skel)?;
        let effective_b = match class {
            PairClass::Is => {
                let mut b = pose_b.clone();
                b.root_yaw = crate::skeleton::wrap_angle(b.root_yaw - yaw_a);
                b
            }
            PairClass::Oos => norm_b,
        };
        let kps_a = forward_kinematics(&norm_a, self.skel)?;
        let kps_b = forward_kinematics(&effective_b, self.skel)?;
        let pc_a = compute_posecodes(&kps_a, self.skel, self.inv, self.thr);
        let pc_b = compute_posecodes(&kps_b, self.skel, self.inv, self.thr);
        let paircodes = compute_paircodes(&kps_a, &kps_b, self.skel, self.inv, self.thr)?;
        let orientation = orientation_change_code(yaw_a, yaw_b, class, self.thr);
        let codeset = apply_superpaircode_rules(
            paircodes,
            orientation,
            &pc_a,
            &pc_b,
            &self.freq,
            self.inv,
            self.thr,
            self.rules,
        );
        let plan_set = PlanSet::from_codes(&codeset);
        let selected = select_codes(&plan_set, self.thr.select_cap, self.thr, self.graph)?;
        let aggregated = aggregate_codes(&selected);
        let plan = order_codes(&aggregated, self.graph, seed)?;
        let text = verbalize(&plan, self.bank, seed)?;
        Ok((text, plan))
    }
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Generate one record per pair. Parallel over pairs; output order follows
/// the input order, and per-pair seeds depend only on (globalSeed, pairId),
/// so sharding cannot change the bytes.
pub fn generate_records(
    corpus: &PoseCorpus,
    pairs: &[PairSpec],
    engine: &Engine,
    global_seed: u64,
) -> Result<Vec<TripletRecord>> {
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let pair_id = i as u64;
            let seed = crate::rng::pair_seed(global_seed, pair_id);
            let pose_a = &corpus.entries[p.id_a].pose;
            let pose_b = &corpus.entries[p.id_b].pose;
            let (text, plan) = engine.describe_pair(pose_a, pose_b, p.kind, seed)?;
            let codes = canonical_of_plan(&plan);
            let lint = lint_modifier(&text, LintProfile::Auto);
            Ok(TripletRecord {
                pair_id,
                kind: p.kind,
                way: p.way,
                pose_a: pose_a.to_json_value(),
                pose_b: pose_b.to_json_value(),
                text,
                seed,
                codes,
                lint,
            })
        })
        .collect()
}

pub fn manifest_for(
    records: &[TripletRecord],
    engine: &Engine,
    global_seed: u64,
) -> DatasetManifest {
    let mut counts = DatasetCounts { records: records.len(), ..Default::default() };
    for r in records {
        let kind = match r.kind {
            PairClass::Is => "is",
            PairClass::Oos => "oos",
        };
        let way = match r.way {
            PairWay::One => "one",
            PairWay::Two => "two",
        };
        *counts.by_kind.entry(kind.to_string()).or_insert(0) += 1;
        *counts.by_way.entry(way.to_string()).or_insert(0) += 1;
        if r.text.is_empty() {
            counts.empty_text += 1;
        }
    }
    DatasetManifest {
        global_seed,
        thresholds: engine.thr.clone(),
        rules_sha256: sha256_hex(crate::paircodes::DEFAULT_RULES_TEXT),
        bank_sha256: sha256_hex(&engine.bank.source),
        counts,
        version: TOOL_VERSION.to_string(),
    }
}

pub fn write_records(records: &[TripletRecord], path: &Path) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<TripletRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Corpus-wide posecode frequency table for b-statement rarity.
pub fn corpus_frequencies(
    features: &crate::pairselect::PoseFeatures,
    inv: &Inventory,
) -> Result<FrequencyTable> {
    build_frequency_table(&features.posecodes, inv)
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetStats {
    pub records: usize,
    pub mean_words: f64,
    pub vocab_size: usize,
    pub mean_body_parts: f64,
    pub empty_text_rate: f64,
    pub by_kind: BTreeMap<String, usize>,
    pub by_way: BTreeMap<String, usize>,
}

fn text_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

const BODY_PART_WORDS: &[&str] = &[
    "elbow", "elbows", "knee", "knees", "hand", "hands", "foot", "feet", "shoulder",
    "shoulders", "hip", "hips", "arm", "arms", "leg", "legs", "head", "body",
];

fn stem(word: &str) -> &str {
    match word {
        "feet" => "foot",
        w => w.strip_suffix('s').unwrap_or(w),
    }
}

/// Distinct body-part stems mentioned in a text.
pub fn body_part_mentions(text: &str) -> usize {
    let mut stems: Vec<&str> = Vec::new();
    for w in text_words(text) {
        if let Some(&hit) = BODY_PART_WORDS.iter().find(|&&p| p == w) {
            let s = stem(hit);
            if !stems.contains(&s) {
                stems.push(s);
            }
        }
    }
    stems.len()
}

/// Single-pass fold over records; chunks merge associatively, so this is
/// safe to parallelize by shard.
pub fn dataset_stats(records: &[TripletRecord]) -> DatasetStats {
    let mut total_words = 0usize;
    let mut total_parts = 0usize;
    let mut vocab: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut empty = 0usize;
    let mut by_kind = BTreeMap::new();
    let mut by_way = BTreeMap::new();
    for r in records {
        let words = text_words(&r.text);
        total_words += words.len();
        vocab.extend(words);
        total_parts += body_part_mentions(&r.text);
        if r.text.is_empty() {
            empty += 1;
        }
        let kind = match r.kind {
            PairClass::Is => "is",
            PairClass::Oos => "oos",
        };
        let way = match r.way {
            PairWay::One => "one",
            PairWay::Two => "two",
        };
        *by_kind.entry(kind.to_string()).or_insert(0) += 1;
        *by_way.entry(way.to_string()).or_insert(0) += 1;
    }
    let n = records.len().max(1) as f64;
    DatasetStats {
        records: records.len(),
        mean_words: total_words as f64 / n,
        vocab_size: vocab.len(),
        mean_body_parts: total_parts as f64 / n,
        empty_text_rate: empty as f64 / n,
        by_kind,
        by_way,
    }
}

// ---------------------------------------------------------------------------
// Round-trip audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditReport {
    pub records: usize,
    pub passed: usize,
    pub failures: Vec<AuditFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditFailure {
    pub pair_id: u64,
    pub missing: Vec<CanonicalCode>,
    pub extra: Vec<CanonicalCode>,
    pub unknown_spans: Vec<[usize; 2]>,
}

/// Parse every record's text and compare against its stored canonical codes.
pub fn audit_roundtrip(records: &[TripletRecord], grammar: &Grammar) -> AuditReport {
    let failures: Vec<AuditFailure> = records
        .par_iter()
        .filter_map(|r| {
            let outcome = parse_modifier(&r.text, grammar);
            let got = canonical_of_edits(&outcome.edits);
            let mut want = r.codes.clone();
            want.sort();
            if want == got && outcome.unknown_spans.is_empty() {
                return None;
            }
            let missing = want.iter().filter(|c| !got.contains(c)).cloned().collect();
            let extra = got.iter().filter(|c| !want.contains(c)).cloned().collect();
            Some(AuditFailure {
                pair_id: r.pair_id,
                missing,
                extra,
                unknown_spans: outcome.unknown_spans,
            })
        })
        .collect();
    AuditReport {
        records: records.len(),
        passed: records.len() - failures.len(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairselect::{build_pairs, compute_features, farthest_point_sample};

    fn small_run(seed: u64) -> (PoseCorpus, Vec<PairSpec>, Thresholds) {
        let mut rng = crate::rng::rng_from_seed(seed);
        let seqs = (0..4)
            .map(|i| {
                (
                    format!("seq{i:04}"),
                    crate::synthetic::random_sequence(&mut rng, 30, 10.0, 0.35),
                )
            })
            .collect();
        let corpus = PoseCorpus::from_sequences(seqs).unwrap();
        let mut thr = Thresholds::default();
        thr.pairsel_min_diff_is = 3;
        thr.pairsel_min_diff_oos = 5;
        let features = compute_features(
            &corpus,
            SkeletonDef::canonical(),
            Inventory::canonical(),
            &thr,
        )
        .unwrap();
        let sampled = farthest_point_sample(&features, 80, seed).unwrap();
        let (pairs, _) = build_pairs(&corpus, &features, &sampled, &thr);
        (corpus, pairs, thr)
    }

    #[test]
    fn generation_is_deterministic_and_audits_clean() {
        let (corpus, pairs, thr) = small_run(21);
        assert!(!pairs.is_empty());
        let engine =
            Engine::with_uniform_frequencies(SkeletonDef::canonical(), Inventory::canonical(), &thr);
        let records = generate_records(&corpus, &pairs, &engine, 99).unwrap();
        let again = generate_records(&corpus, &pairs, &engine, 99).unwrap();
        assert_eq!(records, again);
        let s1 = records
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect::<Vec<_>>();
        let s2 = again
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect::<Vec<_>>();
        assert_eq!(s1, s2, "serialization must be byte-identical");

        let report = audit_roundtrip(&records, Grammar::canonical());
        assert_eq!(report.passed, report.records, "{:?}", report.failures);
    }

    #[test]
    fn record_text_matches_replayed_pipeline() {
        let (corpus, pairs, thr) = small_run(33);
        let engine =
            Engine::with_uniform_frequencies(SkeletonDef::canonical(), Inventory::canonical(), &thr);
        let records = generate_records(&corpus, &pairs, &engine, 5).unwrap();
        for r in records.iter().take(10) {
            let a = &corpus.entries[pairs[r.pair_id as usize].id_a].pose;
            let b = &corpus.entries[pairs[r.pair_id as usize].id_b].pose;
            let (text, plan) = engine.describe_pair(a, b, r.kind, r.seed).unwrap();
            assert_eq!(text, r.text);
            assert_eq!(canonical_of_plan(&plan), r.codes);
        }
    }

    #[test]
    fn records_file_roundtrip_and_manifest() {
        let (corpus, pairs, thr) = small_run(44);
        let engine =
            Engine::with_uniform_frequencies(SkeletonDef::canonical(), Inventory::canonical(), &thr);
        let records = generate_records(&corpus, &pairs, &engine, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.jsonl");
        write_records(&records, &path).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
        let manifest = manifest_for(&records, &engine, 1);
        assert_eq!(manifest.counts.records, records.len());
        assert_eq!(manifest.rules_sha256.len(), 64);
    }

    #[test]
    fn stats_basics() {
        let (corpus, pairs, thr) = small_run(55);
        let engine =
            Engine::with_uniform_frequencies(SkeletonDef::canonical(), Inventory::canonical(), &thr);
        let records = generate_records(&corpus, &pairs, &engine, 2).unwrap();
        let stats = dataset_stats(&records);
        assert_eq!(stats.records, records.len());
        assert!(stats.mean_words > 0.0);
        assert!(stats.vocab_size > 5);
        assert_eq!(body_part_mentions("Bend your left elbow and your right elbow."), 1);
        assert_eq!(body_part_mentions("elbow knee hip hands"), 4);
    }
}
