//! Corpus-level pair construction: farthest-point sampling, similarity
//! ranking, in-/out-of-sequence constraints, one-/two-way pairs, and
//! sequence-based dataset splits.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::posecodes::{compute_posecodes, count_differences, Inventory, PosecodeSet};
use crate::skeleton::{forward_kinematics, mpje, KeypointSet, Pose, SkeletonDef};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PoseEntry {
    pub seq: usize,
    pub t: f64,
    pub pose: Pose,
}

#[derive(Debug, Clone, Default)]
pub struct PoseCorpus {
    pub sequence_names: Vec<String>,
    pub entries: Vec<PoseEntry>,
}

impl PoseCorpus {
    pub fn from_sequences(seqs: Vec<(String, Vec<(f64, Pose)>)>) -> Result<PoseCorpus> {
        let mut corpus = PoseCorpus::default();
        for (name, frames) in seqs {
            let seq = corpus.sequence_names.len();
            let mut last_t = f64::NEG_INFINITY;
            for (t, pose) in frames {
                if t <= last_t {
                    return Err(Error::DataFormat {
                        path: name.clone(),
                        msg: format!("timestamps not strictly increasing at t={t}"),
                    });
                }
                last_t = t;
                corpus.entries.push(PoseEntry { seq, t, pose });
            }
            corpus.sequence_names.push(name);
        }
        if corpus.entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(corpus)
    }

    /// Load every `*.jsonl` sequence file under `dir`, sorted by file name.
    /// Each line is a pose object with an extra `t` timestamp in seconds.
    pub fn load(dir: &Path, skel: &SkeletonDef) -> Result<PoseCorpus> {
        let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        let mut seqs = Vec::with_capacity(files.len());
        for path in files {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let text = std::fs::read_to_string(&path)?;
            let mut frames = Vec::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let mut value: serde_json::Value = serde_json::from_str(line)?;
                let t = value
                    .as_object_mut()
                    .and_then(|o| o.remove("t"))
                    .and_then(|t| t.as_f64())
                    .ok_or_else(|| Error::DataFormat {
                        path: path.display().to_string(),
                        msg: "missing `t` timestamp".into(),
                    })?;
                frames.push((t, Pose::from_json(&value.to_string(), skel)?));
            }
            seqs.push((name, frames));
        }
        PoseCorpus::from_sequences(seqs)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-pose features used by sampling and ranking: orientation-normalized
/// keypoints and posecode bins.
pub struct PoseFeatures {
    pub keypoints: Vec<KeypointSet>,
    pub posecodes: Vec<PosecodeSet>,
}

pub fn compute_features(
    corpus: &PoseCorpus,
    skel: &SkeletonDef,
    inv: &Inventory,
    thr: &Thresholds,
) -> Result<PoseFeatures> {
    let per_pose: Vec<(KeypointSet, PosecodeSet)> = corpus
        .entries
        .par_iter()
        .map(|e| {
            let (normalized, _) = crate::skeleton::normalize_orientation(&e.pose, skel)?;
            let kps = forward_kinematics(&normalized, skel)?;
            let pc = compute_posecodes(&kps, skel, inv, thr);
            Ok((kps, pc))
        })
        .collect::<Result<_>>()?;
    let (keypoints, posecodes) = per_pose.into_iter().unzip();
    Ok(PoseFeatures { keypoints, posecodes })
}

// ---------------------------------------------------------------------------
// Farthest-point sampling
// ---------------------------------------------------------------------------

/// Greedy max-min selection over an arbitrary distance function, from a
/// seeded start. Ties go to the smallest index.
pub fn farthest_point_sample_by(
    n: usize,
    k: usize,
    seed: u64,
    dist: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::SampleTooLarge { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = crate::rng::rng_from_seed(seed);
    let start = rng.gen_range(0..n);
    let mut selected = Vec::with_capacity(k);
    selected.push(start);
    // min distance from each point to the selected set
    let mut min_dist: Vec<f64> = (0..n).into_par_iter().map(|i| dist(i, start)).collect();
    while selected.len() < k {
        let (best, _) = min_dist
            .iter()
            .enumerate()
            .filter(|(i, _)| !selected.contains(i))
            .fold((usize::MAX, f64::NEG_INFINITY), |(bi, bd), (i, &d)| {
                if d > bd {
                    (i, d)
                } else {
                    (bi, bd)
                }
            });
        selected.push(best);
        min_dist = min_dist
            .into_par_iter()
            .enumerate()
            .map(|(i, d)| d.min(dist(i, best)))
            .collect();
    }
    Ok(selected)
}

/// FPS over corpus poses with MPJE on normalized keypoints as the distance.
pub fn farthest_point_sample(
    features: &PoseFeatures,
    k: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let kps = &features.keypoints;
    farthest_point_sample_by(kps.len(), k, seed, |a, b| mpje(&kps[a], &kps[b]))
}

// ---------------------------------------------------------------------------
// Pair construction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairWay {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairSpec {
    pub id_a: usize,
    pub id_b: usize,
    pub kind: crate::paircodes::PairClass,
    pub way: PairWay,
    pub diff_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_gap: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PairBuildSummary {
    pub pairs: usize,
    pub rejections: BTreeMap<String, u64>,
    pub skipped_no_partner: u64,
    pub sampled: Vec<usize>,
}

/// Candidates for pose B, most similar first: fewest posecode differences,
/// MPJE and index as tie-breaks. Returns (corpus index, diffCount) truncated
/// to the top-k window.
fn ranked_candidates(
    b: usize,
    sampled: &[usize],
    features: &PoseFeatures,
    top_k: usize,
) -> Vec<(usize, usize)> {
    let mut scored: Vec<(usize, usize, f64)> = sampled
        .iter()
        .copied()
        .filter(|&a| a != b)
        .map(|a| {
            let diff = count_differences(&features.posecodes[a], &features.posecodes[b])
                .expect("features share one inventory");
            let d = mpje(&features.keypoints[a], &features.keypoints[b]);
            (a, diff, d)
        })
        .collect();
    scored.sort_by(|x, y| {
        x.1.cmp(&y.1)
            .then(x.2.partial_cmp(&y.2).unwrap_or(std::cmp::Ordering::Equal))
            .then(x.0.cmp(&y.0))
    });
    scored.truncate(top_k);
    scored.into_iter().map(|(a, diff, _)| (a, diff)).collect()
}

/// Build pairs per the selection constraints: for each sampled pose B, pick
/// the most similar admissible A within the top-k window. In-sequence pairs
/// need A earlier with a bounded time gap and ≥ minDiffIs differences;
/// out-of-sequence pairs need ≥ minDiffOos differences. An out-of-sequence
/// pair becomes two-way when A was not already used.
pub fn build_pairs(
    corpus: &PoseCorpus,
    features: &PoseFeatures,
    sampled: &[usize],
    thr: &Thresholds,
) -> (Vec<PairSpec>, PairBuildSummary) {
    let candidates: Vec<Vec<(usize, usize)>> = sampled
        .par_iter()
        .map(|&b| ranked_candidates(b, sampled, features, thr.pairsel_top_k))
        .collect();

    let mut pairs = Vec::new();
    let mut summary = PairBuildSummary { sampled: sampled.to_vec(), ..Default::default() };
    let mut used = vec![false; corpus.len()];
    let reject = |summary: &mut PairBuildSummary, reason: &str| {
        *summary.rejections.entry(reason.to_string()).or_insert(0) += 1;
    };

    for (bi, &b) in sampled.iter().enumerate() {
        let eb = &corpus.entries[b];
        let mut accepted = None;
        for &(a, diff) in &candidates[bi] {
            let ea = &corpus.entries[a];
            if ea.seq == eb.seq {
                if ea.t >= eb.t {
                    reject(&mut summary, "is_not_earlier");
                    continue;
                }
                if eb.t - ea.t > thr.pairsel_max_gap_s {
                    reject(&mut summary, "is_gap_exceeded");
                    continue;
                }
                if diff < thr.pairsel_min_diff_is {
                    reject(&mut summary, "is_diff_below");
                    continue;
                }
                accepted = Some(PairSpec {
                    id_a: a,
                    id_b: b,
                    kind: crate::paircodes::PairClass::Is,
                    way: PairWay::One,
                    diff_count: diff,
                    time_gap: Some(eb.t - ea.t),
                });
            } else {
                if diff < thr.pairsel_min_diff_oos {
                    reject(&mut summary, "oos_diff_below");
                    continue;
                }
                accepted = Some(PairSpec {
                    id_a: a,
                    id_b: b,
                    kind: crate::paircodes::PairClass::Oos,
                    way: PairWay::One,
                    diff_count: diff,
                    time_gap: None,
                });
            }
            break;
        }
        let Some(mut pair) = accepted else {
            summary.skipped_no_partner += 1;
            continue;
        };
        // the reverse of an in-sequence pair would have A after B, which the
        // pair invariants forbid; only out-of-sequence pairs go two-way
        let two_way = pair.kind == crate::paircodes::PairClass::Oos && !used[pair.id_a];
        if two_way {
            pair.way = PairWay::Two;
            let reverse = PairSpec {
                id_a: pair.id_b,
                id_b: pair.id_a,
                way: PairWay::Two,
                ..pair.clone()
            };
            used[pair.id_a] = true;
            used[pair.id_b] = true;
            pairs.push(pair);
            pairs.push(reverse);
        } else {
            used[pair.id_a] = true;
            used[pair.id_b] = true;
            pairs.push(pair);
        }
    }
    summary.pairs = pairs.len();
    (pairs, summary)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Re-check every pair invariant from scratch; violations are returned as
/// messages, an empty list means the file is sound.
pub fn validate_pairs(
    pairs: &[PairSpec],
    corpus: &PoseCorpus,
    features: &PoseFeatures,
    sampled: Option<&[usize]>,
    thr: &Thresholds,
) -> Vec<String> {
    let mut violations: Vec<String> = pairs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, p)| {
            let mut out = Vec::new();
            let mut bad = |msg: String| out.push(format!("pair {i} ({}->{}): {msg}", p.id_a, p.id_b));
            if p.id_a >= corpus.len() || p.id_b >= corpus.len() {
                bad("index out of range".into());
                return out;
            }
            let (ea, eb) = (&corpus.entries[p.id_a], &corpus.entries[p.id_b]);
            let diff = count_differences(&features.posecodes[p.id_a], &features.posecodes[p.id_b])
                .expect("features share one inventory");
            if diff != p.diff_count {
                bad(format!("stored diffCount {} != recomputed {diff}", p.diff_count));
            }
            match p.kind {
                crate::paircodes::PairClass::Is => {
                    if ea.seq != eb.seq {
                        bad("in-sequence pair spans two sequences".into());
                    }
                    if ea.t >= eb.t {
                        bad("pose A is not earlier".into());
                    }
                    let gap = eb.t - ea.t;
                    if gap > thr.pairsel_max_gap_s + 1e-9 {
                        bad(format!("time gap {gap} exceeds {}", thr.pairsel_max_gap_s));
                    }
                    match p.time_gap {
                        Some(g) if (g - gap).abs() < 1e-9 => {}
                        other => bad(format!("stored timeGap {other:?} != {gap}")),
                    }
                    if diff < thr.pairsel_min_diff_is {
                        bad(format!("diff {diff} below in-sequence minimum"));
                    }
                }
                crate::paircodes::PairClass::Oos => {
                    if ea.seq == eb.seq {
                        bad("out-of-sequence pair within one sequence".into());
                    }
                    if p.time_gap.is_some() {
                        bad("out-of-sequence pair carries a time gap".into());
                    }
                    if diff < thr.pairsel_min_diff_oos {
                        bad(format!("diff {diff} below out-of-sequence minimum"));
                    }
                }
            }
            if let Some(sampled) = sampled {
                // a two-way record may be the reversed copy, where the window
                // relation holds in the forward direction only
                let forward = ranked_candidates(p.id_b, sampled, features, thr.pairsel_top_k)
                    .iter()
                    .any(|&(a, _)| a == p.id_a);
                let reversed = p.way == PairWay::Two
                    && ranked_candidates(p.id_a, sampled, features, thr.pairsel_top_k)
                        .iter()
                        .any(|&(b, _)| b == p.id_b);
                if !forward && !reversed {
                    bad("pose A outside the top-k similarity window".into());
                }
            }
            out
        })
        .collect();

    // two-way consistency is a cross-pair property
    let mut two_way_as_a: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        if p.way == PairWay::Two {
            if let Some(prev) = two_way_as_a.insert(p.id_a, i) {
                violations.push(format!(
                    "pairs {prev} and {i}: pose {} is A in two two-way pairs",
                    p.id_a
                ));
            }
            if !pairs
                .iter()
                .any(|q| q.way == PairWay::Two && q.id_a == p.id_b && q.id_b == p.id_a)
            {
                violations.push(format!("pair {i}: two-way reverse missing"));
            }
        }
    }
    violations
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<PairSpec>,
    pub val: Vec<PairSpec>,
    pub test: Vec<PairSpec>,
    /// seq index → split name, for reporting
    pub sequence_split: BTreeMap<usize, String>,
    pub dropped_cross_split: u64,
}

/// Sequence-based 70/10/20 split by pose count; a pair lands in a split only
/// if both its sequences do.
pub fn split_dataset(pairs: &[PairSpec], corpus: &PoseCorpus, seed: u64) -> SplitResult {
    use rand::seq::SliceRandom;
    let nseq = corpus.sequence_names.len();
    let mut pose_count = vec![0usize; nseq];
    for e in &corpus.entries {
        pose_count[e.seq] += 1;
    }
    let total: usize = pose_count.iter().sum();
    let mut order: Vec<usize> = (0..nseq).collect();
    let mut rng = crate::rng::rng_from_seed(seed);
    order.shuffle(&mut rng);

    let mut result = SplitResult::default();
    let mut cum = 0usize;
    for seq in order {
        cum += pose_count[seq];
        let name = if (cum as f64) <= 0.7 * total as f64 {
            "train"
        } else if (cum as f64) <= 0.8 * total as f64 {
            "val"
        } else {
            "test"
        };
        result.sequence_split.insert(seq, name.to_string());
    }
    for p in pairs {
        let sa = &result.sequence_split[&corpus.entries[p.id_a].seq];
        let sb = &result.sequence_split[&corpus.entries[p.id_b].seq];
        if sa != sb {
            result.dropped_cross_split += 1;
            continue;
        }
        match sa.as_str() {
            "train" => result.train.push(p.clone()),
            "val" => result.val.push(p.clone()),
            _ => result.test.push(p.clone()),
        }
    }
    result
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

pub fn write_pairs(pairs: &[PairSpec], path: &Path) -> Result<()> {
    let mut text = String::new();
    for p in pairs {
        text.push_str(&serde_json::to_string(p)?);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<Vec<PairSpec>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_corpus(seqs: usize, frames: usize, seed: u64) -> PoseCorpus {
        let mut rng = crate::rng::rng_from_seed(seed);
        let seqs = (0..seqs)
            .map(|i| {
                (
                    format!("seq{i:04}"),
                    crate::synthetic::random_sequence(&mut rng, frames, 10.0, 0.35),
                )
            })
            .collect();
        PoseCorpus::from_sequences(seqs).unwrap()
    }

    fn setup(corpus: &PoseCorpus) -> PoseFeatures {
        compute_features(
            corpus,
            SkeletonDef::canonical(),
            Inventory::canonical(),
            &Thresholds::default(),
        )
        .unwrap()
    }

    #[test]
    fn fps_k1_is_seeded_start() {
        let sel = farthest_point_sample_by(50, 1, 3, |_, _| 1.0).unwrap();
        assert_eq!(sel.len(), 1);
        let again = farthest_point_sample_by(50, 1, 3, |_, _| 1.0).unwrap();
        assert_eq!(sel, again);
    }

    #[test]
    fn fps_collinear_picks_far_endpoint_second() {
        // 5 equally spaced points on a line; start pinned to one end
        let coords = [0.0f64, 1.0, 2.0, 3.0, 4.0];
        let dist = |a: usize, b: usize| (coords[a] - coords[b]).abs();
        // find a seed whose start is index 0
        let seed = (0..200u64)
            .find(|&s| farthest_point_sample_by(5, 1, s, dist).unwrap()[0] == 0)
            .unwrap();
        let sel = farthest_point_sample_by(5, 3, seed, dist).unwrap();
        assert_eq!(sel[1], 4, "far endpoint must be chosen second: {sel:?}");
        assert_eq!(sel[2], 2, "midpoint maximizes min distance third: {sel:?}");
    }

    #[test]
    fn fps_rejects_oversized_k() {
        assert!(matches!(
            farthest_point_sample_by(3, 4, 0, |_, _| 0.0),
            Err(Error::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn fps_matches_brute_force_on_small_instances() {
        let mut rng = crate::rng::rng_from_seed(17);
        for trial in 0..20 {
            let n = 5 + (trial % 7) * 10;
            let k = (2 + trial % 5).min(n);
            let points: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let dist = |a: usize, b: usize| {
                let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
                (dx * dx + dy * dy).sqrt()
            };
            let fast = farthest_point_sample_by(n, k, trial as u64, dist).unwrap();
            // brute-force greedy from the same start
            let mut sel = vec![fast[0]];
            while sel.len() < k {
                let best = (0..n)
                    .filter(|i| !sel.contains(i))
                    .map(|i| {
                        let d = sel.iter().map(|&s| dist(i, s)).fold(f64::INFINITY, f64::min);
                        (i, d)
                    })
                    .fold((usize::MAX, f64::NEG_INFINITY), |(bi, bd), (i, d)| {
                        if d > bd { (i, d) } else { (bi, bd) }
                    })
                    .0;
                sel.push(best);
            }
            assert_eq!(fast, sel, "n={n} k={k}");
        }
    }

    #[test]
    fn build_pairs_respects_constraints_and_validator_agrees() {
        let corpus = synthetic_corpus(6, 40, 5);
        let features = setup(&corpus);
        let mut thr = Thresholds::default();
        thr.pairsel_min_diff_is = 4;
        thr.pairsel_min_diff_oos = 6;
        let sampled = farthest_point_sample(&features, 120, 7).unwrap();
        let (pairs, summary) = build_pairs(&corpus, &features, &sampled, &thr);
        assert!(!pairs.is_empty(), "no pairs built: {summary:?}");
        let violations = validate_pairs(&pairs, &corpus, &features, Some(&sampled), &thr);
        assert!(violations.is_empty(), "{violations:?}");
        // determinism
        let (pairs2, _) = build_pairs(&corpus, &features, &sampled, &thr);
        assert_eq!(pairs, pairs2);
    }

    #[test]
    fn validator_flags_corrupted_pairs() {
        let corpus = synthetic_corpus(4, 30, 9);
        let features = setup(&corpus);
        let mut thr = Thresholds::default();
        thr.pairsel_min_diff_is = 3;
        thr.pairsel_min_diff_oos = 5;
        let sampled = farthest_point_sample(&features, 80, 1).unwrap();
        let (mut pairs, _) = build_pairs(&corpus, &features, &sampled, &thr);
        assert!(!pairs.is_empty());
        pairs[0].diff_count += 1;
        let violations = validate_pairs(&pairs, &corpus, &features, None, &thr);
        assert!(!violations.is_empty());
    }

    #[test]
    fn split_is_sequence_based_and_seeded() {
        let corpus = synthetic_corpus(10, 20, 3);
        let features = setup(&corpus);
        let mut thr = Thresholds::default();
        thr.pairsel_min_diff_is = 2;
        thr.pairsel_min_diff_oos = 4;
        let sampled = farthest_point_sample(&features, 150, 2).unwrap();
        let (pairs, _) = build_pairs(&corpus, &features, &sampled, &thr);
        let split = split_dataset(&pairs, &corpus, 11);
        // 10 equal sequences → 7/1/2
        let mut counts = BTreeMap::new();
        for name in split.sequence_split.values() {
            *counts.entry(name.clone()).or_insert(0) += 1;
        }
        assert_eq!(counts.get("train"), Some(&7));
        assert_eq!(counts.get("val"), Some(&1));
        assert_eq!(counts.get("test"), Some(&2));
        let again = split_dataset(&pairs, &corpus, 11);
        assert_eq!(split.sequence_split, again.sequence_split);
        // every kept pair's two sequences share a split
        for (name, bucket) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
            for p in bucket.iter() {
                assert_eq!(split.sequence_split[&corpus.entries[p.id_a].seq], name);
                assert_eq!(split.sequence_split[&corpus.entries[p.id_b].seq], name);
            }
        }
    }

    #[test]
    fn pairs_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let pairs = vec![PairSpec {
            id_a: 1,
            id_b: 2,
            kind: crate::paircodes::PairClass::Oos,
            way: PairWay::Two,
            diff_count: 21,
            time_gap: None,
        }];
        let path = dir.path().join("pairs.jsonl");
        write_pairs(&pairs, &path).unwrap();
        assert_eq!(read_pairs(&path).unwrap(), pairs);
    }

    #[test]
    fn corpus_rejects_bad_timestamps() {
        let mut rng = crate::rng::rng_from_seed(0);
        let p = crate::synthetic::random_pose(&mut rng);
        let seqs = vec![("s".to_string(), vec![(0.0, p.clone()), (0.0, p)])];
        assert!(PoseCorpus::from_sequences(seqs).is_err());
    }
}
