//! End-to-end acceptance suite. Each test prints a single PASS/FAIL line for
//! its criterion; run with `--nocapture` to see them.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{Matrix4, UnitQuaternion, Vector3, Vector4};
use rand::Rng;
use rayon::prelude::*;

use poseinstruct::config::Thresholds;
use poseinstruct::dataset::{dataset_stats, generate_records, write_records, Engine};
use poseinstruct::paircodes::PairClass;
use poseinstruct::pairselect::{
    build_pairs, compute_features, farthest_point_sample, farthest_point_sample_by,
    validate_pairs, PairSpec, PairWay, PoseCorpus, PoseFeatures,
};
use poseinstruct::parser::{canonical_of_edits, parse_modifier, roundtrip_check, Grammar};
use poseinstruct::pipeline::{canonical_of_plan, CanonicalCode};
use poseinstruct::posecodes::Inventory;
use poseinstruct::rng::{pair_seed, rng_from_seed};
use poseinstruct::skeleton::{
    forward_kinematics, geodesic_distance, lr_flip_pose, mpje, Pose, SkeletonDef,
};
use poseinstruct::subjects::Subject;
use poseinstruct::synthetic::{random_pose, random_sequence};
use poseinstruct::verbalizer::{lr_flip_text, TemplateBank};

fn report(criterion: u32, name: &str, ok: bool) {
    println!(
        "ACCEPTANCE {criterion:2} {name}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} ({name}) failed");
}

fn engine(thr: &Thresholds) -> Engine<'_> {
    Engine::with_uniform_frequencies(SkeletonDef::canonical(), Inventory::canonical(), thr)
}

// Shared 10k-pair corpus for criteria 2 and 9; built once per process.
struct PairFixture {
    corpus: PoseCorpus,
    features: PoseFeatures,
    sampled: Vec<usize>,
    pairs: Vec<PairSpec>,
    thr: Thresholds,
}

static PAIR_FIXTURE: OnceLock<PairFixture> = OnceLock::new();

fn pair_fixture() -> &'static PairFixture {
    PAIR_FIXTURE.get_or_init(|| {
        let thr = Thresholds::default(); // paper constraints: 0.5 s, top-100, 15/20
        let mut rng = rng_from_seed(2024);
        let seqs = (0..60)
            .map(|i| (format!("seq{i:04}"), random_sequence(&mut rng, 250, 30.0, 0.6)))
            .collect();
        let corpus = PoseCorpus::from_sequences(seqs).unwrap();
        let features = compute_features(
            &corpus,
            SkeletonDef::canonical(),
            Inventory::canonical(),
            &thr,
        )
        .unwrap();
        let sampled = farthest_point_sample(&features, 12_500, 7).unwrap();
        let (pairs, _) = build_pairs(&corpus, &features, &sampled, &thr);
        PairFixture { corpus, features, sampled, pairs, thr }
    })
}

#[test]
fn criterion_01_throughput() {
    let thr = Thresholds::default();
    let mut rng = rng_from_seed(1);
    let n = 100_000usize;
    let frames: Vec<(f64, Pose)> = (0..n).map(|i| (i as f64, random_pose(&mut rng))).collect();
    let corpus = PoseCorpus::from_sequences(vec![("all".into(), frames)]).unwrap();
    let pairs: Vec<PairSpec> = (0..n)
        .map(|i| PairSpec {
            id_a: i,
            id_b: (i * 7919 + 1) % n,
            kind: PairClass::Oos,
            way: PairWay::One,
            diff_count: 0,
            time_gap: None,
        })
        .collect();
    let eng = engine(&thr);
    let start = Instant::now();
    let records = generate_records(&corpus, &pairs, &eng, 3).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rate = records.len() as f64 / secs;
    println!("  generated {} records in {secs:.1}s ({rate:.0}/s)", records.len());
    report(1, "throughput >= 150 records/s on 100k pairs", rate >= 150.0 && secs <= 720.0);
}

#[test]
fn criterion_02_pair_constraints() {
    let f = pair_fixture();
    println!("  built {} pairs from {} sampled poses", f.pairs.len(), f.sampled.len());
    let enough = f.pairs.len() >= 10_000;
    let violations = validate_pairs(&f.pairs, &f.corpus, &f.features, Some(&f.sampled), &f.thr);
    if !violations.is_empty() {
        println!("  first violations: {:?}", &violations[..violations.len().min(5)]);
    }
    report(2, "independent pair validator finds 0 violations on a 10k-pair run", enough && violations.is_empty());
}

#[test]
fn criterion_03_roundtrip_10k() {
    let thr = Thresholds::default();
    let eng = engine(&thr);
    let bank = TemplateBank::canonical();
    let grammar = Grammar::canonical();
    let start = Instant::now();
    let failures: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(pair_seed(77, i));
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let class = if i % 2 == 0 { PairClass::Is } else { PairClass::Oos };
            let (_, plan) = eng.describe_pair(&a, &b, class, i).unwrap();
            let seed = rng.gen::<u64>();
            let ok = roundtrip_check(&plan, bank, grammar, seed).unwrap().pass;
            usize::from(!ok)
        })
        .sum();
    let secs = start.elapsed().as_secs_f64();
    println!("  10k round-trips in {secs:.1}s, {failures} failures");
    report(3, "10k random plans round-trip exactly in < 60s", failures == 0 && secs < 60.0);
}

/// Homogeneous-matrix forward kinematics, written independently of the
/// quaternion implementation under test.
fn fk_matrix_oracle(pose: &Pose, skel: &SkeletonDef) -> Vec<Vector3<f64>> {
    let n = skel.joint_names.len();
    let mut world = vec![Matrix4::<f64>::identity(); n];
    for j in 0..n {
        let mut local = Matrix4::identity();
        let mut r = Vector3::from(pose.rotations[j]);
        if j == 0 {
            // root yaw composes in front of the pelvis rotation
            let yaw = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), pose.root_yaw);
            let q = yaw * UnitQuaternion::from_scaled_axis(r);
            r = q.scaled_axis();
        }
        local
            .fixed_view_mut::<3, 3>(0, 0)
            .copy_from(UnitQuaternion::from_scaled_axis(r).to_rotation_matrix().matrix());
        let off = skel.offset[j];
        local.set_column(3, &Vector4::new(off.x, off.y, off.z, 1.0));
        world[j] = match skel.parent[j] {
            Some(p) => world[p] * local,
            None => local,
        };
    }
    world
        .iter()
        .map(|m| Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]))
        .collect()
}

#[test]
fn criterion_04_geometric_oracles() {
    let skel = SkeletonDef::canonical();
    let mut rng = rng_from_seed(4);
    let mut ok = true;
    for _ in 0..1000 {
        let a = random_pose(&mut rng);
        let b = random_pose(&mut rng);

        // FK vs matrix-chain oracle, 1e-9 m
        let kps = forward_kinematics(&a, skel).unwrap();
        let oracle = fk_matrix_oracle(&a, skel);
        ok &= kps
            .positions
            .iter()
            .zip(&oracle)
            .all(|(p, q)| (p - q).norm() < 1e-9);

        // geodesic vs quaternion oracle, 1e-6 degrees
        let got = geodesic_distance(&a, &b).unwrap();
        let want: f64 = a
            .rotations
            .iter()
            .zip(&b.rotations)
            .map(|(ra, rb)| {
                let qa = UnitQuaternion::from_scaled_axis(Vector3::from(*ra));
                let qb = UnitQuaternion::from_scaled_axis(Vector3::from(*rb));
                let dot = (qa.coords.dot(&qb.coords)).abs().clamp(-1.0, 1.0);
                (2.0 * dot.acos()).to_degrees()
            })
            .sum::<f64>()
            / a.rotations.len() as f64;
        ok &= (got - want).abs() < 1e-6;

        // MPJE vs direct-sum oracle, 1e-9
        let ka = forward_kinematics(&a, skel).unwrap();
        let kb = forward_kinematics(&b, skel).unwrap();
        let got = mpje(&ka, &kb);
        let want = ka
            .positions
            .iter()
            .zip(&kb.positions)
            .map(|(p, q)| (p - q).norm() * 1000.0)
            .sum::<f64>()
            / ka.positions.len() as f64;
        ok &= (got - want).abs() < 1e-9;
        if !ok {
            break;
        }
    }
    report(4, "FK/geodesic/MPJE agree with independent oracles (1000 cases)", ok);
}

fn mirror_canonical(code: &CanonicalCode) -> CanonicalCode {
    let mirror_dir = |d: &str| match d {
        "left" => "right".to_string(),
        "right" => "left".to_string(),
        other => other.to_string(),
    };
    CanonicalCode {
        kind: code.kind.clone(),
        subjects: code
            .subjects
            .iter()
            .map(|s| Subject::from_name(s).unwrap().mirrored().name().to_string())
            .collect(),
        // bin names for b-statements never contain side words
        direction: if code.kind == "bstatement" {
            code.direction.clone()
        } else {
            mirror_dir(&code.direction)
        },
        magnitude: code.magnitude.clone(),
    }
}

#[test]
fn criterion_05_flip_equivariance() {
    let skel = SkeletonDef::canonical();
    let thr = Thresholds::default();
    let eng = engine(&thr);
    let grammar = Grammar::canonical();
    let mut rng = rng_from_seed(5);
    let mut ok = true;
    for i in 0..1000u64 {
        // pose-level mirror: FK of the flipped pose equals the mirrored FK
        let p = random_pose(&mut rng);
        let fk_flip = forward_kinematics(&lr_flip_pose(&p, skel), skel).unwrap();
        let mirrored = forward_kinematics(&p, skel).unwrap().mirror_x(skel);
        ok &= fk_flip
            .positions
            .iter()
            .zip(&mirrored.positions)
            .all(|(a, b)| (a - b).norm() < 1e-9);

        // code-level text-flip commutation
        let a = random_pose(&mut rng);
        let b = random_pose(&mut rng);
        let (text, plan) = eng.describe_pair(&a, &b, PairClass::Is, i).unwrap();
        let flipped = lr_flip_text(&text);
        let outcome = parse_modifier(&flipped, grammar);
        let got = canonical_of_edits(&outcome.edits);
        let mut want: Vec<CanonicalCode> =
            canonical_of_plan(&plan).iter().map(mirror_canonical).collect();
        want.sort();
        ok &= outcome.unknown_spans.is_empty() && got == want;
        if !ok {
            println!("  mismatch at case {i}: {text:?} -> {flipped:?}");
            break;
        }
    }
    report(5, "pose mirror (1e-9) and text-flip commutation (1000 pairs)", ok);
}

#[test]
fn criterion_06_antisymmetry() {
    use poseinstruct::paircodes::compute_paircodes;
    let skel = SkeletonDef::canonical();
    let inv = Inventory::canonical();
    let thr = Thresholds::default();
    let mut rng = rng_from_seed(6);
    let mut ok = true;
    for _ in 0..1000 {
        let a = random_pose(&mut rng);
        let b = random_pose(&mut rng);
        let ka = forward_kinematics(&a, skel).unwrap();
        let kb = forward_kinematics(&b, skel).unwrap();
        let fwd = compute_paircodes(&ka, &kb, skel, inv, &thr).unwrap();
        let rev = compute_paircodes(&kb, &ka, skel, inv, &thr).unwrap();
        ok &= fwd.len() == rev.len()
            && fwd.iter().zip(&rev).all(|(f, r)| {
                f.subjects == r.subjects
                    && f.direction == r.direction.reversed()
                    && f.magnitude == r.magnitude
            });
        if !ok {
            break;
        }
    }
    report(6, "paircodes antisymmetric under pair reversal (1000 pairs)", ok);
}

#[test]
fn criterion_07_fps_exactness() {
    let mut rng = rng_from_seed(7);
    let mut ok = true;
    for trial in 0..100u64 {
        let n = rng.gen_range(5..=200);
        let k = rng.gen_range(1..=20.min(n));
        let points: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let dist = |a: usize, b: usize| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let fast = farthest_point_sample_by(n, k, trial, dist).unwrap();
        let mut sel = vec![fast[0]];
        while sel.len() < k {
            let best = (0..n)
                .filter(|i| !sel.contains(i))
                .map(|i| (i, sel.iter().map(|&s| dist(i, s)).fold(f64::INFINITY, f64::min)))
                .fold(
                    (usize::MAX, f64::NEG_INFINITY),
                    |(bi, bd), (i, d)| if d > bd { (i, d) } else { (bi, bd) },
                )
                .0;
            sel.push(best);
        }
        ok &= fast == sel;
        if !ok {
            break;
        }
    }
    report(7, "FPS matches brute-force greedy (100 instances, n<=200, k<=20)", ok);
}

#[test]
fn criterion_08_determinism() {
    let thr = Thresholds::default();
    let mut rng = rng_from_seed(8);
    let seqs = (0..4)
        .map(|i| (format!("seq{i:04}"), random_sequence(&mut rng, 50, 10.0, 0.4)))
        .collect();
    let corpus = PoseCorpus::from_sequences(seqs).unwrap();
    let mut local = thr.clone();
    local.pairsel_min_diff_is = 3;
    local.pairsel_min_diff_oos = 5;
    let features = compute_features(
        &corpus,
        SkeletonDef::canonical(),
        Inventory::canonical(),
        &local,
    )
    .unwrap();
    let sampled = farthest_point_sample(&features, 150, 3).unwrap();
    let (pairs, _) = build_pairs(&corpus, &features, &sampled, &local);
    let eng = engine(&local);
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for p in [&p1, &p2] {
        let records = generate_records(&corpus, &pairs, &eng, 42).unwrap();
        write_records(&records, p).unwrap();
    }
    let ok = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap()
        && !std::fs::read(&p1).unwrap().is_empty();
    report(8, "regeneration under identical inputs is byte-identical", ok);
}

#[test]
fn criterion_09_statistics_band() {
    let f = pair_fixture();
    let mut eng = engine(&f.thr);
    eng.freq = poseinstruct::dataset::corpus_frequencies(&f.features, Inventory::canonical()).unwrap();
    let records = generate_records(&f.corpus, &f.pairs, &eng, 11).unwrap();
    let stats = dataset_stats(&records);
    println!(
        "  mean words {:.1}, vocab {}, mean body parts {:.2}, empty rate {:.4}",
        stats.mean_words, stats.vocab_size, stats.mean_body_parts, stats.empty_text_rate
    );
    // non-binding anchors from human data: ~30 words, 1068-word vocabulary,
    // ~4 body parts per text
    let ok = stats.mean_body_parts >= 2.0
        && stats.mean_body_parts <= 7.0
        && stats.empty_text_rate < 0.01;
    report(9, "mean body parts in [2,7], empty-text rate < 1%", ok);
}

#[test]
fn criterion_10_parser_fuzz() {
    let grammar = Grammar::canonical();
    let words = [
        "Bend", "your", "left", "right", "elbow", "while", "then", ",", ".", "Move",
        "hands", "to", "the", "up", "slightly", "µ", "€", "\u{1F9BE}", "a", "..",
    ];
    let crashes: usize = (0..1_000_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(i);
            let text: String = if i % 3 == 0 {
                // arbitrary (often invalid-as-text) bytes, lossily decoded
                let bytes: Vec<u8> = (0..rng.gen_range(0..60)).map(|_| rng.gen()).collect();
                String::from_utf8_lossy(&bytes).into_owned()
            } else {
                (0..rng.gen_range(0..12))
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let caught = std::panic::catch_unwind(|| {
                let _ = parse_modifier(&text, grammar);
            });
            usize::from(caught.is_err())
        })
        .sum();
    report(10, "1M-iteration parser fuzz with no crash", crashes == 0);
}
