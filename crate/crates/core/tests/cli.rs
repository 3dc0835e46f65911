//! Smoke tests over the command-line surface.

use std::path::Path;
use std::process::Command;

use poseinstruct::skeleton::{Pose, SkeletonDef};
use poseinstruct::synthetic::{random_pose, write_corpus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poseinstruct"))
}

fn write_pose(path: &Path, seed: u64) -> Pose {
    let mut rng = poseinstruct::rng::rng_from_seed(seed);
    let pose = random_pose(&mut rng);
    std::fs::write(path, serde_json::to_string(&pose.to_json_value()).unwrap()).unwrap();
    pose
}

fn stdout_json(out: std::process::Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn describe_flip_lint() {
    let dir = tempfile::tempdir().unwrap();
    let pa = dir.path().join("a.json");
    let pb = dir.path().join("b.json");
    write_pose(&pa, 1);
    write_pose(&pb, 2);

    let out = bin()
        .args(["describe", "--pose-a"])
        .arg(&pa)
        .arg("--pose-b")
        .arg(&pb)
        .args(["--seed", "3"])
        .output()
        .unwrap();
    let v = stdout_json(out);
    assert!(v["text"].is_string());
    assert!(v["codes"].is_array());

    // same seed → same text
    let again = bin()
        .args(["describe", "--pose-a"])
        .arg(&pa)
        .arg("--pose-b")
        .arg(&pb)
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(v, stdout_json(again));

    let out = bin()
        .args(["flip", "--text", "raise your left hand"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(out)["text"], "raise your right hand");

    let out = bin().args(["flip", "--pose"]).arg(&pa).output().unwrap();
    let flipped = stdout_json(out);
    assert_eq!(flipped["skeleton"], SkeletonDef::canonical().name.as_str());

    let out = bin()
        .args(["lint", "--text", "Bend your left elbow.", "--profile", "human"])
        .output()
        .unwrap();
    let v = stdout_json(out);
    assert!(v.as_array().unwrap().iter().any(|x| x["code"] == "min_words"));

    // structural error → nonzero exit
    let out = bin()
        .args(["describe", "--pose-a"])
        .arg(dir.path().join("missing.json"))
        .arg("--pose-b")
        .arg(&pb)
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn pairs_dataset_roundtrip_stats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("corpus");
    write_corpus(&corpus_dir, 4, 40, 10.0, 0.4, 9).unwrap();

    let pairs_path = dir.path().join("pairs.jsonl");
    let out = bin()
        .args(["pairs", "--corpus"])
        .arg(&corpus_dir)
        .arg("--out")
        .arg(&pairs_path)
        .args(["--min-diff-is", "3", "--min-diff-oos", "5", "--seed", "1"])
        .output()
        .unwrap();
    let summary = stdout_json(out);
    assert!(summary["pairs"].as_u64().unwrap() > 0, "{summary}");
    assert!(pairs_path.exists());

    let out = bin()
        .args(["validate", "--corpus"])
        .arg(&corpus_dir)
        .arg("--pairs")
        .arg(&pairs_path)
        .args(["--min-diff-is", "3", "--min-diff-oos", "5"])
        .output()
        .unwrap();
    let v = stdout_json(out);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);

    let dataset_path = dir.path().join("dataset.jsonl");
    let out = bin()
        .args(["dataset", "--corpus"])
        .arg(&corpus_dir)
        .arg("--pairs")
        .arg(&pairs_path)
        .arg("--out")
        .arg(&dataset_path)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    let manifest = stdout_json(out);
    assert_eq!(manifest["globalSeed"], 7);
    assert!(dataset_path.exists());
    assert!(dir.path().join("dataset.manifest.json").exists());

    let out = bin()
        .args(["roundtrip", "--dataset"])
        .arg(&dataset_path)
        .output()
        .unwrap();
    let report = stdout_json(out);
    assert_eq!(report["passed"], report["records"]);

    let out = bin().args(["stats", "--dataset"]).arg(&dataset_path).output().unwrap();
    let stats = stdout_json(out);
    assert!(stats["meanWords"].as_f64().unwrap() > 0.0);

    let out = bin()
        .args(["sample", "--corpus"])
        .arg(&corpus_dir)
        .args(["-k", "5", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(out).as_array().unwrap().len(), 5);
}
