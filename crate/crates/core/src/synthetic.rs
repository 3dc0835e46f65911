//! Synthetic pose and corpus generators used by the test suites and for
//! benchmarking the pipeline without real capture data.

use rand::Rng;

use crate::skeleton::{Pose, NUM_JOINTS};

/// Per-joint rotation scale: spine/neck move less than limbs.
fn joint_scale(joint: usize) -> f64 {
    match joint {
        0 => 0.3,             // pelvis
        3 | 6 | 9 | 12 => 0.3, // spine1-3, neck
        13 | 14 => 0.3,       // collars
        15 => 0.5,            // head
        _ => 1.3,             // limbs
    }
}

/// A random pose with limb-heavy joint rotations and a random facing.
pub fn random_pose(rng: &mut impl Rng) -> Pose {
    let rotations = (0..NUM_JOINTS)
        .map(|j| {
            let s = joint_scale(j);
            [
                rng.gen_range(-s..s),
                rng.gen_range(-s..s),
                rng.gen_range(-s..s),
            ]
        })
        .collect();
    Pose { rotations, root_yaw: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI) }
        .canonicalized()
}

/// A motion-like sequence: random walk in rotation space from a random start.
/// `step` is the per-frame per-component drift; larger steps change more
/// posecode bins per frame.
pub fn random_sequence(rng: &mut impl Rng, frames: usize, fps: f64, step: f64) -> Vec<(f64, Pose)> {
    let mut pose = random_pose(rng);
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let t = f as f64 / fps;
        out.push((t, pose.clone().canonicalized()));
        for (j, r) in pose.rotations.iter_mut().enumerate() {
            let s = step * joint_scale(j);
            for c in r.iter_mut() {
                *c += rng.gen_range(-s..s);
            }
        }
        pose.root_yaw += rng.gen_range(-step..step);
    }
    out
}

/// Write a corpus directory of sequence JSONL files.
pub fn write_corpus(
    dir: &std::path::Path,
    sequences: usize,
    frames: usize,
    fps: f64,
    step: f64,
    seed: u64,
) -> crate::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rng = crate::rng::rng_from_seed(seed);
    for s in 0..sequences {
        let seq = random_sequence(&mut rng, frames, fps, step);
        let mut text = String::new();
        for (t, pose) in seq {
            let mut line = serde_json::to_value(pose.to_json_value())?;
            line.as_object_mut()
                .unwrap()
                .insert("t".to_string(), serde_json::json!(t));
            text.push_str(&serde_json::to_string(&line)?);
            text.push('\n');
        }
        std::fs::write(dir.join(format!("seq{s:04}.jsonl")), text)?;
    }
    Ok(())
}
