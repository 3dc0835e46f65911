//! Command-line surface over the pose-instruction engine.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use poseinstruct::config::Thresholds;
use poseinstruct::dataset::{
    audit_roundtrip, corpus_frequencies, dataset_stats, generate_records, manifest_for,
    read_records, write_records, Engine,
};
use poseinstruct::paircodes::PairClass;
use poseinstruct::pairselect::{
    build_pairs, compute_features, farthest_point_sample, read_pairs, split_dataset,
    validate_pairs, PoseCorpus, write_pairs,
};
use poseinstruct::parser::Grammar;
use poseinstruct::pipeline::canonical_of_plan;
use poseinstruct::posecodes::Inventory;
use poseinstruct::skeleton::{lr_flip_pose, Pose, SkeletonDef};
use poseinstruct::verbalizer::{lint_modifier, lr_flip_text, LintProfile};

#[derive(Parser)]
#[command(name = "poseinstruct", version, about = "Rule-based pose-correction instruction engine")]
struct Cli {
    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,
    /// Threshold config file (defaults to the built-in values)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the modifier and codes for one pose pair
    Describe {
        #[arg(long)]
        pose_a: PathBuf,
        #[arg(long)]
        pose_b: PathBuf,
        /// Treat as an in-sequence pair (shared frame, turn codes enabled)
        #[arg(long)]
        is: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build pose pairs from a sequence corpus
    Pairs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        min_diff_is: Option<usize>,
        #[arg(long)]
        min_diff_oos: Option<usize>,
        /// Maximum in-sequence time gap, seconds
        #[arg(long)]
        max_gap: Option<f64>,
        /// Farthest-point sample size (default: every pose)
        #[arg(long)]
        sample_k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Farthest-point sample pose indices from a corpus
    Sample {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate triplet records for a pair file
    Dataset {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write train/val/test pair splits next to the output
        #[arg(long)]
        split: bool,
    },
    /// Re-parse a dataset and verify stored codes
    Roundtrip {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Corpus statistics for a dataset file
    Stats {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Check a modifier against the annotation guidelines
    Lint {
        #[arg(long)]
        text: String,
        #[arg(long, default_value = "auto")]
        profile: LintProfile,
    },
    /// Mirror a pose file or a modifier text left/right
    Flip {
        #[arg(long, conflicts_with = "text")]
        pose: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
    },
    /// Re-validate a pairs file against its corpus
    Validate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        min_diff_is: Option<usize>,
        #[arg(long)]
        min_diff_oos: Option<usize>,
    },
}

fn print_json<T: serde::Serialize>(value: &T, pretty: bool) -> anyhow::Result<()> {
    let s = if pretty {
        serde_json::to_string_pretty(value)?
    } else {
        serde_json::to_string(value)?
    };
    println!("{s}");
    Ok(())
}

fn load_pose(path: &PathBuf, skel: &SkeletonDef) -> anyhow::Result<Pose> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Pose::from_json(&text, skel)?)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let thr = match &cli.config {
        Some(path) => Thresholds::load(path)?,
        None => Thresholds::default(),
    };
    let skel = SkeletonDef::canonical();
    let inv = Inventory::canonical();

    match cli.command {
        Command::Describe { pose_a, pose_b, is, seed } => {
            let a = load_pose(&pose_a, skel)?;
            let b = load_pose(&pose_b, skel)?;
            let engine = Engine::with_uniform_frequencies(skel, inv, &thr);
            let class = if is { PairClass::Is } else { PairClass::Oos };
            let (text, plan) = engine.describe_pair(&a, &b, class, seed)?;
            print_json(
                &serde_json::json!({
                    "text": text,
                    "codes": canonical_of_plan(&plan),
                    "plan": plan,
                }),
                cli.pretty,
            )?;
        }
        Command::Pairs {
            corpus,
            out,
            top_k,
            min_diff_is,
            min_diff_oos,
            max_gap,
            sample_k,
            seed,
        } => {
            let mut thr = thr;
            if let Some(v) = top_k {
                thr.pairsel_top_k = v;
            }
            if let Some(v) = min_diff_is {
                thr.pairsel_min_diff_is = v;
            }
            if let Some(v) = min_diff_oos {
                thr.pairsel_min_diff_oos = v;
            }
            if let Some(v) = max_gap {
                thr.pairsel_max_gap_s = v;
            }
            let corpus = PoseCorpus::load(&corpus, skel)?;
            let features = compute_features(&corpus, skel, inv, &thr)?;
            let sampled = match sample_k {
                Some(k) => farthest_point_sample(&features, k, seed)?,
                None => (0..corpus.len()).collect(),
            };
            let (pairs, summary) = build_pairs(&corpus, &features, &sampled, &thr);
            write_pairs(&pairs, &out)?;
            print_json(&summary, cli.pretty)?;
        }
        Command::Sample { corpus, k, seed } => {
            let corpus = PoseCorpus::load(&corpus, skel)?;
            let features = compute_features(&corpus, skel, inv, &thr)?;
            let sampled = farthest_point_sample(&features, k, seed)?;
            print_json(&sampled, cli.pretty)?;
        }
        Command::Dataset { corpus, pairs, out, seed, jobs, split } => {
            if let Some(jobs) = jobs {
                rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
            }
            let corpus = PoseCorpus::load(&corpus, skel)?;
            let pair_list = read_pairs(&pairs)?;
            let features = compute_features(&corpus, skel, inv, &thr)?;
            let mut engine = Engine::with_uniform_frequencies(skel, inv, &thr);
            engine.freq = corpus_frequencies(&features, inv)?;
            let records = generate_records(&corpus, &pair_list, &engine, seed)?;
            write_records(&records, &out)?;
            let manifest = manifest_for(&records, &engine, seed);
            let manifest_path = out.with_extension("manifest.json");
            std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
            if split {
                let splits = split_dataset(&pair_list, &corpus, seed);
                for (name, bucket) in
                    [("train", &splits.train), ("val", &splits.val), ("test", &splits.test)]
                {
                    write_pairs(bucket, &out.with_extension(format!("{name}.jsonl")))?;
                }
            }
            print_json(&manifest, cli.pretty)?;
        }
        Command::Roundtrip { dataset } => {
            let records = read_records(&dataset)?;
            let report = audit_roundtrip(&records, Grammar::canonical());
            let ok = report.failures.is_empty();
            print_json(&report, cli.pretty)?;
            if !ok {
                bail!("{} of {} records failed the round-trip", report.failures.len(), report.records);
            }
        }
        Command::Stats { dataset } => {
            let records = read_records(&dataset)?;
            print_json(&dataset_stats(&records), cli.pretty)?;
        }
        Command::Lint { text, profile } => {
            print_json(&lint_modifier(&text, profile), cli.pretty)?;
        }
        Command::Flip { pose, text } => match (pose, text) {
            (Some(path), None) => {
                let p = load_pose(&path, skel)?;
                print_json(&lr_flip_pose(&p, skel).to_json_value(), cli.pretty)?;
            }
            (None, Some(text)) => {
                print_json(&serde_json::json!({ "text": lr_flip_text(&text) }), cli.pretty)?;
            }
            _ => bail!("flip needs exactly one of --pose or --text"),
        },
        Command::Validate { corpus, pairs, min_diff_is, min_diff_oos } => {
            let mut thr = thr;
            if let Some(v) = min_diff_is {
                thr.pairsel_min_diff_is = v;
            }
            if let Some(v) = min_diff_oos {
                thr.pairsel_min_diff_oos = v;
            }
            let corpus = PoseCorpus::load(&corpus, skel)?;
            let features = compute_features(&corpus, skel, inv, &thr)?;
            let pair_list = read_pairs(&pairs)?;
            let violations = validate_pairs(&pair_list, &corpus, &features, None, &thr);
            print_json(
                &serde_json::json!({ "pairs": pair_list.len(), "violations": violations }),
                cli.pretty,
            )?;
            if !violations.is_empty() {
                bail!("{} violations", violations.len());
            }
        }
    }
    Ok(())
}
