//! Rule-based comparison of 3D body poses and generation of natural-language
//! correctional instructions, plus the dataset machinery around it: pair
//! selection, deterministic dataset emission, text linting, statistics and a
//! round-trip instruction parser.

pub mod config;
pub mod dataset;
pub mod paircodes;
pub mod pairselect;
pub mod parser;
pub mod pipeline;
pub mod posecodes;
pub mod rng;
pub mod skeleton;
pub mod subjects;
pub mod synthetic;
pub mod verbalizer;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("joint count mismatch: expected {expected}, got {got}")]
    JointCountMismatch { expected: usize, got: usize },
    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),
    #[error("degenerate orientation: hips and shoulders both vertically aligned")]
    DegenerateOrientation,
    #[error("posecode inventory mismatch")]
    InventoryMismatch,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("sample size {k} exceeds corpus size {n}")]
    SampleTooLarge { k: usize, n: usize },
    #[error("subject {0} has no body-part graph node")]
    UnmappedSubject(String),
    #[error("no template covers code kind {0}")]
    UncoveredCode(String),
    #[error("bad config: {0}")]
    Config(String),
    #[error("bad data file {path}: {msg}")]
    DataFormat { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
