//! Classified low-level properties of a single pose: the per-pose vocabulary
//! that pair selection counts and super-paircodes condition on.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::skeleton::{KeypointSet, SkeletonDef};
use crate::subjects::Subject;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Angle,
    Distance,
    RelposX,
    RelposY,
    RelposZ,
    GroundContact,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Angle => "angle",
            Category::Distance => "distance",
            Category::RelposX => "relpos_x",
            Category::RelposY => "relpos_y",
            Category::RelposZ => "relpos_z",
            Category::GroundContact => "ground_contact",
        }
    }

    pub fn from_name(s: &str) -> Option<Category> {
        Some(match s {
            "angle" => Category::Angle,
            "distance" => Category::Distance,
            "relpos_x" => Category::RelposX,
            "relpos_y" => Category::RelposY,
            "relpos_z" => Category::RelposZ,
            "ground_contact" => Category::GroundContact,
            _ => return None,
        })
    }

    pub fn bins(self) -> &'static [Bin] {
        match self {
            Category::Angle => &[
                Bin::Straight,
                Bin::SlightlyBent,
                Bin::PartiallyBent,
                Bin::RightAngle,
                Bin::Bent,
            ],
            Category::Distance => &[Bin::Close, Bin::ShoulderWidth, Bin::Normal, Bin::Wide],
            Category::RelposX | Category::RelposY | Category::RelposZ => {
                &[Bin::Negative, Bin::Neutral, Bin::Positive]
            }
            Category::GroundContact => &[Bin::OnGround, Bin::OffGround],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    Straight,
    SlightlyBent,
    PartiallyBent,
    RightAngle,
    Bent,
    Close,
    ShoulderWidth,
    Normal,
    Wide,
    Negative,
    Neutral,
    Positive,
    OnGround,
    OffGround,
}

impl Bin {
    pub fn name(self) -> &'static str {
        match self {
            Bin::Straight => "straight",
            Bin::SlightlyBent => "slightly_bent",
            Bin::PartiallyBent => "partially_bent",
            Bin::RightAngle => "right_angle",
            Bin::Bent => "bent",
            Bin::Close => "close",
            Bin::ShoulderWidth => "shoulder_width",
            Bin::Normal => "normal",
            Bin::Wide => "wide",
            Bin::Negative => "negative",
            Bin::Neutral => "neutral",
            Bin::Positive => "positive",
            Bin::OnGround => "on_ground",
            Bin::OffGround => "off_ground",
        }
    }

    pub fn from_name(s: &str) -> Option<Bin> {
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
            Bin::Negative,
            Bin::Neutral,
            Bin::Positive,
            Bin::OnGround,
            Bin::OffGround,
        ]
        .into_iter()
        .find(|b| b.name() == s)
    }

    /// Relpos bins negate under an x-mirror.
    pub fn negated_relpos(self) -> Bin {
        match self {
            Bin::Negative => Bin::Positive,
            Bin::Positive => Bin::Negative,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// How a slot's raw scalar is measured on a keypoint set.
#[derive(Debug, Clone, Copy)]
pub enum SlotMeasure {
    /// Interior angle at `vertex` between the rays to `a` and `b`, degrees.
    InteriorAngle { a: usize, vertex: usize, b: usize },
    /// Euclidean distance between two joints, meters.
    JointDistance { a: usize, b: usize },
    /// Signed coordinate difference subject - reference along one axis, meters.
    Relpos { subject: usize, reference: usize, axis: Axis },
    /// Joint height above the body's lowest keypoint, meters.
    GroundHeight { joint: usize },
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub category: Category,
    pub subjects: Vec<Subject>,
    pub measure: SlotMeasure,
    /// Slot index of the x-mirrored slot (self for symmetric slots).
    pub mirror: usize,
}

/// The fixed slot inventory over which every `PosecodeSet` is defined.
#[derive(Debug, Clone)]
pub struct Inventory {
    pub slots: Vec<Slot>,
}

static CANONICAL_INVENTORY: OnceLock<Inventory> = OnceLock::new();

impl Inventory {
    pub fn canonical() -> &'static Inventory {
        CANONICAL_INVENTORY
            .get_or_init(|| Inventory::new(SkeletonDef::canonical()).expect("canonical inventory"))
    }

    pub fn new(skel: &SkeletonDef) -> Result<Inventory> {
        let j = |name: &str| -> Result<usize> {
            skel.joint_index(name)
                .ok_or_else(|| Error::SkeletonMismatch(format!("missing joint {name}")))
        };
        let mut slots: Vec<Slot> = Vec::new();

        // elbow/knee interior angles
        let angle_defs = [
            (Subject::LeftElbow, "left_shoulder", "left_elbow", "left_wrist"),
            (Subject::RightElbow, "right_shoulder", "right_elbow", "right_wrist"),
            (Subject::LeftKnee, "left_hip", "left_knee", "left_ankle"),
            (Subject::RightKnee, "right_hip", "right_knee", "right_ankle"),
        ];
        for (subj, a, v, b) in angle_defs {
            slots.push(Slot {
                category: Category::Angle,
                subjects: vec![subj],
                measure: SlotMeasure::InteriorAngle { a: j(a)?, vertex: j(v)?, b: j(b)? },
                mirror: 0,
            });
        }

        // pairwise distances
        let dist_defs: [(&[Subject], &str, &str); 11] = [
            (&[Subject::Hands], "left_wrist", "right_wrist"),
            (&[Subject::LeftHand, Subject::LeftShoulder], "left_wrist", "left_shoulder"),
            (&[Subject::RightHand, Subject::RightShoulder], "right_wrist", "right_shoulder"),
            (&[Subject::LeftHand, Subject::LeftHip], "left_wrist", "left_hip"),
            (&[Subject::RightHand, Subject::RightHip], "right_wrist", "right_hip"),
            (&[Subject::LeftHand, Subject::LeftKnee], "left_wrist", "left_knee"),
            (&[Subject::RightHand, Subject::RightKnee], "right_wrist", "right_knee"),
            (&[Subject::LeftHand, Subject::Head], "left_wrist", "head"),
            (&[Subject::RightHand, Subject::Head], "right_wrist", "head"),
            (&[Subject::Feet], "left_foot", "right_foot"),
            (&[Subject::Knees], "left_knee", "right_knee"),
        ];
        for (subjects, a, b) in dist_defs {
            slots.push(Slot {
                category: Category::Distance,
                subjects: subjects.to_vec(),
                measure: SlotMeasure::JointDistance { a: j(a)?, b: j(b)? },
                mirror: 0,
            });
        }

        // relative positions vs a reference joint, per axis
        let rel_defs = [
            (Subject::LeftHand, Subject::LeftShoulder, "left_wrist", "left_shoulder"),
            (Subject::RightHand, Subject::RightShoulder, "right_wrist", "right_shoulder"),
            (Subject::LeftElbow, Subject::LeftShoulder, "left_elbow", "left_shoulder"),
            (Subject::RightElbow, Subject::RightShoulder, "right_elbow", "right_shoulder"),
            (Subject::LeftKnee, Subject::LeftHip, "left_knee", "left_hip"),
            (Subject::RightKnee, Subject::RightHip, "right_knee", "right_hip"),
            (Subject::LeftFoot, Subject::LeftHip, "left_ankle", "left_hip"),
            (Subject::RightFoot, Subject::RightHip, "right_ankle", "right_hip"),
        ];
        for (subj, refsubj, sj, rj) in rel_defs {
            for (axis, cat) in [
                (Axis::X, Category::RelposX),
                (Axis::Y, Category::RelposY),
                (Axis::Z, Category::RelposZ),
            ] {
                slots.push(Slot {
                    category: cat,
                    subjects: vec![subj, refsubj],
                    measure: SlotMeasure::Relpos { subject: j(sj)?, reference: j(rj)?, axis },
                    mirror: 0,
                });
            }
        }

        // ground contact (ankles stand in for feet; knees needed by kneel rules)
        let ground_defs = [
            (Subject::LeftFoot, "left_ankle"),
            (Subject::RightFoot, "right_ankle"),
            (Subject::LeftKnee, "left_knee"),
            (Subject::RightKnee, "right_knee"),
        ];
        for (subj, joint) in ground_defs {
            slots.push(Slot {
                category: Category::GroundContact,
                subjects: vec![subj],
                measure: SlotMeasure::GroundHeight { joint: j(joint)? },
                mirror: 0,
            });
        }

        // wire up mirror indices by (category, mirrored subjects)
        let keys: Vec<(Category, Vec<Subject>)> =
            slots.iter().map(|s| (s.category, s.subjects.clone())).collect();
        for i in 0..slots.len() {
            let mirrored: Vec<Subject> = slots[i].subjects.iter().map(|s| s.mirrored()).collect();
            let m = keys
                .iter()
                .position(|(c, subs)| *c == slots[i].category && *subs == mirrored)
                .expect("inventory is closed under mirroring");
            slots[i].mirror = m;
        }
        Ok(Inventory { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Slot index by category and first subject.
    pub fn find(&self, category: Category, subject: Subject) -> Option<usize> {
        self.slots
            .iter()
            .position(|s| s.category == category && s.subjects[0] == subject)
    }
}

/// Raw scalar behind a slot on one keypoint set.
pub fn measure_slot(slot: &Slot, kps: &KeypointSet) -> f64 {
    match slot.measure {
        SlotMeasure::InteriorAngle { a, vertex, b } => {
            let u = kps.positions[a] - kps.positions[vertex];
            let v = kps.positions[b] - kps.positions[vertex];
            let nu = u.norm();
            let nv = v.norm();
            if nu < 1e-12 || nv < 1e-12 {
                return 180.0;
            }
            (u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0).acos().to_degrees()
        }
        SlotMeasure::JointDistance { a, b } => (kps.positions[a] - kps.positions[b]).norm(),
        SlotMeasure::Relpos { subject, reference, axis } => {
            kps.positions[subject][axis.index()] - kps.positions[reference][axis.index()]
        }
        SlotMeasure::GroundHeight { joint } => kps.positions[joint].y - kps.min_y(),
    }
}

fn classify(slot: &Slot, value: f64, skel: &SkeletonDef, thr: &Thresholds) -> Bin {
    let h = skel.height;
    match slot.category {
        Category::Angle => {
            if value >= thr.angle_straight_min {
                Bin::Straight
            } else if value >= thr.angle_slightly_bent_min {
                Bin::SlightlyBent
            } else if value >= thr.angle_partially_bent_min {
                Bin::PartiallyBent
            } else if value >= thr.angle_right_angle_min {
                Bin::RightAngle
            } else {
                Bin::Bent
            }
        }
        Category::Distance => {
            let span = skel.shoulder_span();
            if value <= thr.dist_close_max_h * h {
                Bin::Close
            } else if (value - span).abs() <= thr.dist_shoulder_width_tol * span {
                Bin::ShoulderWidth
            } else if value > thr.dist_wide_min_h * h {
                Bin::Wide
            } else {
                Bin::Normal
            }
        }
        Category::RelposX | Category::RelposY | Category::RelposZ => {
            if value.abs() <= thr.relpos_neutral_band_h * h {
                Bin::Neutral
            } else if value > 0.0 {
                Bin::Positive
            } else {
                Bin::Negative
            }
        }
        Category::GroundContact => {
            if value < thr.ground_contact_max_h * h {
                Bin::OnGround
            } else {
                Bin::OffGround
            }
        }
    }
}

/// One classified property of one pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posecode {
    pub category: Category,
    pub subjects: Vec<Subject>,
    pub bin: Bin,
}

/// One bin per inventory slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosecodeSet {
    pub bins: Vec<Bin>,
}

impl PosecodeSet {
    pub fn code(&self, inv: &Inventory, slot: usize) -> Posecode {
        Posecode {
            category: inv.slots[slot].category,
            subjects: inv.slots[slot].subjects.clone(),
            bin: self.bins[slot],
        }
    }
}

/// Classify every inventory slot; deterministic.
pub fn compute_posecodes(
    kps: &KeypointSet,
    skel: &SkeletonDef,
    inv: &Inventory,
    thr: &Thresholds,
) -> PosecodeSet {
    let bins = inv
        .slots
        .iter()
        .map(|slot| classify(slot, measure_slot(slot, kps), skel, thr))
        .collect();
    PosecodeSet { bins }
}

/// Number of slots whose bins differ (Hamming distance).
pub fn count_differences(a: &PosecodeSet, b: &PosecodeSet) -> Result<usize> {
    if a.bins.len() != b.bins.len() {
        return Err(Error::InventoryMismatch);
    }
    Ok(a.bins.iter().zip(&b.bins).filter(|(x, y)| x != y).count())
}

/// Empirical per-slot bin frequencies over a reference corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub corpus_size: usize,
    /// Per slot: frequency per bin, keyed by bin name; sums to 1 per slot.
    pub slots: Vec<BTreeMap<String, f64>>,
}

impl FrequencyTable {
    pub fn frequency(&self, slot: usize, bin: Bin) -> f64 {
        self.slots[slot].get(bin.name()).copied().unwrap_or(0.0)
    }

    pub fn is_rare(&self, slot: usize, bin: Bin, thr: &Thresholds) -> bool {
        self.frequency(slot, bin) < thr.rarity_threshold
    }

    /// Uninformative table: every bin uniformly likely, so nothing is rare
    /// under any sensible rarity threshold.
    pub fn uniform(inv: &Inventory) -> FrequencyTable {
        let slots = inv
            .slots
            .iter()
            .map(|s| {
                let bins = s.category.bins();
                bins.iter()
                    .map(|b| (b.name().to_string(), 1.0 / bins.len() as f64))
                    .collect()
            })
            .collect();
        FrequencyTable { corpus_size: 0, slots }
    }
}

pub fn build_frequency_table(
    corpus: &[PosecodeSet],
    inv: &Inventory,
) -> Result<FrequencyTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len() as f64;
    let mut slots = Vec::with_capacity(inv.len());
    for (i, slot) in inv.slots.iter().enumerate() {
        let mut counts: BTreeMap<String, f64> = slot
            .category
            .bins()
            .iter()
            .map(|b| (b.name().to_string(), 0.0))
            .collect();
        for set in corpus {
            *counts.get_mut(set.bins[i].name()).unwrap() += 1.0;
        }
        for v in counts.values_mut() {
            *v /= n;
        }
        slots.push(counts);
    }
    Ok(FrequencyTable { corpus_size: corpus.len(), slots })
}
