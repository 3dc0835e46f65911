//! Body-part subjects used by codes, templates and the parser.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    LeftElbow,
    RightElbow,
    LeftKnee,
    RightKnee,
    LeftHand,
    RightHand,
    LeftFoot,
    RightFoot,
    LeftShoulder,
    RightShoulder,
    LeftHip,
    RightHip,
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
    Head,
    Hands,
    Feet,
    Knees,
    Body,
    BothHands,
    BothElbows,
    BothKnees,
    BothFeet,
}

pub const ALL_SUBJECTS: &[Subject] = &[
    Subject::LeftElbow,
    Subject::RightElbow,
    Subject::LeftKnee,
    Subject::RightKnee,
    Subject::LeftHand,
    Subject::RightHand,
    Subject::LeftFoot,
    Subject::RightFoot,
    Subject::LeftShoulder,
    Subject::RightShoulder,
    Subject::LeftHip,
    Subject::RightHip,
    Subject::LeftArm,
    Subject::RightArm,
    Subject::LeftLeg,
    Subject::RightLeg,
    Subject::Head,
    Subject::Hands,
    Subject::Feet,
    Subject::Knees,
    Subject::Body,
    Subject::BothHands,
    Subject::BothElbows,
    Subject::BothKnees,
    Subject::BothFeet,
];

impl Subject {
    pub fn name(self) -> &'static str {
        use Subject::*;
        match self {
            LeftElbow => "left_elbow",
            RightElbow => "right_elbow",
            LeftKnee => "left_knee",
            RightKnee => "right_knee",
            LeftHand => "left_hand",
            RightHand => "right_hand",
            LeftFoot => "left_foot",
            RightFoot => "right_foot",
            LeftShoulder => "left_shoulder",
            RightShoulder => "right_shoulder",
            LeftHip => "left_hip",
            RightHip => "right_hip",
            LeftArm => "left_arm",
            RightArm => "right_arm",
            LeftLeg => "left_leg",
            RightLeg => "right_leg",
            Head => "head",
            Hands => "hands",
            Feet => "feet",
            Knees => "knees",
            Body => "body",
            BothHands => "both_hands",
            BothElbows => "both_elbows",
            BothKnees => "both_knees",
            BothFeet => "both_feet",
        }
    }

    pub fn from_name(name: &str) -> Option<Subject> {
        ALL_SUBJECTS.iter().copied().find(|s| s.name() == name)
    }

    /// Surface form with its own determiner.
    pub fn phrase(self) -> &'static str {
        use Subject::*;
        match self {
            LeftElbow => "your left elbow",
            RightElbow => "your right elbow",
            LeftKnee => "your left knee",
            RightKnee => "your right knee",
            LeftHand => "your left hand",
            RightHand => "your right hand",
            LeftFoot => "your left foot",
            RightFoot => "your right foot",
            LeftShoulder => "your left shoulder",
            RightShoulder => "your right shoulder",
            LeftHip => "your left hip",
            RightHip => "your right hip",
            LeftArm => "your left arm",
            RightArm => "your right arm",
            LeftLeg => "your left leg",
            RightLeg => "your right leg",
            Head => "your head",
            Hands => "your hands",
            Feet => "your feet",
            Knees => "your knees",
            Body => "your body",
            BothHands => "both hands",
            BothElbows => "both elbows",
            BothKnees => "both knees",
            BothFeet => "both feet",
        }
    }

    /// Left/right counterpart; unsided and paired subjects map to themselves.
    pub fn mirrored(self) -> Subject {
        use Subject::*;
        match self {
            LeftElbow => RightElbow,
            RightElbow => LeftElbow,
            LeftKnee => RightKnee,
            RightKnee => LeftKnee,
            LeftHand => RightHand,
            RightHand => LeftHand,
            LeftFoot => RightFoot,
            RightFoot => LeftFoot,
            LeftShoulder => RightShoulder,
            RightShoulder => LeftShoulder,
            LeftHip => RightHip,
            RightHip => LeftHip,
            LeftArm => RightArm,
            RightArm => LeftArm,
            LeftLeg => RightLeg,
            RightLeg => LeftLeg,
            other => other,
        }
    }

    /// Mirror pair that merges into this "both" subject, if any.
    pub fn both_of(left: Subject, right: Subject) -> Option<Subject> {
        use Subject::*;
        match (left, right) {
            (LeftHand, RightHand) | (RightHand, LeftHand) => Some(BothHands),
            (LeftElbow, RightElbow) | (RightElbow, LeftElbow) => Some(BothElbows),
            (LeftKnee, RightKnee) | (RightKnee, LeftKnee) => Some(BothKnees),
            (LeftFoot, RightFoot) | (RightFoot, LeftFoot) => Some(BothFeet),
            _ => None,
        }
    }

    /// Underlying singleton subjects of a "both" or paired subject.
    pub fn expand(self) -> Vec<Subject> {
        use Subject::*;
        match self {
            BothHands | Hands => vec![LeftHand, RightHand],
            BothElbows => vec![LeftElbow, RightElbow],
            BothKnees | Knees => vec![LeftKnee, RightKnee],
            BothFeet | Feet => vec![LeftFoot, RightFoot],
            other => vec![other],
        }
    }
}

impl std::fmt::Display for Subject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Subject {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Subject {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Subject::from_name(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown subject `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for &s in ALL_SUBJECTS {
            assert_eq!(Subject::from_name(s.name()), Some(s));
        }
    }

    #[test]
    fn mirror_is_involution() {
        for &s in ALL_SUBJECTS {
            assert_eq!(s.mirrored().mirrored(), s);
        }
    }
}
