//! Pose representation, forward kinematics, orientation normalization,
//! left/right mirroring and the geometric distance metrics.
//!
//! Frame convention: +y up, +z the subject's facing direction after
//! normalization, +x the subject's left. The pelvis is the root and always
//! sits at the origin of a keypoint set.

use std::sync::OnceLock;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NUM_JOINTS: usize = 22;

pub const SKELETON_NAME: &str = "posefix22";

#[derive(Debug, Clone, Deserialize)]
struct JointRaw {
    name: String,
    parent: i64,
    offset: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
struct SkeletonRaw {
    name: String,
    height: f64,
    joints: Vec<JointRaw>,
}

/// Fixed 22-joint kinematic tree with canonical T-pose bone offsets.
#[derive(Debug, Clone)]
pub struct SkeletonDef {
    pub name: String,
    /// Canonical body height H in meters (head-top-to-foot vertical extent).
    pub height: f64,
    pub joint_names: Vec<String>,
    pub parent: Vec<Option<usize>>,
    pub offset: Vec<Vector3<f64>>,
    /// For each joint, its left/right counterpart (self for unsided joints).
    pub mirror: Vec<usize>,
}

const SKELETON_JSON: &str = include_str!("../data/skeleton22.json");

static CANONICAL: OnceLock<SkeletonDef> = OnceLock::new();

impl SkeletonDef {
    /// The shipped `posefix22` skeleton.
    pub fn canonical() -> &'static SkeletonDef {
        CANONICAL.get_or_init(|| {
            SkeletonDef::from_json(SKELETON_JSON).expect("shipped skeleton22.json is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<SkeletonDef> {
        let raw: SkeletonRaw = serde_json::from_str(text)?;
        let n = raw.joints.len();
        if n != NUM_JOINTS {
            return Err(Error::JointCountMismatch { expected: NUM_JOINTS, got: n });
        }
        let joint_names: Vec<String> = raw.joints.iter().map(|j| j.name.clone()).collect();
        let mut parent = Vec::with_capacity(n);
        for (i, j) in raw.joints.iter().enumerate() {
            if j.parent < 0 {
                if i != 0 {
                    return Err(Error::SkeletonMismatch(format!("joint {i} is a second root")));
                }
                parent.push(None);
            } else {
                let p = j.parent as usize;
                if p >= i {
                    // forward references would allow cycles; require topological order
                    return Err(Error::SkeletonMismatch(format!(
                        "joint {i} has parent {p} >= itself"
                    )));
                }
                parent.push(Some(p));
            }
        }
        let offset: Vec<Vector3<f64>> =
            raw.joints.iter().map(|j| Vector3::from(j.offset)).collect();

        // left/right mirror pairing by name
        let mut mirror = vec![usize::MAX; n];
        for (i, name) in joint_names.iter().enumerate() {
            let twin = if let Some(rest) = name.strip_prefix("left_") {
                format!("right_{rest}")
            } else if let Some(rest) = name.strip_prefix("right_") {
                format!("left_{rest}")
            } else {
                mirror[i] = i;
                continue;
            };
            let j = joint_names
                .iter()
                .position(|m| *m == twin)
                .ok_or_else(|| Error::SkeletonMismatch(format!("no mirror twin for {name}")))?;
            mirror[i] = j;
        }
        let skel = SkeletonDef { name: raw.name, height: raw.height, joint_names, parent, offset, mirror };

        // mirrored offsets must be reflections across x = 0
        for i in 0..n {
            let m = skel.mirror[i];
            let o = skel.offset[i];
            let om = skel.offset[m];
            if (o.x + om.x).abs() > 1e-12 || (o.y - om.y).abs() > 1e-12 || (o.z - om.z).abs() > 1e-12 {
                return Err(Error::SkeletonMismatch(format!(
                    "offsets of {} and {} are not x-mirrored",
                    skel.joint_names[i], skel.joint_names[m]
                )));
            }
        }
        // H must equal the canonical vertical extent
        let tpose = skel.t_pose_keypoints();
        let max_y = tpose.positions.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let min_y = tpose.positions.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        if ((max_y - min_y) - skel.height).abs() > 1e-9 {
            return Err(Error::SkeletonMismatch(format!(
                "height {} does not match T-pose extent {}",
                skel.height,
                max_y - min_y
            )));
        }
        Ok(skel)
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    /// Keypoints of the canonical T-pose (identity rotations).
    pub fn t_pose_keypoints(&self) -> KeypointSet {
        let mut positions = vec![Vector3::zeros(); self.offset.len()];
        for i in 1..self.offset.len() {
            let p = self.parent[i].unwrap();
            positions[i] = positions[p] + self.offset[i];
        }
        KeypointSet { positions }
    }

    /// T-pose distance between the shoulder joints.
    pub fn shoulder_span(&self) -> f64 {
        let t = self.t_pose_keypoints();
        let l = self.joint_index("left_shoulder").unwrap();
        let r = self.joint_index("right_shoulder").unwrap();
        (t.positions[l] - t.positions[r]).norm()
    }
}

/// Per-joint local axis-angle rotations plus an explicit root yaw about +y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotations: Vec<[f64; 3]>,
    pub root_yaw: f64,
}

/// Wire format: `{"skeleton":"posefix22","rotations":[[ax,ay,az]x22],"root_yaw":r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseJson {
    pub skeleton: String,
    pub rotations: Vec<[f64; 3]>,
    pub root_yaw: f64,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose { rotations: vec![[0.0; 3]; NUM_JOINTS], root_yaw: 0.0 }
    }

    pub fn from_json(text: &str, skel: &SkeletonDef) -> Result<Pose> {
        let raw: PoseJson = serde_json::from_str(text)?;
        if raw.skeleton != skel.name {
            return Err(Error::SkeletonMismatch(format!(
                "pose targets skeleton `{}`, expected `{}`",
                raw.skeleton, skel.name
            )));
        }
        if raw.rotations.len() != skel.joint_names.len() {
            return Err(Error::JointCountMismatch {
                expected: skel.joint_names.len(),
                got: raw.rotations.len(),
            });
        }
        for r in &raw.rotations {
            if !r.iter().all(|v| v.is_finite()) {
                return Err(Error::SkeletonMismatch("non-finite rotation".into()));
            }
        }
        if !raw.root_yaw.is_finite() {
            return Err(Error::SkeletonMismatch("non-finite root yaw".into()));
        }
        Ok(Pose { rotations: raw.rotations, root_yaw: raw.root_yaw }.canonicalized())
    }

    pub fn to_json_value(&self) -> PoseJson {
        PoseJson {
            skeleton: SKELETON_NAME.to_string(),
            rotations: self.rotations.clone(),
            root_yaw: self.root_yaw,
        }
    }

    /// Axis-angle magnitudes mapped into [0, pi], yaw wrapped to (-pi, pi].
    pub fn canonicalized(&self) -> Pose {
        let rotations = self.rotations.iter().map(|r| canonicalize_axis_angle(*r)).collect();
        Pose { rotations, root_yaw: wrap_angle(self.root_yaw) }
    }
}

pub fn canonicalize_axis_angle(r: [f64; 3]) -> [f64; 3] {
    let v = Vector3::from(r);
    let theta = v.norm();
    if theta <= std::f64::consts::PI {
        return r;
    }
    let tau = std::f64::consts::TAU;
    let mut t = theta % tau;
    let mut axis = v / theta;
    if t > std::f64::consts::PI {
        t = tau - t;
        axis = -axis;
    }
    let out = axis * t;
    [out.x, out.y, out.z]
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut w = a % tau;
    if w <= -std::f64::consts::PI {
        w += tau;
    } else if w > std::f64::consts::PI {
        w -= tau;
    }
    w
}

/// World-frame joint positions in meters; pelvis at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    pub positions: Vec<Vector3<f64>>,
}

impl KeypointSet {
    /// Mirror image across the x = 0 plane, with left/right joint slots swapped
    /// so each named joint still refers to the same body side semantics.
    pub fn mirror_x(&self, skel: &SkeletonDef) -> KeypointSet {
        let mut positions = vec![Vector3::zeros(); self.positions.len()];
        for (i, &m) in skel.mirror.iter().enumerate() {
            let p = self.positions[m];
            positions[i] = Vector3::new(-p.x, p.y, p.z);
        }
        KeypointSet { positions }
    }

    pub fn min_y(&self) -> f64 {
        self.positions.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }
}

fn local_rotation(r: [f64; 3]) -> UnitQuaternion<f64> {
    UnitQuaternion::from_scaled_axis(Vector3::from(r))
}

/// Compose per-joint local rotations with bone offsets down the tree.
pub fn forward_kinematics(pose: &Pose, skel: &SkeletonDef) -> Result<KeypointSet> {
    let n = skel.joint_names.len();
    if pose.rotations.len() != n {
        return Err(Error::JointCountMismatch { expected: n, got: pose.rotations.len() });
    }
    let mut world_rot = Vec::with_capacity(n);
    let mut positions = vec![Vector3::zeros(); n];
    let yaw = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), pose.root_yaw);
    world_rot.push(yaw * local_rotation(pose.rotations[0]));
    for i in 1..n {
        let p = skel.parent[i].unwrap();
        positions[i] = positions[p] + world_rot[p] * skel.offset[i];
        let r = world_rot[p] * local_rotation(pose.rotations[i]);
        world_rot.push(r);
    }
    Ok(KeypointSet { positions })
}

/// Horizontal facing direction of a body: cross(hip-to-hip, up), falling back
/// to the shoulder axis when the hips are vertically aligned.
pub fn facing_direction(kps: &KeypointSet, skel: &SkeletonDef) -> Result<Vector3<f64>> {
    let axis_facing = |l: &str, r: &str| -> Option<Vector3<f64>> {
        let li = skel.joint_index(l)?;
        let ri = skel.joint_index(r)?;
        let axis = kps.positions[li] - kps.positions[ri];
        let mut f = axis.cross(&Vector3::y());
        f.y = 0.0;
        if f.norm() < 1e-9 {
            None
        } else {
            Some(f.normalize())
        }
    };
    axis_facing("left_hip", "right_hip")
        .or_else(|| axis_facing("left_shoulder", "right_shoulder"))
        .ok_or(Error::DegenerateOrientation)
}

/// Rotate the pose about +y so it faces +z; returns the removed yaw.
pub fn normalize_orientation(pose: &Pose, skel: &SkeletonDef) -> Result<(Pose, f64)> {
    let kps = forward_kinematics(pose, skel)?;
    let f = facing_direction(&kps, skel)?;
    let yaw = f.x.atan2(f.z);
    let mut out = pose.clone();
    out.root_yaw = wrap_angle(out.root_yaw - yaw);
    Ok((out, yaw))
}

/// Swap left/right joint rotations and mirror them across the x = 0 plane.
pub fn lr_flip_pose(pose: &Pose, skel: &SkeletonDef) -> Pose {
    let n = pose.rotations.len();
    let mut rotations = vec![[0.0; 3]; n];
    for i in 0..n {
        let src = pose.rotations[skel.mirror[i]];
        rotations[i] = [src[0], -src[1], -src[2]];
    }
    Pose { rotations, root_yaw: -pose.root_yaw }
}

/// Mean per-joint Euclidean error, in millimeters.
pub fn mpje(a: &KeypointSet, b: &KeypointSet) -> f64 {
    debug_assert_eq!(a.positions.len(), b.positions.len());
    let n = a.positions.len();
    let sum: f64 = a
        .positions
        .iter()
        .zip(&b.positions)
        .map(|(pa, pb)| (pa - pb).norm())
        .sum();
    sum / n as f64 * 1000.0
}

/// Mean rotation-group geodesic angle between corresponding joints, in degrees.
pub fn geodesic_distance(a: &Pose, b: &Pose) -> Result<f64> {
    if a.rotations.len() != b.rotations.len() {
        return Err(Error::JointCountMismatch { expected: a.rotations.len(), got: b.rotations.len() });
    }
    let a = a.canonicalized();
    let b = b.canonicalized();
    let n = a.rotations.len();
    let sum: f64 = a
        .rotations
        .iter()
        .zip(&b.rotations)
        .map(|(ra, rb)| local_rotation(*ra).angle_to(&local_rotation(*rb)))
        .sum();
    Ok((sum / n as f64).to_degrees())
}
