//! Code selection, syntactic aggregation and body-part-graph ordering:
//! turns an extracted `CodeSet` into an `InstructionPlan` ready for
//! verbalization.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Thresholds;
use crate::paircodes::{
    CodeSet, Direction, Magnitude, OrientationCode, PairKind, Paircode, SuperPaircode,
};
use crate::paircodes::BStatement;
use crate::posecodes::Axis;
use crate::subjects::Subject;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Body-part graph
// ---------------------------------------------------------------------------

/// Rooted graph of body parts; edges are inclusion/proximity links.
#[derive(Debug, Clone)]
pub struct BodyPartGraph {
    pub nodes: Vec<String>,
    pub children: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
    index: HashMap<String, usize>,
}

pub const DEFAULT_GRAPH_TEXT: &str = include_str!("../data/body_graph.txt");

static CANONICAL_GRAPH: OnceLock<BodyPartGraph> = OnceLock::new();

impl BodyPartGraph {
    pub fn canonical() -> &'static BodyPartGraph {
        CANONICAL_GRAPH.get_or_init(|| {
            BodyPartGraph::parse(DEFAULT_GRAPH_TEXT).expect("shipped body_graph.txt is valid")
        })
    }

    /// Parse `parent -> child` lines.
    pub fn parse(text: &str) -> Result<BodyPartGraph> {
        let mut nodes: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let intern = |nodes: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str| {
            *index.entry(name.to_string()).or_insert_with(|| {
                nodes.push(name.to_string());
                nodes.len() - 1
            })
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line.split_once("->").ok_or_else(|| Error::DataFormat {
                path: "body_graph".into(),
                msg: format!("line {}: expected `parent -> child`", lineno + 1),
            })?;
            let pa = intern(&mut nodes, &mut index, a.trim());
            let ch = intern(&mut nodes, &mut index, b.trim());
            edges.push((pa, ch));
        }
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut parent = vec![None; n];
        for (p, c) in edges {
            children[p].push(c);
            if parent[c].is_some() {
                return Err(Error::DataFormat {
                    path: "body_graph".into(),
                    msg: format!("node {} has two parents", nodes[c]),
                });
            }
            parent[c] = Some(p);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::DataFormat {
                path: "body_graph".into(),
                msg: format!("expected a single root, found {}", roots.len()),
            });
        }
        Ok(BodyPartGraph { nodes, children, parent, root: roots[0], index })
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn depth(&self, mut n: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[n] {
            n = p;
            d += 1;
        }
        d
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let (mut da, mut db) = (self.depth(a), self.depth(b));
        while da > db {
            a = self.parent[a].unwrap();
            da -= 1;
        }
        while db > da {
            b = self.parent[b].unwrap();
            db -= 1;
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    pub fn is_ancestor(&self, anc: usize, mut n: usize) -> bool {
        loop {
            if n == anc {
                return true;
            }
            match self.parent[n] {
                Some(p) => n = p,
                None => return false,
            }
        }
    }

    /// Graph node owning a single subject.
    pub fn node_for_single(&self, s: Subject) -> Result<usize> {
        use Subject::*;
        let name = match s {
            LeftHand => "left_hand",
            RightHand => "right_hand",
            LeftElbow => "left_forearm",
            RightElbow => "right_forearm",
            LeftShoulder | LeftArm => "left_arm",
            RightShoulder | RightArm => "right_arm",
            LeftKnee => "left_lower_leg",
            RightKnee => "right_lower_leg",
            LeftFoot => "left_foot",
            RightFoot => "right_foot",
            LeftLeg | LeftHip => "left_leg",
            RightLeg | RightHip => "right_leg",
            Head => "head",
            Body => "body",
            other => {
                // paired subjects live at the deepest common ancestor
                let parts = other.expand();
                let mut it = parts.iter();
                let mut node = self.node_for_single(*it.next().unwrap())?;
                for p in it {
                    node = self.lca(node, self.node_for_single(*p)?);
                }
                return Ok(node);
            }
        };
        self.node(name).ok_or_else(|| Error::UnmappedSubject(s.name().to_string()))
    }

    /// Graph node owning a code with one or two subjects.
    pub fn node_for_subjects(&self, subjects: &[Subject]) -> Result<usize> {
        let mut it = subjects.iter();
        let first = it.next().ok_or_else(|| Error::UnmappedSubject("<empty>".into()))?;
        let mut node = self.node_for_single(*first)?;
        for s in it {
            node = self.lca(node, self.node_for_single(*s)?);
        }
        Ok(node)
    }

    /// Randomized depth walk: descend by uniform random child choice to a
    /// leaf, backtrack to the most recently visited node with unvisited
    /// children, repeat until every node is visited.
    pub fn walk(&self, rng: &mut impl Rng) -> Vec<usize> {
        self.walk_with(|choices| rng.gen_range(0..choices.len()))
    }

    /// Walk with an injected child-choice function (index into the unvisited
    /// child list); used to oracle-test the traversal logic.
    pub fn walk_with(&self, mut pick: impl FnMut(&[usize]) -> usize) -> Vec<usize> {
        let n = self.nodes.len();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut current = self.root;
        visited[current] = true;
        order.push(current);
        while order.len() < n {
            let unvisited: Vec<usize> = self.children[current]
                .iter()
                .copied()
                .filter(|&c| !visited[c])
                .collect();
            if !unvisited.is_empty() {
                let next = unvisited[pick(&unvisited)];
                visited[next] = true;
                order.push(next);
                current = next;
            } else {
                // backtrack along the visit history
                let back = order
                    .iter()
                    .rev()
                    .copied()
                    .find(|&v| self.children[v].iter().any(|&c| !visited[c]));
                match back {
                    Some(v) => current = v,
                    None => break, // disconnected leftovers are unreachable
                }
            }
        }
        order
    }
}

// ---------------------------------------------------------------------------
// Plan codes
// ---------------------------------------------------------------------------

/// One per-axis component of a merged multi-direction displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveComponent {
    pub axis: Axis,
    pub direction: Direction,
    pub magnitude: Magnitude,
    pub raw_delta: f64,
}

/// A (possibly aggregated) instruction item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlanCode {
    Pair(Paircode),
    /// Same-subject displacements on different axes merged into one code.
    MultiMove { subject: Subject, moves: Vec<MoveComponent> },
    /// Mirror-pair subjects with identical kind/direction/magnitude.
    Both {
        kind: PairKind,
        subject: Subject,
        direction: Direction,
        magnitude: Magnitude,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        axis: Option<Axis>,
        parts: Vec<Paircode>,
    },
    Super(SuperPaircode),
    BStatement(BStatement),
}

impl PlanCode {
    fn rank_value(&self, thr: &Thresholds) -> f64 {
        match self {
            PlanCode::Pair(p) => pair_rank(p, thr),
            PlanCode::MultiMove { moves, .. } => moves
                .iter()
                .map(|m| m.raw_delta.abs() / thr.pair_dist_sig_h)
                .fold(0.0, f64::max),
            PlanCode::Both { parts, .. } => {
                parts.iter().map(|p| pair_rank(p, thr)).fold(0.0, f64::max)
            }
            PlanCode::Super(_) => f64::INFINITY,
            PlanCode::BStatement(_) => 0.0,
        }
    }

    fn tie_break(&self) -> usize {
        match self {
            PlanCode::Pair(p) => p.slot_rank,
            PlanCode::MultiMove { moves: _, .. } => usize::MAX / 2,
            PlanCode::Both { parts, .. } => parts.iter().map(|p| p.slot_rank).min().unwrap_or(0),
            PlanCode::Super(_) => 0,
            PlanCode::BStatement(b) => b.slot,
        }
    }

    pub fn subjects(&self) -> Vec<Subject> {
        match self {
            PlanCode::Pair(p) => p.subjects.clone(),
            PlanCode::MultiMove { subject, .. } => vec![*subject],
            PlanCode::Both { subject, .. } => vec![*subject],
            PlanCode::Super(s) => vec![s.subject],
            PlanCode::BStatement(b) => b.code.subjects.clone(),
        }
    }
}

/// Normalized |delta| relative to the emission threshold of the code's kind,
/// so angle and distance codes rank on a common scale.
fn pair_rank(p: &Paircode, thr: &Thresholds) -> f64 {
    match p.kind {
        PairKind::AngleChange => p.raw_delta.abs() / thr.pair_angle_sig_deg,
        PairKind::DistanceChange | PairKind::Displacement => {
            p.raw_delta.abs() / thr.pair_dist_sig_h
        }
    }
}

/// Working set for select/aggregate/order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanSet {
    pub orientation: Option<OrientationCode>,
    pub items: Vec<PlanCode>,
}

impl PlanSet {
    pub fn from_codes(cs: &CodeSet) -> PlanSet {
        let mut items: Vec<PlanCode> =
            cs.super_paircodes.iter().cloned().map(PlanCode::Super).collect();
        items.extend(cs.paircodes.iter().cloned().map(PlanCode::Pair));
        items.extend(cs.b_statements.iter().cloned().map(PlanCode::BStatement));
        PlanSet { orientation: cs.orientation.clone(), items }
    }
}

/// The ordered instruction list handed to the verbalizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionPlan {
    pub orientation: Option<OrientationCode>,
    pub items: Vec<PlanCode>,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

/// Remove trivial and redundant codes, then cap by |rawDelta| rank.
/// Super-paircodes and the orientation code are always kept.
pub fn select_codes(
    ps: &PlanSet,
    cap: usize,
    thr: &Thresholds,
    graph: &BodyPartGraph,
) -> Result<PlanSet> {
    let body = graph.root;
    // nodes covered by emitted super-paircodes (body-wide supers cover nothing)
    let mut super_nodes: Vec<usize> = Vec::new();
    for item in &ps.items {
        if let PlanCode::Super(s) = item {
            let node = graph.node_for_single(s.subject)?;
            if node != body {
                super_nodes.push(node);
            }
        }
    }

    let mut kept: Vec<&PlanCode> = Vec::new();
    for item in &ps.items {
        match item {
            PlanCode::Pair(p) if p.kind == PairKind::Displacement => {
                // keep-floor: slight displacements below the floor are trivial
                if p.raw_delta.abs() < thr.select_keep_floor_disp_h {
                    continue;
                }
                // a displacement fully implied by a super on the same limb
                let node = graph.node_for_subjects(&p.subjects)?;
                if super_nodes.iter().any(|&s| graph.is_ancestor(s, node)) {
                    continue;
                }
                kept.push(item);
            }
            _ => kept.push(item),
        }
    }

    // order candidates: supers first (infinite rank), then by normalized
    // |rawDelta| descending, slot order breaking ties
    let mut ranked: Vec<(usize, &PlanCode)> = kept.into_iter().enumerate().collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        let ra = a.rank_value(thr);
        let rb = b.rank_value(thr);
        rb.partial_cmp(&ra)
            .unwrap()
            .then(a.tie_break().cmp(&b.tie_break()))
            .then(ia.cmp(ib))
    });
    let mut selected: Vec<PlanCode> = ranked.into_iter().take(cap).map(|(_, c)| c.clone()).collect();
    // restore stable input order
    selected.sort_by_key(|c| {
        ps.items
            .iter()
            .position(|o| o == c)
            .unwrap_or(usize::MAX)
    });
    Ok(PlanSet { orientation: ps.orientation.clone(), items: selected })
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Merge same-subject multi-axis displacements and mirror-pair codes; idempotent.
pub fn aggregate_codes(ps: &PlanSet) -> PlanSet {
    let mut items: Vec<Option<PlanCode>> = ps.items.iter().cloned().map(Some).collect();

    // (i) same-subject displacement codes on different axes
    for i in 0..items.len() {
        let Some(PlanCode::Pair(a)) = items[i].clone() else { continue };
        if a.kind != PairKind::Displacement {
            continue;
        }
        let mut group: Vec<usize> = vec![i];
        for (j, slot) in items.iter().enumerate().skip(i + 1) {
            if let Some(PlanCode::Pair(b)) = slot {
                if b.kind == PairKind::Displacement && b.subjects == a.subjects {
                    group.push(j);
                }
            }
        }
        if group.len() >= 2 {
            let mut moves: Vec<MoveComponent> = group
                .iter()
                .map(|&j| {
                    let Some(PlanCode::Pair(p)) = items[j].take() else { unreachable!() };
                    MoveComponent {
                        axis: p.axis.expect("displacement codes carry an axis"),
                        direction: p.direction,
                        magnitude: p.magnitude,
                        raw_delta: p.raw_delta,
                    }
                })
                .collect();
            moves.sort_by_key(|m| m.axis);
            items[i] = Some(PlanCode::MultiMove { subject: a.subjects[0], moves });
        }
    }

    // (ii) mirror-pair subjects with identical kind/direction/magnitude
    for i in 0..items.len() {
        let Some(PlanCode::Pair(a)) = items[i].clone() else { continue };
        if a.subjects.len() != 1 {
            continue;
        }
        for j in i + 1..items.len() {
            let Some(PlanCode::Pair(b)) = items[j].clone() else { continue };
            if b.subjects.len() != 1 {
                continue;
            }
            let Some(both) = Subject::both_of(a.subjects[0], b.subjects[0]) else { continue };
            if a.kind == b.kind
                && a.direction == b.direction
                && a.magnitude == b.magnitude
                && a.axis == b.axis
            {
                items[j] = None;
                items[i] = Some(PlanCode::Both {
                    kind: a.kind,
                    subject: both,
                    direction: a.direction,
                    magnitude: a.magnitude,
                    axis: a.axis,
                    parts: vec![a.clone(), b],
                });
                break;
            }
        }
    }

    PlanSet { orientation: ps.orientation.clone(), items: items.into_iter().flatten().collect() }
}

// ---------------------------------------------------------------------------
// Ordering
// ---------------------------------------------------------------------------

/// Seeded randomized depth walk over the body-part graph; codes are emitted
/// in node-visit order, the orientation code pinned first.
pub fn order_codes(ps: &PlanSet, graph: &BodyPartGraph, seed: u64) -> Result<InstructionPlan> {
    let mut rng = crate::rng::rng_from_seed(seed);
    let order = graph.walk(&mut rng);
    let mut visit_pos = vec![usize::MAX; graph.nodes.len()];
    for (pos, &node) in order.iter().enumerate() {
        visit_pos[node] = pos;
    }
    let mut keyed: Vec<(usize, usize, PlanCode)> = Vec::with_capacity(ps.items.len());
    for (idx, item) in ps.items.iter().enumerate() {
        let node = graph.node_for_subjects(&item.subjects())?;
        keyed.push((visit_pos[node], idx, item.clone()));
    }
    keyed.sort_by_key(|(pos, idx, _)| (*pos, *idx));
    Ok(InstructionPlan {
        orientation: ps.orientation.clone(),
        items: keyed.into_iter().map(|(_, _, c)| c).collect(),
        seed,
    })
}

// ---------------------------------------------------------------------------
// Canonical codes (shared by the round-trip checker)
// ---------------------------------------------------------------------------

/// Flattened, aggregation-free view of a code; the unit of round-trip
/// comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalCode {
    pub kind: String,
    pub subjects: Vec<String>,
    pub direction: String,
    pub magnitude: Option<String>,
}

pub fn canonical_of_item(item: &PlanCode) -> Vec<CanonicalCode> {
    match item {
        PlanCode::Pair(p) => vec![CanonicalCode {
            kind: p.kind.name().to_string(),
            subjects: p.subjects.iter().map(|s| s.name().to_string()).collect(),
            direction: p.direction.name().to_string(),
            magnitude: Some(p.magnitude.name().to_string()),
        }],
        PlanCode::MultiMove { subject, moves } => moves
            .iter()
            .map(|m| CanonicalCode {
                kind: PairKind::Displacement.name().to_string(),
                subjects: vec![subject.name().to_string()],
                direction: m.direction.name().to_string(),
                magnitude: Some(m.magnitude.name().to_string()),
            })
            .collect(),
        PlanCode::Both { kind, subject, direction, magnitude, .. } => subject
            .expand()
            .into_iter()
            .map(|s| CanonicalCode {
                kind: kind.name().to_string(),
                subjects: vec![s.name().to_string()],
                direction: direction.name().to_string(),
                magnitude: Some(magnitude.name().to_string()),
            })
            .collect(),
        PlanCode::Super(s) => vec![CanonicalCode {
            kind: "super".to_string(),
            subjects: vec![s.subject.name().to_string()],
            direction: s.intent.clone(),
            magnitude: None,
        }],
        PlanCode::BStatement(b) => vec![CanonicalCode {
            kind: "bstatement".to_string(),
            subjects: b.code.subjects.iter().map(|s| s.name().to_string()).collect(),
            direction: b.code.bin.name().to_string(),
            magnitude: None,
        }],
    }
}

pub fn canonical_of_plan(plan: &InstructionPlan) -> Vec<CanonicalCode> {
    let mut out = Vec::new();
    if let Some(o) = &plan.orientation {
        out.push(CanonicalCode {
            kind: "turn".to_string(),
            subjects: Vec::new(),
            direction: match o.direction {
                crate::paircodes::TurnDirection::Left => "left".to_string(),
                crate::paircodes::TurnDirection::Right => "right".to_string(),
            },
            magnitude: Some(o.magnitude.name().to_string()),
        });
    }
    for item in &plan.items {
        out.extend(canonical_of_item(item));
    }
    out.sort();
    out
}
