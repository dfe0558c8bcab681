//! Semantic decision vocabularies and the pruned decision-tree enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GapChoice {
    /// Stay behind the front vehicle on the current lane.
    Gap0,
    Gap1,
    Gap2,
}

impl GapChoice {
    pub const ALL: [GapChoice; 3] = [GapChoice::Gap0, GapChoice::Gap1, GapChoice::Gap2];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LateralDecision {
    LaneKeep,
    LeftChange,
    LeftProbe,
}

impl LateralDecision {
    pub const ALL: [LateralDecision; 3] = [
        LateralDecision::LaneKeep,
        LateralDecision::LeftChange,
        LateralDecision::LeftProbe,
    ];

    /// True for decisions that move the ego toward the target lane.
    pub fn is_leftward(self) -> bool {
        !matches!(self, LateralDecision::LaneKeep)
    }
}

/// Lateral decisions permitted for a gap. `Gap0` only allows keeping the lane.
pub fn lateral_decision_set(gap: GapChoice) -> &'static [LateralDecision] {
    match gap {
        GapChoice::Gap0 => &[LateralDecision::LaneKeep],
        GapChoice::Gap1 | GapChoice::Gap2 => &LateralDecision::ALL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EgoDecision {
    pub gap: GapChoice,
    pub lateral: LateralDecision,
}

impl EgoDecision {
    pub const fn new(gap: GapChoice, lateral: LateralDecision) -> Self {
        Self { gap, lateral }
    }

    pub fn is_valid(&self) -> bool {
        lateral_decision_set(self.gap).contains(&self.lateral)
    }

    /// Every valid decision, in enum order.
    pub fn all() -> Vec<EgoDecision> {
        GapChoice::ALL
            .iter()
            .flat_map(|&g| lateral_decision_set(g).iter().map(move |&l| EgoDecision::new(g, l)))
            .collect()
    }
}

impl Default for EgoDecision {
    fn default() -> Self {
        Self::new(GapChoice::Gap0, LateralDecision::LaneKeep)
    }
}

impl fmt::Display for EgoDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}", self.gap, self.lateral)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionSequence {
    pub steps: Vec<EgoDecision>,
}

impl DecisionSequence {
    pub fn new(steps: Vec<EgoDecision>) -> Self {
        Self { steps }
    }

    pub fn constant(decision: EgoDecision, horizon: usize) -> Self {
        Self::new(vec![decision; horizon])
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn first(&self) -> EgoDecision {
        self.steps[0]
    }

    /// The first gap in the sequence other than `Gap0`, which determines the
    /// interaction partner for the whole rollout.
    pub fn committed_gap(&self) -> Option<GapChoice> {
        self.steps
            .iter()
            .map(|d| d.gap)
            .find(|&g| g != GapChoice::Gap0)
    }

    /// Number of decision changes along `root -> steps[0] -> ... -> steps[H-1]`.
    pub fn changes_from(&self, root: EgoDecision) -> usize {
        let mut prev = root;
        let mut n = 0;
        for &d in &self.steps {
            if d != prev {
                n += 1;
            }
            prev = d;
        }
        n
    }
}

impl fmt::Display for DecisionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SvAction {
    Assert,
    Yield,
}

impl SvAction {
    pub const ALL: [SvAction; 2] = [SvAction::Assert, SvAction::Yield];

    pub fn index(self) -> usize {
        match self {
            SvAction::Assert => 0,
            SvAction::Yield => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneRules {
    pub max_decision_changes: usize,
    pub forbidden_transitions: Vec<(EgoDecision, EgoDecision)>,
    /// Decision chosen in the previous planning cycle.
    pub root: EgoDecision,
    /// Gaps that exist in the current scene. Decisions on other gaps are never emitted.
    pub available_gaps: Vec<GapChoice>,
}

impl Default for PruneRules {
    fn default() -> Self {
        Self {
            max_decision_changes: 2,
            forbidden_transitions: default_forbidden_transitions(),
            root: EgoDecision::default(),
            available_gaps: GapChoice::ALL.to_vec(),
        }
    }
}

/// Switching gaps while committed to a lane change, in either direction.
pub fn default_forbidden_transitions() -> Vec<(EgoDecision, EgoDecision)> {
    let all = EgoDecision::all();
    let mut out = Vec::new();
    for &a in &all {
        for &b in &all {
            if a.lateral == LateralDecision::LeftChange
                && b.lateral == LateralDecision::LeftChange
                && a.gap != b.gap
            {
                out.push((a, b));
            }
        }
    }
    out
}

impl PruneRules {
    pub fn with_root(root: EgoDecision) -> Self {
        Self {
            root,
            ..Self::default()
        }
    }

    fn forbids(&self, from: EgoDecision, to: EgoDecision) -> bool {
        self.forbidden_transitions.contains(&(from, to))
    }
}

/// Depth-first walk of the decision tree rooted at `rules.root`.
///
/// Children of every node are visited in enum order, so the output is sorted
/// lexicographically by step. An invalid root yields an empty list.
pub fn enumerate_ego_sequences(rules: &PruneRules, horizon: usize) -> Vec<DecisionSequence> {
    if horizon == 0 || !rules.root.is_valid() {
        return Vec::new();
    }
    let children: Vec<EgoDecision> = EgoDecision::all()
        .into_iter()
        .filter(|d| rules.available_gaps.contains(&d.gap))
        .collect();

    let mut out = Vec::new();
    let mut path = Vec::with_capacity(horizon);
    expand(rules, &children, horizon, rules.root, 0, &mut path, &mut out);
    out
}

fn expand(
    rules: &PruneRules,
    children: &[EgoDecision],
    horizon: usize,
    parent: EgoDecision,
    changes: usize,
    path: &mut Vec<EgoDecision>,
    out: &mut Vec<DecisionSequence>,
) {
    if path.len() == horizon {
        out.push(DecisionSequence::new(path.clone()));
        return;
    }
    for &child in children {
        let changes = changes + usize::from(child != parent);
        if changes > rules.max_decision_changes || rules.forbids(parent, child) {
            continue;
        }
        path.push(child);
        expand(rules, children, horizon, child, changes, path, out);
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionTuple {
    pub sv: SvAction,
    pub ego: DecisionSequence,
    /// Row and column of this tuple in the game matrix.
    pub row: usize,
    pub col: usize,
}

/// Row-major Cartesian product of the group actions and the ego sequences.
pub fn build_action_tuples(ego_seqs: &[DecisionSequence], sv_actions: &[SvAction]) -> Vec<ActionTuple> {
    sv_actions
        .iter()
        .enumerate()
        .flat_map(|(row, &sv)| {
            ego_seqs.iter().enumerate().map(move |(col, seq)| ActionTuple {
                sv,
                ego: seq.clone(),
                row,
                col,
            })
        })
        .collect()
}
