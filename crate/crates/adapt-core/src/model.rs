//! The requirements/context model: atomic contexts, softgoals, parametric
//! and alternative tasks, the goal graph and the relation topology that
//! connects contexts, tasks and softgoals.
//!
//! The goal graph is data, not behavior: it documents the scenario and backs
//! topology validation, while inference is driven entirely by the relation
//! edges and the rule bases.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::fuzzy::{FuzzyError, LinguisticVariable, MembershipFunction, UniverseInterval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown element id `{0}`")]
    UnknownId(String),
    #[error("duplicate element id `{0}`")]
    DuplicateId(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("softgoal `{0}` must use the satisfaction universe [0, 1]")]
    SoftgoalUniverse(String),
    #[error("softgoal `{id}` has negative weight {weight}")]
    NegativeWeight { id: String, weight: f64 },
    #[error("adjustable range of task `{0}` exceeds its variable universe")]
    RangeOutsideUniverse(String),
    #[error("alternative `{alternative}` of group `{group}` has a window outside the indicator universe")]
    WindowOutsideUniverse { group: String, alternative: String },
    #[error("alternative `{alternative}` of group `{group}` has anchor {anchor} off its window boundary")]
    AnchorOffBoundary {
        group: String,
        alternative: String,
        anchor: f64,
    },
    #[error("group `{group}` declares alternative `{alternative}` twice")]
    DuplicateAlternative { group: String, alternative: String },
    #[error("alternative `{alternative}` of group `{group}` has no matching indicator term")]
    MissingAlternativeTerm { group: String, alternative: String },
    #[error("membership functions of group `{0}` are not congruent")]
    NonCongruentAlternatives(String),
    #[error("indicator value {value} of group `{group}` falls outside every window")]
    IndicatorOutsideWindows { group: String, value: f64 },
    #[error("decomposition cycle detected at `{0}`")]
    CycleDetected(String),
    #[error("`{0}` is not a leaf of the decomposition graph")]
    NotALeaf(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// A directly monitorable environmental quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicContext {
    pub id: String,
    pub variable: LinguisticVariable,
}

/// A non-functional requirement with a satisfaction degree in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Softgoal {
    pub id: String,
    pub variable: LinguisticVariable,
    pub weight: f64,
}

/// A task with one tunable parameter; `adjustable_range` bounds readaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricTask {
    pub id: String,
    pub variable: LinguisticVariable,
    pub adjustable_range: UniverseInterval,
}

/// One selectable option of an [`AlternativeTaskGroup`]. The window is the
/// indicator stretch on which this option is chosen and the anchor is the
/// window boundary from which the invoking duration is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative {
    pub name: String,
    pub window: UniverseInterval,
    pub anchor: f64,
}

/// Alternative tasks of one goal, folded into a single crisp indicator so
/// that structural choice can be treated like a parametric configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeTaskGroup {
    pub id: String,
    pub goal_name: String,
    pub indicator_variable: LinguisticVariable,
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelationKind {
    Upd,
    Ena,
    Cor,
}

impl RelationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelationKind::Upd => "UPD",
            RelationKind::Ena => "ENA",
            RelationKind::Cor => "COR",
        }
    }
}

/// A typed relation between model elements, referenced by element id.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationEdge {
    pub kind: RelationKind,
    pub sources: Vec<String>,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Goal,
    Task,
    Softgoal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompKind {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub parent: String,
    pub connective: DecompKind,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContributionSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub task: String,
    pub softgoal: String,
    pub sign: ContributionSign,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoalGraph {
    pub nodes: Vec<GraphNode>,
    pub decompositions: Vec<Decomposition>,
    pub contributions: Vec<Contribution>,
}

impl GoalGraph {
    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Node ids that never appear as a decomposition parent.
    pub fn leaves(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| {
                n.kind != NodeKind::Softgoal && !self.decompositions.iter().any(|d| d.parent == n.id)
            })
            .map(|n| n.id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Context,
    Softgoal,
    ParametricTask,
    AlternativeGroup,
}

impl ElementKind {
    pub fn is_task(&self) -> bool {
        matches!(self, ElementKind::ParametricTask | ElementKind::AlternativeGroup)
    }
}

/// Registry of every model element, resolvable by element id and by
/// linguistic variable name. Declaration order is preserved and drives the
/// ordering of every derived artifact (records, CSV columns, reports).
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    pub contexts: Vec<AtomicContext>,
    pub softgoals: Vec<Softgoal>,
    pub parametric_tasks: Vec<ParametricTask>,
    pub alternative_groups: Vec<AlternativeTaskGroup>,
}

impl Registry {
    pub fn new(
        contexts: Vec<AtomicContext>,
        softgoals: Vec<Softgoal>,
        parametric_tasks: Vec<ParametricTask>,
        alternative_groups: Vec<AlternativeTaskGroup>,
    ) -> Result<Self, ModelError> {
        let registry = Self {
            contexts,
            softgoals,
            parametric_tasks,
            alternative_groups,
        };
        registry.validate()?;
        Ok(registry)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for (id, var) in self.iter_elements() {
            if !ids.insert(id.to_string()) {
                return Err(ModelError::DuplicateId(id.to_string()));
            }
            if !names.insert(var.name.clone()) {
                return Err(ModelError::DuplicateVariable(var.name.clone()));
            }
        }
        for sg in &self.softgoals {
            if sg.variable.universe.lo != 0.0 || sg.variable.universe.hi != 1.0 {
                return Err(ModelError::SoftgoalUniverse(sg.id.clone()));
            }
            if sg.weight < 0.0 {
                return Err(ModelError::NegativeWeight {
                    id: sg.id.clone(),
                    weight: sg.weight,
                });
            }
        }
        for task in &self.parametric_tasks {
            let u = &task.variable.universe;
            if task.adjustable_range.lo < u.lo || task.adjustable_range.hi > u.hi {
                return Err(ModelError::RangeOutsideUniverse(task.id.clone()));
            }
        }
        for group in &self.alternative_groups {
            validate_group(group)?;
        }
        Ok(())
    }

    fn iter_elements(&self) -> impl Iterator<Item = (&str, &LinguisticVariable)> {
        self.contexts
            .iter()
            .map(|c| (c.id.as_str(), &c.variable))
            .chain(self.softgoals.iter().map(|s| (s.id.as_str(), &s.variable)))
            .chain(
                self.parametric_tasks
                    .iter()
                    .map(|t| (t.id.as_str(), &t.variable)),
            )
            .chain(
                self.alternative_groups
                    .iter()
                    .map(|g| (g.id.as_str(), &g.indicator_variable)),
            )
    }

    pub fn element_kind(&self, id: &str) -> Option<ElementKind> {
        if self.contexts.iter().any(|c| c.id == id) {
            Some(ElementKind::Context)
        } else if self.softgoals.iter().any(|s| s.id == id) {
            Some(ElementKind::Softgoal)
        } else if self.parametric_tasks.iter().any(|t| t.id == id) {
            Some(ElementKind::ParametricTask)
        } else if self.alternative_groups.iter().any(|g| g.id == id) {
            Some(ElementKind::AlternativeGroup)
        } else {
            None
        }
    }

    pub fn variable_of(&self, id: &str) -> Option<&LinguisticVariable> {
        self.iter_elements()
            .find(|(eid, _)| *eid == id)
            .map(|(_, var)| var)
    }

    pub fn variable_named(&self, name: &str) -> Option<(&LinguisticVariable, ElementKind)> {
        self.contexts
            .iter()
            .map(|c| (&c.variable, ElementKind::Context))
            .chain(
                self.softgoals
                    .iter()
                    .map(|s| (&s.variable, ElementKind::Softgoal)),
            )
            .chain(
                self.parametric_tasks
                    .iter()
                    .map(|t| (&t.variable, ElementKind::ParametricTask)),
            )
            .chain(
                self.alternative_groups
                    .iter()
                    .map(|g| (&g.indicator_variable, ElementKind::AlternativeGroup)),
            )
            .find(|(var, _)| var.name == name)
    }

    pub fn element_id_of_variable(&self, name: &str) -> Option<&str> {
        self.iter_elements()
            .find(|(_, var)| var.name == name)
            .map(|(id, _)| id)
    }

    pub fn softgoal(&self, id: &str) -> Option<&Softgoal> {
        self.softgoals.iter().find(|s| s.id == id)
    }

    pub fn group(&self, id: &str) -> Option<&AlternativeTaskGroup> {
        self.alternative_groups.iter().find(|g| g.id == id)
    }

    /// Ids of all configurable tasks (parametric then groups), declaration order.
    pub fn task_ids(&self) -> Vec<&str> {
        self.parametric_tasks
            .iter()
            .map(|t| t.id.as_str())
            .chain(self.alternative_groups.iter().map(|g| g.id.as_str()))
            .collect()
    }

    /// Search box of a task for readaptation: the adjustable range of a
    /// parametric task, the whole indicator universe of a group.
    pub fn task_bounds(&self, id: &str) -> Option<(f64, f64)> {
        if let Some(task) = self.parametric_tasks.iter().find(|t| t.id == id) {
            return Some((task.adjustable_range.lo, task.adjustable_range.hi));
        }
        self.group(id).map(|g| {
            (
                g.indicator_variable.universe.lo,
                g.indicator_variable.universe.hi,
            )
        })
    }
}

fn validate_group(group: &AlternativeTaskGroup) -> Result<(), ModelError> {
    let universe = &group.indicator_variable.universe;
    let mut shapes: Vec<ShapeSignature> = Vec::new();
    for (i, alt) in group.alternatives.iter().enumerate() {
        if group.alternatives[..i].iter().any(|a| a.name == alt.name) {
            return Err(ModelError::DuplicateAlternative {
                group: group.id.clone(),
                alternative: alt.name.clone(),
            });
        }
        if alt.window.lo < universe.lo - 1e-9 || alt.window.hi > universe.hi + 1e-9 {
            return Err(ModelError::WindowOutsideUniverse {
                group: group.id.clone(),
                alternative: alt.name.clone(),
            });
        }
        let on_boundary = (alt.anchor - alt.window.lo).abs() < 1e-9
            || (alt.anchor - alt.window.hi).abs() < 1e-9;
        if !on_boundary {
            return Err(ModelError::AnchorOffBoundary {
                group: group.id.clone(),
                alternative: alt.name.clone(),
                anchor: alt.anchor,
            });
        }
        let term = group.indicator_variable.term(&alt.name).ok_or_else(|| {
            ModelError::MissingAlternativeTerm {
                group: group.id.clone(),
                alternative: alt.name.clone(),
            }
        })?;
        shapes.push(ShapeSignature::of(&term.mf));
    }
    for pair in shapes.windows(2) {
        if !pair[0].congruent(&pair[1]) {
            return Err(ModelError::NonCongruentAlternatives(group.id.clone()));
        }
    }
    Ok(())
}

/// Segment lengths of a membership function, used for the congruence check
/// (identical shape up to translation or reflection).
#[derive(Debug, Clone, PartialEq)]
enum ShapeSignature {
    Linear(Vec<f64>),
    Bell { width: f64, slope: f64 },
}

impl ShapeSignature {
    fn of(mf: &MembershipFunction) -> Self {
        match *mf {
            MembershipFunction::Triangular { a, b, c } => Self::Linear(alloc::vec![b - a, c - b]),
            MembershipFunction::Trapezoidal { a, b, c, d } => {
                Self::Linear(alloc::vec![b - a, c - b, d - c])
            }
            MembershipFunction::GeneralizedBell { width, slope, .. } => Self::Bell { width, slope },
        }
    }

    fn congruent(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Linear(a), Self::Linear(b)) => {
                if a.len() != b.len() {
                    return false;
                }
                let same = a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-9);
                let mirrored = a
                    .iter()
                    .zip(b.iter().rev())
                    .all(|(x, y)| (x - y).abs() < 1e-9);
                same || mirrored
            }
            (
                Self::Bell {
                    width: w1,
                    slope: s1,
                },
                Self::Bell {
                    width: w2,
                    slope: s2,
                },
            ) => (w1 - w2).abs() < 1e-9 && (s1 - s2).abs() < 1e-9,
            _ => false,
        }
    }
}

/// Outcome of mapping an indicator value onto an alternative task.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub alternative: String,
    pub duration: f64,
    pub degree: f64,
}

/// Maps a crisp indicator value to the alternative whose window contains it.
///
/// The duration is the distance from the window's anchor, the degree is the
/// membership of the indicator in the chosen alternative's term. Boundary
/// ties go to the lower-index alternative. The indicator is clamped to the
/// universe first.
pub fn indicator_to_choice(group: &AlternativeTaskGroup, ind: f64) -> Result<Choice, ModelError> {
    let ind = group.indicator_variable.universe.clamp(ind);
    for alt in &group.alternatives {
        if ind >= alt.window.lo && ind <= alt.window.hi {
            let term = group.indicator_variable.term(&alt.name).ok_or_else(|| {
                ModelError::MissingAlternativeTerm {
                    group: group.id.clone(),
                    alternative: alt.name.clone(),
                }
            })?;
            return Ok(Choice {
                alternative: alt.name.clone(),
                duration: (ind - alt.anchor).abs(),
                degree: term.mf.eval(ind),
            });
        }
    }
    Err(ModelError::IndicatorOutsideWindows {
        group: group.id.clone(),
        value: ind,
    })
}

/// Propagates leaf achievement bottom-up through AND/OR decompositions.
///
/// Returns a satisfied flag for every goal and task node. AND parents need
/// all children satisfied, OR parents at least one.
pub fn goal_satisfaction(
    graph: &GoalGraph,
    achieved: &BTreeSet<String>,
) -> Result<BTreeMap<String, bool>, ModelError> {
    let leaves: BTreeSet<&str> = graph.leaves().into_iter().collect();
    for id in achieved {
        if graph.node(id).is_none() {
            return Err(ModelError::UnknownId(id.clone()));
        }
        if !leaves.contains(id.as_str()) {
            return Err(ModelError::NotALeaf(id.clone()));
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Visit {
        InProgress,
        Done(bool),
    }

    fn eval(
        id: &str,
        graph: &GoalGraph,
        achieved: &BTreeSet<String>,
        state: &mut BTreeMap<String, Visit>,
    ) -> Result<bool, ModelError> {
        match state.get(id) {
            Some(Visit::Done(v)) => return Ok(*v),
            Some(Visit::InProgress) => return Err(ModelError::CycleDetected(id.to_string())),
            None => {}
        }
        state.insert(id.to_string(), Visit::InProgress);
        let value = match graph.decompositions.iter().find(|d| d.parent == id) {
            None => achieved.contains(id),
            Some(decomp) => {
                let mut children = Vec::new();
                for child in &decomp.children {
                    if graph.node(child).is_none() {
                        return Err(ModelError::UnknownId(child.clone()));
                    }
                    children.push(eval(child, graph, achieved, state)?);
                }
                match decomp.connective {
                    DecompKind::And => children.iter().all(|&v| v),
                    DecompKind::Or => children.iter().any(|&v| v),
                }
            }
        };
        state.insert(id.to_string(), Visit::Done(value));
        Ok(value)
    }

    let mut state = BTreeMap::new();
    let mut flags = BTreeMap::new();
    for node in &graph.nodes {
        if node.kind == NodeKind::Softgoal {
            continue;
        }
        let value = eval(&node.id, graph, achieved, &mut state)?;
        flags.insert(node.id.clone(), value);
    }
    Ok(flags)
}

/// Findings of [`validate_topology`]; `errors` are hard failures,
/// `warnings` advisory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopologyReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl TopologyReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks relation edges against the registry and the goal graph.
///
/// Kind constraints (UPD: contexts -> softgoal, ENA: contexts -> task,
/// COR: tasks -> softgoal) and missing contribution links behind COR edges
/// are reported as errors; softgoals without a UPD edge and tasks without an
/// ENA edge are warnings. An id that resolves nowhere is a hard error.
pub fn validate_topology(
    graph: &GoalGraph,
    edges: &[RelationEdge],
    registry: &Registry,
) -> Result<TopologyReport, ModelError> {
    let mut report = TopologyReport::default();

    for edge in edges {
        for source in &edge.sources {
            if registry.element_kind(source).is_none() {
                return Err(ModelError::UnknownId(source.clone()));
            }
        }
        if registry.element_kind(&edge.target).is_none() {
            return Err(ModelError::UnknownId(edge.target.clone()));
        }
    }

    for (i, edge) in edges.iter().enumerate() {
        let kind_name = edge.kind.as_str();
        let target_kind = registry.element_kind(&edge.target).unwrap();
        let (source_ok, target_ok): (fn(ElementKind) -> bool, fn(ElementKind) -> bool) =
            match edge.kind {
                RelationKind::Upd => (
                    |k| k == ElementKind::Context,
                    |k| k == ElementKind::Softgoal,
                ),
                RelationKind::Ena => (|k| k == ElementKind::Context, |k| k.is_task()),
                RelationKind::Cor => (|k| k.is_task(), |k| k == ElementKind::Softgoal),
            };
        for source in &edge.sources {
            let kind = registry.element_kind(source).unwrap();
            if !source_ok(kind) {
                report.errors.push(format!(
                    "edge #{i}: {kind_name} source `{source}` has the wrong element kind"
                ));
            }
        }
        if !target_ok(target_kind) {
            report.errors.push(format!(
                "edge #{i}: {kind_name} target `{}` has the wrong element kind",
                edge.target
            ));
        }
        if edge.kind == RelationKind::Cor {
            for source in &edge.sources {
                let linked = graph
                    .contributions
                    .iter()
                    .any(|c| c.task == *source && c.softgoal == edge.target);
                if !linked {
                    report.errors.push(format!(
                        "edge #{i}: COR `{source}` -> `{}` has no contribution link in the goal graph",
                        edge.target
                    ));
                }
            }
        }
    }

    for contribution in &graph.contributions {
        let task = graph.node(&contribution.task);
        let sg = graph.node(&contribution.softgoal);
        match (task, sg) {
            (Some(t), Some(s)) if t.kind == NodeKind::Task && s.kind == NodeKind::Softgoal => {}
            _ => report.errors.push(format!(
                "contribution `{}` -> `{}` does not link a task node to a softgoal node",
                contribution.task, contribution.softgoal
            )),
        }
    }
    for decomp in &graph.decompositions {
        if graph.node(&decomp.parent).is_none() {
            report
                .errors
                .push(format!("decomposition parent `{}` is not a node", decomp.parent));
        }
        for child in &decomp.children {
            if graph.node(child).is_none() {
                report
                    .errors
                    .push(format!("decomposition child `{child}` is not a node"));
            }
        }
    }
    if goal_satisfaction(graph, &BTreeSet::new()).is_err() {
        report
            .errors
            .push(String::from("decomposition graph contains a cycle"));
    }

    for sg in &registry.softgoals {
        let fed = edges
            .iter()
            .any(|e| e.kind == RelationKind::Upd && e.target == sg.id);
        if !fed {
            report
                .warnings
                .push(format!("softgoal `{}` has no incoming UPD edge", sg.id));
        }
    }
    for task in registry.task_ids() {
        let fed = edges
            .iter()
            .any(|e| e.kind == RelationKind::Ena && e.target == task);
        if !fed {
            report
                .warnings
                .push(format!("task `{task}` has no incoming ENA edge"));
        }
    }

    Ok(report)
}
