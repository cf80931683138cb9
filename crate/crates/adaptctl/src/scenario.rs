//! Scenario files: a single JSON document describing variables, the goal
//! graph, relation edges, rule files, weights, readaptation settings and
//! context trajectories, plus three line-oriented `.rules` files referenced
//! by it (paths relative to the scenario file).
//!
//! Loading resolves everything into `adapt-core` types and validates it:
//! registry invariants, rule kind constraints, conflict detection and
//! trajectory bounds all run here, so a loaded [`Scenario`] is ready to
//! drive the controller.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use adapt_core::controller::{
    ControlError, Controller, NoRuleFiredPolicy, ReadaptationSettings, TriggerMode,
};
use adapt_core::fuzzy::{
    FuzzyError, LinguisticTerm, LinguisticVariable, MembershipFunction, UniverseInterval,
};
use adapt_core::model::{
    AlternativeTaskGroup, Alternative, AtomicContext, Contribution, ContributionSign, DecompKind,
    Decomposition, GoalGraph, GraphNode, ModelError, NodeKind, ParametricTask, Registry,
    RelationEdge, RelationKind, Softgoal,
};
use adapt_core::rulebase::{detect_conflicts, parse_rules, RuleBase, RuleError};
use adapt_core::sim::{fnv1a64, SimError, TrajectorySpec};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse `{path}`: {message}")]
    Json { path: PathBuf, message: String },
    #[error("rule file `{path}`: {source}")]
    RuleSyntax { path: PathBuf, source: RuleError },
    #[error("rule file `{path}`: {source}")]
    RuleResolution { path: PathBuf, source: RuleError },
    #[error("rule file `{path}`: {count} conflicting rule pair(s), e.g. rules {first} and {second}")]
    RuleConflicts {
        path: PathBuf,
        count: usize,
        first: usize,
        second: usize,
    },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Invalid(String),
}

impl ScenarioError {
    /// Exit-code class: 2 for unreadable or unparseable inputs, 1 for
    /// domain/validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. }
            | ScenarioError::Json { .. }
            | ScenarioError::RuleSyntax { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    variables: RawVariables,
    graph: RawGraph,
    edges: Vec<RawEdge>,
    rules: RawRules,
    #[serde(default)]
    weights: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    readaptation: RawReadaptation,
    trajectories: RawTrajectories,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariables {
    contexts: Vec<RawContext>,
    softgoals: Vec<RawSoftgoal>,
    #[serde(default)]
    parametric_tasks: Vec<RawParametricTask>,
    #[serde(default)]
    alternative_groups: Vec<RawGroup>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContext {
    id: String,
    variable: String,
    #[serde(default)]
    unit: String,
    universe: [f64; 2],
    terms: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoftgoal {
    id: String,
    variable: String,
    universe: [f64; 2],
    terms: Vec<RawTerm>,
    #[serde(default)]
    weight: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParametricTask {
    id: String,
    variable: String,
    #[serde(default)]
    unit: String,
    universe: [f64; 2],
    adjustable_range: [f64; 2],
    terms: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    id: String,
    goal_name: String,
    variable: String,
    #[serde(default)]
    unit: String,
    universe: [f64; 2],
    terms: Vec<RawTerm>,
    alternatives: Vec<RawAlternative>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlternative {
    name: String,
    window: [f64; 2],
    anchor: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    name: String,
    mf: RawMf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMf {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    params: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    nodes: Vec<RawNode>,
    #[serde(default)]
    decompositions: Vec<RawDecomposition>,
    #[serde(default)]
    contributions: Vec<RawContribution>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecomposition {
    parent: String,
    connective: String,
    children: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContribution {
    task: String,
    softgoal: String,
    sign: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    kind: String,
    sources: Vec<String>,
    target: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRules {
    upd: String,
    ena: String,
    cor: String,
    /// `error` (default) rejects contradictory rules at load, `warn` keeps
    /// them and records a warning.
    #[serde(default)]
    on_conflict: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReadaptation {
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    xi: Option<f64>,
    #[serde(default)]
    max_iterations: Option<usize>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    initial_simplex_scale: Option<f64>,
    #[serde(default)]
    no_rule_fired: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectories {
    steps: u32,
    specs: Vec<RawTrajectory>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    context: String,
    sigma: f64,
    seed: u64,
    anchors: Vec<[f64; 2]>,
}

/// A fully resolved and validated scenario.
pub struct Scenario {
    pub name: String,
    pub path: PathBuf,
    pub registry: Registry,
    pub graph: GoalGraph,
    pub edges: Vec<RelationEdge>,
    pub upd: RuleBase,
    pub ena: RuleBase,
    pub cor: RuleBase,
    pub settings: ReadaptationSettings,
    pub trajectories: Vec<TrajectorySpec>,
    /// FNV-1a digest over the scenario file and the three rule files.
    pub digest: u64,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let bytes = fs::read(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: RawScenario =
            serde_json::from_slice(&bytes).map_err(|e| ScenarioError::Json {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));

        let mut warnings = Vec::new();
        let registry = build_registry(&raw.variables, raw.weights.as_ref())?;
        let graph = build_graph(&raw.graph)?;
        let edges = raw
            .edges
            .iter()
            .map(|e| {
                Ok(RelationEdge {
                    kind: parse_kind(&e.kind)?,
                    sources: e.sources.clone(),
                    target: e.target.clone(),
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;

        let on_conflict = raw.rules.on_conflict.as_deref().unwrap_or("error");
        let mut digest_bytes = bytes.clone();
        let mut load_base = |file: &str, kind: RelationKind| -> Result<RuleBase, ScenarioError> {
            let rule_path = dir.join(file);
            let text = fs::read(&rule_path).map_err(|source| ScenarioError::Io {
                path: rule_path.clone(),
                source,
            })?;
            digest_bytes.extend_from_slice(&text);
            let text = String::from_utf8_lossy(&text).into_owned();
            let rules = parse_rules(&text, &registry).map_err(|e| match e {
                RuleError::Syntax { .. } => ScenarioError::RuleSyntax {
                    path: rule_path.clone(),
                    source: e,
                },
                other => ScenarioError::RuleResolution {
                    path: rule_path.clone(),
                    source: other,
                },
            })?;
            let base = RuleBase::new(kind, rules);
            base.validate(&registry)
                .map_err(|e| ScenarioError::RuleResolution {
                    path: rule_path.clone(),
                    source: e,
                })?;
            let report = detect_conflicts(&base);
            for &(i, j) in &report.duplicates {
                warnings.push(format!(
                    "{}: rules {} and {} are duplicates",
                    rule_path.display(),
                    i + 1,
                    j + 1
                ));
            }
            if !report.conflicts.is_empty() {
                if on_conflict == "warn" {
                    for &(i, j) in &report.conflicts {
                        warnings.push(format!(
                            "{}: rules {} and {} conflict",
                            rule_path.display(),
                            i + 1,
                            j + 1
                        ));
                    }
                } else {
                    let (first, second) = report.conflicts[0];
                    return Err(ScenarioError::RuleConflicts {
                        path: rule_path,
                        count: report.conflicts.len(),
                        first: first + 1,
                        second: second + 1,
                    });
                }
            }
            Ok(base)
        };

        let upd = load_base(&raw.rules.upd, RelationKind::Upd)?;
        let ena = load_base(&raw.rules.ena, RelationKind::Ena)?;
        let cor = load_base(&raw.rules.cor, RelationKind::Cor)?;

        let settings = build_settings(&raw.readaptation)?;
        settings.validate()?;

        let mut trajectories = Vec::new();
        for spec in &raw.trajectories.specs {
            let ctx = registry
                .contexts
                .iter()
                .find(|c| c.id == spec.context)
                .ok_or_else(|| {
                    ScenarioError::Invalid(format!(
                        "trajectory context `{}` is not a declared context",
                        spec.context
                    ))
                })?;
            let t = TrajectorySpec {
                context_id: spec.context.clone(),
                anchors: spec.anchors.iter().map(|a| (a[0], a[1])).collect(),
                sigma: spec.sigma,
                seed: spec.seed,
                steps: raw.trajectories.steps,
            };
            t.validate(&ctx.variable.universe)?;
            trajectories.push(t);
        }

        Ok(Scenario {
            name: raw.name,
            path: path.to_path_buf(),
            registry,
            graph,
            edges,
            upd,
            ena,
            cor,
            settings,
            trajectories,
            digest: fnv1a64(&digest_bytes),
            warnings,
        })
    }

    pub fn controller(&self) -> Result<Controller<'_>, ControlError> {
        Controller::new(
            &self.registry,
            &self.upd,
            &self.ena,
            &self.cor,
            self.settings.clone(),
        )
    }

    /// Unit label of a variable, looked up by element id.
    pub fn unit_of(&self, id: &str) -> &str {
        self.registry
            .variable_of(id)
            .map(|v| v.universe.unit_label.as_str())
            .unwrap_or("")
    }
}

fn parse_kind(kind: &str) -> Result<RelationKind, ScenarioError> {
    match kind.to_ascii_lowercase().as_str() {
        "upd" => Ok(RelationKind::Upd),
        "ena" => Ok(RelationKind::Ena),
        "cor" => Ok(RelationKind::Cor),
        other => Err(ScenarioError::Invalid(format!(
            "unknown relation kind `{other}` (expected upd, ena or cor)"
        ))),
    }
}

fn build_mf(
    raw: &RawMf,
    term_index: usize,
    term_count: usize,
    universe: &UniverseInterval,
) -> Result<MembershipFunction, ScenarioError> {
    let style = raw.kind.to_ascii_lowercase();
    match (style.as_str(), &raw.params) {
        ("triangular", Some(p)) if p.len() == 3 => {
            Ok(MembershipFunction::triangular(p[0], p[1], p[2])?)
        }
        ("trapezoidal", Some(p)) if p.len() == 4 => {
            Ok(MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3])?)
        }
        ("bell", Some(p)) if p.len() == 3 => {
            Ok(MembershipFunction::generalized_bell(p[0], p[1], p[2])?)
        }
        // bell auto-fit: three terms peaking at lo, mid, hi with the 0.5
        // crossover halfway between adjacent peaks (width = range / 4)
        ("bell", None) => {
            if term_count != 3 {
                return Err(ScenarioError::Invalid(format!(
                    "bell auto-fit needs exactly 3 terms, variable has {term_count}"
                )));
            }
            let width = universe.width() / 4.0;
            let center = match term_index {
                0 => universe.lo,
                1 => universe.midpoint(),
                _ => universe.hi,
            };
            Ok(MembershipFunction::generalized_bell(width, 2.0, center)?)
        }
        ("triangular" | "trapezoidal", None) => Err(ScenarioError::Invalid(format!(
            "membership function type `{style}` requires explicit params"
        ))),
        (_, Some(p)) => Err(ScenarioError::Invalid(format!(
            "membership function type `{style}` with {} params is not supported",
            p.len()
        ))),
        _ => Err(ScenarioError::Invalid(format!(
            "unknown membership function type `{style}`"
        ))),
    }
}

fn build_variable(
    name: &str,
    unit: &str,
    universe: [f64; 2],
    terms: &[RawTerm],
) -> Result<LinguisticVariable, ScenarioError> {
    let interval = UniverseInterval::new(universe[0], universe[1], unit)?;
    let built: Vec<LinguisticTerm> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(LinguisticTerm::new(
                &t.name,
                build_mf(&t.mf, i, terms.len(), &interval)?,
            ))
        })
        .collect::<Result<_, ScenarioError>>()?;
    Ok(LinguisticVariable::new(name, interval, built)?)
}

fn build_registry(
    raw: &RawVariables,
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<Registry, ScenarioError> {
    let contexts = raw
        .contexts
        .iter()
        .map(|c| {
            Ok(AtomicContext {
                id: c.id.clone(),
                variable: build_variable(&c.variable, &c.unit, c.universe, &c.terms)?,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    if let Some(map) = weights {
        for id in map.keys() {
            if !raw.softgoals.iter().any(|s| &s.id == id) {
                return Err(ScenarioError::Invalid(format!(
                    "weights section names unknown softgoal `{id}`"
                )));
            }
        }
    }
    let default_weight = 1.0 / raw.softgoals.len().max(1) as f64;
    let softgoals = raw
        .softgoals
        .iter()
        .map(|s| {
            let weight = weights
                .and_then(|m| m.get(&s.id).copied())
                .or(s.weight)
                .unwrap_or(default_weight);
            Ok(Softgoal {
                id: s.id.clone(),
                variable: build_variable(&s.variable, "", s.universe, &s.terms)?,
                weight,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let parametric_tasks = raw
        .parametric_tasks
        .iter()
        .map(|t| {
            Ok(ParametricTask {
                id: t.id.clone(),
                variable: build_variable(&t.variable, &t.unit, t.universe, &t.terms)?,
                adjustable_range: UniverseInterval::new(
                    t.adjustable_range[0],
                    t.adjustable_range[1],
                    &t.unit,
                )?,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let alternative_groups = raw
        .alternative_groups
        .iter()
        .map(|g| {
            Ok(AlternativeTaskGroup {
                id: g.id.clone(),
                goal_name: g.goal_name.clone(),
                indicator_variable: build_variable(&g.variable, &g.unit, g.universe, &g.terms)?,
                alternatives: g
                    .alternatives
                    .iter()
                    .map(|a| {
                        Ok(Alternative {
                            name: a.name.clone(),
                            window: UniverseInterval::new(a.window[0], a.window[1], &g.unit)?,
                            anchor: a.anchor,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    Ok(Registry::new(
        contexts,
        softgoals,
        parametric_tasks,
        alternative_groups,
    )?)
}

fn build_graph(raw: &RawGraph) -> Result<GoalGraph, ScenarioError> {
    let nodes = raw
        .nodes
        .iter()
        .map(|n| {
            let kind = match n.kind.to_ascii_lowercase().as_str() {
                "goal" => NodeKind::Goal,
                "task" => NodeKind::Task,
                "softgoal" => NodeKind::Softgoal,
                other => {
                    return Err(ScenarioError::Invalid(format!(
                        "unknown node kind `{other}` for `{}`",
                        n.id
                    )))
                }
            };
            Ok(GraphNode {
                id: n.id.clone(),
                kind,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let decompositions = raw
        .decompositions
        .iter()
        .map(|d| {
            let connective = match d.connective.to_ascii_lowercase().as_str() {
                "and" => DecompKind::And,
                "or" => DecompKind::Or,
                other => {
                    return Err(ScenarioError::Invalid(format!(
                        "unknown decomposition connective `{other}`"
                    )))
                }
            };
            Ok(Decomposition {
                parent: d.parent.clone(),
                connective,
                children: d.children.clone(),
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let contributions = raw
        .contributions
        .iter()
        .map(|c| {
            let sign = match c.sign.to_ascii_lowercase().as_str() {
                "positive" | "help" | "+" => ContributionSign::Positive,
                "negative" | "hurt" | "-" => ContributionSign::Negative,
                other => {
                    return Err(ScenarioError::Invalid(format!(
                        "unknown contribution sign `{other}`"
                    )))
                }
            };
            Ok(Contribution {
                task: c.task.clone(),
                softgoal: c.softgoal.clone(),
                sign,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    Ok(GoalGraph {
        nodes,
        decompositions,
        contributions,
    })
}

fn build_settings(raw: &RawReadaptation) -> Result<ReadaptationSettings, ScenarioError> {
    let defaults = ReadaptationSettings::default();
    let mode = match raw.mode.as_deref() {
        None => defaults.mode,
        Some("total") => TriggerMode::Total,
        Some("individual") => TriggerMode::Individual,
        Some(other) => {
            return Err(ScenarioError::Invalid(format!(
                "unknown readaptation mode `{other}` (expected total or individual)"
            )))
        }
    };
    let no_rule_fired = match raw.no_rule_fired.as_deref() {
        None => defaults.no_rule_fired,
        Some("error") => NoRuleFiredPolicy::Error,
        Some("midpoint") => NoRuleFiredPolicy::Midpoint,
        Some("hold") => NoRuleFiredPolicy::HoldPrevious,
        Some(other) => {
            return Err(ScenarioError::Invalid(format!(
                "unknown no_rule_fired policy `{other}` (expected error, midpoint or hold)"
            )))
        }
    };
    Ok(ReadaptationSettings {
        mode,
        xi: raw.xi.unwrap_or(defaults.xi),
        max_iterations: raw.max_iterations.unwrap_or(defaults.max_iterations),
        initial_simplex_scale: raw
            .initial_simplex_scale
            .unwrap_or(defaults.initial_simplex_scale),
        tolerance: raw.tolerance.unwrap_or(defaults.tolerance),
        no_rule_fired,
    })
}
