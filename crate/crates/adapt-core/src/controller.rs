//! The feedforward-feedback adaptation loop.
//!
//! The feedforward pass fuzzifies the monitored context and infers desired
//! softgoal satisfaction degrees (UPD rules) and task configurations (ENA
//! rules). The evaluation pass derives actual satisfaction degrees from the
//! configurations (COR rules). When the weighted satisfaction deviation
//! drops below the threshold, the feedback pass readapts the configurations
//! with a bounded simplex search that maximizes the total deviation while
//! the desired degrees stay fixed.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::inference::{infer, InferError};
use crate::model::{ModelError, Registry, RelationKind};
use crate::optim::{maximize, NmOptions};
use crate::rulebase::{RuleBase, RuleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("context value for `{0}` is missing")]
    MissingContext(String),
    #[error("`{0}` is not a context id")]
    UnknownContext(String),
    #[error("config value for task `{0}` is missing")]
    MissingConfig(String),
    #[error("softgoal key sets do not match at `{0}`")]
    KeyMismatch(String),
    #[error("invalid readaptation settings: {0}")]
    InvalidSettings(String),
    #[error("rule base handed to the controller has kind {got} where {expected} was expected")]
    WrongBaseKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("readaptation objective failed at the start point: {0}")]
    StartPointFailed(String),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// When the feedback loop checks deviations: against the weighted total or
/// against every individual softgoal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerMode {
    Total,
    Individual,
}

/// What to do when an inference produces no fired rule at the top level.
/// Inside the readaptation search such points always count as objective
/// negative infinity instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoRuleFiredPolicy {
    Error,
    Midpoint,
    HoldPrevious,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadaptationSettings {
    pub mode: TriggerMode,
    /// Tolerated satisfaction deviation; a deviation of at least `-xi`
    /// counts as acceptable.
    pub xi: f64,
    pub max_iterations: usize,
    /// Initial simplex step as a fraction of each parameter range.
    pub initial_simplex_scale: f64,
    /// Simplex diameter below which the search stops.
    pub tolerance: f64,
    pub no_rule_fired: NoRuleFiredPolicy,
}

impl Default for ReadaptationSettings {
    fn default() -> Self {
        Self {
            mode: TriggerMode::Total,
            xi: 0.1,
            max_iterations: 200,
            initial_simplex_scale: 0.1,
            tolerance: 1e-4,
            no_rule_fired: NoRuleFiredPolicy::Error,
        }
    }
}

impl ReadaptationSettings {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.xi > 0.0) {
            return Err(ControlError::InvalidSettings(alloc::format!(
                "threshold xi must be positive, got {}",
                self.xi
            )));
        }
        if self.max_iterations == 0 {
            return Err(ControlError::InvalidSettings(String::from(
                "max_iterations must be at least 1",
            )));
        }
        if !(self.initial_simplex_scale > 0.0 && self.initial_simplex_scale <= 1.0) {
            return Err(ControlError::InvalidSettings(alloc::format!(
                "initial simplex scale must be in (0, 1], got {}",
                self.initial_simplex_scale
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(ControlError::InvalidSettings(alloc::format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Deviation of one softgoal: `delta = actual - desired`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftgoalDeviation {
    pub softgoal: String,
    pub delta: f64,
    pub acceptable: bool,
}

/// Per-softgoal and weighted-total satisfaction deviations against a
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub deviations: Vec<SoftgoalDeviation>,
    /// Weighted total `sum((actual_i - desired_i) * w_i)`.
    pub total: f64,
    pub xi: f64,
    pub total_acceptable: bool,
    pub all_acceptable: bool,
}

impl DeviationReport {
    pub fn acceptable(&self, mode: TriggerMode) -> bool {
        match mode {
            TriggerMode::Total => self.total_acceptable,
            TriggerMode::Individual => self.all_acceptable,
        }
    }

    pub fn delta_of(&self, softgoal: &str) -> Option<f64> {
        self.deviations
            .iter()
            .find(|d| d.softgoal == softgoal)
            .map(|d| d.delta)
    }
}

/// Computes per-softgoal deviations and the weighted total. All three slices
/// must cover the same softgoals; the report follows the order of `desired`.
pub fn deviation(
    desired: &[(String, f64)],
    actual: &[(String, f64)],
    weights: &[(String, f64)],
    xi: f64,
) -> Result<DeviationReport, ControlError> {
    if !(xi > 0.0) {
        return Err(ControlError::InvalidSettings(alloc::format!(
            "threshold xi must be positive, got {xi}"
        )));
    }
    if desired.len() != actual.len() || desired.len() != weights.len() {
        let key = desired
            .first()
            .map(|(k, _)| k.as_str())
            .unwrap_or("<empty>");
        return Err(ControlError::KeyMismatch(key.to_string()));
    }
    let mut deviations = Vec::with_capacity(desired.len());
    let mut total = 0.0;
    for (sg, want) in desired {
        let got = value_of(actual, sg).ok_or_else(|| ControlError::KeyMismatch(sg.clone()))?;
        let weight = value_of(weights, sg).ok_or_else(|| ControlError::KeyMismatch(sg.clone()))?;
        let delta = got - want;
        total += delta * weight;
        deviations.push(SoftgoalDeviation {
            softgoal: sg.clone(),
            delta,
            acceptable: delta >= -xi,
        });
    }
    let all_acceptable = deviations.iter().all(|d| d.acceptable);
    Ok(DeviationReport {
        deviations,
        total,
        xi,
        total_acceptable: total >= -xi,
        all_acceptable,
    })
}

/// Working snapshot of one adaptation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationState {
    pub desired_sd: Vec<(String, f64)>,
    pub configs: Vec<(String, f64)>,
    pub actual_sd: Vec<(String, f64)>,
}

/// Everything observed in one control step, before and after feedback.
/// When `readapted` is false the post fields equal the pre fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStepRecord {
    pub t: u32,
    pub context: Vec<(String, f64)>,
    pub desired_sd: Vec<(String, f64)>,
    pub configs_pre: Vec<(String, f64)>,
    pub actual_sd_pre: Vec<(String, f64)>,
    pub deviation_pre: DeviationReport,
    pub readapted: bool,
    pub iterations: usize,
    pub configs_post: Vec<(String, f64)>,
    pub actual_sd_post: Vec<(String, f64)>,
    pub deviation_post: DeviationReport,
}

/// Result of one feedback readaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadaptOutcome {
    pub configs: Vec<(String, f64)>,
    pub actual_sd: Vec<(String, f64)>,
    pub deviation: DeviationReport,
    pub iterations: usize,
}

pub fn value_of(pairs: &[(String, f64)], key: &str) -> Option<f64> {
    pairs.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
}

/// The feedforward-feedback controller over one scenario.
///
/// Rule bases are split per output at construction so each softgoal and task
/// is inferred over exactly the rules that conclude on it (its relation
/// edge). A controller is immutable; steps share no state, so distinct steps
/// and simulations may run in parallel.
pub struct Controller<'a> {
    registry: &'a Registry,
    settings: ReadaptationSettings,
    upd_by_softgoal: Vec<(String, RuleBase)>,
    ena_by_task: Vec<(String, RuleBase)>,
    cor_by_softgoal: Vec<(String, RuleBase)>,
}

impl<'a> Controller<'a> {
    pub fn new(
        registry: &'a Registry,
        upd: &RuleBase,
        ena: &RuleBase,
        cor: &RuleBase,
        settings: ReadaptationSettings,
    ) -> Result<Self, ControlError> {
        settings.validate()?;
        for (base, expected) in [
            (upd, RelationKind::Upd),
            (ena, RelationKind::Ena),
            (cor, RelationKind::Cor),
        ] {
            if base.kind != expected {
                return Err(ControlError::WrongBaseKind {
                    expected: expected.as_str(),
                    got: base.kind.as_str(),
                });
            }
            base.validate(registry)?;
        }

        let upd_by_softgoal = registry
            .softgoals
            .iter()
            .map(|sg| (sg.id.clone(), upd.restricted_to_output(&sg.variable.name)))
            .collect();
        let cor_by_softgoal = registry
            .softgoals
            .iter()
            .map(|sg| (sg.id.clone(), cor.restricted_to_output(&sg.variable.name)))
            .collect();
        let ena_by_task = registry
            .task_ids()
            .into_iter()
            .map(|id| {
                let var = registry.variable_of(id).expect("task id resolves");
                (id.to_string(), ena.restricted_to_output(&var.name))
            })
            .collect();

        Ok(Self {
            registry,
            settings,
            upd_by_softgoal,
            ena_by_task,
            cor_by_softgoal,
        })
    }

    pub fn registry(&self) -> &Registry {
        self.registry
    }

    pub fn settings(&self) -> &ReadaptationSettings {
        &self.settings
    }

    pub fn weights(&self) -> Vec<(String, f64)> {
        self.registry
            .softgoals
            .iter()
            .map(|sg| (sg.id.clone(), sg.weight))
            .collect()
    }

    /// Translates a context map keyed by context id into crisp inference
    /// inputs keyed by variable name, requiring every declared context.
    fn context_inputs(
        &self,
        context: &BTreeMap<String, f64>,
    ) -> Result<BTreeMap<String, f64>, ControlError> {
        for id in context.keys() {
            if !self.registry.contexts.iter().any(|c| &c.id == id) {
                return Err(ControlError::UnknownContext(id.clone()));
            }
        }
        let mut crisp = BTreeMap::new();
        for ctx in &self.registry.contexts {
            let value = context
                .get(&ctx.id)
                .copied()
                .ok_or_else(|| ControlError::MissingContext(ctx.id.clone()))?;
            crisp.insert(ctx.variable.name.clone(), value);
        }
        Ok(crisp)
    }

    fn config_inputs(
        &self,
        configs: &[(String, f64)],
    ) -> Result<BTreeMap<String, f64>, ControlError> {
        let mut crisp = BTreeMap::new();
        for id in self.registry.task_ids() {
            let value =
                value_of(configs, id).ok_or_else(|| ControlError::MissingConfig(id.to_string()))?;
            let var = self.registry.variable_of(id).expect("task id resolves");
            crisp.insert(var.name.clone(), value);
        }
        Ok(crisp)
    }

    /// Runs one restricted inference and applies the no-rule-fired policy.
    fn infer_output(
        &self,
        base: &RuleBase,
        crisp: &BTreeMap<String, f64>,
        output_variable: &str,
        previous: Option<f64>,
    ) -> Result<f64, ControlError> {
        match infer(base, crisp, self.registry) {
            Ok(out) => out
                .get(output_variable)
                .copied()
                .ok_or_else(|| {
                    InferError::NoRuleFired {
                        variable: output_variable.to_string(),
                    }
                    .into()
                }),
            Err(InferError::NoRuleFired { variable }) => match self.settings.no_rule_fired {
                NoRuleFiredPolicy::Error => Err(InferError::NoRuleFired { variable }.into()),
                NoRuleFiredPolicy::Midpoint => Ok(self.midpoint_of(output_variable)),
                NoRuleFiredPolicy::HoldPrevious => {
                    Ok(previous.unwrap_or_else(|| self.midpoint_of(output_variable)))
                }
            },
            Err(other) => Err(other.into()),
        }
    }

    fn midpoint_of(&self, variable: &str) -> f64 {
        self.registry
            .variable_named(variable)
            .map(|(v, _)| v.universe.midpoint())
            .unwrap_or(0.0)
    }

    /// Feedforward pass: desired satisfaction degree per softgoal and a
    /// configuration per task, both inferred from the monitored context.
    /// Alternative-group configurations are indicator values.
    pub fn feedforward_step(
        &self,
        context: &BTreeMap<String, f64>,
        prev: Option<&TimeStepRecord>,
    ) -> Result<(Vec<(String, f64)>, Vec<(String, f64)>), ControlError> {
        let crisp = self.context_inputs(context)?;

        let mut desired = Vec::with_capacity(self.upd_by_softgoal.len());
        for (sg_id, base) in &self.upd_by_softgoal {
            let var = &self.registry.softgoal(sg_id).expect("softgoal").variable;
            let previous = prev.and_then(|r| value_of(&r.desired_sd, sg_id));
            let value = self.infer_output(base, &crisp, &var.name, previous)?;
            desired.push((sg_id.clone(), value));
        }

        let mut configs = Vec::with_capacity(self.ena_by_task.len());
        for (task_id, base) in &self.ena_by_task {
            let var = self.registry.variable_of(task_id).expect("task");
            let previous = prev.and_then(|r| value_of(&r.configs_post, task_id));
            let value = self.infer_output(base, &crisp, &var.name, previous)?;
            configs.push((task_id.clone(), value));
        }

        Ok((desired, configs))
    }

    /// Evaluation pass: actual satisfaction degree per softgoal, inferred
    /// from the task configurations over the COR rules.
    pub fn actual_satisfaction(
        &self,
        configs: &[(String, f64)],
        prev: Option<&TimeStepRecord>,
    ) -> Result<Vec<(String, f64)>, ControlError> {
        let crisp = self.config_inputs(configs)?;
        let mut actual = Vec::with_capacity(self.cor_by_softgoal.len());
        for (sg_id, base) in &self.cor_by_softgoal {
            let var = &self.registry.softgoal(sg_id).expect("softgoal").variable;
            let previous = prev.and_then(|r| value_of(&r.actual_sd_post, sg_id));
            let value = self.infer_output(base, &crisp, &var.name, previous)?;
            actual.push((sg_id.clone(), value));
        }
        Ok(actual)
    }

    /// Strict evaluation used by the feedback objective: no fallback policy.
    fn actual_strict(&self, configs: &[(String, f64)]) -> Result<Vec<(String, f64)>, ControlError> {
        let crisp = self.config_inputs(configs)?;
        let mut actual = Vec::with_capacity(self.cor_by_softgoal.len());
        for (sg_id, base) in &self.cor_by_softgoal {
            let var = &self.registry.softgoal(sg_id).expect("softgoal").variable;
            let out = infer(base, &crisp, self.registry)?;
            let value = out.get(&var.name).copied().ok_or(InferError::NoRuleFired {
                variable: var.name.clone(),
            })?;
            actual.push((sg_id.clone(), value));
        }
        Ok(actual)
    }

    /// Feedback pass: bounded simplex search over the task configurations
    /// maximizing the weighted total deviation, with the desired degrees held
    /// fixed. Parametric tasks move within their adjustable range,
    /// alternative groups within their indicator universe. Returns a result
    /// whose total deviation is never below the start's; an objective failure
    /// inside the search counts as negative infinity, a failure at the start
    /// point is a hard error.
    pub fn readapt(
        &self,
        configs: &[(String, f64)],
        desired: &[(String, f64)],
    ) -> Result<ReadaptOutcome, ControlError> {
        let weights = self.weights();
        let xi = self.settings.xi;

        // the start point is evaluated with the same fallback policy as the
        // deviation that triggered the readaptation, so the two totals are
        // comparable; a failure here (policy `Error`) is a hard error
        let start_actual = self
            .actual_satisfaction(configs, None)
            .map_err(|e| ControlError::StartPointFailed(alloc::format!("{e}")))?;
        let start_report = deviation(desired, &start_actual, &weights, xi)?;
        if start_report.acceptable(self.settings.mode) {
            return Ok(ReadaptOutcome {
                configs: configs.to_vec(),
                actual_sd: start_actual,
                deviation: start_report,
                iterations: 0,
            });
        }

        let task_ids = self.registry.task_ids();
        let mut start = Vec::with_capacity(task_ids.len());
        let mut bounds = Vec::with_capacity(task_ids.len());
        for id in &task_ids {
            start.push(
                value_of(configs, id).ok_or_else(|| ControlError::MissingConfig(id.to_string()))?,
            );
            bounds.push(self.registry.task_bounds(id).expect("task id resolves"));
        }

        let objective = |x: &[f64]| -> f64 {
            let candidate: Vec<(String, f64)> = task_ids
                .iter()
                .zip(x)
                .map(|(id, &v)| (id.to_string(), v))
                .collect();
            match self.actual_strict(&candidate) {
                Ok(actual) => match deviation(desired, &actual, &weights, xi) {
                    Ok(report) => report.total,
                    Err(_) => f64::NEG_INFINITY,
                },
                Err(_) => f64::NEG_INFINITY,
            }
        };

        // fuzzy objectives are plateau-rich and can be multimodal: seed the
        // simplex from a coarse lattice and widen it again on collapse while
        // iteration budget remains
        let presample_per_axis = match task_ids.len() {
            1 => 17,
            2 => 8,
            3 => 4,
            _ => 3,
        };
        let opts = NmOptions {
            max_iterations: self.settings.max_iterations,
            tolerance: self.settings.tolerance,
            initial_step_fraction: self.settings.initial_simplex_scale,
            target: match self.settings.mode {
                TriggerMode::Total => Some(-xi),
                TriggerMode::Individual => None,
            },
            restart_scales: alloc::vec![0.4, 1.0, 0.4],
            presample_per_axis,
        };
        let result = maximize(objective, &start, &bounds, &opts);

        // adopt the search result only when it strictly beats the start under
        // the comparable policy-evaluated total
        if result.value > start_report.total && result.value.is_finite() {
            let best_configs: Vec<(String, f64)> = task_ids
                .iter()
                .zip(&result.x)
                .map(|(id, &v)| (id.to_string(), v))
                .collect();
            let best_actual = self
                .actual_strict(&best_configs)
                .expect("best point has a finite objective, so it evaluates");
            let best_report = deviation(desired, &best_actual, &weights, xi)?;
            Ok(ReadaptOutcome {
                configs: best_configs,
                actual_sd: best_actual,
                deviation: best_report,
                iterations: result.iterations,
            })
        } else {
            Ok(ReadaptOutcome {
                configs: configs.to_vec(),
                actual_sd: start_actual,
                deviation: start_report,
                iterations: result.iterations,
            })
        }
    }

    /// One full control step: feedforward, evaluation, deviation sensing and,
    /// when triggered, feedback readaptation. Desired degrees are computed
    /// once and never mutated by the feedback pass.
    pub fn step(
        &self,
        t: u32,
        context: &BTreeMap<String, f64>,
        prev: Option<&TimeStepRecord>,
    ) -> Result<TimeStepRecord, ControlError> {
        let (desired, configs_pre) = self.feedforward_step(context, prev)?;
        let actual_pre = self.actual_satisfaction(&configs_pre, prev)?;
        let weights = self.weights();
        let deviation_pre = deviation(&desired, &actual_pre, &weights, self.settings.xi)?;

        let context_row: Vec<(String, f64)> = self
            .registry
            .contexts
            .iter()
            .map(|c| {
                let value = context.get(&c.id).copied().expect("checked in feedforward");
                (c.id.clone(), value)
            })
            .collect();

        if deviation_pre.acceptable(self.settings.mode) {
            return Ok(TimeStepRecord {
                t,
                context: context_row,
                desired_sd: desired.clone(),
                configs_pre: configs_pre.clone(),
                actual_sd_pre: actual_pre.clone(),
                deviation_pre: deviation_pre.clone(),
                readapted: false,
                iterations: 0,
                configs_post: configs_pre,
                actual_sd_post: actual_pre,
                deviation_post: deviation_pre,
            });
        }

        let outcome = self.readapt(&configs_pre, &desired)?;
        Ok(TimeStepRecord {
            t,
            context: context_row,
            desired_sd: desired,
            configs_pre,
            actual_sd_pre: actual_pre,
            deviation_pre,
            readapted: true,
            iterations: outcome.iterations,
            configs_post: outcome.configs,
            actual_sd_post: outcome.actual_sd,
            deviation_post: outcome.deviation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bench_controller, bench_registry, bench_rule_bases};
    use alloc::vec;

    fn ctx(c1: f64, c2: f64) -> BTreeMap<String, f64> {
        [(String::from("c1"), c1), (String::from("c2"), c2)]
            .into_iter()
            .collect()
    }

    #[test]
    fn deviation_arithmetic_matches_the_definition() {
        let desired = vec![(String::from("s1"), 0.6)];
        let actual = vec![(String::from("s1"), 0.4)];
        let weights = vec![(String::from("s1"), 1.0)];
        let report = deviation(&desired, &actual, &weights, 0.1).unwrap();
        assert!((report.deviations[0].delta + 0.2).abs() < 1e-12);
        assert!(!report.deviations[0].acceptable);
        assert!(!report.total_acceptable);
    }

    #[test]
    fn weighted_total_and_acceptability() {
        let desired = vec![
            (String::from("s1"), 0.5),
            (String::from("s2"), 0.5),
            (String::from("s3"), 0.5),
        ];
        let actual = vec![
            (String::from("s1"), 0.3),
            (String::from("s2"), 0.6),
            (String::from("s3"), 0.5),
        ];
        let weights = vec![
            (String::from("s1"), 0.5),
            (String::from("s2"), 0.3),
            (String::from("s3"), 0.2),
        ];
        let report = deviation(&desired, &actual, &weights, 0.1).unwrap();
        // deltas (-0.2, 0.1, 0.0) weighted (0.5, 0.3, 0.2) -> -0.07
        assert!((report.total + 0.07).abs() < 1e-12);
        assert!(report.total_acceptable);
        assert!(!report.all_acceptable);
    }

    #[test]
    fn key_mismatch_is_reported() {
        let desired = vec![(String::from("s1"), 0.5)];
        let actual = vec![(String::from("other"), 0.5)];
        let weights = vec![(String::from("s1"), 1.0)];
        assert!(matches!(
            deviation(&desired, &actual, &weights, 0.1),
            Err(ControlError::KeyMismatch(_))
        ));
    }

    #[test]
    fn equal_weights_factor_out_of_the_total() {
        let desired = vec![(String::from("s1"), 0.9), (String::from("s2"), 0.2)];
        let actual = vec![(String::from("s1"), 0.5), (String::from("s2"), 0.4)];
        let w = 0.37;
        let weights = vec![(String::from("s1"), w), (String::from("s2"), w)];
        let report = deviation(&desired, &actual, &weights, 0.1).unwrap();
        let plain_sum: f64 = report.deviations.iter().map(|d| d.delta).sum();
        assert!((report.total - w * plain_sum).abs() < 1e-12);
    }

    #[test]
    fn feedforward_is_deterministic() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let a = controller.feedforward_step(&ctx(80.0, 20.0), None).unwrap();
        let b = controller.feedforward_step(&ctx(80.0, 20.0), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn favorable_context_yields_high_desired_satisfaction() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        // c1 high supports s1; c2 low supports s1 per the bench rules
        let (desired, configs) = controller.feedforward_step(&ctx(95.0, 5.0), None).unwrap();
        assert!(value_of(&desired, "s1").unwrap() >= 0.6);
        // the parametric config lands inside its universe
        let p1 = value_of(&configs, "p1").unwrap();
        assert!((0.0..=100.0).contains(&p1));
    }

    #[test]
    fn missing_context_is_an_error() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let partial: BTreeMap<String, f64> =
            [(String::from("c1"), 10.0)].into_iter().collect();
        assert!(matches!(
            controller.feedforward_step(&partial, None),
            Err(ControlError::MissingContext(id)) if id == "c2"
        ));
    }

    #[test]
    fn actual_satisfaction_stays_in_unit_interval() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        for p1 in [0.0, 25.0, 50.0, 75.0, 100.0] {
            for p2 in [0.0, 12.5, 25.0, 37.5, 50.0] {
                let configs = vec![(String::from("p1"), p1), (String::from("p2"), p2)];
                let actual = controller.actual_satisfaction(&configs, None).unwrap();
                for (_, sd) in actual {
                    assert!((0.0..=1.0).contains(&sd), "sd {sd} at ({p1}, {p2})");
                }
            }
        }
    }

    #[test]
    fn readapt_returns_start_when_already_acceptable() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let configs = vec![(String::from("p1"), 50.0), (String::from("p2"), 25.0)];
        let actual = controller.actual_satisfaction(&configs, None).unwrap();
        // desire exactly what the configs deliver: zero deviation is acceptable
        let outcome = controller.readapt(&configs, &actual).unwrap();
        assert_eq!(outcome.iterations, 0);
        assert_eq!(outcome.configs, configs);
    }

    #[test]
    fn readapt_never_worsens_and_respects_bounds() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let weights = controller.weights();
        for (d1, d2) in [(0.9, 0.9), (0.1, 0.95), (0.8, 0.2), (1.0, 1.0)] {
            let desired = vec![(String::from("s1"), d1), (String::from("s2"), d2)];
            let configs = vec![(String::from("p1"), 10.0), (String::from("p2"), 40.0)];
            let actual = controller.actual_satisfaction(&configs, None).unwrap();
            let before = deviation(&desired, &actual, &weights, 0.1).unwrap();
            let outcome = controller.readapt(&configs, &desired).unwrap();
            assert!(
                outcome.deviation.total >= before.total - 1e-12,
                "worsened: {} -> {}",
                before.total,
                outcome.deviation.total
            );
            let p1 = value_of(&outcome.configs, "p1").unwrap();
            let p2 = value_of(&outcome.configs, "p2").unwrap();
            assert!((0.0..=100.0).contains(&p1));
            assert!((0.0..=50.0).contains(&p2));
        }
    }

    #[test]
    fn huge_threshold_never_triggers_readaptation() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let settings = ReadaptationSettings {
            xi: 1e6,
            ..ReadaptationSettings::default()
        };
        let controller = bench_controller(&registry, &bases, settings);
        for c1 in [5.0, 50.0, 95.0] {
            let record = controller.step(0, &ctx(c1, 50.0), None).unwrap();
            assert!(!record.readapted);
            assert_eq!(record.iterations, 0);
            assert_eq!(record.configs_pre, record.configs_post);
            assert_eq!(record.deviation_pre, record.deviation_post);
        }
    }

    #[test]
    fn tiny_threshold_triggers_whenever_total_is_negative() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let settings = ReadaptationSettings {
            xi: 1e-9,
            ..ReadaptationSettings::default()
        };
        let controller = bench_controller(&registry, &bases, settings);
        for c1 in [5.0, 35.0, 65.0, 95.0] {
            let record = controller.step(0, &ctx(c1, 30.0), None).unwrap();
            assert_eq!(record.readapted, record.deviation_pre.total < -1e-9);
            if record.readapted {
                assert!(record.deviation_post.total >= record.deviation_pre.total - 1e-12);
            }
        }
    }

    #[test]
    fn desired_degrees_are_not_mutated_by_feedback() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let settings = ReadaptationSettings {
            xi: 1e-9,
            ..ReadaptationSettings::default()
        };
        let controller = bench_controller(&registry, &bases, settings);
        let context = ctx(15.0, 85.0);
        let record = controller.step(0, &context, None).unwrap();
        let (fresh_desired, _) = controller.feedforward_step(&context, None).unwrap();
        assert_eq!(record.desired_sd, fresh_desired);
    }

    #[test]
    fn step_is_bitwise_deterministic() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let a = controller.step(7, &ctx(33.3, 66.6), None).unwrap();
        let b = controller.step(7, &ctx(33.3, 66.6), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn settings_are_validated() {
        let bad = ReadaptationSettings {
            xi: 0.0,
            ..ReadaptationSettings::default()
        };
        assert!(bad.validate().is_err());
        let bad = ReadaptationSettings {
            max_iterations: 0,
            ..ReadaptationSettings::default()
        };
        assert!(bad.validate().is_err());
    }
}
