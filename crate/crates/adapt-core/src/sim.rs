//! Deterministic discrete-time simulation: noisy context trajectories,
//! per-step adaptation and readaptation, trace recording and summary
//! statistics.
//!
//! Noise is produced by an explicitly specified generator (SplitMix64 plus
//! the cosine branch of the Box-Muller transform) so that a trace depends
//! only on the trajectory specs and seeds and can be reproduced by any
//! implementation of the same recipe.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::controller::{ControlError, Controller, TimeStepRecord};
use crate::fuzzy::UniverseInterval;
use crate::math;
use crate::numfmt::sig9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("step {t} failed: {source}")]
    StepFailed { t: u32, source: ControlError },
    #[error("trajectory for `{0}`: anchors must be sorted by strictly increasing time")]
    AnchorsUnsorted(String),
    #[error("trajectory for `{0}` has an anchor value outside the context universe")]
    AnchorOutsideUniverse(String),
    #[error("trajectory for `{0}` has no anchors")]
    NoAnchors(String),
    #[error("trajectory for `{0}`: sigma must be finite and >= 0")]
    InvalidSigma(String),
    #[error("trajectory for `{0}`: steps must be >= 1")]
    NoSteps(String),
    #[error("no trajectory for context `{0}`")]
    MissingTrajectory(String),
    #[error("more than one trajectory for context `{0}`")]
    DuplicateTrajectory(String),
    #[error("trajectory context `{0}` is not in the registry")]
    UnknownTrajectoryContext(String),
    #[error("trajectory step counts differ")]
    StepCountMismatch,
}

/// SplitMix64: a tiny 64-bit generator with a single additive state walk.
/// state += 0x9E3779B97F4A7C15; output = finalizer(state).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

/// The SplitMix64 output finalizer; also used to derive sub-seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform in `(0, 1]`, safe as a logarithm argument.
    pub fn next_unit_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal sample: `sqrt(-2 ln u1) * cos(2 pi u2)` with two
    /// fresh uniforms per draw (the sine branch is discarded).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_unit_open();
        let u2 = self.next_unit();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
    }
}

/// FNV-1a over bytes; used for scenario digests carried in traces.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Noisy base signal of one atomic context: piecewise-linear anchors plus
/// seeded Gaussian white noise, clamped to the context universe.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub context_id: String,
    /// `(t, value)` anchor points, sorted by strictly increasing `t`.
    pub anchors: Vec<(f64, f64)>,
    pub sigma: f64,
    pub seed: u64,
    pub steps: u32,
}

impl TrajectorySpec {
    pub fn validate(&self, universe: &UniverseInterval) -> Result<(), SimError> {
        if self.anchors.is_empty() {
            return Err(SimError::NoAnchors(self.context_id.clone()));
        }
        for pair in self.anchors.windows(2) {
            if !(pair[0].0 < pair[1].0) {
                return Err(SimError::AnchorsUnsorted(self.context_id.clone()));
            }
        }
        if self.anchors.iter().any(|&(_, v)| !universe.contains(v)) {
            return Err(SimError::AnchorOutsideUniverse(self.context_id.clone()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(SimError::InvalidSigma(self.context_id.clone()));
        }
        if self.steps == 0 {
            return Err(SimError::NoSteps(self.context_id.clone()));
        }
        Ok(())
    }

    /// Base signal at time `t`: linear interpolation between anchors,
    /// constant extrapolation outside the anchored span.
    pub fn base_at(&self, t: f64) -> f64 {
        let first = self.anchors[0];
        let last = *self.anchors.last().expect("anchors are non-empty");
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        for pair in self.anchors.windows(2) {
            let (t0, v0) = pair[0];
            let (t1, v1) = pair[1];
            if t >= t0 && t <= t1 {
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        last.1
    }
}

/// Generates the full noisy series of one context, deterministically from
/// the spec's own seed. Noise is added first, then the value is clamped to
/// the universe.
pub fn generate_trajectory(
    spec: &TrajectorySpec,
    universe: &UniverseInterval,
) -> Result<Vec<f64>, SimError> {
    spec.validate(universe)?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut series = Vec::with_capacity(spec.steps as usize);
    for t in 0..spec.steps {
        let base = spec.base_at(t as f64);
        let noisy = base + spec.sigma * rng.next_gaussian();
        series.push(universe.clamp(noisy));
    }
    Ok(series)
}

/// A full simulation run: per-step records plus the scenario digest and run
/// seed needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub scenario_digest: u64,
    pub run_seed: u64,
    pub context_ids: Vec<String>,
    pub softgoal_ids: Vec<String>,
    pub task_ids: Vec<String>,
    pub records: Vec<TimeStepRecord>,
}

/// Runs the controller over seeded noisy trajectories, one record per step.
///
/// Each trajectory's effective seed is `spec.seed + mix64(run_seed)`, so a
/// run seed of zero reproduces the spec seeds exactly and any other run seed
/// perturbs all trajectories deterministically.
pub fn run(
    controller: &Controller<'_>,
    specs: &[TrajectorySpec],
    run_seed: u64,
    scenario_digest: u64,
) -> Result<Trace, SimError> {
    let registry = controller.registry();
    for spec in specs {
        if !registry.contexts.iter().any(|c| c.id == spec.context_id) {
            return Err(SimError::UnknownTrajectoryContext(spec.context_id.clone()));
        }
        if specs
            .iter()
            .filter(|s| s.context_id == spec.context_id)
            .count()
            > 1
        {
            return Err(SimError::DuplicateTrajectory(spec.context_id.clone()));
        }
    }

    let mut steps: Option<u32> = None;
    let mut series: Vec<(&str, Vec<f64>)> = Vec::with_capacity(registry.contexts.len());
    for ctx in &registry.contexts {
        let spec = specs
            .iter()
            .find(|s| s.context_id == ctx.id)
            .ok_or_else(|| SimError::MissingTrajectory(ctx.id.clone()))?;
        match steps {
            None => steps = Some(spec.steps),
            Some(n) if n != spec.steps => return Err(SimError::StepCountMismatch),
            Some(_) => {}
        }
        let mut effective = spec.clone();
        effective.seed = spec.seed.wrapping_add(mix64(run_seed));
        series.push((
            ctx.id.as_str(),
            generate_trajectory(&effective, &ctx.variable.universe)?,
        ));
    }
    let steps = steps.expect("at least one context trajectory");

    let mut records: Vec<TimeStepRecord> = Vec::with_capacity(steps as usize);
    for t in 0..steps {
        let context: BTreeMap<String, f64> = series
            .iter()
            .map(|(id, values)| (id.to_string(), values[t as usize]))
            .collect();
        let prev = records.last();
        let record = controller
            .step(t, &context, prev)
            .map_err(|source| SimError::StepFailed { t, source })?;
        records.push(record);
    }

    Ok(Trace {
        scenario_digest,
        run_seed,
        context_ids: registry.contexts.iter().map(|c| c.id.clone()).collect(),
        softgoal_ids: registry.softgoals.iter().map(|s| s.id.clone()).collect(),
        task_ids: registry.task_ids().iter().map(|s| s.to_string()).collect(),
        records,
    })
}

/// Aggregate deviation statistics of one trace against a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub steps: usize,
    pub xi: f64,
    /// Fraction of (step, softgoal) pairs with deviation >= -xi.
    pub individual_acceptable_pre: f64,
    pub individual_acceptable_post: f64,
    /// Fraction of steps whose weighted total deviation is >= -xi.
    pub total_acceptable_pre: f64,
    pub total_acceptable_post: f64,
    pub mean_abs_deviation_pre: f64,
    pub mean_abs_deviation_post: f64,
    pub mean_desired: Vec<(String, f64)>,
    pub mean_actual_pre: Vec<(String, f64)>,
    pub mean_actual_post: Vec<(String, f64)>,
    pub readaptation_rate: f64,
}

/// Recomputes acceptability fractions of a trace under the given threshold.
pub fn summarize(trace: &Trace, xi: f64) -> SummaryStats {
    let steps = trace.records.len();
    let sg_count = trace.softgoal_ids.len();
    let pairs = (steps * sg_count).max(1);
    let steps_div = steps.max(1) as f64;

    let mut ok_ind_pre = 0usize;
    let mut ok_ind_post = 0usize;
    let mut ok_tot_pre = 0usize;
    let mut ok_tot_post = 0usize;
    let mut abs_pre = 0.0;
    let mut abs_post = 0.0;
    let mut readapted = 0usize;
    let mut mean_desired = alloc::vec![0.0; sg_count];
    let mut mean_actual_pre = alloc::vec![0.0; sg_count];
    let mut mean_actual_post = alloc::vec![0.0; sg_count];

    for record in &trace.records {
        for (i, _sg) in trace.softgoal_ids.iter().enumerate() {
            let d_pre = record.deviation_pre.deviations[i].delta;
            let d_post = record.deviation_post.deviations[i].delta;
            if d_pre >= -xi {
                ok_ind_pre += 1;
            }
            if d_post >= -xi {
                ok_ind_post += 1;
            }
            abs_pre += d_pre.abs();
            abs_post += d_post.abs();
            mean_desired[i] += record.desired_sd[i].1;
            mean_actual_pre[i] += record.actual_sd_pre[i].1;
            mean_actual_post[i] += record.actual_sd_post[i].1;
        }
        if record.deviation_pre.total >= -xi {
            ok_tot_pre += 1;
        }
        if record.deviation_post.total >= -xi {
            ok_tot_post += 1;
        }
        if record.readapted {
            readapted += 1;
        }
    }

    let per_sg = |sums: Vec<f64>| -> Vec<(String, f64)> {
        trace
            .softgoal_ids
            .iter()
            .zip(sums)
            .map(|(id, sum)| (id.clone(), sum / steps_div))
            .collect()
    };

    SummaryStats {
        steps,
        xi,
        individual_acceptable_pre: ok_ind_pre as f64 / pairs as f64,
        individual_acceptable_post: ok_ind_post as f64 / pairs as f64,
        total_acceptable_pre: ok_tot_pre as f64 / steps_div,
        total_acceptable_post: ok_tot_post as f64 / steps_div,
        mean_abs_deviation_pre: abs_pre / pairs as f64,
        mean_abs_deviation_post: abs_post / pairs as f64,
        mean_desired: per_sg(mean_desired),
        mean_actual_pre: per_sg(mean_actual_pre),
        mean_actual_post: per_sg(mean_actual_post),
        readaptation_rate: readapted as f64 / steps_div,
    }
}

/// Renders the trace as CSV, one row per step, reals with nine significant
/// digits. Column order: `t`, contexts, desired degrees, pre configs, pre
/// actuals, pre deviations, pre total, readapted flag, iterations, then the
/// post counterparts.
pub fn render_trace_csv(trace: &Trace) -> String {
    let mut header: Vec<String> = Vec::new();
    header.push(String::from("t"));
    for id in &trace.context_ids {
        header.push(alloc::format!("ac_{id}"));
    }
    for id in &trace.softgoal_ids {
        header.push(alloc::format!("sd_desired_{id}"));
    }
    for id in &trace.task_ids {
        header.push(alloc::format!("cfg_pre_{id}"));
    }
    for id in &trace.softgoal_ids {
        header.push(alloc::format!("sd_actual_pre_{id}"));
    }
    for id in &trace.softgoal_ids {
        header.push(alloc::format!("ds_pre_{id}"));
    }
    header.push(String::from("dS_pre"));
    header.push(String::from("readapted"));
    header.push(String::from("iterations"));
    for id in &trace.task_ids {
        header.push(alloc::format!("cfg_post_{id}"));
    }
    for id in &trace.softgoal_ids {
        header.push(alloc::format!("sd_actual_post_{id}"));
    }
    for id in &trace.softgoal_ids {
        header.push(alloc::format!("ds_post_{id}"));
    }
    header.push(String::from("dS_post"));

    let mut out = header.join(",");
    out.push('\n');
    for record in &trace.records {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(alloc::format!("{}", record.t));
        for (_, v) in &record.context {
            row.push(sig9(*v));
        }
        for (_, v) in &record.desired_sd {
            row.push(sig9(*v));
        }
        for (_, v) in &record.configs_pre {
            row.push(sig9(*v));
        }
        for (_, v) in &record.actual_sd_pre {
            row.push(sig9(*v));
        }
        for d in &record.deviation_pre.deviations {
            row.push(sig9(d.delta));
        }
        row.push(sig9(record.deviation_pre.total));
        row.push(String::from(if record.readapted { "1" } else { "0" }));
        row.push(alloc::format!("{}", record.iterations));
        for (_, v) in &record.configs_post {
            row.push(sig9(*v));
        }
        for (_, v) in &record.actual_sd_post {
            row.push(sig9(*v));
        }
        for d in &record.deviation_post.deviations {
            row.push(sig9(d.delta));
        }
        row.push(sig9(record.deviation_post.total));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Renders summary statistics as `key=value` lines, byte-deterministic.
pub fn render_summary(stats: &SummaryStats) -> String {
    let mut out = String::new();
    out.push_str(&alloc::format!("steps={}\n", stats.steps));
    out.push_str(&alloc::format!("xi={}\n", sig9(stats.xi)));
    out.push_str(&alloc::format!(
        "readaptation_rate={}\n",
        sig9(stats.readaptation_rate)
    ));
    out.push_str(&alloc::format!(
        "individual_acceptable_pre={}\n",
        sig9(stats.individual_acceptable_pre)
    ));
    out.push_str(&alloc::format!(
        "individual_acceptable_post={}\n",
        sig9(stats.individual_acceptable_post)
    ));
    out.push_str(&alloc::format!(
        "total_acceptable_pre={}\n",
        sig9(stats.total_acceptable_pre)
    ));
    out.push_str(&alloc::format!(
        "total_acceptable_post={}\n",
        sig9(stats.total_acceptable_post)
    ));
    out.push_str(&alloc::format!(
        "mean_abs_deviation_pre={}\n",
        sig9(stats.mean_abs_deviation_pre)
    ));
    out.push_str(&alloc::format!(
        "mean_abs_deviation_post={}\n",
        sig9(stats.mean_abs_deviation_post)
    ));
    for (sg, v) in &stats.mean_desired {
        out.push_str(&alloc::format!("mean_desired_{sg}={}\n", sig9(*v)));
    }
    for (sg, v) in &stats.mean_actual_pre {
        out.push_str(&alloc::format!("mean_actual_pre_{sg}={}\n", sig9(*v)));
    }
    for (sg, v) in &stats.mean_actual_post {
        out.push_str(&alloc::format!("mean_actual_post_{sg}={}\n", sig9(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{deviation, ReadaptationSettings, TimeStepRecord};
    use crate::testutil::{bench_controller, bench_registry, bench_rule_bases, pair_list};
    use alloc::vec;

    fn universe(lo: f64, hi: f64) -> UniverseInterval {
        UniverseInterval::new(lo, hi, "").unwrap()
    }

    fn spec(context_id: &str, anchors: &[(f64, f64)], sigma: f64, seed: u64) -> TrajectorySpec {
        TrajectorySpec {
            context_id: context_id.to_string(),
            anchors: anchors.to_vec(),
            sigma,
            seed,
            steps: 50,
        }
    }

    #[test]
    fn splitmix_sequences_are_reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = SplitMix64::new(43);
        assert_ne!(SplitMix64::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn gaussian_is_deterministic_and_roughly_centered() {
        let mut rng = SplitMix64::new(7);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = rng.next_gaussian();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn zero_sigma_reproduces_the_interpolated_base() {
        let s = spec("c1", &[(0.0, 10.0), (10.0, 30.0), (49.0, 30.0)], 0.0, 1);
        let series = generate_trajectory(&s, &universe(0.0, 100.0)).unwrap();
        assert_eq!(series.len(), 50);
        assert!((series[0] - 10.0).abs() < 1e-12);
        assert!((series[5] - 20.0).abs() < 1e-12);
        assert!((series[10] - 30.0).abs() < 1e-12);
        assert!((series[49] - 30.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_gives_identical_series() {
        let s = spec("c1", &[(0.0, 50.0), (49.0, 20.0)], 5.0, 99);
        let u = universe(0.0, 100.0);
        assert_eq!(
            generate_trajectory(&s, &u).unwrap(),
            generate_trajectory(&s, &u).unwrap()
        );
    }

    #[test]
    fn noise_is_clamped_to_the_universe() {
        let s = spec("c1", &[(0.0, 95.0), (49.0, 5.0)], 50.0, 3);
        let series = generate_trajectory(&s, &universe(0.0, 100.0)).unwrap();
        assert!(series.iter().all(|&v| (0.0..=100.0).contains(&v)));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let u = universe(0.0, 100.0);
        let outside = spec("c1", &[(0.0, 150.0)], 1.0, 1);
        assert!(matches!(
            generate_trajectory(&outside, &u),
            Err(SimError::AnchorOutsideUniverse(_))
        ));
        let unsorted = spec("c1", &[(10.0, 5.0), (0.0, 5.0)], 1.0, 1);
        assert!(matches!(
            generate_trajectory(&unsorted, &u),
            Err(SimError::AnchorsUnsorted(_))
        ));
        let empty = spec("c1", &[], 1.0, 1);
        assert!(matches!(
            generate_trajectory(&empty, &u),
            Err(SimError::NoAnchors(_))
        ));
    }

    fn bench_specs() -> Vec<TrajectorySpec> {
        vec![
            spec("c1", &[(0.0, 80.0), (49.0, 20.0)], 3.0, 11),
            spec("c2", &[(0.0, 20.0), (25.0, 70.0), (49.0, 40.0)], 3.0, 22),
        ]
    }

    #[test]
    fn run_produces_one_record_per_step_and_is_deterministic() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let trace_a = run(&controller, &bench_specs(), 42, 123).unwrap();
        let trace_b = run(&controller, &bench_specs(), 42, 123).unwrap();
        assert_eq!(trace_a.records.len(), 50);
        assert_eq!(trace_a, trace_b);
        for (i, record) in trace_a.records.iter().enumerate() {
            assert_eq!(record.t as usize, i);
        }
        let other_seed = run(&controller, &bench_specs(), 43, 123).unwrap();
        assert_ne!(trace_a, other_seed);
    }

    #[test]
    fn single_step_run_equals_a_direct_controller_call() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let mut specs = bench_specs();
        for s in &mut specs {
            s.steps = 1;
            s.sigma = 0.0;
        }
        let trace = run(&controller, &specs, 0, 0).unwrap();
        let context: BTreeMap<String, f64> = [
            (String::from("c1"), specs[0].base_at(0.0)),
            (String::from("c2"), specs[1].base_at(0.0)),
        ]
        .into_iter()
        .collect();
        let direct = controller.step(0, &context, None).unwrap();
        assert_eq!(trace.records[0], direct);
    }

    #[test]
    fn run_requires_exactly_one_trajectory_per_context() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let missing = vec![bench_specs()[0].clone()];
        assert!(matches!(
            run(&controller, &missing, 0, 0),
            Err(SimError::MissingTrajectory(id)) if id == "c2"
        ));
        let mut dup = bench_specs();
        dup.push(dup[0].clone());
        assert!(matches!(
            run(&controller, &dup, 0, 0),
            Err(SimError::DuplicateTrajectory(_))
        ));
    }

    #[test]
    fn recorded_values_respect_their_domains() {
        let registry = bench_registry();
        let bases = bench_rule_bases(&registry);
        let controller = bench_controller(&registry, &bases, ReadaptationSettings::default());
        let trace = run(&controller, &bench_specs(), 5, 0).unwrap();
        for record in &trace.records {
            for (task, value) in record.configs_pre.iter().chain(&record.configs_post) {
                let var = registry.variable_of(task).unwrap();
                assert!(var.universe.contains(*value), "{task}={value}");
            }
            for (_, sd) in record
                .actual_sd_pre
                .iter()
                .chain(&record.actual_sd_post)
                .chain(&record.desired_sd)
            {
                assert!((0.0..=1.0).contains(sd));
            }
            if record.readapted {
                assert!(record.deviation_post.total >= record.deviation_pre.total - 1e-12);
            } else {
                assert_eq!(record.deviation_pre, record.deviation_post);
            }
        }
    }

    fn hand_record(
        t: u32,
        desired: &[(&str, f64)],
        actual_pre: &[(&str, f64)],
        actual_post: &[(&str, f64)],
        readapted: bool,
    ) -> TimeStepRecord {
        let desired = pair_list(desired);
        let actual_pre = pair_list(actual_pre);
        let actual_post = pair_list(actual_post);
        let weights: Vec<(String, f64)> =
            desired.iter().map(|(k, _)| (k.clone(), 0.5)).collect();
        let deviation_pre = deviation(&desired, &actual_pre, &weights, 0.1).unwrap();
        let deviation_post = deviation(&desired, &actual_post, &weights, 0.1).unwrap();
        TimeStepRecord {
            t,
            context: pair_list(&[("c1", 1.0)]),
            desired_sd: desired,
            configs_pre: pair_list(&[("p1", 2.0)]),
            actual_sd_pre: actual_pre,
            deviation_pre,
            readapted,
            iterations: usize::from(readapted),
            configs_post: pair_list(&[("p1", 3.0)]),
            actual_sd_post: actual_post,
            deviation_post,
        }
    }

    fn hand_trace(records: Vec<TimeStepRecord>) -> Trace {
        Trace {
            scenario_digest: 1,
            run_seed: 0,
            context_ids: vec![String::from("c1")],
            softgoal_ids: vec![String::from("s1"), String::from("s2")],
            task_ids: vec![String::from("p1")],
            records,
        }
    }

    #[test]
    fn summarize_matches_hand_computed_fractions() {
        // step 0: deltas pre (-0.3, 0.0) post (-0.05, 0.0), readapted
        // step 1: deltas pre (0.2, -0.05) post identical, not readapted
        let trace = hand_trace(vec![
            hand_record(
                0,
                &[("s1", 0.8), ("s2", 0.5)],
                &[("s1", 0.5), ("s2", 0.5)],
                &[("s1", 0.75), ("s2", 0.5)],
                true,
            ),
            hand_record(
                1,
                &[("s1", 0.3), ("s2", 0.6)],
                &[("s1", 0.5), ("s2", 0.55)],
                &[("s1", 0.5), ("s2", 0.55)],
                false,
            ),
        ]);
        let stats = summarize(&trace, 0.1);
        assert_eq!(stats.steps, 2);
        // individuals pre: -0.3 bad, 0.0 ok, 0.2 ok, -0.05 ok -> 3/4
        assert!((stats.individual_acceptable_pre - 0.75).abs() < 1e-12);
        // individuals post: all within -0.1 -> 4/4
        assert!((stats.individual_acceptable_post - 1.0).abs() < 1e-12);
        // totals pre: step0 -0.15 bad, step1 0.075 ok -> 1/2
        assert!((stats.total_acceptable_pre - 0.5).abs() < 1e-12);
        assert!((stats.total_acceptable_post - 1.0).abs() < 1e-12);
        assert!((stats.readaptation_rate - 0.5).abs() < 1e-12);
        // mean |ds| pre = (0.3 + 0.0 + 0.2 + 0.05) / 4
        assert!((stats.mean_abs_deviation_pre - 0.1375).abs() < 1e-12);
        // per-softgoal means
        assert!((stats.mean_desired[0].1 - 0.55).abs() < 1e-12);
        assert!((stats.mean_actual_post[0].1 - 0.625).abs() < 1e-12);
    }

    #[test]
    fn all_acceptable_trace_has_unit_fractions_and_zero_rate() {
        let trace = hand_trace(vec![hand_record(
            0,
            &[("s1", 0.5), ("s2", 0.5)],
            &[("s1", 0.5), ("s2", 0.5)],
            &[("s1", 0.5), ("s2", 0.5)],
            false,
        )]);
        let stats = summarize(&trace, 0.1);
        assert_eq!(stats.individual_acceptable_pre, 1.0);
        assert_eq!(stats.individual_acceptable_post, 1.0);
        assert_eq!(stats.readaptation_rate, 0.0);
    }

    #[test]
    fn csv_has_header_plus_one_row_per_step() {
        let trace = hand_trace(vec![
            hand_record(
                0,
                &[("s1", 0.8), ("s2", 0.5)],
                &[("s1", 0.5), ("s2", 0.5)],
                &[("s1", 0.75), ("s2", 0.5)],
                true,
            ),
            hand_record(
                1,
                &[("s1", 0.3), ("s2", 0.6)],
                &[("s1", 0.5), ("s2", 0.55)],
                &[("s1", 0.5), ("s2", 0.55)],
                false,
            ),
        ]);
        let csv = render_trace_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("t,ac_c1,sd_desired_s1,sd_desired_s2,cfg_pre_p1,"));
        assert!(lines[0].ends_with("dS_post"));
        let columns = lines[0].split(',').count();
        for row in &lines[1..] {
            assert_eq!(row.split(',').count(), columns);
        }
        // byte-identical re-render
        assert_eq!(csv, render_trace_csv(&trace));
    }

    #[test]
    fn empty_trace_renders_header_only() {
        let trace = hand_trace(vec![]);
        let csv = render_trace_csv(&trace);
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn summary_rendering_is_deterministic() {
        let trace = hand_trace(vec![hand_record(
            0,
            &[("s1", 0.5), ("s2", 0.5)],
            &[("s1", 0.4), ("s2", 0.5)],
            &[("s1", 0.45), ("s2", 0.5)],
            true,
        )]);
        let stats = summarize(&trace, 0.1);
        let text = render_summary(&stats);
        assert_eq!(text, render_summary(&summarize(&trace, 0.1)));
        assert!(text.contains("readaptation_rate=1.00000000"));
        assert!(text.contains("mean_desired_s1=0.500000000"));
    }

    #[test]
    fn fnv_digest_is_stable() {
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
        assert_ne!(fnv1a64(b"scenario-a"), fnv1a64(b"scenario-b"));
    }
}
