//! Compact two-context/two-task/two-softgoal fixture for unit tests.
//!
//! The rule bases are full products over the context terms with monotone
//! ordinal consequents, so every input fires at least one rule and the two
//! softgoals pull the configurations in opposite directions.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::controller::{Controller, ReadaptationSettings};
use crate::fuzzy::{LinguisticTerm, LinguisticVariable, MembershipFunction, UniverseInterval};
use crate::model::{AtomicContext, ParametricTask, Registry, RelationKind, Softgoal};
use crate::rulebase::{Antecedent, Clause, Connective, Rule, RuleBase};

pub(crate) fn tri_partition(name: &str, lo: f64, hi: f64, terms: [&str; 3]) -> LinguisticVariable {
    let mid = (lo + hi) / 2.0;
    LinguisticVariable::new(
        name,
        UniverseInterval::new(lo, hi, "").unwrap(),
        vec![
            LinguisticTerm::new(terms[0], MembershipFunction::triangular(lo, lo, mid).unwrap()),
            LinguisticTerm::new(terms[1], MembershipFunction::triangular(lo, mid, hi).unwrap()),
            LinguisticTerm::new(terms[2], MembershipFunction::triangular(mid, hi, hi).unwrap()),
        ],
    )
    .unwrap()
}

pub(crate) fn bench_registry() -> Registry {
    Registry::new(
        vec![
            AtomicContext {
                id: String::from("c1"),
                variable: tri_partition("SignalQuality", 0.0, 100.0, ["Low", "Mid", "High"]),
            },
            AtomicContext {
                id: String::from("c2"),
                variable: tri_partition("SystemLoad", 0.0, 100.0, ["Low", "Mid", "High"]),
            },
        ],
        vec![
            Softgoal {
                id: String::from("s1"),
                variable: tri_partition("HighResponsiveness", 0.0, 1.0, ["Low", "Mid", "High"]),
                weight: 0.5,
            },
            Softgoal {
                id: String::from("s2"),
                variable: tri_partition("HighFrugality", 0.0, 1.0, ["Low", "Mid", "High"]),
                weight: 0.5,
            },
        ],
        vec![
            ParametricTask {
                id: String::from("p1"),
                variable: tri_partition("BatchSize", 0.0, 100.0, ["Small", "Mid", "Large"]),
                adjustable_range: UniverseInterval::new(0.0, 100.0, "").unwrap(),
            },
            ParametricTask {
                id: String::from("p2"),
                variable: tri_partition("PollInterval", 0.0, 50.0, ["Short", "Mid", "Long"]),
                adjustable_range: UniverseInterval::new(0.0, 50.0, "").unwrap(),
            },
        ],
        vec![],
    )
    .unwrap()
}

/// Builds the full product of the two input variables' terms, picking the
/// consequent term by the sum of per-input support ordinals.
fn ordinal_product(
    input_a: (&LinguisticVariable, [usize; 3]),
    input_b: (&LinguisticVariable, [usize; 3]),
    output: &LinguisticVariable,
) -> Vec<Rule> {
    let mut rules = Vec::new();
    for (i, term_a) in input_a.0.terms.iter().enumerate() {
        for (j, term_b) in input_b.0.terms.iter().enumerate() {
            let sum = input_a.1[i] + input_b.1[j];
            let out_idx = if sum <= 3 {
                0
            } else if sum == 4 {
                1
            } else {
                2
            };
            rules.push(Rule {
                antecedent: Antecedent {
                    clauses: vec![
                        Clause::new(&input_a.0.name, &term_a.name),
                        Clause::new(&input_b.0.name, &term_b.name),
                    ],
                    connectives: vec![Connective::And],
                },
                consequents: vec![Clause::new(&output.name, &output.terms[out_idx].name)],
                weight: 1.0,
            });
        }
    }
    rules
}

pub(crate) struct BenchBases {
    pub upd: RuleBase,
    pub ena: RuleBase,
    pub cor: RuleBase,
}

pub(crate) fn bench_rule_bases(registry: &Registry) -> BenchBases {
    let quality = &registry.contexts[0].variable;
    let load = &registry.contexts[1].variable;
    let responsive = &registry.softgoals[0].variable;
    let frugal = &registry.softgoals[1].variable;
    let batch = &registry.parametric_tasks[0].variable;
    let poll = &registry.parametric_tasks[1].variable;

    let mut upd = ordinal_product((quality, [1, 2, 3]), (load, [3, 2, 1]), responsive);
    upd.extend(ordinal_product((quality, [3, 2, 1]), (load, [1, 2, 3]), frugal));

    let mut ena = ordinal_product((quality, [1, 2, 3]), (load, [3, 2, 1]), batch);
    ena.extend(ordinal_product((quality, [3, 2, 1]), (load, [1, 2, 3]), poll));

    // responsiveness likes small batches and short polls, frugality the opposite
    let mut cor = ordinal_product((batch, [3, 2, 1]), (poll, [3, 2, 1]), responsive);
    cor.extend(ordinal_product((batch, [1, 2, 3]), (poll, [1, 2, 3]), frugal));

    BenchBases {
        upd: RuleBase::new(RelationKind::Upd, upd),
        ena: RuleBase::new(RelationKind::Ena, ena),
        cor: RuleBase::new(RelationKind::Cor, cor),
    }
}

pub(crate) fn bench_controller<'a>(
    registry: &'a Registry,
    bases: &BenchBases,
    settings: ReadaptationSettings,
) -> Controller<'a> {
    Controller::new(registry, &bases.upd, &bases.ena, &bases.cor, settings)
        .expect("bench fixture is valid")
}

pub(crate) fn pair_list(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
