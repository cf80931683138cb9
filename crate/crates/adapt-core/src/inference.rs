//! The fuzzy inference core: firing strengths, max aggregation and
//! center-average defuzzification.
//!
//! AND combines clause degrees with min, OR with max, strictly left to
//! right; rules concluding the same term aggregate with max; the crisp
//! output is the strength-weighted average of the fired term centers, which
//! is exactly the printed centre-of-gravity form
//! `sum(strength_k * center_k) / sum(strength_k)`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::fuzzy::{FuzzifiedValue, FuzzyError, LinguisticVariable};
use crate::model::Registry;
use crate::rulebase::{Clause, Connective, Rule, RuleBase};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferError {
    #[error("no input value for variable `{variable}`")]
    MissingInput { variable: String },
    #[error("no rule fired for output variable `{variable}`")]
    NoRuleFired { variable: String },
    #[error("variable `{variable}` is not in the registry")]
    UnknownVariable { variable: String },
    #[error("variable `{variable}` has no term `{term}`")]
    UnknownTerm { variable: String, term: String },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// Activation of one rule: its strength and the consequents it pushes.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringResult {
    pub rule_index: usize,
    pub strength: f64,
    pub consequents: Vec<Clause>,
}

/// Per-term strength of one output variable after max aggregation.
/// Only fired terms (strength > 0) are listed, in term declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedOutput {
    pub variable: String,
    pub strengths: Vec<(String, f64)>,
}

impl AggregatedOutput {
    pub fn strength(&self, term: &str) -> Option<f64> {
        self.strengths
            .iter()
            .find(|(name, _)| name == term)
            .map(|&(_, s)| s)
    }
}

/// Representative crisp point of a term used by defuzzification.
#[derive(Debug, Clone, PartialEq)]
pub struct TermCenter {
    pub term: String,
    pub center: f64,
}

/// Term centers of a variable, in declaration order.
pub fn term_centers(var: &LinguisticVariable) -> Vec<TermCenter> {
    var.terms
        .iter()
        .map(|t| TermCenter {
            term: t.name.clone(),
            center: t.mf.center(),
        })
        .collect()
}

/// Activation level of a rule under fuzzified inputs: clause degrees folded
/// left to right (min for AND, max for OR), scaled by the rule weight.
pub fn firing_strength(
    rule: &Rule,
    inputs: &BTreeMap<String, FuzzifiedValue>,
) -> Result<f64, InferError> {
    let mut degrees = rule.antecedent.clauses.iter().map(|clause| {
        let value = inputs
            .get(&clause.variable)
            .ok_or_else(|| InferError::MissingInput {
                variable: clause.variable.clone(),
            })?;
        value
            .degree(&clause.term)
            .ok_or_else(|| InferError::UnknownTerm {
                variable: clause.variable.clone(),
                term: clause.term.clone(),
            })
    });

    let mut strength = degrees.next().expect("antecedent has at least one clause")?;
    for (connective, degree) in rule.antecedent.connectives.iter().zip(degrees) {
        let degree = degree?;
        strength = match connective {
            Connective::And => strength.min(degree),
            Connective::Or => strength.max(degree),
        };
    }
    Ok(strength * rule.weight)
}

/// Fires every rule of the base; rules with strength zero are kept so the
/// caller can inspect the full activation picture.
pub fn fire_all(
    rb: &RuleBase,
    inputs: &BTreeMap<String, FuzzifiedValue>,
) -> Result<Vec<FiringResult>, InferError> {
    rb.rules
        .iter()
        .enumerate()
        .map(|(rule_index, rule)| {
            Ok(FiringResult {
                rule_index,
                strength: firing_strength(rule, inputs)?,
                consequents: rule.consequents.clone(),
            })
        })
        .collect()
}

/// Max-aggregates rule activations per output variable and term.
/// Outputs are ordered by variable name; terms follow declaration order of
/// the output variable in the registry.
pub fn aggregate(
    rb: &RuleBase,
    inputs: &BTreeMap<String, FuzzifiedValue>,
    registry: &Registry,
) -> Result<Vec<AggregatedOutput>, InferError> {
    let mut per_variable: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for firing in fire_all(rb, inputs)? {
        if firing.strength <= 0.0 {
            continue;
        }
        for clause in &firing.consequents {
            let slot = per_variable
                .entry(clause.variable.clone())
                .or_default()
                .entry(clause.term.clone())
                .or_insert(0.0);
            *slot = slot.max(firing.strength);
        }
    }

    let mut outputs = Vec::new();
    for (variable, by_term) in per_variable {
        let var = registry
            .variable_named(&variable)
            .map(|(v, _)| v)
            .ok_or_else(|| InferError::UnknownVariable {
                variable: variable.clone(),
            })?;
        let strengths = var
            .terms
            .iter()
            .filter_map(|t| by_term.get(&t.name).map(|&s| (t.name.clone(), s)))
            .collect();
        outputs.push(AggregatedOutput { variable, strengths });
    }
    Ok(outputs)
}

/// Center-average defuzzification over the fired terms of `agg`.
///
/// Errors with [`InferError::NoRuleFired`] when nothing fired; otherwise the
/// result is a convex combination of fired-term centers.
pub fn defuzzify(agg: &AggregatedOutput, var: &LinguisticVariable) -> Result<f64, InferError> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (term, strength) in &agg.strengths {
        if *strength <= 0.0 {
            continue;
        }
        let center = var
            .term(term)
            .ok_or_else(|| InferError::UnknownTerm {
                variable: var.name.clone(),
                term: term.clone(),
            })?
            .mf
            .center();
        numerator += strength * center;
        denominator += strength;
    }
    if denominator <= 0.0 {
        return Err(InferError::NoRuleFired {
            variable: var.name.clone(),
        });
    }
    Ok(numerator / denominator)
}

/// Full pipeline: fuzzify crisp inputs, fire and aggregate the base, then
/// defuzzify every output variable the base concludes on.
///
/// Inputs are keyed by variable name. Out-of-universe inputs are clamped
/// (the membership semantics of the boundary apply). Deterministic.
pub fn infer(
    rb: &RuleBase,
    crisp: &BTreeMap<String, f64>,
    registry: &Registry,
) -> Result<BTreeMap<String, f64>, InferError> {
    let mut needed: Vec<&str> = Vec::new();
    for rule in &rb.rules {
        for clause in &rule.antecedent.clauses {
            if !needed.contains(&clause.variable.as_str()) {
                needed.push(&clause.variable);
            }
        }
    }

    let mut inputs = BTreeMap::new();
    for name in needed {
        let value = crisp
            .get(name)
            .copied()
            .ok_or_else(|| InferError::MissingInput {
                variable: name.to_string(),
            })?;
        let var = registry
            .variable_named(name)
            .map(|(v, _)| v)
            .ok_or_else(|| InferError::UnknownVariable {
                variable: name.to_string(),
            })?;
        inputs.insert(name.to_string(), var.fuzzify(value)?);
    }

    let mut output_vars: Vec<&str> = Vec::new();
    for rule in &rb.rules {
        for clause in &rule.consequents {
            if !output_vars.contains(&clause.variable.as_str()) {
                output_vars.push(&clause.variable);
            }
        }
    }

    let aggregated = aggregate(rb, &inputs, registry)?;
    let mut result = BTreeMap::new();
    for name in output_vars {
        let var = registry
            .variable_named(name)
            .map(|(v, _)| v)
            .ok_or_else(|| InferError::UnknownVariable {
                variable: name.to_string(),
            })?;
        let agg = aggregated.iter().find(|a| a.variable == name);
        let crisp_out = match agg {
            Some(agg) => defuzzify(agg, var)?,
            None => {
                return Err(InferError::NoRuleFired {
                    variable: name.to_string(),
                })
            }
        };
        result.insert(name.to_string(), crisp_out);
    }
    Ok(result)
}
