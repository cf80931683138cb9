//! Typed if-then rule bases and their line-oriented DSL.
//!
//! Rules are written one per line:
//!
//! ```text
//! If (BandwidthRate is HBandwidth) and (NetworkDelay is Ldelay) then (HighTimeEfficiency is HSat) (1)
//! ```
//!
//! `#` starts a comment, blank lines are skipped and a leading `<n>.` label
//! is accepted and ignored so numbered rule listings can be pasted in as-is.
//! Parsing resolves every variable and term against the model registry;
//! [`format_rule`] is the exact inverse of [`parse_rule`] up to whitespace.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::fuzzy::LinguisticVariable;
use crate::model::{ElementKind, Registry, RelationKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: unknown variable `{variable}`")]
    UnknownVariable { line: usize, variable: String },
    #[error("line {line}: variable `{variable}` has no term `{term}`")]
    UnknownTerm {
        line: usize,
        variable: String,
        term: String,
    },
    #[error("line {line}: weight {weight} is outside (0, 1]")]
    WeightOutOfRange { line: usize, weight: f64 },
    #[error("line {line}: consequent variable `{variable}` appears twice")]
    DuplicateConsequentVariable { line: usize, variable: String },
    #[error("rule {index}: {message}")]
    KindViolation { index: usize, message: String },
    #[error("rules {first} and {second} conflict: identical antecedents conclude different terms")]
    Conflict { first: usize, second: usize },
    #[error("rule space needs at least one input and one output variable")]
    EmptyRuleSpace,
    #[error("rule space term count must be at least 1")]
    ZeroTermCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
}

/// One `<variable> is <term>` proposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub variable: String,
    pub term: String,
}

impl Clause {
    pub fn new(variable: &str, term: &str) -> Self {
        Self {
            variable: variable.to_string(),
            term: term.to_string(),
        }
    }
}

/// Clause chain evaluated strictly left to right; `connectives` sits between
/// consecutive clauses, so its length is `clauses.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antecedent {
    pub clauses: Vec<Clause>,
    pub connectives: Vec<Connective>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Antecedent,
    pub consequents: Vec<Clause>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    pub kind: RelationKind,
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(kind: RelationKind, rules: Vec<Rule>) -> Self {
        Self { kind, rules }
    }

    /// Rules concluding on the given output variable, preserving order.
    pub fn restricted_to_output(&self, variable: &str) -> RuleBase {
        RuleBase {
            kind: self.kind,
            rules: self
                .rules
                .iter()
                .filter(|r| r.consequents.iter().any(|c| c.variable == variable))
                .cloned()
                .collect(),
        }
    }

    /// Checks the Table-3 kind constraints of every rule against the registry:
    /// UPD maps contexts to softgoals, ENA contexts to tasks, COR tasks to
    /// softgoals.
    pub fn validate(&self, registry: &Registry) -> Result<(), RuleError> {
        let (input_ok, output_ok): (fn(ElementKind) -> bool, fn(ElementKind) -> bool) =
            match self.kind {
                RelationKind::Upd => (
                    |k| k == ElementKind::Context,
                    |k| k == ElementKind::Softgoal,
                ),
                RelationKind::Ena => (|k| k == ElementKind::Context, |k| k.is_task()),
                RelationKind::Cor => (|k| k.is_task(), |k| k == ElementKind::Softgoal),
            };
        for (index, rule) in self.rules.iter().enumerate() {
            for clause in &rule.antecedent.clauses {
                let kind = registry
                    .variable_named(&clause.variable)
                    .map(|(_, k)| k)
                    .ok_or_else(|| RuleError::KindViolation {
                        index,
                        message: format!("unknown antecedent variable `{}`", clause.variable),
                    })?;
                if !input_ok(kind) {
                    return Err(RuleError::KindViolation {
                        index,
                        message: format!(
                            "antecedent variable `{}` is not allowed in a {} rule",
                            clause.variable,
                            self.kind.as_str()
                        ),
                    });
                }
            }
            for clause in &rule.consequents {
                let kind = registry
                    .variable_named(&clause.variable)
                    .map(|(_, k)| k)
                    .ok_or_else(|| RuleError::KindViolation {
                        index,
                        message: format!("unknown consequent variable `{}`", clause.variable),
                    })?;
                if !output_ok(kind) {
                    return Err(RuleError::KindViolation {
                        index,
                        message: format!(
                            "consequent variable `{}` is not allowed in a {} rule",
                            clause.variable,
                            self.kind.as_str()
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Self { text, pos: 0, line }
    }

    fn error(&self, message: impl Into<String>) -> RuleError {
        RuleError::Syntax {
            line: self.line,
            col: self.pos + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn expect_char(&mut self, c: char) -> Result<(), RuleError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    /// Consumes the keyword (case-insensitive) if it is the next word.
    fn eat_keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        if rest.len() >= word.len() && rest[..word.len()].eq_ignore_ascii_case(word) {
            let boundary = rest[word.len()..]
                .chars()
                .next()
                .map_or(true, |c| !c.is_alphanumeric() && c != '_');
            if boundary {
                self.pos += word.len();
                return true;
            }
        }
        false
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), RuleError> {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            Err(self.error(format!("expected keyword `{word}`")))
        }
    }

    fn identifier(&mut self) -> Result<&'a str, RuleError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .take_while(|(_, c)| c.is_alphanumeric() || *c == '_')
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        if len == 0 {
            return Err(self.error("expected an identifier"));
        }
        let ident = &rest[..len];
        self.pos += len;
        Ok(ident)
    }

    fn number(&mut self) -> Result<f64, RuleError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        let parsed = rest[..len]
            .parse::<f64>()
            .map_err(|_| self.error(format!("`{}` is not a number", &rest[..len])))?;
        self.pos += len;
        Ok(parsed)
    }

    /// Skips an optional `<n>.` label in front of the rule.
    fn skip_label(&mut self) {
        self.skip_ws();
        let rest = self.rest();
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 && rest[digits..].starts_with('.') {
            self.pos += digits + 1;
        }
    }
}

fn resolve_clause(
    scanner: &mut Scanner<'_>,
    registry: &Registry,
) -> Result<Clause, RuleError> {
    let line = scanner.line;
    scanner.expect_char('(')?;
    let variable = scanner.identifier()?.to_string();
    scanner.expect_keyword("is")?;
    let term = scanner.identifier()?.to_string();
    scanner.expect_char(')')?;
    let (var, _) = registry
        .variable_named(&variable)
        .ok_or_else(|| RuleError::UnknownVariable {
            line,
            variable: variable.clone(),
        })?;
    if var.term(&term).is_none() {
        return Err(RuleError::UnknownTerm {
            line,
            variable,
            term,
        });
    }
    Ok(Clause { variable, term })
}

/// Parses one DSL line into a [`Rule`], resolving names against the registry.
///
/// `line_no` is used for error reporting only.
pub fn parse_rule(line: &str, line_no: usize, registry: &Registry) -> Result<Rule, RuleError> {
    let mut scanner = Scanner::new(line, line_no);
    scanner.skip_label();
    scanner.expect_keyword("if")?;

    let mut clauses = alloc::vec![resolve_clause(&mut scanner, registry)?];
    let mut connectives = Vec::new();
    loop {
        if scanner.eat_keyword("and") {
            connectives.push(Connective::And);
        } else if scanner.eat_keyword("or") {
            connectives.push(Connective::Or);
        } else {
            break;
        }
        clauses.push(resolve_clause(&mut scanner, registry)?);
    }
    scanner.expect_keyword("then")?;

    let mut consequents = alloc::vec![resolve_clause(&mut scanner, registry)?];
    while scanner.eat_keyword("and") {
        consequents.push(resolve_clause(&mut scanner, registry)?);
    }
    for (i, clause) in consequents.iter().enumerate() {
        if consequents[..i].iter().any(|c| c.variable == clause.variable) {
            return Err(RuleError::DuplicateConsequentVariable {
                line: line_no,
                variable: clause.variable.clone(),
            });
        }
    }

    scanner.expect_char('(')?;
    let weight = scanner.number()?;
    scanner.expect_char(')')?;
    if !scanner.at_end() {
        return Err(scanner.error("unexpected trailing input"));
    }
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(RuleError::WeightOutOfRange {
            line: line_no,
            weight,
        });
    }

    Ok(Rule {
        antecedent: Antecedent {
            clauses,
            connectives,
        },
        consequents,
        weight,
    })
}

/// Parses a whole rule file: one rule per line, `#` comments and blank lines
/// skipped. Line numbers in errors are 1-based positions in `text`.
pub fn parse_rules(text: &str, registry: &Registry) -> Result<Vec<Rule>, RuleError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        rules.push(parse_rule(line, i + 1, registry)?);
    }
    Ok(rules)
}

/// Prints a rule in canonical DSL form; `parse_rule(format_rule(r))` is the
/// structural identity.
pub fn format_rule(rule: &Rule) -> String {
    let mut out = String::from("If ");
    for (i, clause) in rule.antecedent.clauses.iter().enumerate() {
        if i > 0 {
            out.push_str(match rule.antecedent.connectives[i - 1] {
                Connective::And => " and ",
                Connective::Or => " or ",
            });
        }
        out.push_str(&format!("({} is {})", clause.variable, clause.term));
    }
    out.push_str(" then ");
    for (i, clause) in rule.consequents.iter().enumerate() {
        if i > 0 {
            out.push_str(" and ");
        }
        out.push_str(&format!("({} is {})", clause.variable, clause.term));
    }
    if rule.weight == rule.weight as i64 as f64 {
        out.push_str(&format!(" ({})", rule.weight as i64));
    } else {
        out.push_str(&format!(" ({})", crate::numfmt::sig9(rule.weight)));
    }
    out
}

/// Size of the unconstrained rule space for the given input/output term
/// counts: the product of all term counts times `2^(m + n - 2)` connective
/// combinations, where `n` is the number of inputs and `m` of outputs.
pub fn count_rule_space(
    input_term_counts: &[usize],
    output_term_counts: &[usize],
) -> Result<u128, RuleError> {
    if input_term_counts.is_empty() || output_term_counts.is_empty() {
        return Err(RuleError::EmptyRuleSpace);
    }
    if input_term_counts
        .iter()
        .chain(output_term_counts.iter())
        .any(|&k| k == 0)
    {
        return Err(RuleError::ZeroTermCount);
    }
    let mut total: u128 = 1;
    for &k in input_term_counts.iter().chain(output_term_counts.iter()) {
        total *= k as u128;
    }
    let exp = (input_term_counts.len() + output_term_counts.len() - 2) as u32;
    Ok(total * (1u128 << exp))
}

/// The Regulation operator: enumerates the AND-only rule skeletons for the
/// given inputs and outputs, one rule per combination of input terms and
/// output terms, each with weight 1. The consequent terms are proposals for
/// an expert to confirm or edit. The result has
/// `prod(input term counts) * prod(output term counts)` entries and no
/// duplicate antecedent/consequent pairs.
pub fn enumerate_rules(
    inputs: &[&LinguisticVariable],
    outputs: &[&LinguisticVariable],
) -> Vec<Rule> {
    if inputs.is_empty() || outputs.is_empty() {
        return Vec::new();
    }
    let mut rules = Vec::new();
    let in_counts: Vec<usize> = inputs.iter().map(|v| v.terms.len()).collect();
    let out_counts: Vec<usize> = outputs.iter().map(|v| v.terms.len()).collect();
    let mut in_idx = alloc::vec![0usize; inputs.len()];
    loop {
        let mut out_idx = alloc::vec![0usize; outputs.len()];
        loop {
            let clauses: Vec<Clause> = inputs
                .iter()
                .zip(&in_idx)
                .map(|(var, &i)| Clause::new(&var.name, &var.terms[i].name))
                .collect();
            let consequents: Vec<Clause> = outputs
                .iter()
                .zip(&out_idx)
                .map(|(var, &i)| Clause::new(&var.name, &var.terms[i].name))
                .collect();
            let connectives = alloc::vec![Connective::And; clauses.len().saturating_sub(1)];
            rules.push(Rule {
                antecedent: Antecedent {
                    clauses,
                    connectives,
                },
                consequents,
                weight: 1.0,
            });
            if !advance(&mut out_idx, &out_counts) {
                break;
            }
        }
        if !advance(&mut in_idx, &in_counts) {
            break;
        }
    }
    rules
}

/// Odometer increment over mixed radices; false once exhausted.
fn advance(idx: &mut [usize], counts: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < counts[i] {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Rule pairs found by [`detect_conflicts`]: `conflicts` share an antecedent
/// but conclude different terms for the same output variable, `duplicates`
/// are fully identical restatements.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictReport {
    pub conflicts: Vec<(usize, usize)>,
    pub duplicates: Vec<(usize, usize)>,
}

impl ConflictReport {
    pub fn is_clean(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Finds contradictory and duplicate rules in a base.
pub fn detect_conflicts(rb: &RuleBase) -> ConflictReport {
    let mut report = ConflictReport::default();
    for i in 0..rb.rules.len() {
        for j in (i + 1)..rb.rules.len() {
            let (a, b) = (&rb.rules[i], &rb.rules[j]);
            if a.antecedent != b.antecedent {
                continue;
            }
            let mut contradiction = false;
            for ca in &a.consequents {
                if let Some(cb) = b
                    .consequents
                    .iter()
                    .find(|c| c.variable == ca.variable)
                {
                    if cb.term != ca.term {
                        contradiction = true;
                    }
                }
            }
            if contradiction {
                report.conflicts.push((i, j));
            } else if a.consequents == b.consequents {
                report.duplicates.push((i, j));
            }
        }
    }
    report
}
