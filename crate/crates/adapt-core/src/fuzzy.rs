//! Membership functions, linguistic variables and fuzzification.
//!
//! A [`LinguisticVariable`] is a named quantity over a bounded universe whose
//! qualitative labels (terms) are each backed by a membership function.
//! Fuzzifying a crisp measurement yields the membership degree of every term,
//! which is the quantitative carrier for context, satisfaction and
//! configuration uncertainty throughout the engine.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use thiserror::Error;

use crate::math;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("universe lower bound {lo} is not below upper bound {hi}")]
    EmptyUniverse { lo: f64, hi: f64 },
    #[error("invalid membership function: {0}")]
    InvalidMf(String),
    #[error("linguistic variable `{0}` has no terms")]
    NoTerms(String),
    #[error("linguistic variable `{variable}` declares term `{term}` twice")]
    DuplicateTerm { variable: String, term: String },
    #[error("term name must not be empty (variable `{0}`)")]
    EmptyTermName(String),
    #[error("cannot fuzzify a non-finite value for variable `{0}`")]
    NonFiniteInput(String),
}

/// A closed interval `[lo, hi]` with a unit label for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseInterval {
    pub lo: f64,
    pub hi: f64,
    pub unit_label: String,
}

impl UniverseInterval {
    pub fn new(lo: f64, hi: f64, unit_label: &str) -> Result<Self, FuzzyError> {
        if !(lo < hi) {
            return Err(FuzzyError::EmptyUniverse { lo, hi });
        }
        Ok(Self {
            lo,
            hi,
            unit_label: unit_label.to_string(),
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Parametric membership function shapes.
///
/// Piecewise-linear shapes follow the usual ramp semantics; a degenerate
/// triangle shoulder (`a == b` or `b == c`) is a vertical edge whose shared
/// point has degree 1. The generalized bell evaluates to
/// `1 / (1 + |(x - center) / width|^(2 * slope))`.
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipFunction {
    Triangular { a: f64, b: f64, c: f64 },
    Trapezoidal { a: f64, b: f64, c: f64, d: f64 },
    GeneralizedBell { width: f64, slope: f64, center: f64 },
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        let mf = Self::Triangular { a, b, c };
        mf.validate()?;
        Ok(mf)
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let mf = Self::Trapezoidal { a, b, c, d };
        mf.validate()?;
        Ok(mf)
    }

    pub fn generalized_bell(width: f64, slope: f64, center: f64) -> Result<Self, FuzzyError> {
        let mf = Self::GeneralizedBell {
            width,
            slope,
            center,
        };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<(), FuzzyError> {
        let fail = |msg: String| Err(FuzzyError::InvalidMf(msg));
        match *self {
            Self::Triangular { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return fail(alloc::format!("triangular({a}, {b}, {c}) is not finite"));
                }
                if !(a <= b && b <= c) {
                    return fail(alloc::format!("triangular({a}, {b}, {c}) needs a <= b <= c"));
                }
                if a == c {
                    return fail(alloc::format!(
                        "triangular({a}, {b}, {c}) is degenerate to a point"
                    ));
                }
                Ok(())
            }
            Self::Trapezoidal { a, b, c, d } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
                    return fail(alloc::format!(
                        "trapezoidal({a}, {b}, {c}, {d}) is not finite"
                    ));
                }
                if !(a <= b && b <= c && c <= d) {
                    return fail(alloc::format!(
                        "trapezoidal({a}, {b}, {c}, {d}) needs a <= b <= c <= d"
                    ));
                }
                if a == d {
                    return fail(alloc::format!(
                        "trapezoidal({a}, {b}, {c}, {d}) is degenerate to a point"
                    ));
                }
                Ok(())
            }
            Self::GeneralizedBell {
                width,
                slope,
                center,
            } => {
                if !(width.is_finite() && slope.is_finite() && center.is_finite()) {
                    return fail(alloc::format!(
                        "bell(width={width}, slope={slope}, center={center}) is not finite"
                    ));
                }
                if width <= 0.0 {
                    return fail(alloc::format!("bell width {width} must be positive"));
                }
                if slope <= 0.0 {
                    return fail(alloc::format!("bell slope {slope} must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Membership degree of `x`, always in `[0, 1]`. Evaluation is total for
    /// any parameters accepted by [`MembershipFunction::validate`].
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            Self::Trapezoidal { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (d - x) / (d - c)
                }
            }
            Self::GeneralizedBell {
                width,
                slope,
                center,
            } => {
                let base = ((x - center) / width).abs();
                if base == 0.0 {
                    1.0
                } else {
                    1.0 / (1.0 + math::powf(base, 2.0 * slope))
                }
            }
        }
    }

    /// Representative crisp point of the term, used by defuzzification:
    /// triangle peak, trapezoid plateau midpoint, bell center.
    pub fn center(&self) -> f64 {
        match *self {
            Self::Triangular { b, .. } => b,
            Self::Trapezoidal { b, c, .. } => 0.5 * (b + c),
            Self::GeneralizedBell { center, .. } => center,
        }
    }

    /// Interval outside of which the degree is exactly zero.
    /// `None` for the bell, whose tails never reach zero.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Triangular { a, c, .. } => Some((a, c)),
            Self::Trapezoidal { a, d, .. } => Some((a, d)),
            Self::GeneralizedBell { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticTerm {
    pub name: String,
    pub mf: MembershipFunction,
}

impl LinguisticTerm {
    pub fn new(name: &str, mf: MembershipFunction) -> Self {
        Self {
            name: name.to_string(),
            mf,
        }
    }
}

/// A named quantity over a bounded universe with ordered linguistic terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    pub name: String,
    pub universe: UniverseInterval,
    pub terms: Vec<LinguisticTerm>,
}

impl LinguisticVariable {
    pub fn new(
        name: &str,
        universe: UniverseInterval,
        terms: Vec<LinguisticTerm>,
    ) -> Result<Self, FuzzyError> {
        if terms.is_empty() {
            return Err(FuzzyError::NoTerms(name.to_string()));
        }
        for (i, term) in terms.iter().enumerate() {
            if term.name.is_empty() {
                return Err(FuzzyError::EmptyTermName(name.to_string()));
            }
            term.mf.validate()?;
            if terms[..i].iter().any(|t| t.name == term.name) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name.to_string(),
                    term: term.name.clone(),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            universe,
            terms,
        })
    }

    pub fn term(&self, name: &str) -> Option<&LinguisticTerm> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// Fuzzifies a crisp measurement into per-term membership degrees.
    ///
    /// Out-of-universe inputs are clamped to the universe and flagged via
    /// [`FuzzifiedValue::clamped`] so callers can surface a warning; only a
    /// non-finite input is an error.
    pub fn fuzzify(&self, x: f64) -> Result<FuzzifiedValue, FuzzyError> {
        if !x.is_finite() {
            return Err(FuzzyError::NonFiniteInput(self.name.clone()));
        }
        let clamped = !self.universe.contains(x);
        let crisp = self.universe.clamp(x);
        let degrees = self
            .terms
            .iter()
            .map(|t| (t.name.clone(), t.mf.eval(crisp)))
            .collect();
        Ok(FuzzifiedValue {
            variable: self.name.clone(),
            crisp,
            degrees,
            clamped,
        })
    }
}

/// A crisp measurement together with the membership degree of every term of
/// its variable, in term declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzifiedValue {
    pub variable: String,
    pub crisp: f64,
    pub degrees: Vec<(String, f64)>,
    /// True when the raw input fell outside the universe and was clamped.
    pub clamped: bool,
}

impl FuzzifiedValue {
    pub fn degree(&self, term: &str) -> Option<f64> {
        self.degrees
            .iter()
            .find(|(name, _)| name == term)
            .map(|&(_, d)| d)
    }
}

/// Findings of [`validate_variable`]; every entry is advisory, not a failure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableReport {
    pub variable: String,
    pub duplicate_terms: Vec<String>,
    /// Universe stretches on which every term evaluates to zero, sampled on a
    /// 1000-point grid.
    pub coverage_gaps: Vec<(f64, f64)>,
    /// Terms whose support sticks out of the universe.
    pub oversized_supports: Vec<String>,
}

impl VariableReport {
    pub fn is_clean(&self) -> bool {
        self.duplicate_terms.is_empty()
            && self.coverage_gaps.is_empty()
            && self.oversized_supports.is_empty()
    }
}

const COVERAGE_GRID: usize = 1000;

/// Inspects a variable for duplicate term names, coverage gaps and supports
/// exceeding the universe.
pub fn validate_variable(var: &LinguisticVariable) -> VariableReport {
    let mut report = VariableReport {
        variable: var.name.clone(),
        ..VariableReport::default()
    };

    for (i, term) in var.terms.iter().enumerate() {
        if var.terms[..i].iter().any(|t| t.name == term.name)
            && !report.duplicate_terms.contains(&term.name)
        {
            report.duplicate_terms.push(term.name.clone());
        }
        if let Some((lo, hi)) = term.mf.support() {
            if lo < var.universe.lo || hi > var.universe.hi {
                report.oversized_supports.push(term.name.clone());
            }
        }
    }

    let step = var.universe.width() / (COVERAGE_GRID - 1) as f64;
    let mut gap_start: Option<f64> = None;
    let mut prev_x = var.universe.lo;
    for i in 0..COVERAGE_GRID {
        let x = var.universe.lo + step * i as f64;
        let covered = var.terms.iter().any(|t| t.mf.eval(x) > 0.0);
        if covered {
            if let Some(start) = gap_start.take() {
                report.coverage_gaps.push((start, prev_x));
            }
        } else if gap_start.is_none() {
            gap_start = Some(x);
        }
        prev_x = x;
    }
    if let Some(start) = gap_start {
        report.coverage_gaps.push((start, var.universe.hi));
    }

    report
}
