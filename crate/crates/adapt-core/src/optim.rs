//! Bounded derivative-free maximization with the downhill simplex method.
//!
//! Standard Nelder-Mead moves (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5) over a box: every candidate is projected into the bounds
//! before evaluation, so the search can never leave the feasible region.
//! The best point ever evaluated is tracked and returned, which means the
//! result is never worse than the start point.

use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct NmOptions {
    pub max_iterations: usize,
    /// Simplex diameter (L-infinity) below which the search stops.
    pub tolerance: f64,
    /// Initial step along each axis, as a fraction of that axis' range.
    pub initial_step_fraction: f64,
    /// Stop as soon as the best value reaches this target.
    pub target: Option<f64>,
    /// When the simplex collapses below tolerance with budget left and the
    /// target unmet, rebuild it around the best point with the next step
    /// fraction from this schedule. Deterministic escape from plateaus and
    /// shallow local optima; empty disables restarts.
    pub restart_scales: Vec<f64>,
    /// Evaluate a uniform lattice with this many points per axis before the
    /// simplex starts and anchor it at the best sample. Gives the local
    /// search a global seed; values below 2 disable the presample.
    pub presample_per_axis: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-4,
            initial_step_fraction: 0.1,
            target: None,
            restart_scales: Vec::new(),
            presample_per_axis: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// True when the simplex collapsed below tolerance or the target was hit.
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

fn clamp_to(bounds: &[(f64, f64)], x: &mut [f64]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

/// Descending comparison that sinks NaN below everything else.
fn better(a: f64, b: f64) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (false, false) => a > b,
        (false, true) => true,
        _ => false,
    }
}

/// Maximizes `f` over the box from `start`, returning the best point ever
/// evaluated. The objective may return `f64::NEG_INFINITY` to mark an
/// infeasible point.
pub fn maximize<F>(mut f: F, start: &[f64], bounds: &[(f64, f64)], opts: &NmOptions) -> OptimResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    assert_eq!(n, bounds.len(), "one bound pair per dimension");
    assert!(n >= 1, "need at least one dimension");

    let mut start = start.to_vec();
    clamp_to(bounds, &mut start);

    // simplex around an anchor: one step along each axis, taking whichever
    // clamped direction travels farther from the anchor
    let build_simplex = |anchor: &[f64],
                         anchor_value: f64,
                         fraction: f64,
                         f: &mut F,
                         best: &mut (Vec<f64>, f64)| {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(anchor.len() + 1);
        simplex.push((anchor.to_vec(), anchor_value));
        for i in 0..anchor.len() {
            let (lo, hi) = bounds[i];
            let mut step = (hi - lo) * fraction;
            if step == 0.0 {
                step = 1e-8;
            }
            let mut point = anchor.to_vec();
            let up = (anchor[i] + step).min(hi);
            let down = (anchor[i] - step).max(lo);
            point[i] = if up - anchor[i] >= anchor[i] - down {
                up
            } else {
                down
            };
            clamp_to(bounds, &mut point);
            let value = f(&point);
            if better(value, best.1) {
                *best = (point.clone(), value);
            }
            simplex.push((point, value));
        }
        simplex
    };

    let target_met = |value: f64, opts: &NmOptions| opts.target.is_some_and(|t| value >= t);

    let f0 = f(&start);
    let mut best = (start.clone(), f0);

    if opts.presample_per_axis >= 2 && !target_met(best.1, opts) {
        let p = opts.presample_per_axis;
        let mut idx = alloc::vec![0usize; n];
        'lattice: loop {
            let point: Vec<f64> = idx
                .iter()
                .zip(bounds)
                .map(|(&k, &(lo, hi))| lo + (hi - lo) * k as f64 / (p - 1) as f64)
                .collect();
            let value = f(&point);
            if better(value, best.1) {
                best = (point, value);
                if target_met(best.1, opts) {
                    break 'lattice;
                }
            }
            let mut carried = false;
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < p {
                    carried = true;
                    break;
                }
                idx[i] = 0;
            }
            if !carried {
                break 'lattice;
            }
        }
    }

    let anchor = best.clone();
    let mut simplex = build_simplex(
        &anchor.0,
        anchor.1,
        opts.initial_step_fraction,
        &mut f,
        &mut best,
    );
    let mut restarts = opts.restart_scales.iter().copied();

    let mut iterations = 0;
    let mut converged = target_met(best.1, opts);
    while iterations < opts.max_iterations && !converged {
        iterations += 1;
        // best first, worst last
        simplex.sort_by(|a, b| {
            if better(a.1, b.1) {
                core::cmp::Ordering::Less
            } else if better(b.1, a.1) {
                core::cmp::Ordering::Greater
            } else {
                core::cmp::Ordering::Equal
            }
        });

        let diameter = simplex[1..]
            .iter()
            .flat_map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0f64, f64::max);
        if diameter < opts.tolerance {
            match restarts.next() {
                Some(scale) => {
                    let anchor = best.clone();
                    simplex = build_simplex(&anchor.0, anchor.1, scale, &mut f, &mut best);
                    continue;
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }

        let mut centroid = alloc::vec![0.0; n];
        for (point, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(point) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();

        let evaluate = |point: Vec<f64>, f: &mut F, best: &mut (Vec<f64>, f64)| {
            let mut point = point;
            clamp_to(bounds, &mut point);
            let value = f(&point);
            if better(value, best.1) {
                *best = (point.clone(), value);
            }
            (point, value)
        };

        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        let (xr, fr) = evaluate(reflected, &mut f, &mut best);

        if better(fr, simplex[0].1) {
            // try to expand further in the same direction
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + GAMMA * (c - w))
                .collect();
            let (xe, fe) = evaluate(expanded, &mut f, &mut best);
            simplex[n] = if better(fe, fr) { (xe, fe) } else { (xr, fr) };
        } else if better(fr, simplex[n - 1].1) {
            simplex[n] = (xr, fr);
        } else {
            let toward = if better(fr, worst.1) { &xr } else { &worst.0 };
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(toward)
                .map(|(c, t)| c + RHO * (t - c))
                .collect();
            let (xc, fc) = evaluate(contracted, &mut f, &mut best);
            let keep = if better(fr, worst.1) { fr } else { worst.1 };
            if better(fc, keep) {
                simplex[n] = (xc, fc);
            } else {
                // shrink everything toward the current best vertex
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = anchor
                        .iter()
                        .zip(&entry.0)
                        .map(|(a, x)| a + SIGMA * (x - a))
                        .collect();
                    *entry = evaluate(shrunk, &mut f, &mut best);
                }
            }
        }

        if target_met(best.1, opts) {
            converged = true;
        }
    }

    OptimResult {
        x: best.0,
        value: best.1,
        iterations,
        converged,
    }
}
