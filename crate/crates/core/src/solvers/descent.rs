//! Preconditioned descent for zero-homogeneous objectives whose gradient is
//! a positive multiple of `grad(N)/p - R`, with `N` the norm term.

use super::SolverOptions;
use crate::discrete::{Discretization, Tridiagonal};
use crate::error::Result;

/// Objective value together with the pieces that define its gradient.
pub(crate) struct Evaluation {
    pub value: f64,
    /// `grad(N)/p - R`
    pub direction_residual: Vec<f64>,
    /// Positive factor with `grad F = factor * direction_residual`.
    pub factor: f64,
}

pub(crate) trait Objective {
    fn disc(&self) -> &Discretization<'_>;
    fn mu(&self) -> f64;
    /// Objective value only; `None` when it is undefined at `v`.
    fn value(&self, v: &[f64]) -> Option<f64>;
    fn evaluate(&self, v: &[f64]) -> Result<Evaluation>;
    /// Rescales `v` to the normalization surface.
    fn normalize(&self, v: &mut [f64]);
    /// Relative Euler-Lagrange residual at `v`.
    fn residual(&self, v: &[f64]) -> f64;
    /// Optional extra coordinate updated after every shape step; returns
    /// whether it moved.
    fn side_step(&mut self, _v: &[f64]) -> bool {
        false
    }
}

pub(crate) struct DescentOutcome {
    pub v: Vec<f64>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn precondition(obj: &dyn Objective, v: &[f64], rhs: &[f64]) -> Vec<f64> {
    let disc = obj.disc();
    let attempt = |mut t: Tridiagonal| {
        t.floor_diagonal(1e-14);
        t.solve(rhs)
    };
    attempt(disc.preconditioner(v, obj.mu()))
        .or_else(|| attempt(disc.gradient_preconditioner(v)))
        .unwrap_or_else(|| rhs.to_vec())
}

pub(crate) fn descend(
    obj: &mut dyn Objective,
    init: Vec<f64>,
    opts: &SolverOptions,
) -> Result<DescentOutcome> {
    let mut v: Vec<f64> = init.iter().map(|x| x.abs()).collect();
    obj.normalize(&mut v);
    let mut eval = obj.evaluate(&v)?;
    let mut history = vec![eval.value];
    let mut residual = obj.residual(&v);
    let mut step = opts.initial_step;
    let mut stalls = 0;
    let mut iterations = 0;
    while iterations < opts.max_iter && residual >= opts.tol {
        iterations += 1;
        let d: Vec<f64> = precondition(obj, &v, &eval.direction_residual)
            .iter()
            .map(|x| -x)
            .collect();
        let slope = eval.factor
            * d.iter()
                .zip(&eval.direction_residual)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        if !(slope < 0.0) {
            break;
        }
        let mut alpha = (2.0 * step).min(opts.max_step);
        let mut accepted = None;
        while alpha >= opts.min_step {
            let mut trial: Vec<f64> = v
                .iter()
                .zip(&d)
                .map(|(a, b)| (a + alpha * b).abs())
                .collect();
            obj.normalize(&mut trial);
            if let Some(f) = obj.value(&trial) {
                if f <= eval.value + opts.armijo * alpha * slope && f <= eval.value {
                    accepted = Some((trial, f));
                    break;
                }
            }
            alpha *= opts.backtrack;
        }
        let before = eval.value;
        match accepted {
            Some((trial, _)) => {
                step = alpha;
                v = trial;
                obj.side_step(&v);
            }
            // a stuck shape step can still leave room in the side coordinate
            None if obj.side_step(&v) => step = opts.initial_step,
            None => break,
        }
        eval = obj.evaluate(&v)?;
        let decrease = (before - eval.value) / before.abs().max(f64::MIN_POSITIVE);
        history.push(eval.value);
        residual = obj.residual(&v);
        if decrease < opts.stall_tol {
            stalls += 1;
            if stalls >= opts.stall_patience {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let converged = residual < opts.tol;
    Ok(DescentOutcome {
        v,
        history,
        iterations,
        residual,
        converged,
    })
}
