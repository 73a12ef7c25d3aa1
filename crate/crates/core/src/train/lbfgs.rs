//! Limited-memory BFGS with a backtracking line search (Armijo, falling
//! back to an approximate Wolfe test once decreases drop below rounding).

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions {
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    pub history_size: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start point, then after every accepted step.
    pub trace: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const APPROX_WOLFE_DELTA: f64 = 0.1;
const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H·g`.
fn direction(grad: &[f64], history: &VecDeque<Pair>) -> Vec<f64> {
    let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut alpha = vec![0.0; history.len()];
    for (i, pair) in history.iter().enumerate().rev() {
        alpha[i] = pair.rho * dot(&pair.s, &q);
        for (qj, yj) in q.iter_mut().zip(&pair.y) {
            *qj -= alpha[i] * yj;
        }
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qj in q.iter_mut() {
            *qj *= gamma;
        }
    }
    for (i, pair) in history.iter().enumerate() {
        let beta = pair.rho * dot(&pair.y, &q);
        for (qj, sj) in q.iter_mut().zip(&pair.s) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q
}

/// Minimizes `objective`, which writes the gradient into its second
/// argument and returns the value.
pub(crate) fn minimize<F>(mut objective: F, x0: Vec<f64>, options: LbfgsOptions) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut value = objective(&x, &mut grad);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }

    let mut trace = vec![value];
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(options.history_size);
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) < options.grad_tolerance;

    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];

    while !converged && iterations < options.max_iterations {
        let mut restarted = false;
        let accepted = loop {
            let mut d = if history.is_empty() {
                grad.iter().map(|g| -g).collect()
            } else {
                direction(&grad, &history)
            };
            let mut slope = dot(&grad, &d);
            if slope.is_nan() || slope >= 0.0 {
                history.clear();
                d = grad.iter().map(|g| -g).collect();
                slope = -dot(&grad, &grad);
            }
            let mut step = if history.is_empty() {
                (1.0 / inf_norm(&grad)).min(1.0)
            } else {
                1.0
            };
            let mut found = None;
            for _ in 0..MAX_BACKTRACKS {
                for ((xn, xi), di) in x_new.iter_mut().zip(&x).zip(&d) {
                    *xn = xi + step * di;
                }
                let trial = objective(&x_new, &mut grad_new);
                if trial.is_nan() {
                    return Err(Error::NonFiniteObjective {
                        iteration: iterations + 1,
                    });
                }
                if trial.is_finite() && grad_new.iter().all(|g| g.is_finite()) {
                    let armijo = trial <= value + ARMIJO_C1 * step * slope;
                    // Once the decrease is below the objective's rounding,
                    // fall back to the approximate Wolfe test on the
                    // directional derivative, which bounds the true decrease
                    // for a locally quadratic objective.
                    let approx_wolfe = trial <= value && dot(&grad_new, &d) <= (2.0 * APPROX_WOLFE_DELTA - 1.0) * slope;
                    if armijo || approx_wolfe {
                        found = Some(trial);
                        break;
                    }
                }
                step *= 0.5;
            }

            match found {
                Some(trial) => break Some(trial),
                None if !restarted && !history.is_empty() => {
                    history.clear();
                    restarted = true;
                }
                None => break None,
            }
        };

        let Some(trial) = accepted else { break };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if history.len() == options.history_size {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        value = trial;
        trace.push(value);
        iterations += 1;
        converged = inf_norm(&grad) < options.grad_tolerance;
    }

    Ok(LbfgsOutcome {
        x,
        value,
        iterations,
        converged,
        trace,
    })
}
