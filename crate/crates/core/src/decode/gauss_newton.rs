//! Damped Gauss–Newton (Levenberg) for small dense least-squares problems.

use crate::linalg::cholesky_solve;

/// A residual map `ℝ^p → ℝ^n` with its Jacobian and an optional constraint.
pub(crate) trait LeastSquares {
    fn n_residuals(&self) -> usize;
    fn n_params(&self) -> usize;
    fn residual(&self, v: &[f64], out: &mut [f64]);
    /// Column-major `n × p` Jacobian.
    fn jacobian(&self, v: &[f64], jac: &mut [f64]);
    /// Maps `v` back onto the feasible set; false when that is impossible.
    fn project(&self, _v: &mut [f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings {
    pub lambda0: f64,
    pub shrink: f64,
    pub grow: f64,
    pub max_iter: usize,
    /// Stop once `‖r‖₂` falls to this value.
    pub target: f64,
    /// An accepted step whose relative cost decrease is below this counts as a stall.
    pub stall_rtol: f64,
    /// Stop after this many consecutive stalls.
    pub max_stalls: usize,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            lambda0: 1e-3,
            shrink: 0.5,
            grow: 4.0,
            max_iter: 200,
            target: 0.0,
            stall_rtol: 1e-10,
            max_stalls: 3,
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Minimizes `‖r(v)‖²` from the given start. `v` is updated in place and the
/// final residual norm is returned; `None` if the start is infeasible.
pub(crate) fn minimize<P: LeastSquares>(problem: &P, v: &mut [f64], settings: LmSettings) -> Option<f64> {
    let n = problem.n_residuals();
    let p = problem.n_params();
    if !problem.project(v) {
        return None;
    }
    let mut res = vec![0.0; n];
    let mut trial_res = vec![0.0; n];
    let mut jac = vec![0.0; n * p];
    let mut gram = vec![0.0; p * p];
    let mut step = vec![0.0; p];
    let mut trial = vec![0.0; p];
    let mut grad = vec![0.0; p];
    let mut damped = vec![0.0; p * p];

    problem.residual(v, &mut res);
    let mut cost = norm2(&res);
    let target2 = settings.target * settings.target;
    let mut lambda = settings.lambda0;
    let mut stalls = 0;

    for _ in 0..settings.max_iter {
        if cost <= target2 {
            break;
        }
        problem.jacobian(v, &mut jac);
        // normal equations J^T J and J^T r
        for a in 0..p {
            let ca = &jac[a * n..(a + 1) * n];
            grad[a] = ca.iter().zip(&res).map(|(x, y)| x * y).sum();
            for b in 0..=a {
                let cb = &jac[b * n..(b + 1) * n];
                let g: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                gram[a * p + b] = g;
                gram[b * p + a] = g;
            }
        }
        loop {
            damped.copy_from_slice(&gram);
            for d in 0..p {
                damped[d * p + d] += lambda;
            }
            step.iter_mut().zip(&grad).for_each(|(s, g)| *s = -g);
            let solved = cholesky_solve(&mut damped, &mut step, p);
            let mut accepted = false;
            if solved {
                trial.iter_mut().zip(v.iter()).zip(&step).for_each(|((t, x), s)| *t = x + s);
                if problem.project(&mut trial) {
                    problem.residual(&trial, &mut trial_res);
                    let trial_cost = norm2(&trial_res);
                    if trial_cost < cost {
                        stalls = if cost - trial_cost <= settings.stall_rtol * cost { stalls + 1 } else { 0 };
                        v.copy_from_slice(&trial);
                        std::mem::swap(&mut res, &mut trial_res);
                        cost = trial_cost;
                        lambda *= settings.shrink;
                        accepted = true;
                    }
                }
            }
            if accepted {
                break;
            }
            lambda *= settings.grow;
            if lambda > 1e16 {
                return Some(cost.sqrt());
            }
        }
        if stalls >= settings.max_stalls {
            break;
        }
    }
    Some(cost.sqrt())
}
