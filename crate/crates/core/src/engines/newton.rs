//! Warm-started Newton's method on the substituted projection problem.

use super::{eval_h, ConeModel, EngineResult, EngineStatus};
use crate::linalg::solve_diag_low_rank;
use crate::types::VPoint;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOpts {
    pub max_iters: u32,
    /// Gradient tolerance, relative to `max(1, ||target||)`.
    pub grad_tol: f64,
    /// Looser gradient level at which a stalled iterate is still accepted
    /// as converged (the caller verifies the KKT system regardless).
    pub accept_tol: f64,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        NewtonOpts { max_iters: 100, grad_tol: 1e-13, accept_tol: 1e-10 }
    }
}

/// Largest step fraction keeping the iterate strictly inside the positive
/// orthant: a 0.99 fraction-to-boundary rule.
fn boundary_step(u: &[f64], du: &[f64]) -> f64 {
    let mut alpha: f64 = 1.0;
    for (&ui, &di) in u.iter().zip(du) {
        if di < 0.0 {
            alpha = alpha.min(-0.99 * ui / di);
        }
    }
    alpha
}

/// Projects `target` onto the cone described by `model` by minimizing the
/// substituted objective `h`. Returns a candidate; the caller decides
/// acceptance through the full KKT system.
///
/// Status [`EngineStatus::StationaryNonOptimal`] covers the two failure
/// modes of the non-convex substitution (convergence to the origin, or to a
/// stationary point with `s(v*, x*) <= tbar`); [`EngineStatus::DomainFailure`]
/// means the line search could not keep `v > 0`, `x > 0` while decreasing
/// `h`. All three non-converged statuses signal the interior-point fallback.
pub fn newton_project(
    model: &dyn ConeModel,
    target: &VPoint,
    warm: Option<&VPoint>,
    opts: &NewtonOpts,
) -> EngineResult {
    let n = model.n();
    let has_v = model.has_v();
    let dim = model.dim();
    let scale = target.norm().max(1.0);
    let gtol = opts.grad_tol * scale;
    let ltol = opts.accept_tol * scale;

    // Warm start from the previous solution when valid, otherwise the
    // deterministic interior default max(target, 1).
    let mut u = vec![0.0; dim];
    let warm_ok = warm.map_or(false, |w| {
        w.x.len() == n
            && w.v.is_some() == has_v
            && model.domain_check(w.v.unwrap_or(1.0), &w.x)
    });
    if let (true, Some(w)) = (warm_ok, warm) {
        if has_v {
            u[0] = w.v.unwrap();
        }
        u[usize::from(has_v)..].copy_from_slice(&w.x);
    } else {
        if has_v {
            u[0] = target.v.unwrap_or(1.0).max(1.0);
        }
        for (ui, &xbi) in u[usize::from(has_v)..].iter_mut().zip(&target.x) {
            *ui = xbi.max(1.0);
        }
    }

    let split = |u: &[f64]| -> (f64, Vec<f64>) {
        if has_v {
            (u[0], u[1..].to_vec())
        } else {
            (1.0, u.to_vec())
        }
    };

    let mut grad = vec![0.0; dim];
    let mut gx = vec![0.0; n];
    let mut iters = 0u32;
    let mut stalled = false;

    while iters < opts.max_iters {
        let (v, x) = split(&u);
        let s = model.eval_s(v, &x);
        let a = s - target.t;
        let gv = model.grad_s(v, &x, &mut gx);
        if has_v {
            grad[0] = a * gv + (v - target.v.unwrap());
        }
        for i in 0..n {
            grad[usize::from(has_v) + i] = a * gx[i] + (x[i] - target.x[i]);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= gtol || (stalled && gnorm <= ltol) {
            break;
        }
        if stalled {
            return finish(model, target, &u, iters, EngineStatus::DomainFailure, scale);
        }

        let hess = model.hess_h_factors(v, &x, target.t);
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut du = match solve_diag_low_rank(&hess, &neg_grad, 2) {
            Ok(du) => du,
            Err(_) => neg_grad.clone(),
        };
        // Keep a descent direction; fall back to steepest descent.
        let slope: f64 = du.iter().zip(&grad).map(|(d, g)| d * g).sum();
        let mut slope = slope;
        if !(slope < 0.0) || du.iter().any(|d| !d.is_finite()) {
            du = neg_grad.clone();
            slope = -gnorm * gnorm;
        }

        // Fraction to boundary, then Armijo backtracking.
        let positives = if has_v { &u[..] } else { &u[..] };
        let mut alpha = boundary_step(positives, &du).min(1.0);
        let h0 = eval_h(model, target, v, &x);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(ui, di)| ui + alpha * di).collect();
            let (tv, tx) = split(&trial);
            if model.domain_check(tv, &tx) {
                let ht = eval_h(model, target, tv, &tx);
                if ht <= h0 + 1e-4 * alpha * slope {
                    u = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        iters += 1;
        if !accepted {
            // One more gradient evaluation decides between acceptance at
            // the loose tolerance and a domain failure.
            stalled = true;
        }
    }

    if iters >= opts.max_iters {
        return finish(model, target, &u, iters, EngineStatus::MaxIter, scale);
    }
    finish(model, target, &u, iters, EngineStatus::Converged, scale)
}

fn finish(
    model: &dyn ConeModel,
    target: &VPoint,
    u: &[f64],
    iters: u32,
    status: EngineStatus,
    scale: f64,
) -> EngineResult {
    let has_v = model.has_v();
    let (v, x) = if has_v { (u[0], u[1..].to_vec()) } else { (1.0, u.to_vec()) };
    let s = model.eval_s(v, &x);
    let point = VPoint { t: s, v: has_v.then_some(v), x };

    let mut status = status;
    if status == EngineStatus::Converged {
        let unorm = point.norm();
        // Origin convergence and stationary-but-infeasible limits are the
        // two documented traps of the substitution; reject both.
        if unorm <= 1e-12 * scale || !(s - target.t > 0.0) || !s.is_finite() {
            status = EngineStatus::StationaryNonOptimal;
        }
    }
    let multipliers = point.sub(target);
    EngineResult { point, multipliers, status, iters }
}
