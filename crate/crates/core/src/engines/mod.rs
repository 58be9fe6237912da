//! The two generic projection subsolvers behind the systematic spectral
//! vector cones (logarithmic, inverse, entropy, geometric-mean).
//!
//! Projecting a target `(tbar, vbar, xbar)` that is neither in the cone nor
//! in its negative dual reduces to minimizing
//!
//! ```text
//! h(v, x) = 1/2 (s(v,x) - tbar)^2 + 1/2 (v - vbar)^2 + 1/2 ||x - xbar||^2
//! ```
//!
//! where `s` is the perspective function defining the cone. [`newton_project`]
//! attacks this unconstrained problem directly; each Newton system is a
//! diagonal-plus-low-rank solve, so an iteration costs O(n). The problem is
//! non-convex, and Newton occasionally converges to the origin or to a
//! stationary point below the epigraph; both outcomes are detected and
//! reported so the caller can fall back to [`ipm_project`], a primal-dual
//! interior-point method on the constrained epigraph formulation with
//! Mehrotra centering, a higher-order correction, a non-monotone line search
//! and iteratively refined low-rank KKT solves.

mod ipm;
mod models;
mod newton;

pub use ipm::{ipm_project, IpmOpts};
pub use models::{model_for, ConeModel, GeomeanModel, InvModel, LogModel, VEntModel};
pub use newton::{newton_project, NewtonOpts};

use crate::types::VPoint;

/// Outcome of one engine invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineStatus {
    Converged,
    MaxIter,
    /// The line search could not keep the iterate inside the domain.
    DomainFailure,
    /// Newton converged to a stationary point that does not solve the
    /// projection problem (origin convergence or `s(v*, x*) <= tbar`).
    StationaryNonOptimal,
}

/// Candidate solution returned by an engine. `point` is `(s(v,x), v, x)` for
/// Newton and the epigraph iterate for the IPM; `multipliers` is always
/// `point - target`, so the decomposition identity holds exactly.
#[derive(Debug, Clone)]
pub struct EngineResult {
    pub point: VPoint,
    pub multipliers: VPoint,
    pub status: EngineStatus,
    pub iters: u32,
}

/// Objective of the substituted unconstrained problem.
pub(crate) fn eval_h(model: &dyn ConeModel, target: &VPoint, v: f64, x: &[f64]) -> f64 {
    let a = model.eval_s(v, x) - target.t;
    let mut h = 0.5 * a * a;
    if let Some(vbar) = target.v {
        h += 0.5 * (v - vbar) * (v - vbar);
    }
    for (xi, xbi) in x.iter().zip(&target.x) {
        h += 0.5 * (xi - xbi) * (xi - xbi);
    }
    h
}

#[cfg(test)]
mod tests;
