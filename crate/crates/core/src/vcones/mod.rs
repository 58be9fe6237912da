//! Projections onto the six spectral vector cones, dual-cone membership,
//! Moreau dual projections, and KKT verification.
//!
//! The l1-norm and sum-of-largest cones have direct O(n log n) algorithms.
//! The four systematic cones go through a decision ladder: membership, the
//! negative-dual (origin) case, an explicit boundary-set candidate checked
//! against the optimality conditions, then warm-started Newton, then the
//! interior-point fallback. Every returned point is verified against the
//! full KKT system of the projection problem
//!
//! ```text
//! (t, v, x) in K,   (lambda_t, lambda_v, lambda_x) in K*,
//! target = point - multiplier,   t lambda_t + v lambda_v + x^T lambda_x = 0.
//! ```

mod l1;
mod membership;
mod sum_largest;

pub use l1::project_l1;
pub use membership::{dual_member, dual_residual, member, primal_residual};
pub use membership::sum_k_largest as primal_sum_k_largest;
pub use sum_largest::{project_sum_largest, project_sum_largest_core};

use crate::engines::{ipm_project, model_for, newton_project, EngineStatus, IpmOpts, NewtonOpts};
use crate::types::{ConeKind, ConeSpec, Error, ProjStats, Result, VPoint, KKT_TOL};
use std::time::Instant;

/// The four residuals of the projection optimality system.
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    /// Violation of `point in K`.
    pub primal_member: f64,
    /// Violation of `multiplier in K*`.
    pub dual_member: f64,
    /// `|| target - (point - multiplier) ||_2`.
    pub decomposition: f64,
    /// `| <point, multiplier> |`.
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.primal_member
            .max(self.dual_member)
            .max(self.decomposition)
            .max(self.complementarity)
    }

    pub fn optimal(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Evaluates the four optimality-condition residuals of a candidate
/// projection triple.
pub fn kkt_report(spec: &ConeSpec, target: &VPoint, point: &VPoint, mult: &VPoint) -> KktReport {
    let diff = point.sub(mult);
    let decomposition = target.sub(&diff).norm();
    KktReport {
        primal_member: primal_residual(spec, point),
        dual_member: dual_residual(spec, mult),
        decomposition,
        complementarity: point.dot(mult).abs(),
    }
}

/// Membership shortcut level: identities and clip candidates are accepted
/// only when their violation is an order below the KKT tolerance.
const MEMBER_TOL: f64 = 1e-10;
/// Acceptance level for engine candidates, leaving headroom under the
/// contract tolerance.
const ACCEPT_TOL: f64 = 5e-10;

/// Projects a target onto a spectral vector cone.
///
/// Returns the projection, the multipliers `point - target`, and per-call
/// diagnostics. `warm` seeds Newton with the solution of a previous, nearby
/// projection (the operator-splitting solver projects the same cone block
/// every iteration).
pub fn project(
    spec: &ConeSpec,
    target: &VPoint,
    warm: Option<&VPoint>,
) -> Result<(VPoint, VPoint, ProjStats)> {
    spec.validate()?;
    target.check_shape(spec)?;
    let start = Instant::now();
    let mut stats = ProjStats::default();

    let (point, mult) = match spec.kind {
        ConeKind::L1 => Ok(project_l1(target.t, &target.x)),
        ConeKind::VSum => project_sum_largest(target.t, &target.x, spec.k.unwrap()),
        ConeKind::Log | ConeKind::Inv | ConeKind::VEnt | ConeKind::Geomean => {
            project_systematic(spec, target, warm, &mut stats)
        }
        other => Err(Error::InvalidArgument(format!(
            "{} is not a spectral vector cone",
            other.name()
        ))),
    }?;

    stats.vproj_seconds = start.elapsed().as_secs_f64();
    stats.kkt_residual = kkt_report(spec, target, &point, &mult).max();
    Ok((point, mult, stats))
}

/// Projects onto the dual cone through the Moreau decomposition:
/// `Pi_{K*}(p) = p + Pi_K(-p)`, which is exactly the multiplier returned by
/// the primal projection of `-p`.
pub fn project_dual(spec: &ConeSpec, target: &VPoint) -> Result<(VPoint, ProjStats)> {
    let (_, mult, stats) = project(spec, &target.neg(), None)?;
    Ok((mult, stats))
}

/// Decision ladder for the systematic cones.
fn project_systematic(
    spec: &ConeSpec,
    target: &VPoint,
    warm: Option<&VPoint>,
    stats: &mut ProjStats,
) -> Result<(VPoint, VPoint)> {
    // (1) members are fixed points
    if primal_residual(spec, target) <= MEMBER_TOL {
        return Ok((target.clone(), target.zeros_like()));
    }

    // (1b) clip onto the orthant product containing the cone; if the clip
    // lands inside the cone it is the projection (only the entropy and
    // geometric-mean cones admit such points with inactive epigraph
    // constraint)
    if matches!(spec.kind, ConeKind::VEnt | ConeKind::Geomean) {
        let clip = VPoint {
            t: target.t,
            v: target.v.map(|v| v.max(0.0)),
            x: target.x.iter().map(|&xi| xi.max(0.0)).collect(),
        };
        if primal_residual(spec, &clip) <= MEMBER_TOL {
            let mult = clip.sub(target);
            if kkt_report(spec, target, &clip, &mult).optimal(ACCEPT_TOL) {
                return Ok((clip, mult));
            }
        }
    }

    // (2) the negative dual cone projects onto the origin
    {
        let origin = target.zeros_like();
        let mult = target.neg();
        if kkt_report(spec, target, &origin, &mult).optimal(ACCEPT_TOL) {
            return Ok((origin, mult));
        }
    }

    // (3) boundary-set candidate: clip onto the explicit set that closes
    // the cone and accept if the optimality conditions hold
    {
        let candidate = match spec.kind {
            ConeKind::Log | ConeKind::Inv => VPoint {
                t: target.t.max(0.0),
                v: Some(0.0),
                x: target.x.iter().map(|&xi| xi.max(0.0)).collect(),
            },
            ConeKind::VEnt => VPoint {
                t: target.t.max(0.0),
                v: target.v.map(|v| v.max(0.0)),
                x: vec![0.0; spec.n],
            },
            ConeKind::Geomean => VPoint {
                t: target.t.max(0.0),
                v: None,
                x: target.x.iter().map(|&xi| xi.max(0.0)).collect(),
            },
            _ => unreachable!(),
        };
        let mult = candidate.sub(target);
        if kkt_report(spec, target, &candidate, &mult).optimal(ACCEPT_TOL) {
            return Ok((candidate, mult));
        }
    }

    let model = model_for(spec).expect("systematic cone has a model");
    let mut best: Option<(VPoint, VPoint, f64)> = None;
    let consider = |point: VPoint, mult: VPoint, best: &mut Option<(VPoint, VPoint, f64)>| {
        let r = kkt_report(spec, target, &point, &mult).max();
        if best.as_ref().is_none_or(|(_, _, b)| r < *b) {
            *best = Some((point, mult, r));
        }
        r
    };

    // (4) warm-started Newton on the substituted problem
    let newton = newton_project(model.as_ref(), target, warm, &NewtonOpts::default());
    stats.newton_iters = newton.iters;
    if newton.status == EngineStatus::Converged {
        let r = consider(newton.point.clone(), newton.multipliers.clone(), &mut best);
        if r <= ACCEPT_TOL {
            let (p, m, _) = best.unwrap();
            return Ok((p, m));
        }
        for (p, m) in snapped_candidates(spec, target, &newton.point) {
            if consider(p, m, &mut best) <= ACCEPT_TOL {
                let (p, m, _) = best.unwrap();
                return Ok((p, m));
            }
        }
    }

    // (5) interior-point fallback
    stats.ipm_used = true;
    let ipm = ipm_project(model.as_ref(), target, &IpmOpts::default());
    let r = consider(ipm.point.clone(), ipm.multipliers.clone(), &mut best);
    if r <= ACCEPT_TOL {
        let (p, m, _) = best.unwrap();
        return Ok((p, m));
    }
    for (p, m) in snapped_candidates(spec, target, &ipm.point) {
        consider(p, m, &mut best);
    }

    let (point, mult, residual) = best.unwrap();
    if residual <= KKT_TOL {
        Ok((point, mult))
    } else {
        Err(Error::ProjectionFailure {
            point: Box::new(point),
            multipliers: Box::new(mult),
            residual,
        })
    }
}

/// Entropy and geometric-mean projections may sit on faces where single
/// coordinates vanish; engines approach those faces from the interior and
/// stall with coordinates around the underflow scale. Snapping them to zero
/// and lifting `t` back onto the epigraph gives an exact face candidate.
fn snapped_candidates(spec: &ConeSpec, target: &VPoint, raw: &VPoint) -> Vec<(VPoint, VPoint)> {
    if !matches!(spec.kind, ConeKind::VEnt | ConeKind::Geomean) {
        return Vec::new();
    }
    let scale = target.norm_inf().max(1.0);
    let mut out = Vec::new();
    for thresh in [1e-11 * scale, 1e-7 * scale] {
        if !raw.x.iter().any(|&xi| xi.abs() < thresh) {
            continue;
        }
        let x: Vec<f64> = raw.x.iter().map(|&xi| if xi.abs() < thresh { 0.0 } else { xi }).collect();
        let s = match spec.kind {
            ConeKind::VEnt => {
                let v = raw.v.unwrap();
                if v <= 0.0 {
                    continue;
                }
                x.iter().map(|&xi| if xi == 0.0 { 0.0 } else { xi * (xi / v).ln() }).sum()
            }
            ConeKind::Geomean => {
                if x.iter().any(|&xi| xi <= 0.0) {
                    0.0
                } else {
                    -(x.iter().map(|&xi| xi.ln()).sum::<f64>() / spec.n as f64).exp()
                }
            }
            _ => unreachable!(),
        };
        let point = VPoint { t: target.t.max(s), v: raw.v, x };
        let mult = point.sub(target);
        out.push((point, mult));
    }
    out
}
