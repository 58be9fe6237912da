//! Membership residuals for the six spectral vector cones and their duals.
//!
//! Every residual is a raw violation measure: zero exactly on the cone,
//! positive outside, built from the explicit closure characterizations
//! (primal cones are the inequality branch unioned with an explicit boundary
//! set; duals come from the conjugate-function inequalities, with a limit
//! branch where the closure requires one). Branch minima keep the measures
//! finite and continuous wherever the sets are approachable.

use crate::types::{ConeKind, ConeSpec, VPoint};

/// Floor used when evaluating logarithms at clamped coordinates; violations
/// of the sign constraints are charged separately.
const TINY: f64 = 1e-300;

fn neg_part(x: f64) -> f64 {
    (-x).max(0.0)
}

fn pos_part(x: f64) -> f64 {
    x.max(0.0)
}

fn max_neg(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, &x| m.max(neg_part(x)))
}

/// Sum of the `k` largest entries of `x`.
pub fn sum_k_largest(x: &[f64], k: usize) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted[..k].iter().sum()
}

fn geomean_clamped(x: &[f64]) -> f64 {
    if x.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    (x.iter().map(|&v| v.ln()).sum::<f64>() / x.len() as f64).exp()
}

/// Violation of `p in K` for a spectral vector cone.
pub fn primal_residual(spec: &ConeSpec, p: &VPoint) -> f64 {
    let x = &p.x;
    let t = p.t;
    match spec.kind {
        ConeKind::Log => {
            let v = p.v.unwrap();
            let branch_a = if v > 0.0 {
                let s = -v * x.iter().map(|&xi| (xi.max(TINY) / v).ln()).sum::<f64>();
                max_neg(x).max(pos_part(s - t))
            } else {
                f64::INFINITY
            };
            let branch_b = pos_part(-t).max(v.abs()).max(max_neg(x));
            branch_a.min(branch_b)
        }
        ConeKind::Inv => {
            let v = p.v.unwrap();
            let branch_a = if v > 0.0 {
                let s = v * v * x.iter().map(|&xi| 1.0 / xi.max(TINY)).sum::<f64>();
                max_neg(x).max(pos_part(s - t))
            } else {
                f64::INFINITY
            };
            let branch_b = pos_part(-t).max(v.abs()).max(max_neg(x));
            branch_a.min(branch_b)
        }
        ConeKind::VEnt => {
            let v = p.v.unwrap();
            let branch_a = if v > 0.0 {
                let s: f64 = x
                    .iter()
                    .map(|&xi| {
                        let xc = xi.max(0.0);
                        if xc == 0.0 {
                            0.0
                        } else {
                            xc * (xc / v).ln()
                        }
                    })
                    .sum();
                max_neg(x).max(pos_part(s - t))
            } else {
                f64::INFINITY
            };
            let xmax = x.iter().fold(0.0f64, |m, &xi| m.max(xi.abs()));
            let branch_b = pos_part(-t).max(neg_part(v)).max(xmax);
            branch_a.min(branch_b)
        }
        ConeKind::Geomean => max_neg(x).max(pos_part(-geomean_clamped(x) - t)),
        ConeKind::L1 => pos_part(x.iter().map(|xi| xi.abs()).sum::<f64>() - t),
        ConeKind::VSum => pos_part(sum_k_largest(x, spec.k.unwrap()) - t),
        _ => f64::INFINITY,
    }
}

/// Violation of `p in K^*` for a spectral vector cone.
pub fn dual_residual(spec: &ConeSpec, p: &VPoint) -> f64 {
    let xi = &p.x;
    let tau = p.t;
    match spec.kind {
        ConeKind::Log => {
            let nu = p.v.unwrap();
            let branch_a = if tau > 0.0 {
                let n = spec.n as f64;
                let rhs =
                    tau * (-n - xi.iter().map(|&e| (e.max(TINY) / tau).ln()).sum::<f64>());
                max_neg(xi).max(pos_part(rhs - nu))
            } else {
                f64::INFINITY
            };
            let branch_b = tau.abs().max(neg_part(nu)).max(max_neg(xi));
            branch_a.min(branch_b)
        }
        ConeKind::Inv => {
            // v >= -2 sqrt(tau) sum sqrt(x_i); continuous down to tau = 0,
            // where it degenerates to the sign constraints.
            let nu = p.v.unwrap();
            let rhs = -2.0 * pos_part(tau).sqrt()
                * xi.iter().map(|&e| pos_part(e).sqrt()).sum::<f64>();
            neg_part(tau).max(max_neg(xi)).max(pos_part(rhs - nu))
        }
        ConeKind::VEnt => {
            let nu = p.v.unwrap();
            let branch_a = if tau > 0.0 {
                let rhs: f64 = tau * xi.iter().map(|&e| (-e / tau - 1.0).exp()).sum::<f64>();
                pos_part(rhs - nu)
            } else {
                f64::INFINITY
            };
            let branch_b = tau.abs().max(neg_part(nu)).max(max_neg(xi));
            branch_a.min(branch_b)
        }
        ConeKind::Geomean => {
            let n = spec.n as f64;
            neg_part(tau)
                .max(max_neg(xi))
                .max(pos_part(tau - n * geomean_clamped(&xi.iter().map(|&e| pos_part(e)).collect::<Vec<_>>())))
        }
        ConeKind::L1 => {
            let xmax = xi.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
            pos_part(xmax - tau)
        }
        ConeKind::VSum => {
            let k = spec.k.unwrap() as f64;
            let mut viol = neg_part(tau);
            for &e in xi {
                viol = viol.max(pos_part(e)).max(pos_part(-tau - e));
            }
            viol.max((xi.iter().sum::<f64>() + tau * k).abs())
        }
        _ => f64::INFINITY,
    }
}

/// `p` within `tol` of the cone.
pub fn member(spec: &ConeSpec, p: &VPoint, tol: f64) -> bool {
    primal_residual(spec, p) <= tol
}

/// `p` within `tol` of the dual cone.
pub fn dual_member(spec: &ConeSpec, p: &VPoint, tol: f64) -> bool {
    dual_residual(spec, p) <= tol
}
