//! Primal-dual interior-point fallback on the constrained epigraph
//! formulation:
//!
//! ```text
//! minimize   r
//! subject to f0(t,v,x,r) = 1/2 ||(t,v,x) - target||^2 - r <= 0
//!            f1(t,v,x,r) = s(v,x) - t                     <= 0
//!            f2(t,v,x,r) = -v                             <= 0   (cones with v)
//! ```
//!
//! Mehrotra-style: adaptive centering from the affine-scaling direction, a
//! higher-order correction, a non-monotone line search on the residual-norm
//! merit, and iteratively refined diagonal-plus-low-rank KKT solves. The
//! multiplier block is eliminated first, then the epigraph variable `r`, so
//! each iteration costs O(n).
//!
//! The target is scaled to unit max-magnitude before solving and the result
//! unscaled afterwards, using positive homogeneity of the cone projection.

use super::{ConeModel, EngineResult, EngineStatus};
use crate::linalg::{solve_diag_low_rank, DiagLowRank};
use crate::types::VPoint;

#[derive(Debug, Clone, Copy)]
pub struct IpmOpts {
    pub max_iters: u32,
    /// Convergence level (scaled units) for the dual residual and the
    /// complementarity gap.
    pub tol: f64,
}

impl Default for IpmOpts {
    fn default() -> Self {
        IpmOpts { max_iters: 200, tol: 1e-12 }
    }
}

struct Workspace {
    has_v: bool,
    n: usize,
    nc: usize,
    /// u = (t, [v,] x, r)
    dim: usize,
}

impl Workspace {
    fn vx<'a>(&self, u: &'a [f64]) -> (f64, &'a [f64]) {
        if self.has_v {
            (u[1], &u[2..2 + self.n])
        } else {
            (1.0, &u[1..1 + self.n])
        }
    }

    fn fvals(&self, model: &dyn ConeModel, u: &[f64], target: &VPoint) -> Vec<f64> {
        let (v, x) = self.vx(u);
        let mut q = 0.5 * (u[0] - target.t) * (u[0] - target.t);
        if let Some(vb) = target.v {
            q += 0.5 * (v - vb) * (v - vb);
        }
        for (xi, xb) in x.iter().zip(&target.x) {
            q += 0.5 * (xi - xb) * (xi - xb);
        }
        let mut f = vec![q - u[self.dim - 1], model.eval_s(v, x) - u[0]];
        if self.has_v {
            f.push(-v);
        }
        f
    }

    /// Constraint gradients as rows (length dim).
    fn fgrads(&self, model: &dyn ConeModel, u: &[f64], target: &VPoint) -> Vec<Vec<f64>> {
        let (v, x) = self.vx(u);
        let off = 1 + usize::from(self.has_v);

        let mut g0 = vec![0.0; self.dim];
        g0[0] = u[0] - target.t;
        if self.has_v {
            g0[1] = v - target.v.unwrap();
        }
        for i in 0..self.n {
            g0[off + i] = x[i] - target.x[i];
        }
        g0[self.dim - 1] = -1.0;

        let mut gx = vec![0.0; self.n];
        let gv = model.grad_s(v, x, &mut gx);
        let mut g1 = vec![0.0; self.dim];
        g1[0] = -1.0;
        if self.has_v {
            g1[1] = gv;
        }
        g1[off..off + self.n].copy_from_slice(&gx);

        let mut grads = vec![g0, g1];
        if self.has_v {
            let mut g2 = vec![0.0; self.dim];
            g2[1] = -1.0;
            grads.push(g2);
        }
        grads
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the reduced KKT system `(H + B^T D^{-1} B) du = b1 + B^T D^{-1} b2`
/// by eliminating the epigraph variable and handing the remaining block to
/// the diagonal-plus-low-rank solver. Returns `(du, dz)`.
#[allow(clippy::too_many_arguments)]
fn kkt_solve(
    ws: &Workspace,
    model: &dyn ConeModel,
    u: &[f64],
    z: &[f64],
    dcap: &[f64],
    grads: &[Vec<f64>],
    b1: &[f64],
    b2: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let dim = ws.dim;
    let dimp = dim - 1;
    let (v, x) = ws.vx(u);

    // rhs = b1 + sum_i grad_i * b2_i / D_i
    let mut rhs = b1.to_vec();
    for i in 0..ws.nc {
        let w = b2[i] / dcap[i];
        for (r, g) in rhs.iter_mut().zip(&grads[i]) {
            *r += w * g;
        }
    }

    // Schur complement over (t, v, x): eliminating r cancels the f0 rank-one
    // term, leaving z0 I + z1 hess(s) + sum_{i>=1} grad_i' grad_i'^T / D_i.
    let hs = model.hess_s_factors(v, x);
    let mut d = vec![z[0]; dimp];
    for (slot, hval) in d[1..].iter_mut().zip(&hs.d) {
        *slot += z[1] * hval;
    }
    let mut cols = Vec::new();
    let mut signs = Vec::new();
    let sz1 = z[1].sqrt();
    for (col, &sgn) in hs.cols.iter().zip(&hs.signs) {
        let mut e = vec![0.0; dimp];
        for (slot, c) in e[1..].iter_mut().zip(col) {
            *slot = sz1 * c;
        }
        cols.push(e);
        signs.push(sgn);
    }
    for i in 1..ws.nc {
        let scale = 1.0 / dcap[i].sqrt();
        cols.push(grads[i][..dimp].iter().map(|g| scale * g).collect());
        signs.push(1.0);
    }
    let m = DiagLowRank::new(d, cols, signs).ok()?;

    let rhs_schur: Vec<f64> = (0..dimp).map(|j| rhs[j] + grads[0][j] * rhs[dim - 1]).collect();
    let du_p = solve_diag_low_rank(&m, &rhs_schur, 2).ok()?;

    let dr = dcap[0] * rhs[dim - 1] + dot(&grads[0][..dimp], &du_p);
    let mut du = du_p;
    du.push(dr);

    let mut dz = vec![0.0; ws.nc];
    for i in 0..ws.nc {
        dz[i] = (dot(&grads[i], &du) - b2[i]) / dcap[i];
    }
    Some((du, dz))
}

/// Projects `target` onto the cone of `model` with the interior-point
/// method. Never panics on bad geometry; hands back its best iterate with
/// [`EngineStatus::MaxIter`] when it cannot reach tolerance.
pub fn ipm_project(model: &dyn ConeModel, target: &VPoint, opts: &IpmOpts) -> EngineResult {
    let n = model.n();
    let has_v = model.has_v();
    let ws = Workspace { has_v, n, nc: 2 + usize::from(has_v), dim: 2 + usize::from(has_v) + n };

    // Scale so every entry has magnitude at most one; unscale at the end by
    // positive homogeneity.
    let scale = target.norm_inf().max(1.0);
    let starget = target.scale(1.0 / scale);

    let off = 1 + usize::from(has_v);
    let mut u = vec![0.0; ws.dim];
    if has_v {
        u[1] = 1.0;
    }
    for i in 0..n {
        u[off + i] = 1.0;
    }
    {
        let (v, x) = ws.vx(&u);
        u[0] = model.eval_s(v, x) + 1.0;
    }
    let f = ws.fvals(model, &u, &starget);
    u[ws.dim - 1] = f[0] + u[ws.dim - 1] + 1.0;

    let mut z = vec![1.0; ws.nc];

    let merit = |rdual: &[f64], gap: f64| -> f64 {
        rdual.iter().map(|r| r * r).sum::<f64>().sqrt() + gap
    };

    let mut hist: Vec<f64> = Vec::new();
    let mut best_u = u.clone();
    let mut best_phi = f64::INFINITY;
    let mut iters = 0;
    let mut converged = false;

    while iters < opts.max_iters {
        iters += 1;
        let f = ws.fvals(model, &u, &starget);
        let grads = ws.fgrads(model, &u, &starget);
        let lam: Vec<f64> = f.iter().map(|fi| -fi).collect();

        let mut rdual = vec![0.0; ws.dim];
        rdual[ws.dim - 1] = 1.0;
        for i in 0..ws.nc {
            for (r, g) in rdual.iter_mut().zip(&grads[i]) {
                *r += z[i] * g;
            }
        }
        let gap: f64 = z.iter().zip(&lam).map(|(zi, li)| zi * li).sum();
        let rdnorm = rdual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let phi = merit(&rdual, gap);
        if std::env::var("IPM_DEBUG").is_ok() {
            eprintln!(
                "iter {iters}: rd {rdnorm:.3e} gap {gap:.3e} z {z:?} lam {lam:?}"
            );
        }
        if phi < best_phi {
            best_phi = phi;
            best_u = u.clone();
        }
        if rdnorm <= opts.tol && gap <= opts.tol {
            converged = true;
            break;
        }
        hist.push(phi);
        if hist.len() > 5 {
            hist.remove(0);
        }

        let dcap: Vec<f64> = lam.iter().zip(&z).map(|(l, zi)| l / zi).collect();
        let b1: Vec<f64> = rdual.iter().map(|r| -r).collect();

        // Affine scaling direction.
        let b2_aff = lam.clone();
        let Some((du_aff, dz_aff)) =
            kkt_solve(&ws, model, &u, &z, &dcap, &grads, &b1, &b2_aff)
        else {
            break;
        };
        let dlam_aff: Vec<f64> = (0..ws.nc).map(|i| -dot(&grads[i], &du_aff)).collect();
        let mut alpha_aff: f64 = 1.0;
        for i in 0..ws.nc {
            if dz_aff[i] < 0.0 {
                alpha_aff = alpha_aff.min(-z[i] / dz_aff[i]);
            }
            if dlam_aff[i] < 0.0 {
                alpha_aff = alpha_aff.min(-lam[i] / dlam_aff[i]);
            }
        }
        let gap_aff: f64 = (0..ws.nc)
            .map(|i| (z[i] + alpha_aff * dz_aff[i]) * (lam[i] + alpha_aff * dlam_aff[i]))
            .sum::<f64>()
            .max(0.0);
        let sigma = (gap_aff / gap).powi(3).clamp(1e-8, 0.9);
        let mu = gap / ws.nc as f64;

        // Corrector with the Mehrotra second-order term.
        let b2: Vec<f64> = (0..ws.nc)
            .map(|i| lam[i] - sigma * mu / z[i] + dz_aff[i] * dlam_aff[i] / z[i])
            .collect();
        let Some((du, dz)) = kkt_solve(&ws, model, &u, &z, &dcap, &grads, &b1, &b2) else {
            break;
        };

        let mut alpha_max: f64 = 1.0;
        for i in 0..ws.nc {
            if dz[i] < 0.0 {
                alpha_max = alpha_max.min(-0.99 * z[i] / dz[i]);
            }
        }

        // Feasibility (strict slacks, model domain), then non-monotone
        // merit acceptance.
        let mut alpha = alpha_max;
        let mut chosen: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        let phi_ref = hist.iter().cloned().fold(f64::MIN, f64::max);
        for _ in 0..40 {
            let ut: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
            let zt: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + alpha * b).collect();
            let (vt, xt) = ws.vx(&ut);
            let feasible = zt.iter().all(|&v| v > 0.0)
                && model.domain_check(vt, xt)
                && ws.fvals(model, &ut, &starget).iter().all(|&fi| fi < 0.0);
            if feasible {
                let ft = ws.fvals(model, &ut, &starget);
                let gradst = ws.fgrads(model, &ut, &starget);
                let mut rdt = vec![0.0; ws.dim];
                rdt[ws.dim - 1] = 1.0;
                for i in 0..ws.nc {
                    for (r, g) in rdt.iter_mut().zip(&gradst[i]) {
                        *r += zt[i] * g;
                    }
                }
                let gapt: f64 = zt.iter().zip(&ft).map(|(zi, fi)| -zi * fi).sum();
                let phit = merit(&rdt, gapt);
                if phit <= phi_ref * (1.0 - 1e-4 * alpha) || chosen.is_none() {
                    chosen = Some((ut, zt, phit));
                    if phit <= phi_ref * (1.0 - 1e-4 * alpha) {
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if std::env::var("IPM_DEBUG").is_ok() {
            eprintln!(
                "   alpha_max {alpha_max:.3e} alpha {alpha:.3e} sigma {sigma:.3e} chosen {}",
                chosen.is_some()
            );
        }
        match chosen {
            Some((ut, zt, _)) => {
                u = ut;
                z = zt;
            }
            None => break,
        }
    }

    if !converged {
        u = best_u;
    }
    let (v, x) = ws.vx(&u);
    let point = VPoint {
        t: u[0] * scale,
        v: has_v.then_some(v * scale),
        x: x.iter().map(|&xi| xi * scale).collect(),
    };
    let multipliers = point.sub(target);
    EngineResult {
        point,
        multipliers,
        status: if converged { EngineStatus::Converged } else { EngineStatus::MaxIter },
        iters,
    }
}
