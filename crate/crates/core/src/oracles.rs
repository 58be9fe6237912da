//! Brute-force reference projections, independent of the production
//! algorithms, used by the verification suite and the test oracles.
//!
//! The cone projection is recast as minimizing, over the free coordinates
//! `(v, x)` (or `x` alone for the homogeneous cones),
//!
//! ```text
//! Phi(v, x) = 1/2 (max(tbar, s(v,x)) - tbar)^2
//!           + 1/2 (v - vbar)^2 + 1/2 ||x - xbar||^2
//! ```
//!
//! with `s` the extended-value perspective function over the closed domain.
//! `Phi` is convex, so a coarse grid followed by cyclic coordinate descent
//! (golden-section line minimizations) with perturbed restarts converges to
//! the projection. This is deliberately slow and simple.

use crate::linalg::sym_eig;
use crate::problems::rng::SplitMix64;
use crate::types::{ConeKind, ConeSpec, VPoint};
use nalgebra::DMatrix;

/// Extended-value perspective over the closed domain, with the boundary
/// limits that close each cone.
fn s_extended(kind: ConeKind, k: Option<usize>, v: f64, x: &[f64]) -> f64 {
    match kind {
        ConeKind::Log => {
            if v < 0.0 || x.iter().any(|&xi| xi < 0.0) {
                return f64::INFINITY;
            }
            if v == 0.0 {
                return 0.0;
            }
            if x.iter().any(|&xi| xi == 0.0) {
                return f64::INFINITY;
            }
            -v * x.iter().map(|&xi| (xi / v).ln()).sum::<f64>()
        }
        ConeKind::Inv => {
            if v < 0.0 || x.iter().any(|&xi| xi < 0.0) {
                return f64::INFINITY;
            }
            if v == 0.0 {
                return 0.0;
            }
            if x.iter().any(|&xi| xi == 0.0) {
                return f64::INFINITY;
            }
            v * v * x.iter().map(|&xi| 1.0 / xi).sum::<f64>()
        }
        ConeKind::VEnt => {
            if v < 0.0 || x.iter().any(|&xi| xi < 0.0) {
                return f64::INFINITY;
            }
            if v == 0.0 {
                return if x.iter().all(|&xi| xi == 0.0) { 0.0 } else { f64::INFINITY };
            }
            x.iter().map(|&xi| if xi == 0.0 { 0.0 } else { xi * (xi / v).ln() }).sum()
        }
        ConeKind::Geomean => {
            if x.iter().any(|&xi| xi < 0.0) {
                return f64::INFINITY;
            }
            if x.iter().any(|&xi| xi == 0.0) {
                return 0.0;
            }
            -(x.iter().map(|&xi| xi.ln()).sum::<f64>() / x.len() as f64).exp()
        }
        ConeKind::L1 => x.iter().map(|xi| xi.abs()).sum(),
        ConeKind::VSum => crate::vcones::primal_sum_k_largest(x, k.unwrap()),
        _ => f64::INFINITY,
    }
}

/// Generic convex minimizer: coarse grid, then cyclic golden-section
/// coordinate descent with perturbed restarts.
struct BoxMinimizer<'a> {
    lo: Vec<f64>,
    hi: Vec<f64>,
    f: Box<dyn Fn(&[f64]) -> f64 + 'a>,
}

impl<'a> BoxMinimizer<'a> {
    fn grid_points_per_axis(dims: usize) -> usize {
        match dims {
            0 | 1 => 200,
            2 => 64,
            3 => 40,
            4 => 24,
            5 => 12,
            _ => 7,
        }
    }

    fn run(&self, seed: u64) -> Vec<f64> {
        let d = self.lo.len();
        let g = Self::grid_points_per_axis(d);

        // Coarse grid scan.
        let mut best = vec![0.0; d];
        for (i, b) in best.iter_mut().enumerate() {
            *b = 0.5 * (self.lo[i] + self.hi[i]);
        }
        let mut best_val = (self.f)(&best);
        let mut idx = vec![0usize; d];
        let mut point = vec![0.0; d];
        'grid: loop {
            for i in 0..d {
                let frac = idx[i] as f64 / (g - 1) as f64;
                point[i] = self.lo[i] + frac * (self.hi[i] - self.lo[i]);
            }
            let val = (self.f)(&point);
            if val < best_val {
                best_val = val;
                best.copy_from_slice(&point);
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    break 'grid;
                }
                idx[axis] += 1;
                if idx[axis] < g {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }

        let mut rng = SplitMix64::new(seed);
        let mut overall = best.clone();
        let mut overall_val = best_val;
        for restart in 0..4 {
            let mut x = overall.clone();
            if restart > 0 {
                for i in 0..d {
                    let w = 0.05 * (self.hi[i] - self.lo[i]);
                    x[i] = (x[i] + w * rng.next_gaussian()).clamp(self.lo[i], self.hi[i]);
                }
            }
            let val = self.coordinate_descent(&mut x);
            if val < overall_val {
                overall_val = val;
                overall = x;
            }
        }
        overall
    }

    fn coordinate_descent(&self, x: &mut Vec<f64>) -> f64 {
        let d = self.lo.len();
        let mut fval = (self.f)(x);
        for _sweep in 0..80 {
            let mut moved: f64 = 0.0;
            for i in 0..d {
                let old = x[i];
                let (xi, fi) = self.line_min(x, i);
                x[i] = xi;
                fval = fi;
                moved = moved.max((xi - old).abs());
            }
            if moved < 1e-12 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                break;
            }
        }
        fval
    }

    /// Golden-section over the i-th coordinate (convex restriction).
    fn line_min(&self, x: &mut Vec<f64>, i: usize) -> (f64, f64) {
        let (mut a, mut b) = (self.lo[i], self.hi[i]);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let eval = |xi: f64, x: &mut Vec<f64>| {
            let old = x[i];
            x[i] = xi;
            let v = (self.f)(x);
            x[i] = old;
            v
        };
        let mut c = b - phi * (b - a);
        let mut dpt = a + phi * (b - a);
        let mut fc = eval(c, x);
        let mut fd = eval(dpt, x);
        for _ in 0..120 {
            if fc <= fd {
                b = dpt;
                dpt = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = eval(c, x);
            } else {
                a = c;
                c = dpt;
                fc = fd;
                dpt = a + phi * (b - a);
                fd = eval(dpt, x);
            }
            if (b - a).abs() < 1e-14 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
        }
        let mid = 0.5 * (a + b);
        let fmid = eval(mid, x);
        // Keep the endpoints in play: face solutions sit exactly at 0.
        let mut best = (mid, fmid);
        for cand in [self.lo[i], self.hi[i], c, dpt] {
            let f = eval(cand, x);
            if f < best.1 {
                best = (cand, f);
            }
        }
        best
    }
}

/// Grid + coordinate-descent reference projection for any spectral vector
/// cone. Intended for small `n`.
pub fn oracle_project_vector(spec: &ConeSpec, target: &VPoint) -> VPoint {
    let has_v = spec.kind.has_v();
    let n = spec.n;
    let d = n + usize::from(has_v);
    let radius = target.norm() + 1.0;
    let nonneg = matches!(
        spec.kind,
        ConeKind::Log | ConeKind::Inv | ConeKind::VEnt | ConeKind::Geomean
    );

    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    let center: Vec<f64> = {
        let mut c = Vec::with_capacity(d);
        if has_v {
            c.push(target.v.unwrap());
        }
        c.extend_from_slice(&target.x);
        c
    };
    for &ci in &center {
        let l = ci - radius;
        lo.push(if nonneg { l.max(0.0) } else { l });
        hi.push(ci + radius);
    }

    let kind = spec.kind;
    let kk = spec.k;
    let tbar = target.t;
    let vbar = target.v;
    let xbar = target.x.clone();
    let f = move |u: &[f64]| -> f64 {
        let (v, x) = if has_v { (u[0], &u[1..]) } else { (1.0, u) };
        let s = s_extended(kind, kk, v, x);
        if !s.is_finite() && s > 0.0 {
            return f64::INFINITY;
        }
        let t = tbar.max(s);
        let mut val = 0.5 * (t - tbar) * (t - tbar);
        if let Some(vb) = vbar {
            val += 0.5 * (v - vb) * (v - vb);
        }
        for (xi, xb) in x.iter().zip(&xbar) {
            val += 0.5 * (xi - xb) * (xi - xb);
        }
        val
    };

    let seed = target
        .x
        .iter()
        .chain([&target.t])
        .fold(0u64, |acc, &v| acc.wrapping_mul(31).wrapping_add(v.to_bits()));
    let minimizer = BoxMinimizer { lo, hi, f: Box::new(f) };
    let u = minimizer.run(seed);
    let (v, x) = if has_v { (u[0], u[1..].to_vec()) } else { (1.0, u.clone()) };
    let s = s_extended(spec.kind, spec.k, v, &x);
    VPoint { t: target.t.max(s), v: has_v.then_some(v), x }
}

/// Exhaustive tie-pattern oracle for the sum-of-largest-entries cone.
///
/// Each coordinate of the projection is either untied (shifted down by the
/// full `eta`), tied (pinned to a shared threshold), or untouched. For every
/// assignment the two unknowns follow from the multiplier-sum and tightness
/// equations; candidates that satisfy the pattern inequalities are scored by
/// distance and the closest one wins.
pub fn oracle_vsum_tie_enumeration(tbar: f64, xbar: &[f64], k: usize) -> VPoint {
    let n = xbar.len();
    assert!(k >= 1 && k <= n);
    let target = VPoint::homogeneous(tbar, xbar.to_vec());
    let mut best: Option<(f64, VPoint)> = None;
    let tol = 1e-9;

    let sum_k = crate::vcones::primal_sum_k_largest(xbar, k);
    if sum_k <= tbar + tol {
        return target;
    }

    let consider = |point: VPoint, best: &mut Option<(f64, VPoint)>| {
        // feasibility of the candidate itself
        if crate::vcones::primal_sum_k_largest(&point.x, k) > point.t + tol {
            return;
        }
        let dist = point.sub(&target).norm();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            *best = Some((dist, point));
        }
    };

    // states: 0 = untied, 1 = tied, 2 = untouched
    let mut pattern = vec![0u8; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for p in pattern.iter_mut() {
            *p = (c % 3) as u8;
            c /= 3;
        }
        let u_set: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
        let t_set: Vec<usize> = (0..n).filter(|&i| pattern[i] == 1).collect();
        let n_set: Vec<usize> = (0..n).filter(|&i| pattern[i] == 2).collect();
        let u = u_set.len();
        let tau = t_set.len();
        if u > k || u + tau < k {
            continue;
        }

        let sum_u: f64 = u_set.iter().map(|&i| xbar[i]).sum();
        let sum_t: f64 = t_set.iter().map(|&i| xbar[i]).sum();

        let (eta, a_t) = if tau == 0 {
            if u != k {
                continue;
            }
            ((sum_u - tbar) / (k as f64 + 1.0), f64::NAN)
        } else {
            // (k - u) eta + tau a_t = sum_T xbar
            // -(u + 1) eta + (k - u) a_t = tbar - sum_U xbar
            let a11 = (k - u) as f64;
            let a12 = tau as f64;
            let a21 = -(u as f64 + 1.0);
            let a22 = (k - u) as f64;
            let det = a11 * a22 - a12 * a21;
            if det.abs() < 1e-12 {
                continue;
            }
            let b1 = sum_t;
            let b2 = tbar - sum_u;
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det)
        };

        if !(eta >= -tol) {
            continue;
        }
        // pattern inequalities
        let mut ok = true;
        for &i in &t_set {
            let lam = a_t - xbar[i];
            if lam > tol || lam < -eta - tol {
                ok = false;
                break;
            }
        }
        if ok && tau > 0 {
            for &i in &u_set {
                if xbar[i] - eta < a_t - tol {
                    ok = false;
                    break;
                }
            }
            for &i in &n_set {
                if xbar[i] > a_t + tol {
                    ok = false;
                    break;
                }
            }
        }
        if ok && tau == 0 {
            let min_u = u_set.iter().map(|&i| xbar[i] - eta).fold(f64::INFINITY, f64::min);
            for &i in &n_set {
                if xbar[i] > min_u + tol {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }

        let mut x = xbar.to_vec();
        for &i in &u_set {
            x[i] = xbar[i] - eta;
        }
        for &i in &t_set {
            x[i] = a_t;
        }
        consider(VPoint::homogeneous(tbar + eta, x), &mut best);
    }
    best.expect("tie enumeration found no feasible pattern").1
}

/// Bisection soft-threshold oracle for the l1-norm cone: solves
/// `||soft(xbar, theta)||_1 = tbar + theta` for the unique root.
pub fn oracle_l1_soft_threshold(tbar: f64, xbar: &[f64]) -> VPoint {
    let l1: f64 = xbar.iter().map(|v| v.abs()).sum();
    if l1 <= tbar {
        return VPoint::homogeneous(tbar, xbar.to_vec());
    }
    let soft_l1 = |theta: f64| -> f64 {
        xbar.iter().map(|v| (v.abs() - theta).max(0.0)).sum::<f64>()
    };
    let mut lo = 0.0;
    let mut hi = xbar.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(-tbar) + 1.0;
    debug_assert!(soft_l1(hi) - (tbar + hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if soft_l1(mid) - (tbar + mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + hi.abs()) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi).max(0.0);
    let theta = theta.max(0.0);
    VPoint::homogeneous(
        tbar + theta,
        xbar.iter().map(|&v| (v.abs() - theta).max(0.0) * v.signum()).collect(),
    )
}

/// Brute-force projection of a small symmetric matrix target onto a
/// spectral matrix cone: coordinate descent over the matrix entries (and
/// `v`), evaluating the spectral function through an eigendecomposition of
/// the trial matrix. Independent of the eigenvalue-reduction route.
pub fn oracle_project_matrix_sym(
    kind: ConeKind,
    k: Option<usize>,
    tbar: f64,
    vbar: Option<f64>,
    xbar: &DMatrix<f64>,
) -> (f64, Option<f64>, DMatrix<f64>) {
    let n = xbar.nrows();
    let vec_kind = kind.vector_counterpart().expect("matrix cone");
    let has_v = vec_kind != ConeKind::Geomean && vec_kind != ConeKind::VSum;
    let nsym = n * (n + 1) / 2;
    let d = nsym + usize::from(has_v);

    let fro = xbar.norm();
    let radius = (tbar * tbar + vbar.unwrap_or(0.0).powi(2) + fro * fro).sqrt() + 1.0;

    let mut center = Vec::with_capacity(d);
    if has_v {
        center.push(vbar.unwrap());
    }
    for j in 0..n {
        for i in j..n {
            center.push(xbar[(i, j)]);
        }
    }
    let lo: Vec<f64> = center
        .iter()
        .enumerate()
        .map(|(i, &c)| if has_v && i == 0 { (c - radius).max(0.0) } else { c - radius })
        .collect();
    let hi: Vec<f64> = center.iter().map(|&c| c + radius).collect();

    let unpack = move |u: &[f64]| -> (f64, DMatrix<f64>) {
        let v = if has_v { u[0] } else { 1.0 };
        let entries = if has_v { &u[1..] } else { u };
        let mut m = DMatrix::zeros(n, n);
        let mut idx = 0;
        for j in 0..n {
            for i in j..n {
                m[(i, j)] = entries[idx];
                m[(j, i)] = entries[idx];
                idx += 1;
            }
        }
        (v, m)
    };

    let f = {
        let xbar = xbar.clone();
        move |u: &[f64]| -> f64 {
            let (v, m) = unpack(u);
            let eig = match sym_eig(&m) {
                Ok(e) => e,
                Err(_) => return f64::INFINITY,
            };
            let s = s_extended(vec_kind, k, v, &eig.lambdas);
            if s.is_infinite() {
                return f64::INFINITY;
            }
            let t = tbar.max(s);
            let mut val = 0.5 * (t - tbar) * (t - tbar);
            if let Some(vb) = vbar {
                val += 0.5 * (v - vb) * (v - vb);
            }
            val += 0.5 * (&m - &xbar).norm_squared();
            val
        }
    };

    // The search space is too large for a grid; convexity of the objective
    // in (v, X) lets coordinate descent take it from the clipped target.
    let minimizer = BoxMinimizer { lo, hi, f: Box::new(f) };
    let mut start: Vec<f64> = center.clone();
    if has_v {
        start[0] = start[0].max(1.0);
    }
    let mut x0 = start.clone();
    let fval = minimizer.coordinate_descent(&mut x0);
    let mut best = (fval, x0);
    let mut rng = SplitMix64::new(0xBEEF);
    for _ in 0..3 {
        let mut xr: Vec<f64> = best
            .1
            .iter()
            .enumerate()
            .map(|(i, &v)| (v + 0.02 * radius * rng.next_gaussian()).clamp(minimizer.lo[i], minimizer.hi[i]))
            .collect();
        let fr = minimizer.coordinate_descent(&mut xr);
        if fr < best.0 {
            best = (fr, xr);
        }
    }

    let u = best.1;
    let v = if has_v { Some(u[0]) } else { None };
    let entries = if has_v { &u[1..] } else { &u[..] };
    let mut m = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for i in j..n {
            m[(i, j)] = entries[idx];
            m[(j, i)] = entries[idx];
            idx += 1;
        }
    }
    let eig = sym_eig(&m).unwrap();
    let s = s_extended(vec_kind, k, v.unwrap_or(1.0), &eig.lambdas);
    (tbar.max(s), v, m)
}
