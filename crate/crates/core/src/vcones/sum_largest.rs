//! Projection onto the sum-of-largest-entries cone
//! `{(t, x) : sum of the k largest entries of x <= t}`.
//!
//! The core routine scans the sorted target once, maintaining the untied
//! block (entries whose decrease directly lowers the sum of the k largest),
//! the tied block (entries pinned to a common value at the k-th boundary)
//! and the untouched tail. Untied entries decrease `r` times faster than
//! tied ones, with `r = n_t / (k - n_u)` chosen so the objective decrease
//! per unit of constraint decrease matches across blocks. Each iteration
//! consumes the smallest slack among "untied ties with tied", "tied ties
//! with the tail" and "the cone constraint becomes tight".

use super::membership::sum_k_largest;
use crate::types::{Error, Result, VPoint};

/// Scalars `(eta, n_u, n_t, a_t)` reconstructing the projection of a sorted
/// target `(tbar, xs)` onto the cone with parameter `k`:
/// shift the first `n_u` entries down by `eta`, pin the next `n_t` entries
/// to `a_t`, keep the rest, and lift `t` to `tbar + eta`.
///
/// Requires `xs` sorted nonincreasing, `1 <= k < n`, and the target outside
/// the cone.
pub fn project_sum_largest_core(
    tbar: f64,
    xs: &[f64],
    k: usize,
) -> Result<(f64, usize, usize, f64)> {
    let n = xs.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "core algorithm requires 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if xs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("input must be sorted nonincreasing".into()));
    }
    let s0: f64 = xs[..k].iter().sum();
    if s0 <= tbar {
        return Err(Error::InvalidArgument("target already satisfies the cone constraint".into()));
    }

    let mut n_u = k;
    let mut eta = 0.0;
    let mut s = s0;
    let mut a_u = xs[n_u - 1];
    let mut a_t = xs[n_u];
    let mut t = tbar;
    let mut n_t: usize = 0;

    // Each pass retires an untied entry or grows the tied block, so 2n
    // passes bound the loop; the guard absorbs roundoff stragglers.
    let mut guard = 2 * n + 4;
    while s > t && guard > 0 {
        guard -= 1;
        let r = if n_u == k { 1.0 } else { n_t as f64 / (k - n_u) as f64 };
        let s1 = if n_u == k {
            a_u - a_t
        } else if n_u == 0 || r <= 1.0 {
            f64::INFINITY
        } else {
            (a_u - a_t) / (r - 1.0)
        };
        let s2 = if n_u + n_t >= n || n_t == 0 {
            f64::INFINITY
        } else {
            a_t - xs[n_u + n_t]
        };
        let s3 = (s - t) / (r * (n_u as f64 + 1.0) + (k - n_u) as f64);
        let step = s1.min(s2).min(s3);

        eta += step * r;
        s -= step * (r * n_u as f64 + (k - n_u) as f64);
        t = tbar + eta;
        if n_t > 0 {
            a_t -= step;
        }
        if step == s1 {
            n_u -= 1;
        }
        if n_u > 0 {
            a_u = xs[n_u - 1] - eta;
        }
        n_t = if n_t == 0 { 2 } else { n_t + 1 };
    }

    let n_t = (n_t.saturating_sub(1)).min(n - n_u);
    Ok((eta, n_u, n_t, a_t))
}

fn reconstruct(tbar: f64, xs: &[f64], eta: f64, n_u: usize, n_t: usize, a_t: f64) -> VPoint {
    let n = xs.len();
    let mut x = Vec::with_capacity(n);
    for &v in &xs[..n_u] {
        x.push(v - eta);
    }
    for _ in 0..n_t {
        x.push(a_t);
    }
    x.extend_from_slice(&xs[n_u + n_t..]);
    VPoint::homogeneous(tbar + eta, x)
}

/// Projects `(tbar, xbar)` onto the sum-of-largest-entries cone. Handles the
/// sort / unsort wrapping, membership, and the `k = n` case (a halfspace,
/// where the core algorithm does not apply). Returns the projection and the
/// multiplier `point - target`.
pub fn project_sum_largest(tbar: f64, xbar: &[f64], k: usize) -> Result<(VPoint, VPoint)> {
    let n = xbar.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} out of range 1..={n}")));
    }

    // k = n: halfspace 1^T x <= t with normal (-1, 1, ..., 1).
    if k == n {
        let gap = xbar.iter().sum::<f64>() - tbar;
        if gap <= 0.0 {
            let point = VPoint::homogeneous(tbar, xbar.to_vec());
            let mult = point.zeros_like();
            return Ok((point, mult));
        }
        let nu = gap / (n as f64 + 1.0);
        let point =
            VPoint::homogeneous(tbar + nu, xbar.iter().map(|&v| v - nu).collect());
        let mult = point.sub(&VPoint::homogeneous(tbar, xbar.to_vec()));
        return Ok((point, mult));
    }

    if sum_k_largest(xbar, k) <= tbar {
        let point = VPoint::homogeneous(tbar, xbar.to_vec());
        let mult = point.zeros_like();
        return Ok((point, mult));
    }

    let presorted = xbar.windows(2).all(|w| w[0] >= w[1]);
    let target = VPoint::homogeneous(tbar, xbar.to_vec());
    if presorted {
        let (eta, n_u, n_t, a_t) = project_sum_largest_core(tbar, xbar, k)?;
        let point = reconstruct(tbar, xbar, eta, n_u, n_t, a_t);
        let mult = point.sub(&target);
        return Ok((point, mult));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xbar[b].partial_cmp(&xbar[a]).unwrap());
    let xs: Vec<f64> = order.iter().map(|&i| xbar[i]).collect();
    let (eta, n_u, n_t, a_t) = project_sum_largest_core(tbar, &xs, k)?;
    let sorted_point = reconstruct(tbar, &xs, eta, n_u, n_t, a_t);
    let mut x = vec![0.0; n];
    for (pos, &idx) in order.iter().enumerate() {
        x[idx] = sorted_point.x[pos];
    }
    let point = VPoint::homogeneous(sorted_point.t, x);
    let mult = point.sub(&target);
    Ok((point, mult))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_trace_k1_n2() {
        // First pass binds on s3 = 0.5.
        let (eta, n_u, n_t, a_t) = project_sum_largest_core(0.0, &[1.0, 0.0], 1).unwrap();
        assert_eq!((eta, n_u, n_t, a_t), (0.5, 1, 1, 0.0));
        let (p, m) = project_sum_largest(0.0, &[1.0, 0.0], 1).unwrap();
        assert_eq!(p.t, 0.5);
        assert_eq!(p.x, vec![0.5, 0.0]);
        assert_eq!(m.t, 0.5);
        assert_eq!(m.x, vec![-0.5, 0.0]);
    }

    #[test]
    fn members_are_fixed_points() {
        let (p, m) = project_sum_largest(2.0, &[1.0, 0.5, 0.0], 2).unwrap();
        assert_eq!(p.x, vec![1.0, 0.5, 0.0]);
        assert_eq!(p.t, 2.0);
        assert_eq!(m.norm(), 0.0);
        // and the core rejects in-cone inputs outright
        assert!(project_sum_largest_core(2.0, &[1.0, 0.5, 0.0], 2).is_err());
    }

    #[test]
    fn core_rejects_unsorted() {
        assert!(project_sum_largest_core(0.0, &[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn k_equals_n_halfspace() {
        let (p, _) = project_sum_largest(0.0, &[1.0, 1.0], 2).unwrap();
        // projection onto 1^T x <= t: nu = 2/3
        let nu = 2.0 / 3.0;
        assert!((p.t - nu).abs() < 1e-15);
        assert!((p.x[0] - (1.0 - nu)).abs() < 1e-15);
    }

    #[test]
    fn unsorted_wrapper_roundtrip() {
        let (p_sorted, _) = project_sum_largest(0.0, &[3.0, 1.0, -1.0], 1).unwrap();
        let (p_perm, _) = project_sum_largest(0.0, &[-1.0, 3.0, 1.0], 1).unwrap();
        assert_eq!(p_sorted.t, p_perm.t);
        assert_eq!(p_sorted.x[0], p_perm.x[1]);
        assert_eq!(p_sorted.x[1], p_perm.x[2]);
        assert_eq!(p_sorted.x[2], p_perm.x[0]);
    }
}
