//! Projection onto the l1-norm cone `{(t, x) : ||x||_1 <= t}` by a single
//! sweep over the entries sorted in descending order of magnitude.
//!
//! With `a_1 >= a_2 >= ... >= a_n` the sorted magnitudes, prefix sums
//! `P_k = a_1 + ... + a_k`, and the conventions `a_0 = inf`, `a_{n+1} = 0`,
//! there is a unique `k` in `{0, ..., n}` with
//!
//! ```text
//! a_k > max((P_k - tbar) / (k+1), 0) >= a_{k+1},
//! ```
//!
//! and the projection is `t = max((k tbar + P_k)/(k+1), tbar)`,
//! `x_i = sign(xbar_i) max(|xbar_i| - (t - tbar), 0)`. The x-part is the
//! proximal operator of the scaled l1 norm, i.e. soft thresholding.

use crate::types::VPoint;

/// True when the entries are already sorted nonincreasing and nonnegative,
/// which is always the case on the singular-value path. The sweep then skips
/// the argsort; the arithmetic is identical to the general path.
fn presorted_nonneg(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] >= w[1]) && x.last().is_none_or(|&l| l >= 0.0)
}

/// Projects `(tbar, xbar)` onto the l1-norm cone; returns the projection and
/// the multiplier `point - target`.
pub fn project_l1(tbar: f64, xbar: &[f64]) -> (VPoint, VPoint) {
    let n = xbar.len();
    let sorted_mags: Vec<f64> = if presorted_nonneg(xbar) {
        xbar.to_vec()
    } else {
        let mut mags: Vec<f64> = xbar.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        mags
    };

    // Prefix sums P_k for k = 0..=n.
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for (i, &a) in sorted_mags.iter().enumerate() {
        prefix.push(prefix[i] + a);
    }

    let mut theta = 0.0;
    for k in 0..=n {
        let cand = ((prefix[k] - tbar) / (k + 1) as f64).max(0.0);
        let upper = if k == 0 { f64::INFINITY } else { sorted_mags[k - 1] };
        let lower = if k == n { 0.0 } else { sorted_mags[k] };
        if upper > cand && cand >= lower {
            theta = cand;
            break;
        }
    }

    let t = tbar + theta;
    let x: Vec<f64> = xbar
        .iter()
        .map(|&xi| (xi.abs() - theta).max(0.0) * xi.signum())
        .collect();
    let point = VPoint::homogeneous(t, x);
    let mult = VPoint::homogeneous(theta, point.x.iter().zip(xbar).map(|(a, b)| a - b).collect());
    (point, mult)
}
