//! Per-cone models: the perspective function `s`, its gradient, and
//! diagonal-plus-low-rank factorizations of the Hessians used by the
//! engines.

use crate::linalg::DiagLowRank;
use crate::types::{ConeKind, ConeSpec};

/// Everything an engine needs to know about one systematic cone.
///
/// Coordinates are laid out as `[v, x...]` when the cone has a perspective
/// variable and `[x...]` otherwise. `eval_s`/`grad_s` are only called on
/// points accepted by `domain_check`.
pub trait ConeModel: Sync {
    fn n(&self) -> usize;
    fn has_v(&self) -> bool;

    /// The perspective function `s(v, x)`; `v` is ignored when `has_v` is
    /// false.
    fn eval_s(&self, v: f64, x: &[f64]) -> f64;

    /// Gradient of `s`; returns ds/dv (0 when `has_v` is false) and writes
    /// ds/dx into `gx`.
    fn grad_s(&self, v: f64, x: &[f64], gx: &mut [f64]) -> f64;

    /// Hessian of `s` over the engine coordinates.
    fn hess_s_factors(&self, v: f64, x: &[f64]) -> DiagLowRank;

    /// Hessian of the substituted objective `h` at `(v, x)` for target
    /// epigraph coordinate `tbar`:
    /// `hess h = I + a hess s + grad s grad s^T` with `a = s - tbar`.
    fn hess_h_factors(&self, v: f64, x: &[f64], tbar: f64) -> DiagLowRank {
        generic_hess_h(self.as_dyn(), v, x, tbar)
    }

    /// Strict interior of the domain of `s`.
    fn domain_check(&self, v: f64, x: &[f64]) -> bool {
        (!self.has_v() || (v > 0.0 && v.is_finite()))
            && x.iter().all(|&xi| xi > 0.0 && xi.is_finite())
    }

    fn as_dyn(&self) -> &dyn ConeModel;

    /// Engine coordinate count: n plus one for the perspective variable.
    fn dim(&self) -> usize {
        self.n() + usize::from(self.has_v())
    }
}

/// Builds `I + a hess s + g g^T` from the factors of `hess s`.
fn generic_hess_h(model: &dyn ConeModel, v: f64, x: &[f64], tbar: f64) -> DiagLowRank {
    let a = model.eval_s(v, x) - tbar;
    let dim = model.dim();
    let off = usize::from(model.has_v());

    let mut gx = vec![0.0; model.n()];
    let gv = model.grad_s(v, x, &mut gx);
    let mut g = vec![0.0; dim];
    if model.has_v() {
        g[0] = gv;
    }
    g[off..].copy_from_slice(&gx);

    let hs = model.hess_s_factors(v, x);
    let mut d = vec![1.0; dim];
    for (di, hi) in d.iter_mut().zip(&hs.d) {
        *di += a * hi;
    }
    let mut cols = Vec::new();
    let mut signs = Vec::new();
    if a != 0.0 {
        let sa = a.abs().sqrt();
        for (col, &sgn) in hs.cols.iter().zip(&hs.signs) {
            cols.push(col.iter().map(|c| sa * c).collect());
            signs.push(sgn * a.signum());
        }
    }
    cols.push(g);
    signs.push(1.0);
    DiagLowRank::new(d, cols, signs).expect("hessian factor rank bound")
}

/// Symmetric rank-two factor for a cross block `e_v b^T + b e_v^T`:
/// `(e+b)(e+b)^T/2 - (e-b)(e-b)^T/2`.
fn cross_cols(dim: usize, b_x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = vec![0.0; dim];
    let mut minus = vec![0.0; dim];
    plus[0] = inv_sqrt2;
    minus[0] = inv_sqrt2;
    for (i, bi) in b_x.iter().enumerate() {
        plus[1 + i] = bi * inv_sqrt2;
        minus[1 + i] = -bi * inv_sqrt2;
    }
    (vec![plus, minus], vec![1.0, -1.0])
}

/// Logarithmic cone: `s(v, x) = -sum_i v log(x_i / v)`.
pub struct LogModel {
    pub n: usize,
}

impl ConeModel for LogModel {
    fn n(&self) -> usize {
        self.n
    }
    fn has_v(&self) -> bool {
        true
    }
    fn eval_s(&self, v: f64, x: &[f64]) -> f64 {
        -v * x.iter().map(|&xi| (xi / v).ln()).sum::<f64>()
    }
    fn grad_s(&self, v: f64, x: &[f64], gx: &mut [f64]) -> f64 {
        for (gi, &xi) in gx.iter_mut().zip(x) {
            *gi = -v / xi;
        }
        self.n as f64 - x.iter().map(|&xi| (xi / v).ln()).sum::<f64>()
    }
    fn hess_s_factors(&self, v: f64, x: &[f64]) -> DiagLowRank {
        let dim = self.dim();
        let mut d = vec![0.0; dim];
        d[0] = self.n as f64 / v;
        for (di, &xi) in d[1..].iter_mut().zip(x) {
            *di = v / (xi * xi);
        }
        let b: Vec<f64> = x.iter().map(|&xi| -1.0 / xi).collect();
        let (cols, signs) = cross_cols(dim, &b);
        DiagLowRank::new(d, cols, signs).unwrap()
    }

    // The log-cone Hessian of h collapses to diagonal plus one rank-one
    // term: D + w w^T with
    //   D = I + a diag(-a/v^2 + n/v - 2c/v, v z_1^2, ..., v z_n^2)
    //   w = (-(a/v + c), v z),   z = 1/x,  c = n - sum log(x_i/v).
    fn hess_h_factors(&self, v: f64, x: &[f64], tbar: f64) -> DiagLowRank {
        let n = self.n as f64;
        let logsum: f64 = x.iter().map(|&xi| (xi / v).ln()).sum();
        let a = -tbar - v * logsum;
        let c = n - logsum;
        let dim = self.dim();
        let mut d = vec![0.0; dim];
        d[0] = 1.0 + a * (-a / (v * v) + n / v - 2.0 * c / v);
        let mut w = vec![0.0; dim];
        w[0] = -(a / v + c);
        for i in 0..self.n {
            let z = 1.0 / x[i];
            d[1 + i] = 1.0 + a * v * z * z;
            w[1 + i] = v * z;
        }
        DiagLowRank::new(d, vec![w], vec![1.0]).unwrap()
    }
    fn as_dyn(&self) -> &dyn ConeModel {
        self
    }
}

/// Inverse cone: `s(v, x) = v^2 sum_i 1/x_i`.
pub struct InvModel {
    pub n: usize,
}

impl ConeModel for InvModel {
    fn n(&self) -> usize {
        self.n
    }
    fn has_v(&self) -> bool {
        true
    }
    fn eval_s(&self, v: f64, x: &[f64]) -> f64 {
        v * v * x.iter().map(|&xi| 1.0 / xi).sum::<f64>()
    }
    fn grad_s(&self, v: f64, x: &[f64], gx: &mut [f64]) -> f64 {
        let mut tr = 0.0;
        for (gi, &xi) in gx.iter_mut().zip(x) {
            let z = 1.0 / xi;
            *gi = -v * v * z * z;
            tr += z;
        }
        2.0 * v * tr
    }
    fn hess_s_factors(&self, v: f64, x: &[f64]) -> DiagLowRank {
        let dim = self.dim();
        let mut d = vec![0.0; dim];
        let mut b = vec![0.0; self.n];
        let mut tr = 0.0;
        for i in 0..self.n {
            let z = 1.0 / x[i];
            tr += z;
            d[1 + i] = 2.0 * v * v * z * z * z;
            b[i] = -2.0 * v * z * z;
        }
        d[0] = 2.0 * tr;
        let (cols, signs) = cross_cols(dim, &b);
        DiagLowRank::new(d, cols, signs).unwrap()
    }
    fn as_dyn(&self) -> &dyn ConeModel {
        self
    }
}

/// Vector entropy cone: `s(v, x) = sum_i x_i log(x_i / v)`.
pub struct VEntModel {
    pub n: usize,
}

impl ConeModel for VEntModel {
    fn n(&self) -> usize {
        self.n
    }
    fn has_v(&self) -> bool {
        true
    }
    fn eval_s(&self, v: f64, x: &[f64]) -> f64 {
        x.iter().map(|&xi| if xi == 0.0 { 0.0 } else { xi * (xi / v).ln() }).sum()
    }
    fn grad_s(&self, v: f64, x: &[f64], gx: &mut [f64]) -> f64 {
        let mut sum = 0.0;
        for (gi, &xi) in gx.iter_mut().zip(x) {
            *gi = (xi / v).ln() + 1.0;
            sum += xi;
        }
        -sum / v
    }
    fn hess_s_factors(&self, v: f64, x: &[f64]) -> DiagLowRank {
        let dim = self.dim();
        let mut d = vec![0.0; dim];
        let sum: f64 = x.iter().sum();
        d[0] = sum / (v * v);
        for (di, &xi) in d[1..].iter_mut().zip(x) {
            *di = 1.0 / xi;
        }
        let b = vec![-1.0 / v; self.n];
        let (cols, signs) = cross_cols(dim, &b);
        DiagLowRank::new(d, cols, signs).unwrap()
    }
    fn as_dyn(&self) -> &dyn ConeModel {
        self
    }
}

/// Geometric-mean cone: `s(x) = -(prod_i x_i)^{1/n}` (no perspective
/// variable; the function is already positively homogeneous).
pub struct GeomeanModel {
    pub n: usize,
}

impl GeomeanModel {
    fn geomean(&self, x: &[f64]) -> f64 {
        // exp of the mean log keeps products of hundreds of entries from
        // over/underflowing.
        (x.iter().map(|&xi| xi.ln()).sum::<f64>() / self.n as f64).exp()
    }
}

impl ConeModel for GeomeanModel {
    fn n(&self) -> usize {
        self.n
    }
    fn has_v(&self) -> bool {
        false
    }
    fn eval_s(&self, _v: f64, x: &[f64]) -> f64 {
        -self.geomean(x)
    }
    fn grad_s(&self, _v: f64, x: &[f64], gx: &mut [f64]) -> f64 {
        let g = self.geomean(x);
        let n = self.n as f64;
        for (gi, &xi) in gx.iter_mut().zip(x) {
            *gi = -g / (n * xi);
        }
        0.0
    }
    fn hess_s_factors(&self, _v: f64, x: &[f64]) -> DiagLowRank {
        let g = self.geomean(x);
        let n = self.n as f64;
        let d: Vec<f64> = x.iter().map(|&xi| g / (n * xi * xi)).collect();
        let sg = g.sqrt();
        let col: Vec<f64> = x.iter().map(|&xi| sg / (n * xi)).collect();
        DiagLowRank::new(d, vec![col], vec![-1.0]).unwrap()
    }

    // Both low-rank pieces are multiples of z = 1/x, so h has an exact
    // rank-one Hessian: D + kappa z z^T with kappa = G (G - a) / n^2.
    fn hess_h_factors(&self, _v: f64, x: &[f64], tbar: f64) -> DiagLowRank {
        let g = self.geomean(x);
        let n = self.n as f64;
        let a = -g - tbar;
        let kappa = g * (g - a) / (n * n);
        let d: Vec<f64> = x.iter().map(|&xi| 1.0 + a * g / (n * xi * xi)).collect();
        if kappa == 0.0 {
            return DiagLowRank::new(d, vec![], vec![]).unwrap();
        }
        let scale = kappa.abs().sqrt();
        let col: Vec<f64> = x.iter().map(|&xi| scale / xi).collect();
        DiagLowRank::new(d, vec![col], vec![kappa.signum()]).unwrap()
    }
    fn as_dyn(&self) -> &dyn ConeModel {
        self
    }
}

/// The model for a systematic cone spec, or `None` for the ad-hoc and
/// non-vector kinds.
pub fn model_for(spec: &ConeSpec) -> Option<Box<dyn ConeModel>> {
    match spec.kind {
        ConeKind::Log => Some(Box::new(LogModel { n: spec.n })),
        ConeKind::Inv => Some(Box::new(InvModel { n: spec.n })),
        ConeKind::VEnt => Some(Box::new(VEntModel { n: spec.n })),
        ConeKind::Geomean => Some(Box::new(GeomeanModel { n: spec.n })),
        _ => None,
    }
}
