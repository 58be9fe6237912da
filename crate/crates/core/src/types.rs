//! Shared domain types: cone descriptions, cone points, diagnostics and the
//! centralized tolerances used across the crate.

use serde::{Deserialize, Serialize};

/// Feasibility tolerance for cone membership tests.
pub const FEAS_TOL: f64 = 1e-9;
/// Tolerance on the four KKT residuals of a projection.
pub const KKT_TOL: f64 = 1e-9;
/// Relative tolerance for the symmetry check in [`crate::pack_sym`].
pub const SYM_TOL: f64 = 1e-12;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Clone)]
pub enum Error {
    /// Malformed input (dimension mismatch, invalid cone parameters, ...).
    InvalidArgument(String),
    /// A numerical kernel failed (decomposition did not converge,
    /// singular capacitance matrix, ...).
    NumericalFailure(String),
    /// Both projection engines failed; carries the best iterate found and
    /// its KKT residual.
    ProjectionFailure {
        point: Box<VPoint>,
        multipliers: Box<VPoint>,
        residual: f64,
    },
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::ProjectionFailure { residual, .. } => {
                write!(f, "projection failure: best KKT residual {residual:.3e}")
            }
        }
    }
}

impl std::error::Error for Error {}

/// The cone families understood by the solver and the projection routines.
///
/// The first four are the standard cones; the six `Log..VSum` kinds are
/// spectral vector cones and the remaining six their matrix counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Zero,
    Nonneg,
    SecondOrder,
    Psd,
    Log,
    Inv,
    VEnt,
    Geomean,
    L1,
    VSum,
    LogDet,
    TraceInv,
    MatEnt,
    RootDet,
    Nuclear,
    MatSumLargest,
}

impl ConeKind {
    /// True for cones whose points carry a perspective coordinate `v`.
    pub fn has_v(self) -> bool {
        matches!(
            self,
            ConeKind::Log
                | ConeKind::Inv
                | ConeKind::VEnt
                | ConeKind::LogDet
                | ConeKind::TraceInv
                | ConeKind::MatEnt
        )
    }

    /// True for the matrix cones (projection goes through a decomposition).
    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            ConeKind::Psd
                | ConeKind::LogDet
                | ConeKind::TraceInv
                | ConeKind::MatEnt
                | ConeKind::RootDet
                | ConeKind::Nuclear
                | ConeKind::MatSumLargest
        )
    }

    /// True for the six spectral vector cones.
    pub fn is_spectral_vector(self) -> bool {
        matches!(
            self,
            ConeKind::Log
                | ConeKind::Inv
                | ConeKind::VEnt
                | ConeKind::Geomean
                | ConeKind::L1
                | ConeKind::VSum
        )
    }

    /// The spectral vector cone a matrix cone reduces to.
    pub fn vector_counterpart(self) -> Option<ConeKind> {
        match self {
            ConeKind::LogDet => Some(ConeKind::Log),
            ConeKind::TraceInv => Some(ConeKind::Inv),
            ConeKind::MatEnt => Some(ConeKind::VEnt),
            ConeKind::RootDet => Some(ConeKind::Geomean),
            ConeKind::Nuclear => Some(ConeKind::L1),
            ConeKind::MatSumLargest => Some(ConeKind::VSum),
            _ => None,
        }
    }

    fn needs_k(self) -> bool {
        matches!(self, ConeKind::VSum | ConeKind::MatSumLargest)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Zero => "zero",
            ConeKind::Nonneg => "nonneg",
            ConeKind::SecondOrder => "second_order",
            ConeKind::Psd => "psd",
            ConeKind::Log => "log",
            ConeKind::Inv => "inv",
            ConeKind::VEnt => "vent",
            ConeKind::Geomean => "geomean",
            ConeKind::L1 => "l1",
            ConeKind::VSum => "vsum",
            ConeKind::LogDet => "logdet",
            ConeKind::TraceInv => "traceinv",
            ConeKind::MatEnt => "matent",
            ConeKind::RootDet => "rootdet",
            ConeKind::Nuclear => "nuclear",
            ConeKind::MatSumLargest => "msumlargest",
        }
    }
}

/// Description of one cone instance: kind, dimension(s), the parameter `k`
/// for the sum-of-largest kinds, and a primal/dual flag.
///
/// For vector kinds `n` is the length of the `x` part; for symmetric matrix
/// kinds it is the matrix order; for `Nuclear` the matrix is `m x n` with
/// `m >= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dual: bool,
}

impl ConeSpec {
    pub fn new(kind: ConeKind, n: usize) -> Result<Self> {
        let spec = ConeSpec { kind, n, m: None, k: None, dual: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_k(kind: ConeKind, n: usize, k: usize) -> Result<Self> {
        let spec = ConeSpec { kind, n, m: None, k: Some(k), dual: false };
        spec.validate()?;
        Ok(spec)
    }

    /// A nuclear-norm cone over `m x n` matrices.
    pub fn nuclear(m: usize, n: usize) -> Result<Self> {
        let spec = ConeSpec { kind: ConeKind::Nuclear, n, m: Some(m), k: None, dual: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn as_dual(mut self) -> Self {
        self.dual = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "cone {} must have positive dimension",
                self.kind.name()
            )));
        }
        match self.k {
            Some(k) if !self.kind.needs_k() => {
                return Err(Error::InvalidArgument(format!(
                    "parameter k = {k} given for cone {} which takes none",
                    self.kind.name()
                )));
            }
            Some(k) if k == 0 || k > self.n => {
                return Err(Error::InvalidArgument(format!(
                    "parameter k = {k} out of range 1..={}",
                    self.n
                )));
            }
            None if self.kind.needs_k() => {
                return Err(Error::InvalidArgument(format!(
                    "cone {} requires parameter k",
                    self.kind.name()
                )));
            }
            _ => {}
        }
        match self.m {
            Some(m) if self.kind != ConeKind::Nuclear => {
                return Err(Error::InvalidArgument(format!(
                    "row count m = {m} given for cone {} which takes none",
                    self.kind.name()
                )));
            }
            Some(m) if m < self.n => {
                return Err(Error::InvalidArgument(format!(
                    "nuclear cone requires m >= n, got m = {m}, n = {}",
                    self.n
                )));
            }
            None if self.kind == ConeKind::Nuclear => {
                return Err(Error::InvalidArgument(
                    "nuclear cone requires row count m".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of packed symmetric coordinates for matrix order `n`.
    pub fn tri(n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// Total embedded dimension of the cone block in a slack vector.
    ///
    /// Matrix blocks store `(t, [v,] packed X)` with the symmetric packing
    /// of [`crate::packing`], and `(t, vec X)` (column-major) for `Nuclear`.
    pub fn embedded_dim(&self) -> usize {
        match self.kind {
            ConeKind::Zero | ConeKind::Nonneg | ConeKind::SecondOrder => self.n,
            ConeKind::Psd => Self::tri(self.n),
            ConeKind::Log | ConeKind::Inv | ConeKind::VEnt => self.n + 2,
            ConeKind::Geomean | ConeKind::L1 | ConeKind::VSum => self.n + 1,
            ConeKind::LogDet | ConeKind::TraceInv | ConeKind::MatEnt => 2 + Self::tri(self.n),
            ConeKind::RootDet | ConeKind::MatSumLargest => 1 + Self::tri(self.n),
            ConeKind::Nuclear => 1 + self.m.unwrap() * self.n,
        }
    }
}

/// A point of a spectral vector cone: epigraph coordinate `t`, optional
/// perspective coordinate `v`, and the vector part `x`.
///
/// The same type carries targets, projections and Lagrange multipliers
/// `(lambda_t, lambda_v, lambda_x)` of the projection optimality system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VPoint {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub x: Vec<f64>,
}

impl VPoint {
    pub fn new(t: f64, v: Option<f64>, x: Vec<f64>) -> Self {
        VPoint { t, v, x }
    }

    pub fn homogeneous(t: f64, x: Vec<f64>) -> Self {
        VPoint { t, v: None, x }
    }

    pub fn with_v(t: f64, v: f64, x: Vec<f64>) -> Self {
        VPoint { t, v: Some(v), x }
    }

    /// Zero point with the shape of `self`.
    pub fn zeros_like(&self) -> Self {
        VPoint { t: 0.0, v: self.v.map(|_| 0.0), x: vec![0.0; self.x.len()] }
    }

    /// Checks that dimensions and the presence of `v` match `spec`.
    pub fn check_shape(&self, spec: &ConeSpec) -> Result<()> {
        if self.x.len() != spec.n {
            return Err(Error::InvalidArgument(format!(
                "point has x of length {}, cone expects {}",
                self.x.len(),
                spec.n
            )));
        }
        if self.v.is_some() != spec.kind.has_v() {
            return Err(Error::InvalidArgument(format!(
                "perspective coordinate v {} for cone {}",
                if self.v.is_some() { "present" } else { "missing" },
                spec.kind.name()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 + usize::from(self.v.is_some()) + self.x.len()
    }

    pub fn norm(&self) -> f64 {
        let mut s = self.t * self.t + self.v.unwrap_or(0.0).powi(2);
        s += self.x.iter().map(|xi| xi * xi).sum::<f64>();
        s.sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        let mut m = self.t.abs().max(self.v.unwrap_or(0.0).abs());
        for xi in &self.x {
            m = m.max(xi.abs());
        }
        m
    }

    /// Componentwise `self - other`; shapes must agree.
    pub fn sub(&self, other: &VPoint) -> VPoint {
        debug_assert_eq!(self.x.len(), other.x.len());
        debug_assert_eq!(self.v.is_some(), other.v.is_some());
        VPoint {
            t: self.t - other.t,
            v: self.v.map(|v| v - other.v.unwrap()),
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &VPoint) -> VPoint {
        debug_assert_eq!(self.x.len(), other.x.len());
        VPoint {
            t: self.t + other.t,
            v: self.v.map(|v| v + other.v.unwrap()),
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> VPoint {
        VPoint {
            t: alpha * self.t,
            v: self.v.map(|v| alpha * v),
            x: self.x.iter().map(|xi| alpha * xi).collect(),
        }
    }

    pub fn neg(&self) -> VPoint {
        self.scale(-1.0)
    }

    /// Inner product `<self, other>` over all coordinates.
    pub fn dot(&self, other: &VPoint) -> f64 {
        let mut s = self.t * other.t;
        if let (Some(a), Some(b)) = (self.v, other.v) {
            s += a * b;
        }
        s += self.x.iter().zip(&other.x).map(|(a, b)| a * b).sum::<f64>();
        s
    }
}

/// Per-projection diagnostics.
///
/// `decomp_seconds` and `vproj_seconds` separate the decomposition cost of a
/// matrix projection from the vector-cone projection cost, which is what the
/// overhead ablation measures.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ProjStats {
    pub decomp_seconds: f64,
    pub vproj_seconds: f64,
    pub newton_iters: u32,
    pub ipm_used: bool,
    pub kkt_residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_spec_rejects_malformed_combinations() {
        assert!(ConeSpec::new(ConeKind::Log, 0).is_err());
        // k for a kind that takes none
        assert!(ConeSpec { kind: ConeKind::Log, n: 3, m: None, k: Some(1), dual: false }
            .validate()
            .is_err());
        // k out of range
        assert!(ConeSpec::with_k(ConeKind::VSum, 3, 4).is_err());
        assert!(ConeSpec::with_k(ConeKind::VSum, 3, 0).is_err());
        // missing k
        assert!(ConeSpec::new(ConeKind::VSum, 3).is_err());
        // m for a non-nuclear kind
        assert!(ConeSpec { kind: ConeKind::Psd, n: 3, m: Some(4), k: None, dual: false }
            .validate()
            .is_err());
        // m < n
        assert!(ConeSpec::nuclear(2, 3).is_err());
        // missing m
        assert!(ConeSpec::new(ConeKind::Nuclear, 3).is_err());

        assert!(ConeSpec::with_k(ConeKind::VSum, 3, 3).is_ok());
        assert!(ConeSpec::nuclear(5, 3).is_ok());
    }

    #[test]
    fn embedded_dims() {
        assert_eq!(ConeSpec::new(ConeKind::Nonneg, 4).unwrap().embedded_dim(), 4);
        assert_eq!(ConeSpec::new(ConeKind::Psd, 4).unwrap().embedded_dim(), 10);
        assert_eq!(ConeSpec::new(ConeKind::Log, 4).unwrap().embedded_dim(), 6);
        assert_eq!(ConeSpec::new(ConeKind::Geomean, 4).unwrap().embedded_dim(), 5);
        assert_eq!(ConeSpec::new(ConeKind::LogDet, 4).unwrap().embedded_dim(), 12);
        assert_eq!(
            ConeSpec::with_k(ConeKind::MatSumLargest, 4, 2).unwrap().embedded_dim(),
            11
        );
        assert_eq!(ConeSpec::nuclear(6, 4).unwrap().embedded_dim(), 25);
    }

    #[test]
    fn vpoint_shape_check() {
        let spec = ConeSpec::new(ConeKind::Log, 2).unwrap();
        assert!(VPoint::with_v(0.0, 1.0, vec![1.0, 1.0]).check_shape(&spec).is_ok());
        assert!(VPoint::homogeneous(0.0, vec![1.0, 1.0]).check_shape(&spec).is_err());
        assert!(VPoint::with_v(0.0, 1.0, vec![1.0]).check_shape(&spec).is_err());
    }
}
