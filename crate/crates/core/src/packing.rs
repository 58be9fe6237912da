//! Isometric packing of symmetric matrices.
//!
//! A symmetric matrix of order `n` is stored as its lower triangle in
//! column-major order with off-diagonal entries multiplied by sqrt(2), so
//! that the Euclidean norm of the packed vector equals the Frobenius norm of
//! the matrix. This makes the Frobenius projection objective over matrices
//! exactly a 2-norm over packed coordinates, and is the wire layout used for
//! PSD and spectral matrix cone blocks in problem data.

use crate::types::{Error, Result, SYM_TOL};
use nalgebra::DMatrix;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Packed symmetric matrix: lower triangle, column-major, off-diagonal
/// entries scaled by sqrt(2).
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl PackedSym {
    pub fn from_data(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix order must be positive".into()));
        }
        if data.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "packed length {} does not match order {} (expected {})",
                data.len(),
                n,
                n * (n + 1) / 2
            )));
        }
        Ok(PackedSym { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        PackedSym { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// 2-norm of the packed data (= Frobenius norm of the matrix).
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|d| d * d).sum::<f64>().sqrt()
    }
}

/// Packs a dense symmetric matrix.
///
/// Inputs that are symmetric only to roundoff (relative asymmetry below
/// [`SYM_TOL`]) are symmetrized by averaging; anything worse is rejected.
pub fn pack_sym(x: &DMatrix<f64>) -> Result<PackedSym> {
    let n = x.nrows();
    if n == 0 || x.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "expected square matrix of positive order, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let norm = x.norm();
    let mut asym: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            asym = asym.max((x[(i, j)] - x[(j, i)]).abs());
        }
    }
    if asym > SYM_TOL * norm.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric: max asymmetry {asym:.3e}"
        )));
    }
    let mut data = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        data.push(x[(j, j)]);
        for i in (j + 1)..n {
            data.push(0.5 * (x[(i, j)] + x[(j, i)]) * SQRT2);
        }
    }
    Ok(PackedSym { n, data })
}

/// Inverse of [`pack_sym`].
pub fn unpack_sym(p: &PackedSym) -> DMatrix<f64> {
    let n = p.n;
    let mut x = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        x[(j, j)] = p.data[idx];
        idx += 1;
        for i in (j + 1)..n {
            let val = p.data[idx] / SQRT2;
            x[(i, j)] = val;
            x[(j, i)] = val;
            idx += 1;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = crate::problems::rng::SplitMix64::new(seed);
        let mut x = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let val = rng.next_gaussian();
                x[(i, j)] = val;
                x[(j, i)] = val;
            }
        }
        x
    }

    #[test]
    fn identity_packs_unscaled() {
        let p = pack_sym(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(p.data, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn off_diagonal_scaling_forces_isometry() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = pack_sym(&x).unwrap();
        assert_eq!(p.data, vec![0.0, SQRT2, 0.0]);
        assert!((p.norm() * p.norm() - 2.0).abs() < 1e-15);
        assert_eq!(unpack_sym(&p), x);
    }

    #[test]
    fn unpack_inverts_scaling() {
        let p = PackedSym::from_data(2, vec![0.0, SQRT2, 0.0]).unwrap();
        let x = unpack_sym(&p);
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn roundtrip_identity() {
        let x = DMatrix::identity(3, 3);
        assert_eq!(unpack_sym(&pack_sym(&x).unwrap()), x);
    }

    #[test]
    fn isometry_random_5x5() {
        let x = random_sym(5, 7);
        let p = pack_sym(&x).unwrap();
        assert!((p.norm() - x.norm()).abs() <= 1e-15 * x.norm());
    }

    // The spec asks for a bitwise roundtrip, but scaling by sqrt(2) and back
    // cannot be exact in f64 (multiply-then-divide by an irrational constant
    // loses up to one ulp per entry; see the decisions ledger). One ulp is
    // what the layout admits, so that is what we assert.
    #[test]
    fn roundtrip_random_within_one_ulp() {
        for seed in 0..100 {
            let x = random_sym(10, seed);
            let y = unpack_sym(&pack_sym(&x).unwrap());
            for (a, b) in x.iter().zip(y.iter()) {
                let ulp = a.abs() * f64::EPSILON;
                assert!((a - b).abs() <= ulp, "entry {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(pack_sym(&DMatrix::zeros(0, 0)).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(pack_sym(&asym).is_err());
        assert!(PackedSym::from_data(3, vec![0.0; 5]).is_err());
    }

    proptest! {
        #[test]
        fn isometry_holds(seed in 0u64..1000, n in 1usize..12) {
            let x = random_sym(n, seed);
            let p = pack_sym(&x).unwrap();
            prop_assert!((p.norm() - x.norm()).abs() <= 1e-14 * x.norm().max(1.0));
        }

        #[test]
        fn roundtrip_is_near_exact(seed in 0u64..1000, n in 1usize..10) {
            let x = random_sym(n, seed);
            let y = unpack_sym(&pack_sym(&x).unwrap());
            for (a, b) in x.iter().zip(y.iter()) {
                prop_assert!((a - b).abs() <= a.abs() * f64::EPSILON);
            }
        }
    }
}
