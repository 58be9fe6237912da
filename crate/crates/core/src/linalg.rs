//! Dense symmetric eigendecomposition, reduced SVD, and linear-time solves
//! with diagonal-plus-low-rank matrices.
//!
//! The decompositions delegate to nalgebra; this module adds input
//! validation, nonincreasing ordering of the spectra, and failure mapping.
//! The diagonal-plus-low-rank solver implements the matrix inversion formula
//! with iterative refinement, which the Newton and interior-point engines
//! rely on for their O(n) iteration cost.

use crate::types::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a symmetric matrix, eigenvalues nonincreasing.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub lambdas: Vec<f64>,
    pub u: DMatrix<f64>,
}

/// Reduced SVD of an `m x n` matrix (`m >= n`), singular values
/// nonincreasing: `X = U diag(sigma) V^T` with `U` of size `m x n`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub sigmas: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
pub fn sym_eig(x: &DMatrix<f64>) -> Result<EigResult> {
    let n = x.nrows();
    if n == 0 || x.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "expected square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    check_finite(x)?;
    // The backend assumes exact symmetry; average away roundoff first.
    let sym = 0.5 * (x + x.transpose());
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut u = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigResult { lambdas, u })
}

/// Reduced SVD for `m >= n`; callers must transpose wider-than-tall inputs.
pub fn reduced_svd(x: &DMatrix<f64>) -> Result<SvdResult> {
    let (m, n) = (x.nrows(), x.ncols());
    if n == 0 || m < n {
        return Err(Error::InvalidArgument(format!(
            "reduced SVD expects m >= n >= 1, got {m}x{n}"
        )));
    }
    check_finite(x)?;
    let svd = nalgebra::SVD::try_new(x.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let u_raw = svd.u.unwrap();
    let vt_raw = svd.v_t.unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap()
    });
    let sigmas: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u = DMatrix::zeros(m, n);
    let mut v = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &vt_raw.row(src).transpose());
    }
    Ok(SvdResult { sigmas, u, v })
}

/// A matrix `diag(d) + sum_j signs[j] * w_j w_j^T` with at most four
/// low-rank columns. The signature lets the engines express the indefinite
/// corrections that appear in the projection Hessians.
#[derive(Debug, Clone)]
pub struct DiagLowRank {
    pub d: Vec<f64>,
    pub cols: Vec<Vec<f64>>,
    pub signs: Vec<f64>,
}

pub const MAX_LOW_RANK: usize = 4;

impl DiagLowRank {
    pub fn new(d: Vec<f64>, cols: Vec<Vec<f64>>, signs: Vec<f64>) -> Result<Self> {
        if cols.len() != signs.len() {
            return Err(Error::InvalidArgument("column/sign count mismatch".into()));
        }
        if cols.len() > MAX_LOW_RANK {
            return Err(Error::InvalidArgument(format!(
                "rank {} exceeds the supported bound {MAX_LOW_RANK}",
                cols.len()
            )));
        }
        if cols.iter().any(|c| c.len() != d.len()) {
            return Err(Error::InvalidArgument("low-rank column length mismatch".into()));
        }
        Ok(DiagLowRank { d, cols, signs })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// `y = M x` in O(p * r).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, di), xi) in y.iter_mut().zip(&self.d).zip(x) {
            *yi = di * xi;
        }
        for (col, &s) in self.cols.iter().zip(&self.signs) {
            let dot: f64 = col.iter().zip(x).map(|(c, xi)| c * xi).sum();
            let sdot = s * dot;
            for (yi, c) in y.iter_mut().zip(col) {
                *yi += sdot * c;
            }
        }
    }

    /// Solves `M sol = rhs` by the matrix inversion formula with
    /// `refine_steps` sweeps of iterative refinement.
    ///
    /// Fails when the capacitance matrix is numerically singular; callers
    /// fall back to a dense solve for small systems.
    pub fn solve(&self, rhs: &[f64], refine_steps: usize) -> Result<Vec<f64>> {
        let p = self.dim();
        if rhs.len() != p {
            return Err(Error::InvalidArgument("rhs length mismatch".into()));
        }
        if self.d.iter().any(|&di| di == 0.0 || !di.is_finite()) {
            return Err(Error::NumericalFailure("diagonal has zero or non-finite entry".into()));
        }
        let r = self.rank();
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);

        // Capacitance C = S^{-1} + W^T D^{-1} W  (S^{-1} = S for signs +-1).
        let mut cap = DMatrix::zeros(r, r);
        let dinv_w: Vec<Vec<f64>> = self
            .cols
            .iter()
            .map(|col| col.iter().zip(&self.d).map(|(c, d)| c / d).collect())
            .collect();
        for i in 0..r {
            for j in 0..r {
                let mut acc: f64 = self.cols[i].iter().zip(&dinv_w[j]).map(|(a, b)| a * b).sum();
                if i == j {
                    acc += 1.0 / self.signs[i];
                }
                cap[(i, j)] = acc;
            }
        }
        let cap_lu = cap.lu();

        let smw = |b: &[f64], out: &mut [f64]| -> Result<()> {
            for ((oi, bi), di) in out.iter_mut().zip(b).zip(&self.d) {
                *oi = bi / di;
            }
            if r > 0 {
                let mut t = DVector::zeros(r);
                for j in 0..r {
                    t[j] = self.cols[j].iter().zip(out.iter()).map(|(c, o)| c * o).sum();
                }
                let q = cap_lu
                    .solve(&t)
                    .ok_or_else(|| Error::NumericalFailure("singular capacitance matrix".into()))?;
                for j in 0..r {
                    let qj = q[j];
                    if !qj.is_finite() {
                        return Err(Error::NumericalFailure("singular capacitance matrix".into()));
                    }
                    for (oi, dw) in out.iter_mut().zip(&dinv_w[j]) {
                        *oi -= qj * dw;
                    }
                }
            }
            Ok(())
        };

        let mut sol = vec![0.0; p];
        smw(rhs, &mut sol)?;

        let mut resid = vec![0.0; p];
        let mut corr = vec![0.0; p];
        for _ in 0..refine_steps {
            self.matvec(&sol, &mut resid);
            for (ri, bi) in resid.iter_mut().zip(rhs) {
                *ri = bi - *ri;
            }
            let rnorm = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm < 1e-12 * rhs_norm {
                break;
            }
            smw(&resid, &mut corr)?;
            for (si, ci) in sol.iter_mut().zip(&corr) {
                *si += ci;
            }
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite solution".into()));
        }
        Ok(sol)
    }

    /// Dense reconstruction, for fallbacks and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let p = self.dim();
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            m[(i, i)] = self.d[i];
        }
        for (col, &s) in self.cols.iter().zip(&self.signs) {
            for i in 0..p {
                for j in 0..p {
                    m[(i, j)] += s * col[i] * col[j];
                }
            }
        }
        m
    }
}

/// Solves `M sol = rhs` for a diagonal-plus-low-rank `M`, falling back to a
/// dense factorization for small systems when the capacitance matrix is
/// numerically singular.
pub fn solve_diag_low_rank(m: &DiagLowRank, rhs: &[f64], refine_steps: usize) -> Result<Vec<f64>> {
    match m.solve(rhs, refine_steps) {
        Ok(sol) => Ok(sol),
        Err(err) => {
            if m.dim() <= 64 {
                let dense = m.to_dense();
                let lu = dense.full_piv_lu();
                let sol = lu
                    .solve(&DVector::from_column_slice(rhs))
                    .ok_or_else(|| Error::NumericalFailure("dense fallback solve failed".into()))?;
                Ok(sol.as_slice().to_vec())
            } else {
                Err(err)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::rng::SplitMix64;

    fn random_sym(n: usize, rng: &mut SplitMix64) -> DMatrix<f64> {
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
    fn eig_diagonal_input() {
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = sym_eig(&x).unwrap();
        assert_eq!(e.lambdas, vec![3.0, 2.0, 1.0]);
        // Columns are a permutation of the identity.
        for j in 0..3 {
            let col = e.u.column(j);
            assert!((col.amax() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_identity() {
        let e = sym_eig(&DMatrix::identity(4, 4)).unwrap();
        assert!(e.lambdas.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eig_reconstruction_and_orthogonality() {
        let mut rng = SplitMix64::new(1);
        for _ in 0..20 {
            let x = random_sym(20, &mut rng);
            let e = sym_eig(&x).unwrap();
            let rec = &e.u * DMatrix::from_diagonal(&DVector::from_vec(e.lambdas.clone()))
                * e.u.transpose();
            assert!((rec - &x).norm() <= 1e-10 * x.norm().max(1.0));
            let gram = e.u.transpose() * &e.u - DMatrix::identity(20, 20);
            assert!(gram.norm() <= 1e-10 * 20.0);
            for w in e.lambdas.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eig_rejects_nonfinite() {
        let mut x = DMatrix::zeros(2, 2);
        x[(0, 0)] = f64::NAN;
        assert!(sym_eig(&x).is_err());
    }

    #[test]
    fn svd_diagonal_and_zero() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let s = reduced_svd(&x).unwrap();
        assert!((s.sigmas[0] - 1.0).abs() < 1e-14 && s.sigmas[1].abs() < 1e-14);

        let z = DMatrix::zeros(3, 2);
        let s = reduced_svd(&z).unwrap();
        assert_eq!(s.sigmas, vec![0.0, 0.0]);
        assert_eq!(s.u.shape(), (3, 2));
        assert_eq!(s.v.shape(), (2, 2));
    }

    #[test]
    fn svd_reconstruction() {
        let mut rng = SplitMix64::new(2);
        for _ in 0..20 {
            let x = DMatrix::from_fn(10, 4, |_, _| rng.next_gaussian());
            let s = reduced_svd(&x).unwrap();
            let rec = &s.u * DMatrix::from_diagonal(&DVector::from_vec(s.sigmas.clone()))
                * s.v.transpose();
            assert!((rec - &x).norm() <= 1e-10 * x.norm().max(1.0));
            let gram_u = s.u.transpose() * &s.u - DMatrix::identity(4, 4);
            let gram_v = s.v.transpose() * &s.v - DMatrix::identity(4, 4);
            assert!(gram_u.norm() <= 1e-10 * 4.0);
            assert!(gram_v.norm() <= 1e-10 * 4.0);
            for w in s.sigmas.windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(s.sigmas.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn svd_rejects_wide() {
        assert!(reduced_svd(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn dlr_pure_diagonal() {
        let m = DiagLowRank::new(vec![2.0, 4.0], vec![], vec![]).unwrap();
        let sol = solve_diag_low_rank(&m, &[2.0, 4.0], 2).unwrap();
        assert_eq!(sol, vec![1.0, 1.0]);
    }

    #[test]
    fn dlr_identity() {
        let m = DiagLowRank::new(vec![1.0; 5], vec![], vec![]).unwrap();
        let rhs = vec![3.0, -1.0, 0.5, 2.0, -7.0];
        let sol = solve_diag_low_rank(&m, &rhs, 2).unwrap();
        assert_eq!(sol, rhs);
    }

    #[test]
    fn dlr_matches_dense_oracle() {
        let mut rng = SplitMix64::new(3);
        for trial in 0..200 {
            let p = 5;
            let r = 1 + (trial % 3);
            let d: Vec<f64> = (0..p).map(|_| 0.5 + rng.next_f64() * 3.0).collect();
            let cols: Vec<Vec<f64>> =
                (0..r).map(|_| (0..p).map(|_| rng.next_gaussian()).collect()).collect();
            let signs: Vec<f64> = (0..r).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let m = DiagLowRank::new(d, cols, signs).unwrap();
            let dense = m.to_dense();
            // Skip near-singular instances; the contract requires a
            // well-conditioned capacitance.
            let svd = dense.clone().svd(false, false);
            let smin = svd.singular_values.min();
            let smax = svd.singular_values.max();
            if smin < 1e-8 * smax {
                continue;
            }
            let rhs: Vec<f64> = (0..p).map(|_| rng.next_gaussian()).collect();
            let sol = solve_diag_low_rank(&m, &rhs, 2).unwrap();
            let oracle = dense.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
            for (a, b) in sol.iter().zip(oracle.iter()) {
                assert!((a - b).abs() <= 1e-11 * oracle.amax().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn dlr_residual_bound_large() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..20 {
            let p = 400;
            let d: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.next_f64() * 6.0 - 2.0)).collect();
            let cols: Vec<Vec<f64>> =
                (0..3).map(|_| (0..p).map(|_| rng.next_gaussian()).collect()).collect();
            let m = DiagLowRank::new(d, cols, vec![1.0, -1.0, 1.0]).unwrap();
            let rhs: Vec<f64> = (0..p).map(|_| rng.next_gaussian()).collect();
            let sol = match m.solve(&rhs, 3) {
                Ok(sol) => sol,
                Err(_) => continue,
            };
            let mut res = vec![0.0; p];
            m.matvec(&sol, &mut res);
            let rnorm = res
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(rnorm <= 1e-10 * bnorm.max(1.0), "residual {rnorm:.3e}");
        }
    }

    #[test]
    fn dlr_singular_capacitance_falls_back_dense() {
        // d + w w^T with w chosen to annihilate: D = I, w = e1, sign = -1
        // gives M = diag(0, 1): singular capacitance AND singular matrix.
        let m = DiagLowRank::new(vec![1.0, 1.0], vec![vec![1.0, 0.0]], vec![-1.0]).unwrap();
        assert!(solve_diag_low_rank(&m, &[1.0, 1.0], 2).is_err());
    }
}
