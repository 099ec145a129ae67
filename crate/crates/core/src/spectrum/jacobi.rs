//! Cyclic Jacobi eigensolver for small dense real symmetric matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(w) Vᵀ` with ascending `w`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[(p, q)] * a[(p, q)];
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes `a` by cyclic Jacobi rotations.
///
/// Stops when the off-diagonal Frobenius norm falls below `tol·‖a‖_F`.
/// Each eigenvector is signed so that its largest-magnitude component is positive
/// (the first such component on exact ties).
pub fn jacobi_eigen(a: &DMatrix<f64>, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::param("matrix", "must be square"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();
    let threshold = tol * scale;

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m);
    while off > threshold {
        if sweeps == max_sweeps {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← Jᵀ A J with J the (p, q) Givens rotation
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
        log::trace!("jacobi sweep {sweeps}: off-diagonal norm {off:e}");
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]).then(i.cmp(&j)));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut eigenvectors = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut vec = v.column(i).clone_owned();
        let mut lead = 0;
        for k in 1..n {
            if vec[k].abs() > vec[lead].abs() {
                lead = k;
            }
        }
        if vec[lead] < 0.0 {
            vec.neg_mut();
        }
        eigenvectors.set_column(col, &vec);
    }

    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_sorted() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let e = jacobi_eigen(&a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[-1.0, 2.0, 3.0]);
        assert_eq!(e.sweeps, 0);
        let expected = DMatrix::from_row_slice(3, 3, &[0., 0., 1., 1., 0., 0., 0., 1., 0.]);
        assert_eq!(e.eigenvectors, expected);
    }

    #[test]
    fn two_by_two_pair() {
        let (a, c) = (1.5, 0.25);
        let m = DMatrix::from_row_slice(2, 2, &[a, c, c, a]);
        let e = jacobi_eigen(&m, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        assert!((e.eigenvalues[0] - (a - c)).abs() < 1e-14);
        assert!((e.eigenvalues[1] - (a + c)).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.eigenvectors[(0, 1)] - s).abs() < 1e-14);
        assert!((e.eigenvectors[(1, 1)] - s).abs() < 1e-14);
    }

    #[test]
    fn residual_on_dense_matrix() {
        let n = 7;
        let a = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e = jacobi_eigen(&a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).unwrap();
        let recon = &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues) * e.eigenvectors.transpose();
        assert!((recon - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn sweep_cap_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        // A single rotation diagonalizes a 2×2; with zero sweeps allowed it must fail.
        let err = jacobi_eigen(&a, DEFAULT_TOL, 0).unwrap_err();
        assert!(matches!(err, Error::EigenNotConverged { sweeps: 0, .. }));
    }

    #[test]
    fn rejects_nan() {
        let a = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(jacobi_eigen(&a, DEFAULT_TOL, DEFAULT_MAX_SWEEPS).is_err());
    }
}
