//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Jacobi is the right tool for the sharply graded covariance matrices
//! this crate produces (eigenvalues spanning many orders of magnitude):
//! it determines small eigenvalues with high *relative* accuracy where a
//! tridiagonalization-first method would smear them at the level of
//! `eps * lambda_max`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Convergence threshold relative to the Frobenius norm of the input.
const OFFDIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`, with its
    /// first component of largest magnitude made positive.
    pub vectors: DMatrix<f64>,
}

/// Decompose a symmetric matrix with cyclic Jacobi sweeps, stopping when
/// the largest off-diagonal entry falls below `1e-14 * ||A||_F` (at most
/// 100 sweeps).
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::InvalidParams(format!(
            "eigendecomposition needs a non-empty square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let fro = matrix.norm();
    let asym = (matrix - matrix.transpose()).abs().max();
    if asym > 1e-10 * (1.0 + fro) {
        return Err(Error::InvalidParams(format!(
            "matrix is not symmetric: max |A - A^T| = {asym:.3e}"
        )));
    }

    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = OFFDIAG_TOL * fro;

    let mut converged = max_offdiag(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle from the stable tangent formula.
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                // Pin the annihilated pair against rounding residue.
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = max_offdiag(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            remaining: max_offdiag(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(a[(src, src)]);
        let mut col = v.column(src).clone_owned();
        // Deterministic sign: first component of largest magnitude positive.
        let lead = (0..n)
            .max_by(|&i, &j| {
                col[i]
                    .abs()
                    .partial_cmp(&col[j].abs())
                    .unwrap()
                    .then(j.cmp(&i))
            })
            .unwrap();
        if col[lead] < 0.0 {
            col = -col;
        }
        vectors.set_column(dst, &col);
    }

    Ok(EigenDecomposition { values, vectors })
}

fn max_offdiag(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            worst = worst.max(a[(p, q)].abs());
        }
    }
    worst
}
