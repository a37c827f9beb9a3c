//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU};

use crate::error::{Error, Result};

pub fn cholesky(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone()).ok_or_else(|| Error::Invariant("matrix expected to be SPD is not".into()))
}

pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(cholesky(a)?.solve(b))
}

/// Eigenvalues of the pencil `(a, b)` with `a` symmetric and `b` SPD,
/// together with `b`-orthonormal eigenvectors, ascending.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let l = cholesky(b)?.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Invariant("singular Cholesky factor".into()))?;
    let mut c = &linv * a * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt_inv = linv.transpose();
    let mut vecs = DMatrix::zeros(a.nrows(), order.len());
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &(&lt_inv * eig.eigenvectors.column(i)));
    }
    Ok((vals, vecs))
}

pub fn max_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    Ok(*generalized_eigen(a, b)?.0.last().unwrap())
}

/// LU factorization that checks residuals and refines iteratively.
pub struct CheckedLu {
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
}

impl CheckedLu {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let lu = LU::new(matrix.clone());
        let u = lu.u();
        let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !condition.is_finite() {
            return Err(Error::Solver { residual: f64::NAN, condition });
        }
        Ok(Self { matrix, lu, condition })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// Solve to normwise relative residual `‖b − Ax‖ / (‖A‖_F ‖x‖ + ‖b‖) ≤ tol`,
    /// with up to three refinement sweeps.
    pub fn solve(&self, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
        let bnorm = b.norm();
        let anorm = self.matrix.norm();
        let mut x = self.lu.solve(b).ok_or(Error::Solver { residual: f64::INFINITY, condition: self.condition })?;
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut res = b - &self.matrix * &x;
        let mut rel = res.norm() / (anorm * x.norm() + bnorm);
        for _ in 0..3 {
            if rel <= tol {
                break;
            }
            if let Some(dx) = self.lu.solve(&res) {
                x += dx;
            }
            res = b - &self.matrix * &x;
            rel = res.norm() / (anorm * x.norm() + bnorm);
        }
        if rel.is_nan() || rel > tol {
            return Err(Error::Solver { residual: rel, condition: self.condition });
        }
        Ok(x)
    }
}
