//! L², broken H¹ and discrete dual norms on x-spaces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{config, Result};
use crate::linalg;
use crate::space::{Continuity, DGSpace, SpatialField};

/// Flux selector of the kinetic scheme; also picks the limit spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Beta {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Beta {
    pub fn from_int(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Beta::Zero),
            1 => Ok(Beta::One),
            _ => Err(config(format!("beta must be 0 or 1, got {b}"))),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Beta::Zero => 0,
            Beta::One => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_int() as f64
    }

    /// Zero-trace space carrying the limit density.
    pub fn limit_continuity(self) -> Continuity {
        match self {
            Beta::Zero => Continuity::ContinuousZeroTrace,
            Beta::One => Continuity::BrokenZeroTrace,
        }
    }
}

/// `Σ_e [[u]]²` as a broken quadratic form.
pub fn jump_form(space: &DGSpace) -> DMatrix<f64> {
    let n = space.broken_count();
    let mut m = DMatrix::zeros(n, n);
    for e in 1..space.mesh().n_cells() {
        let (j, _) = space.jump_average_rows(e).expect("interior edge");
        m += &j * j.transpose();
    }
    m
}

/// `u(a)² + u(b)²` as a broken quadratic form.
pub fn boundary_form(space: &DGSpace) -> DMatrix<f64> {
    let (ra, rb) = space.boundary_rows();
    &ra * ra.transpose() + &rb * rb.transpose()
}

/// Gram matrix of the broken H¹ norm on the broken space.
pub fn h1h_gram(space: &DGSpace) -> DMatrix<f64> {
    let inv_h = 1.0 / space.mesh().h();
    space.stiffness() + (jump_form(space) + boundary_form(space)) * inv_h
}

fn quad_form(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    u.dot(&(m * u))
}

pub fn l2_norm(field: &SpatialField) -> f64 {
    quad_form(&field.space.mass(), &field.broken()).max(0.0).sqrt()
}

pub fn norm_hh1(field: &SpatialField) -> f64 {
    quad_form(&h1h_gram(&field.space), &field.broken()).max(0.0).sqrt()
}

/// Test space and denominator Gram matrix of the discrete dual norm.
pub fn dual_test_space(space: &DGSpace, beta: Beta) -> Result<(DGSpace, DMatrix<f64>)> {
    let test = space
        .with_continuity(beta.limit_continuity())
        .map_err(|e| config(format!("dual norm test space is empty or invalid on this mesh: {e}")))?;
    let ext = test.extension();
    let gram = match beta {
        Beta::Zero => test.stiffness(),
        Beta::One => h1h_gram(&test),
    };
    Ok((test, ext.transpose() * gram * ext))
}

/// Dual norm: sup over the zero-trace test space of `(z, q)` over the
/// denominator norm, evaluated through the Riesz problem.
pub fn norm_dual(field: &SpatialField, beta: Beta) -> Result<f64> {
    let (test, gram) = dual_test_space(&field.space, beta)?;
    let rhs = test.restrict(&(field.space.mass() * field.broken()));
    let riesz = linalg::spd_solve(&gram, &rhs)?;
    Ok(rhs.dot(&riesz).max(0.0).sqrt())
}

/// Same as [`norm_dual`] for many broken coefficient vectors on one space.
pub struct DualNorm {
    test: DGSpace,
    mass: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl DualNorm {
    pub fn new(space: &DGSpace, beta: Beta) -> Result<Self> {
        let (test, gram) = dual_test_space(space, beta)?;
        Ok(Self { mass: space.mass(), chol: linalg::cholesky(&gram)?, test })
    }

    pub fn eval_broken(&self, u: &DVector<f64>) -> f64 {
        let rhs = self.test.restrict(&(&self.mass * u));
        rhs.dot(&self.chol.solve(&rhs)).max(0.0).sqrt()
    }
}

pub fn field_from_broken(space: &Arc<DGSpace>, u: DVector<f64>) -> SpatialField {
    assert_eq!(space.continuity(), Continuity::Broken);
    SpatialField { space: space.clone(), coeffs: u }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;

    fn broken(n: usize, k: usize) -> Arc<DGSpace> {
        Arc::new(DGSpace::broken(Mesh1D::new(0.0, 1.0, n).unwrap(), k).unwrap())
    }

    #[test]
    fn indicator_cell_h1h_norm() {
        let s = broken(8, 0);
        let mut u = DVector::zeros(8);
        u[3] = 1.0;
        let f = field_from_broken(&s, u);
        assert!((norm_hh1(&f) - (2.0f64 / 0.125).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn hat_function_h1h_is_gradient_norm() {
        let s = broken(4, 1);
        let f = SpatialField::interpolate(s, |x| (0.5 - (x - 0.5).abs()).max(0.0));
        // slope ±1 over [0,1]
        assert!((norm_hh1(&f) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_norms() {
        let f = SpatialField::zeros(broken(4, 1));
        assert_eq!(norm_hh1(&f), 0.0);
        assert_eq!(norm_dual(&f, Beta::Zero).unwrap(), 0.0);
        assert_eq!(norm_dual(&f, Beta::One).unwrap(), 0.0);
    }

    #[test]
    fn dual_norm_rejects_empty_test_space() {
        // degree 0 has no continuous subspace
        let f = SpatialField::zeros(broken(4, 0));
        assert!(norm_dual(&f, Beta::Zero).is_err());
    }
}
