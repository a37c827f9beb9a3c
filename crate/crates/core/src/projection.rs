//! L² projections, the conforming interpolants and measured constants of the
//! broken-space inequalities.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{boundary_form, h1h_gram, jump_form, Beta};
use crate::space::{Continuity, DGSpace, SpatialField};

/// Project a function onto `space`.
pub fn l2_project_fn(f: impl Fn(f64) -> f64, space: Arc<DGSpace>) -> Result<SpatialField> {
    let rhs = space.restrict(&space.load(f));
    solve_projection(space, rhs)
}

/// Project a field on the same mesh and degree onto `space`.
pub fn l2_project(field: &SpatialField, space: Arc<DGSpace>) -> Result<SpatialField> {
    if field.space.mesh() != space.mesh() || field.space.degree() != space.degree() {
        return Err(Error::Config("projection between different meshes or degrees".into()));
    }
    let rhs = space.restrict(&(space.mass() * field.broken()));
    solve_projection(space, rhs)
}

fn solve_projection(space: Arc<DGSpace>, rhs: DVector<f64>) -> Result<SpatialField> {
    let ext = space.extension();
    let gram = ext.transpose() * space.mass() * &ext;
    let coeffs = linalg::spd_solve(&gram, &rhs)?;
    SpatialField::new(space, coeffs)
}

/// Broken-to-broken matrix of the L² projection onto the subspace `target`.
pub fn projection_matrix(target: &DGSpace) -> Result<DMatrix<f64>> {
    let ext = target.extension();
    let mass = target.mass();
    let gram = ext.transpose() * &mass * &ext;
    let chol = linalg::cholesky(&gram)?;
    let rhs = ext.transpose() * mass;
    Ok(&ext * chol.solve(&rhs))
}

/// `I_h^0` averages coincident nodal values and zeroes the boundary nodes;
/// `I_h^1` only zeroes the boundary-node coefficients.
pub fn conforming_interpolant(field: &SpatialField, beta: Beta) -> Result<SpatialField> {
    let space = &field.space;
    if space.continuity() != Continuity::Broken {
        return Err(Error::Config("conforming interpolant expects a broken field".into()));
    }
    let k = space.degree();
    if k == 0 && beta == Beta::Zero {
        return Err(Error::Unsupported("I_h^0 needs degree k >= 1".into()));
    }
    let target = Arc::new(space.with_continuity(beta.limit_continuity())?);
    let u = &field.coeffs;
    let mut sum = DVector::zeros(target.dof_count());
    let mut count = DVector::<f64>::zeros(target.dof_count());
    for (b, d) in target.dof_map().iter().enumerate() {
        if let Some(d) = d {
            sum[*d] += u[b];
            count[*d] += 1.0;
        }
    }
    let coeffs = sum.component_div(&count);
    SpatialField::new(target, coeffs)
}

/// Broken-to-broken matrix of the interpolant.
pub fn interpolant_matrix(space: &DGSpace, beta: Beta) -> Result<DMatrix<f64>> {
    let arc = Arc::new(space.clone());
    let n = space.broken_count();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let out = conforming_interpolant(&SpatialField::new(arc.clone(), e)?, beta)?;
        m.set_column(j, &out.broken());
    }
    Ok(m)
}

/// Stability of the projection onto the β-limit space in the broken H¹ norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRatio {
    pub sampled: f64,
    pub exact: f64,
}

pub fn projection_stability_ratio<R: Rng>(
    space: &DGSpace,
    beta: Beta,
    n_samples: usize,
    rng: &mut R,
) -> Result<StabilityRatio> {
    let broken = space.with_continuity(Continuity::Broken)?;
    let target = broken.with_continuity(beta.limit_continuity())?;
    let p = projection_matrix(&target)?;
    let h = h1h_gram(&broken);
    let php = p.transpose() * &h * &p;
    let exact = linalg::max_generalized_eigenvalue(&php, &h)?.max(0.0).sqrt();
    let mut sampled: f64 = 0.0;
    for _ in 0..n_samples {
        let q = DVector::from_fn(broken.broken_count(), |_, _| rng.gen_range(-1.0..1.0));
        let num = q.dot(&(&php * &q));
        let den = q.dot(&(&h * &q));
        sampled = sampled.max((num / den).sqrt());
    }
    Ok(StabilityRatio { sampled, exact })
}

/// Sup of `h ‖q − I q‖²_{H¹_h} / S(q)` where `S` is the jump-plus-boundary
/// form for β = 0 and the boundary form for β = 1. Fields annihilated by `S`
/// are fixed by the interpolant and excluded.
pub fn interpolant_constant(space: &DGSpace, beta: Beta) -> Result<f64> {
    let broken = space.with_continuity(Continuity::Broken)?;
    let i = interpolant_matrix(&broken, beta)?;
    let r = DMatrix::identity(i.nrows(), i.ncols()) - i;
    let num = r.transpose() * h1h_gram(&broken) * &r * broken.mesh().h();
    let den = match beta {
        Beta::Zero => jump_form(&broken) + boundary_form(&broken),
        Beta::One => boundary_form(&broken),
    };
    restricted_sup(&num, &den)
}

/// Largest Rayleigh quotient of `num` over `den` on the range of `den`.
fn restricted_sup(num: &DMatrix<f64>, den: &DMatrix<f64>) -> Result<f64> {
    let eig = nalgebra::SymmetricEigen::new(den.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-10 * lmax).collect();
    let mut basis = DMatrix::zeros(den.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
    }
    let reduced = basis.transpose() * num * &basis;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let vals = nalgebra::SymmetricEigen::new(reduced).eigenvalues;
    Ok(vals.iter().cloned().fold(0.0, f64::max))
}

/// Measured constants of the trace, inverse and Poincaré inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityConstants {
    /// `h · sup (‖[[q]]‖² + ‖q‖²_∂) / ‖q‖²`
    pub trace: f64,
    /// `h · sup ‖∂q‖ / ‖q‖`
    pub inverse: f64,
    /// `sup ‖q‖ / ‖q‖_{H¹_h}`
    pub poincare: f64,
}

pub fn inequality_constants(space: &DGSpace) -> Result<InequalityConstants> {
    let broken = space.with_continuity(Continuity::Broken)?;
    let h = broken.mesh().h();
    let mass = broken.mass();
    let trace = h * linalg::max_generalized_eigenvalue(&(jump_form(&broken) + boundary_form(&broken)), &mass)?;
    let inverse = h * linalg::max_generalized_eigenvalue(&broken.stiffness(), &mass)?.max(0.0).sqrt();
    let poincare = linalg::max_generalized_eigenvalue(&mass, &h1h_gram(&broken))?.sqrt();
    Ok(InequalityConstants { trace, inverse, poincare })
}
