use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::LagrangeBasis;
use crate::error::{config, Error, Result};
use crate::mesh::Mesh1D;
use crate::quadrature::Quadrature;

/// Inter-element continuity of a space built on the broken nodal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    Broken,
    /// Broken, with the boundary-node coefficients removed.
    BrokenZeroTrace,
    Continuous,
    ContinuousZeroTrace,
}

/// Polynomial space of degree `k` on a uniform mesh, described as a subspace
/// of the broken nodal space through `dof_map`.
#[derive(Debug, Clone)]
pub struct DGSpace {
    mesh: Mesh1D,
    degree: usize,
    continuity: Continuity,
    basis: LagrangeBasis,
    quad: Quadrature,
    /// For each broken dof, the subspace dof it copies (if any).
    dof_map: Vec<Option<usize>>,
    dof_count: usize,
    phi_q: Vec<Vec<f64>>,
    dphi_q: Vec<Vec<f64>>,
}

impl DGSpace {
    pub fn new(mesh: Mesh1D, degree: usize, continuity: Continuity) -> Result<Self> {
        let continuous = matches!(continuity, Continuity::Continuous | Continuity::ContinuousZeroTrace);
        if continuous && degree == 0 {
            return Err(config("continuous spaces need degree k >= 1"));
        }
        let n = mesh.n_cells();
        let np = degree + 1;
        let mut dof_map = vec![None; n * np];
        let mut next = 0usize;
        match continuity {
            Continuity::Broken => {
                for (i, d) in dof_map.iter_mut().enumerate() {
                    *d = Some(i);
                }
                next = n * np;
            }
            Continuity::BrokenZeroTrace => {
                for c in 0..n {
                    for i in 0..np {
                        let on_boundary = if degree == 0 {
                            c == 0 || c == n - 1
                        } else {
                            (c == 0 && i == 0) || (c == n - 1 && i == degree)
                        };
                        if !on_boundary {
                            dof_map[c * np + i] = Some(next);
                            next += 1;
                        }
                    }
                }
            }
            Continuity::Continuous | Continuity::ContinuousZeroTrace => {
                let zero_trace = continuity == Continuity::ContinuousZeroTrace;
                for c in 0..n {
                    for i in 0..np {
                        let global = c * degree + i;
                        let last = n * degree;
                        if zero_trace && (global == 0 || global == last) {
                            continue;
                        }
                        dof_map[c * np + i] = Some(if zero_trace { global - 1 } else { global });
                    }
                }
                next = if zero_trace { n * degree - 1 } else { n * degree + 1 };
            }
        }
        if next == 0 {
            return Err(config(format!(
                "{continuity:?} space of degree {degree} on {n} cells has no degrees of freedom"
            )));
        }
        let basis = LagrangeBasis::new(degree);
        let quad = Quadrature::exact_for(2 * degree + 4);
        let phi_q = quad.points.iter().map(|&t| basis.values(t)).collect();
        let dphi_q = quad.points.iter().map(|&t| basis.derivatives(t)).collect();
        Ok(Self { mesh, degree, continuity, basis, quad, dof_map, dof_count: next, phi_q, dphi_q })
    }

    pub fn broken(mesh: Mesh1D, degree: usize) -> Result<Self> {
        Self::new(mesh, degree, Continuity::Broken)
    }

    /// Same mesh and degree with another continuity.
    pub fn with_continuity(&self, continuity: Continuity) -> Result<Self> {
        Self::new(self.mesh.clone(), self.degree, continuity)
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn local_count(&self) -> usize {
        self.degree + 1
    }

    pub fn broken_count(&self) -> usize {
        self.mesh.n_cells() * (self.degree + 1)
    }

    pub fn dof_map(&self) -> &[Option<usize>] {
        &self.dof_map
    }

    /// Basis values at the reference quadrature points: `phi_q()[q][i]`.
    pub fn phi_q(&self) -> &[Vec<f64>] {
        &self.phi_q
    }

    pub fn dphi_q(&self) -> &[Vec<f64>] {
        &self.dphi_q
    }

    /// Physical quadrature points and scaled weights of cell `c`.
    pub fn cell_quadrature(&self, c: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let s = 0.5 * self.mesh.h();
        self.quad
            .points
            .iter()
            .zip(&self.quad.weights)
            .enumerate()
            .map(move |(q, (&t, &w))| (q, self.mesh.to_physical(c, t), w * s))
    }

    /// Extension from subspace coefficients to broken coefficients.
    pub fn extension(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.broken_count(), self.dof_count);
        for (b, d) in self.dof_map.iter().enumerate() {
            if let Some(d) = d {
                e[(b, *d)] = 1.0;
            }
        }
        e
    }

    pub fn to_broken(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.broken_count(), self.dof_map.iter().map(|d| d.map_or(0.0, |d| coeffs[d])))
    }

    /// Transpose of the extension: sums broken entries onto subspace dofs.
    pub fn restrict(&self, broken: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dof_count);
        for (b, d) in self.dof_map.iter().enumerate() {
            if let Some(d) = d {
                out[*d] += broken[b];
            }
        }
        out
    }

    /// Broken mass matrix weighted by `w(x)`.
    pub fn mass_weighted(&self, w: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let np = self.local_count();
        let mut m = DMatrix::zeros(self.broken_count(), self.broken_count());
        for c in 0..self.mesh.n_cells() {
            for (q, x, wq) in self.cell_quadrature(c) {
                let f = wq * w(x);
                let phi = &self.phi_q[q];
                for i in 0..np {
                    for j in 0..np {
                        m[(c * np + i, c * np + j)] += f * phi[i] * phi[j];
                    }
                }
            }
        }
        m
    }

    pub fn mass(&self) -> DMatrix<f64> {
        self.mass_weighted(|_| 1.0)
    }

    /// `D[a, b] = ∫ ∂φ_a φ_b` over the broken space.
    pub fn derivative_matrix(&self) -> DMatrix<f64> {
        let np = self.local_count();
        let jac = 2.0 / self.mesh.h();
        let mut m = DMatrix::zeros(self.broken_count(), self.broken_count());
        for c in 0..self.mesh.n_cells() {
            for (q, _, wq) in self.cell_quadrature(c) {
                let (phi, dphi) = (&self.phi_q[q], &self.dphi_q[q]);
                for i in 0..np {
                    for j in 0..np {
                        m[(c * np + i, c * np + j)] += wq * jac * dphi[i] * phi[j];
                    }
                }
            }
        }
        m
    }

    /// `K[a, b] = ∫ ∂φ_a ∂φ_b` cellwise.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let np = self.local_count();
        let jac = 2.0 / self.mesh.h();
        let mut m = DMatrix::zeros(self.broken_count(), self.broken_count());
        for c in 0..self.mesh.n_cells() {
            for (q, _, wq) in self.cell_quadrature(c) {
                let dphi = &self.dphi_q[q];
                for i in 0..np {
                    for j in 0..np {
                        m[(c * np + i, c * np + j)] += wq * jac * jac * dphi[i] * dphi[j];
                    }
                }
            }
        }
        m
    }

    /// `∫ f φ_b` for every broken basis function.
    pub fn load(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let np = self.local_count();
        let mut v = DVector::zeros(self.broken_count());
        for c in 0..self.mesh.n_cells() {
            for (q, x, wq) in self.cell_quadrature(c) {
                let fx = wq * f(x);
                for i in 0..np {
                    v[c * np + i] += fx * self.phi_q[q][i];
                }
            }
        }
        v
    }

    /// Broken row vector evaluating the trace of cell `c` at its left
    /// (`right = false`) or right end.
    pub fn trace_row(&self, c: usize, right: bool) -> DVector<f64> {
        let np = self.local_count();
        let t = if right { 1.0 } else { -1.0 };
        let mut row = DVector::zeros(self.broken_count());
        for i in 0..np {
            row[c * np + i] = self.basis.value(i, t);
        }
        row
    }

    /// Rows realising `[[u]] = u_left − u_right` and `{{u}}` at interior edge `e`.
    pub fn jump_average_rows(&self, e: usize) -> Result<(DVector<f64>, DVector<f64>)> {
        if !self.mesh.is_interior_edge(e) {
            return Err(Error::BoundaryTrace { edge: e });
        }
        let left = self.trace_row(e - 1, true);
        let right = self.trace_row(e, false);
        Ok((&left - &right, (&left + &right) * 0.5))
    }

    /// Boundary trace rows at `a` (outward normal −1) and `b` (+1).
    pub fn boundary_rows(&self) -> (DVector<f64>, DVector<f64>) {
        (self.trace_row(0, false), self.trace_row(self.mesh.n_cells() - 1, true))
    }

    /// Evaluate broken coefficients at `x`.
    pub fn eval_broken(&self, coeffs: &DVector<f64>, x: f64) -> Result<f64> {
        let c = self.mesh.locate(x).ok_or(Error::Domain { value: x, lo: self.mesh.a(), hi: self.mesh.b() })?;
        let (l, r) = self.mesh.cell(c);
        let t = (2.0 * (x - l) / (r - l) - 1.0).clamp(-1.0, 1.0);
        let np = self.local_count();
        Ok((0..np).map(|i| coeffs[c * np + i] * self.basis.value(i, t)).sum())
    }
}

/// Coefficients of a function in a [`DGSpace`].
#[derive(Debug, Clone)]
pub struct SpatialField {
    pub space: Arc<DGSpace>,
    pub coeffs: DVector<f64>,
}

impl SpatialField {
    pub fn new(space: Arc<DGSpace>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(config(format!(
                "field has {} coefficients but the space has {} dofs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<DGSpace>) -> Self {
        let n = space.dof_count();
        Self { space, coeffs: DVector::zeros(n) }
    }

    /// Nodal interpolation of `f` (sampled at each cell's own nodes).
    pub fn interpolate(space: Arc<DGSpace>, f: impl Fn(f64) -> f64) -> Self {
        let np = space.local_count();
        let mut coeffs = DVector::zeros(space.dof_count());
        for c in 0..space.mesh().n_cells() {
            for (i, &t) in space.basis().nodes().iter().enumerate() {
                if let Some(d) = space.dof_map()[c * np + i] {
                    coeffs[d] = f(space.mesh().to_physical(c, t));
                }
            }
        }
        Self { space, coeffs }
    }

    pub fn broken(&self) -> DVector<f64> {
        self.space.to_broken(&self.coeffs)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.space.eval_broken(&self.broken(), x)
    }

    /// Jump `u_left − u_right` and average at interior edge `e`.
    pub fn jump_average(&self, e: usize) -> Result<(f64, f64)> {
        let (j, a) = self.space.jump_average_rows(e)?;
        let u = self.broken();
        Ok((j.dot(&u), a.dot(&u)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Mesh1D {
        Mesh1D::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn dof_counts() {
        for k in 1..4 {
            for n in 2..6 {
                let b = DGSpace::new(mesh(n), k, Continuity::Broken).unwrap();
                let c = DGSpace::new(mesh(n), k, Continuity::Continuous).unwrap();
                let z = DGSpace::new(mesh(n), k, Continuity::ContinuousZeroTrace).unwrap();
                let bz = DGSpace::new(mesh(n), k, Continuity::BrokenZeroTrace).unwrap();
                assert_eq!(b.dof_count(), n * (k + 1));
                assert_eq!(c.dof_count(), n * k + 1);
                assert_eq!(z.dof_count(), n * k - 1);
                assert_eq!(bz.dof_count(), n * (k + 1) - 2);
            }
        }
        assert!(DGSpace::new(mesh(4), 0, Continuity::Continuous).is_err());
    }

    #[test]
    fn jump_of_constant_and_antisymmetric() {
        let s = Arc::new(DGSpace::broken(mesh(4), 0).unwrap());
        let one = SpatialField::new(s.clone(), DVector::from_element(4, 1.0)).unwrap();
        assert_eq!(one.jump_average(2).unwrap(), (0.0, 1.0));
        let pm = SpatialField::new(s.clone(), DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0])).unwrap();
        let (j, a) = pm.jump_average(2).unwrap();
        assert_eq!(j.abs(), 2.0);
        assert_eq!(a, 0.0);
        assert!(matches!(one.jump_average(0), Err(Error::BoundaryTrace { edge: 0 })));
        assert!(one.jump_average(4).is_err());
    }

    #[test]
    fn continuous_field_has_no_jump() {
        let s = Arc::new(DGSpace::new(mesh(5), 2, Continuity::Continuous).unwrap());
        let f = SpatialField::interpolate(s, |x| (3.0 * x).sin());
        for e in 1..5 {
            assert_eq!(f.jump_average(e).unwrap().0, 0.0);
        }
    }

    #[test]
    fn derivative_and_mass_of_polynomials() {
        let s = DGSpace::broken(mesh(3), 2).unwrap();
        let ones = DVector::from_element(s.broken_count(), 1.0);
        let m = s.mass();
        assert!((ones.dot(&(&m * &ones)) - 1.0).abs() < 1e-14);
        let x = SpatialField::interpolate(Arc::new(s.clone()), |x| x).coeffs;
        let d = s.derivative_matrix();
        // (∂x, 1) = 1 and (∂1, x) = 0
        assert!((x.dot(&(&d * &ones)) - 1.0).abs() < 1e-14);
        assert!(ones.dot(&(&d * &x)).abs() < 1e-14);
        let k = s.stiffness();
        assert!((x.dot(&(&k * &x)) - 1.0).abs() < 1e-13);
    }
}
