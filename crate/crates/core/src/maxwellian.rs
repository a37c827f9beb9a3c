//! Piecewise-linear discrete root-Maxwellian on a symmetric velocity mesh.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::error::{config, Error, Result};
use crate::mesh::Mesh1D;

/// Root Maxwellian `(2πθ)^{-1/4} exp(-v²/(4θ))`.
pub fn root_maxwellian(theta: f64, v: f64) -> f64 {
    (2.0 * PI * theta).powf(-0.25) * (-v * v / (4.0 * theta)).exp()
}

pub fn root_maxwellian_derivative(theta: f64, v: f64) -> f64 {
    -v / (2.0 * theta) * root_maxwellian(theta, v)
}

/// Check the hypotheses under which the interpolated Maxwellian is certified.
pub fn check_admissible(mesh_v: &Mesh1D, theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(config(format!("theta must be positive, got {theta}")));
    }
    if mesh_v.a() != -mesh_v.b() {
        return Err(config(format!("velocity mesh must be symmetric about 0, got [{}, {}]", mesh_v.a(), mesh_v.b())));
    }
    if mesh_v.n_cells() % 2 != 0 {
        return Err(config("velocity mesh needs an even cell count so that v = 0 is a node"));
    }
    let l = mesh_v.b();
    if l < theta.sqrt() {
        return Err(config(format!("violates L >= sqrt(theta): L = {l}, sqrt(theta) = {}", theta.sqrt())));
    }
    let h = mesh_v.h();
    let cap = 4.0 / 3f64.sqrt() * theta;
    if h * h > cap {
        return Err(config(format!("violates h_v^2 <= (4/sqrt 3) theta: h_v^2 = {}, bound = {cap}", h * h)));
    }
    Ok(())
}

/// Positive, even, piecewise-linear approximation of the root Maxwellian with
/// unit L² mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMaxwellian {
    mesh: Mesh1D,
    theta: f64,
    theta_h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    mass: f64,
    momentum_defect: f64,
    energy_defect: f64,
}

/// Residuals of the structural assumptions on the discrete Maxwellian.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AssumptionReport {
    /// `(M, M) − 1`
    pub mass: f64,
    /// `M(L) − M(−L)`
    pub endpoint: f64,
    /// `(∂M, ∂M) − 1/(4θ)`; nonzero at `O(h_v)` for the interpolated construction.
    pub energy: f64,
    /// `(∂M, M)`
    pub momentum: f64,
}

/// Velocity-averaged flux coefficients.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaCoefficients {
    pub gamma_i: f64,
    pub gamma_b_plus: f64,
    pub gamma_b_minus: f64,
    pub gamma_star: f64,
}

/// Nodal values of the exact root Maxwellian, without normalization.
pub fn nodal_root_maxwellian(mesh_v: &Mesh1D, theta: f64) -> Vec<f64> {
    mesh_v.nodes().iter().map(|&v| root_maxwellian(theta, v)).collect()
}

/// `∫ u²` for the piecewise-linear interpolant of nodal values `u`.
pub fn piecewise_linear_mass(h: f64, u: &[f64]) -> f64 {
    u.windows(2).map(|w| h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1])).sum()
}

impl DiscreteMaxwellian {
    pub fn build(mesh_v: Mesh1D, theta: f64) -> Result<Self> {
        check_admissible(&mesh_v, theta)?;
        let raw = nodal_root_maxwellian(&mesh_v, theta);
        let scale = piecewise_linear_mass(mesh_v.h(), &raw).sqrt();
        Self::from_nodal(mesh_v, theta, raw.iter().map(|m| m / scale).collect())
    }

    /// Wrap given nodal values; they are used as is (no normalization).
    pub fn from_nodal(mesh_v: Mesh1D, theta: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh_v.n_cells() + 1 {
            return Err(config("one nodal value per velocity node is required"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::Invariant(format!("root Maxwellian must be strictly positive, found {v}")));
        }
        let h = mesh_v.h();
        let slopes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mass = piecewise_linear_mass(h, &values);
        let momentum_defect = slopes.iter().zip(values.windows(2)).map(|(d, w)| d * h * 0.5 * (w[0] + w[1])).sum();
        let grad_energy: f64 = slopes.iter().map(|d| h * d * d).sum();
        let theta_h = 1.0 / (4.0 * grad_energy);
        let energy_defect = grad_energy - 1.0 / (4.0 * theta);
        Ok(Self { mesh: mesh_v, theta, theta_h, values, slopes, mass, momentum_defect, energy_defect })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Discrete temperature `1 / (4 (∂M, ∂M))`.
    pub fn theta_h(&self) -> f64 {
        self.theta_h
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.values
    }

    /// Constant derivative of `M` on each cell.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn momentum_defect(&self) -> f64 {
        self.momentum_defect
    }

    pub fn energy_defect(&self) -> f64 {
        self.energy_defect
    }

    /// `(v_h M, v_h M) = θ² / θ_h`.
    pub fn velocity_energy(&self) -> f64 {
        self.theta * self.theta / self.theta_h
    }

    fn locate(&self, v: f64) -> Result<usize> {
        self.mesh.locate(v).ok_or(Error::Domain { value: v, lo: self.mesh.a(), hi: self.mesh.b() })
    }

    /// Value of `M` on cell `c` at `v`.
    pub fn value_on_cell(&self, c: usize, v: f64) -> f64 {
        self.values[c] + self.slopes[c] * (v - self.mesh.node(c))
    }

    pub fn value(&self, v: f64) -> Result<f64> {
        let c = self.locate(v)?;
        Ok(self.value_on_cell(c, v))
    }

    /// `v_h = −2θ ∂M / M` on cell `c`.
    pub fn velocity_on_cell(&self, c: usize, v: f64) -> f64 {
        -2.0 * self.theta * self.slopes[c] / self.value_on_cell(c, v)
    }

    /// `v_h(v)`; at a node the cell to the right is used (left at `v = L`).
    pub fn discrete_velocity(&self, v: f64) -> Result<f64> {
        let c = self.locate(v)?;
        Ok(self.velocity_on_cell(c, v))
    }

    /// `sup |v_h|`, attained at the cell end where `M` is smallest.
    pub fn velocity_sup(&self) -> f64 {
        self.slopes
            .iter()
            .zip(self.values.windows(2))
            .map(|(d, w)| 2.0 * self.theta * d.abs() / w[0].min(w[1]))
            .fold(0.0, f64::max)
    }

    /// `∫_c M`.
    pub fn cell_integral(&self, c: usize) -> f64 {
        self.mesh.h() * 0.5 * (self.values[c] + self.values[c + 1])
    }

    pub fn gamma_edges(&self) -> Result<GammaCoefficients> {
        let mut gamma_i = 0.0;
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (c, &d) in self.slopes.iter().enumerate() {
            // v_h M = −2θ d on the cell
            let vm = -2.0 * self.theta * d * self.cell_integral(c);
            gamma_i += 0.5 * vm.abs();
            if vm > 0.0 {
                plus += vm;
            } else {
                minus -= vm;
            }
        }
        let gamma_star = gamma_i.min(plus).min(minus);
        if !(gamma_star > 0.0) {
            return Err(Error::Invariant(format!(
                "flux coefficients must be positive: gamma_I = {gamma_i}, gamma_B+ = {plus}, gamma_B- = {minus}"
            )));
        }
        Ok(GammaCoefficients { gamma_i, gamma_b_plus: plus, gamma_b_minus: minus, gamma_star })
    }

    pub fn assumption_report(&self) -> AssumptionReport {
        AssumptionReport {
            mass: self.mass - 1.0,
            endpoint: self.values[self.values.len() - 1] - self.values[0],
            energy: self.energy_defect,
            momentum: self.momentum_defect,
        }
    }

    /// L² and H¹-seminorm distance to the exact root Maxwellian on `[−L, L]`.
    pub fn interpolation_errors(&self) -> (f64, f64) {
        let q = crate::quadrature::Quadrature::gauss_legendre(16);
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for c in 0..self.mesh.n_cells() {
            let (l, r) = self.mesh.cell(c);
            l2 +=
                q.integrate_composite(l, r, 4, |v| (root_maxwellian(self.theta, v) - self.value_on_cell(c, v)).powi(2));
            h1 += q
                .integrate_composite(l, r, 4, |v| (root_maxwellian_derivative(self.theta, v) - self.slopes[c]).powi(2));
        }
        (l2.sqrt(), h1.sqrt())
    }
}

/// Closed-form bounds on the L² and H¹-seminorm interpolation errors of the
/// normalized construction.
pub fn interpolation_error_bounds(theta: f64, l: f64, h: f64) -> (f64, f64) {
    let tail = 2.5 * (1.0 - erf(l / (2.0 * theta).sqrt()).sqrt());
    let s3 = 3f64.sqrt();
    let l2 = tail + 5.0 * h * h * s3 / (8.0 * theta);
    let h1 = tail + 2.5 * h * h * s3 / (16.0 * theta.powf(1.5)) + 2.5 * (s3 / 2f64.sqrt()) * h / (4.0 * theta);
    (l2, h1)
}

/// `‖root Maxwellian‖²` on `[−L, L]`.
pub fn exact_mass(theta: f64, l: f64) -> f64 {
    erf(l / (2.0 * theta).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(theta: f64, n: usize) -> DiscreteMaxwellian {
        DiscreteMaxwellian::build(Mesh1D::symmetric(6.0 * theta.sqrt(), n).unwrap(), theta).unwrap()
    }

    #[test]
    fn invariants_hold() {
        let m = build(1.0, 48);
        let r = m.assumption_report();
        assert!(r.mass.abs() < 1e-12);
        assert_eq!(r.endpoint, 0.0);
        assert!(r.momentum.abs() < 1e-12);
        assert!(m.nodal_values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn velocity_is_odd() {
        let m = build(1.0, 16);
        for &v in &[0.3, 1.1, 2.9, 5.5] {
            let a = m.discrete_velocity(v).unwrap();
            let b = m.discrete_velocity(-v).unwrap();
            assert!((a + b).abs() < 1e-14 * a.abs().max(1.0));
        }
        assert!(m.discrete_velocity(6.5).is_err());
    }

    #[test]
    fn gamma_symmetric() {
        let g = build(1.0, 48).gamma_edges().unwrap();
        assert!((g.gamma_b_plus - g.gamma_b_minus).abs() < 1e-14);
        assert!((g.gamma_i - g.gamma_b_plus).abs() < 1e-14);
        assert!(g.gamma_star > 0.0);
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(DiscreteMaxwellian::build(Mesh1D::symmetric(0.5, 4).unwrap(), 1.0).is_err());
        let e = DiscreteMaxwellian::build(Mesh1D::symmetric(6.0, 6).unwrap(), 1.0).unwrap_err();
        assert!(e.to_string().contains("h_v^2"));
        assert!(DiscreteMaxwellian::build(Mesh1D::new(-6.0, 5.0, 16).unwrap(), 1.0).is_err());
    }

    #[test]
    fn rescaling_homogeneity() {
        let m = build(1.0, 24);
        let c = 1.7;
        let scaled: Vec<f64> = m.nodal_values().iter().map(|v| v * c).collect();
        let s = DiscreteMaxwellian::from_nodal(m.mesh().clone(), 1.0, scaled).unwrap();
        assert!((s.theta_h() * c * c - m.theta_h()).abs() < 1e-12);
        assert!((s.mass() - c * c * m.mass()).abs() < 1e-12);
    }
}
