//! Velocity-space matrices built from the discrete Maxwellian.
//!
//! Integrands containing `v_h` are rational on each cell (`v_h = −2θ d / M`
//! with `M` linear), so they are integrated in closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{config, Result};
use crate::linalg;
use crate::maxwellian::DiscreteMaxwellian;
use crate::norms::{boundary_form, jump_form};
use crate::space::{Continuity, DGSpace};

/// `∫_0^1 s^p / (1 + κ s) ds` for `p = 0..=pmax`, `κ > −1`.
pub fn rational_moments(kappa: f64, pmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; pmax + 1];
    if kappa.abs() < 0.5 {
        for (p, o) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut sum = 0.0;
            for n in 0..200 {
                let add = term / (p + n + 1) as f64;
                sum += add;
                if add.abs() < 1e-18 * sum.abs() {
                    break;
                }
                term *= -kappa;
            }
            *o = sum;
        }
    } else {
        out[0] = kappa.ln_1p() / kappa;
        for p in 1..=pmax {
            out[p] = (1.0 / p as f64 - out[p - 1]) / kappa;
        }
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Velocity-space building blocks on a broken space of degree `k_v >= 1`.
#[derive(Debug, Clone)]
pub struct VelocityOperators {
    pub mass: DMatrix<f64>,
    /// `∫ ∂ψ_c ψ_d`
    pub deriv: DMatrix<f64>,
    /// Nodal coefficients of `M`.
    pub m: DVector<f64>,
    /// `∫ M ψ`
    pub p: DVector<f64>,
    /// `∫ v_h M ψ`, evaluated pointwise from `v_h`.
    pub u: DVector<f64>,
    /// `∫ ∂M ψ`
    pub dm: DVector<f64>,
    /// `∫ v_h ψ ψ`
    pub vel: DMatrix<f64>,
    /// `∫ |v_h| ψ ψ`
    pub vel_abs: DMatrix<f64>,
    /// `∫_{v_h > 0} v_h ψ ψ`
    pub vel_plus: DMatrix<f64>,
    /// `∫_{v_h < 0} |v_h| ψ ψ`
    pub vel_minus: DMatrix<f64>,
    /// `Σ_e [[ψ]] {{ψ}}ᵀ` over interior velocity nodes.
    pub flux_avg: DMatrix<f64>,
    /// `Σ_e [[ψ]] [[ψ]]ᵀ` over interior velocity nodes.
    pub flux_jump: DMatrix<f64>,
    /// `n_v M ψ` summed over `v = ±L`.
    pub endpoint: DVector<f64>,
    /// Trace constant `h_v · sup (jumps² + endpoint traces²) / ‖ψ‖²`.
    pub trace_constant: f64,
}

impl VelocityOperators {
    pub fn new(space: &DGSpace, maxw: &DiscreteMaxwellian) -> Result<Self> {
        if space.continuity() != Continuity::Broken {
            return Err(config("velocity space must be broken"));
        }
        if space.degree() < 1 {
            return Err(config("velocity degree k_v >= 1 is required to represent the Maxwellian"));
        }
        if space.mesh() != maxw.mesh() {
            return Err(config("velocity space and Maxwellian must share a mesh"));
        }
        let mesh = space.mesh();
        let np = space.local_count();
        let n = space.broken_count();
        let h = mesh.h();
        let theta = maxw.theta();
        let basis = space.basis();

        let mut m = DVector::zeros(n);
        for c in 0..mesh.n_cells() {
            for (i, &t) in basis.nodes().iter().enumerate() {
                m[c * np + i] = maxw.value_on_cell(c, mesh.to_physical(c, t));
            }
        }
        let mass = space.mass();
        let p = &mass * &m;

        let mut u = DVector::zeros(n);
        let mut dm = DVector::zeros(n);
        for c in 0..mesh.n_cells() {
            for (q, v, w) in space.cell_quadrature(c) {
                let vh = maxw.velocity_on_cell(c, v);
                let mv = maxw.value_on_cell(c, v);
                for i in 0..np {
                    let psi = space.phi_q()[q][i];
                    u[c * np + i] += w * vh * mv * psi;
                    dm[c * np + i] += w * maxw.slopes()[c] * psi;
                }
            }
        }

        let mono: Vec<Vec<f64>> = (0..np).map(|i| basis.monomials_unit(i)).collect();
        let mut vel = DMatrix::zeros(n, n);
        let mut vel_abs = DMatrix::zeros(n, n);
        let mut vel_plus = DMatrix::zeros(n, n);
        let mut vel_minus = DMatrix::zeros(n, n);
        let vals = maxw.nodal_values();
        for c in 0..mesh.n_cells() {
            let ml = vals[c];
            let kappa = (vals[c + 1] - ml) / ml;
            let moments = rational_moments(kappa, 2 * space.degree());
            // v_h on this cell is coef / M
            let coef = -2.0 * theta * maxw.slopes()[c];
            for i in 0..np {
                for j in 0..np {
                    let prod = poly_mul(&mono[i], &mono[j]);
                    let w: f64 = prod.iter().zip(&moments).map(|(a, b)| a * b).sum::<f64>() * h / ml;
                    let (r, s) = (c * np + i, c * np + j);
                    vel[(r, s)] += coef * w;
                    vel_abs[(r, s)] += coef.abs() * w;
                    if coef > 0.0 {
                        vel_plus[(r, s)] += coef * w;
                    } else {
                        vel_minus[(r, s)] -= coef * w;
                    }
                }
            }
        }

        let mut flux_avg = DMatrix::zeros(n, n);
        let mut flux_jump = DMatrix::zeros(n, n);
        for e in 1..mesh.n_cells() {
            let (j, a) = space.jump_average_rows(e)?;
            flux_avg += &j * a.transpose();
            flux_jump += &j * j.transpose();
        }
        let (ra, rb) = space.boundary_rows();
        let ml = vals[0];
        let mr = vals[vals.len() - 1];
        let endpoint = rb * mr - ra * ml;

        let trace_form = jump_form(space) + boundary_form(space);
        let trace_constant = h * linalg::max_generalized_eigenvalue(&trace_form, &mass)?;

        Ok(Self {
            deriv: space.derivative_matrix(),
            mass,
            m,
            p,
            u,
            dm,
            vel,
            vel_abs,
            vel_plus,
            vel_minus,
            flux_avg,
            flux_jump,
            endpoint,
            trace_constant,
        })
    }
}
