//! Tensor-product DG discretization of the weighted kinetic equation.

mod checkpoint;
mod diagnostics;
mod solver;

pub use checkpoint::{checkpoint_string, parse_checkpoint, read_checkpoint, write_checkpoint, CheckpointHeader};
pub use diagnostics::{
    energy_diagnostics, evolution_residuals, EnergyReport, EvolutionResidual, ResidualPairing, StabilityConstants,
};
pub use solver::{KineticSolver, Trajectory};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::data::ProblemData;
use crate::error::{config, Result};
use crate::maxwellian::{DiscreteMaxwellian, GammaCoefficients};
use crate::mesh::Mesh1D;
use crate::norms::Beta;
use crate::projection::l2_project_fn;
use crate::space::{Continuity, DGSpace, SpatialField};
use crate::velocity::VelocityOperators;

/// Broken x- and v-spaces of the phase-space discretization.
#[derive(Debug, Clone)]
pub struct KineticSpaces {
    pub x: Arc<DGSpace>,
    pub v: Arc<DGSpace>,
}

impl KineticSpaces {
    pub fn new(mesh_x: Mesh1D, k_x: usize, mesh_v: Mesh1D, k_v: usize) -> Result<Self> {
        if k_v < 1 {
            return Err(config("k_v >= 1 is required"));
        }
        Ok(Self {
            x: Arc::new(DGSpace::new(mesh_x, k_x, Continuity::Broken)?),
            v: Arc::new(DGSpace::new(mesh_v, k_v, Continuity::Broken)?),
        })
    }

    pub fn nx(&self) -> usize {
        self.x.broken_count()
    }

    pub fn nv(&self) -> usize {
        self.v.broken_count()
    }

    pub fn dim(&self) -> usize {
        self.nx() * self.nv()
    }

    /// Global index of the product of x-dof `xb` and v-dof `vb`: x-cell
    /// major, then v-cell, then the local `(x node, v node)` pair.
    pub fn index(&self, xb: usize, vb: usize) -> usize {
        let (kx1, kv1) = (self.x.local_count(), self.v.local_count());
        let (xc, ix) = (xb / kx1, xb % kx1);
        let (vc, iv) = (vb / kv1, vb % kv1);
        ((xc * self.v.mesh().n_cells() + vc) * kx1 + ix) * kv1 + iv
    }

    /// Inverse of [`index`](Self::index).
    pub fn split(&self, g: usize) -> (usize, usize) {
        let (kx1, kv1) = (self.x.local_count(), self.v.local_count());
        let nvc = self.v.mesh().n_cells();
        let iv = g % kv1;
        let rest = g / kv1;
        let ix = rest % kx1;
        let rest = rest / kx1;
        let vc = rest % nvc;
        let xc = rest / nvc;
        (xc * kx1 + ix, vc * kv1 + iv)
    }

    /// Reshape a phase-space vector into an `nx × nv` matrix.
    pub fn to_matrix(&self, g: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.nx(), self.nv(), |a, c| g[self.index(a, c)])
    }

    pub fn from_matrix(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim());
        for a in 0..self.nx() {
            for c in 0..self.nv() {
                g[self.index(a, c)] = m[(a, c)];
            }
        }
        g
    }

    /// Tensor product `x ⊗ v`.
    pub fn tensor(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.from_matrix(&(x * v.transpose()))
    }

    /// Add `scale · X ⊗ V` (test index first) into `coo`.
    fn kron_into(&self, coo: &mut CooMatrix<f64>, x: &DMatrix<f64>, v: &DMatrix<f64>, scale: f64) {
        let nz = |m: &DMatrix<f64>| -> Vec<(usize, usize, f64)> {
            let mut out = Vec::new();
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let val = m[(i, j)];
                    if val != 0.0 {
                        out.push((i, j, val));
                    }
                }
            }
            out
        };
        let xs = nz(x);
        let vs = nz(v);
        for &(a, b, xv) in &xs {
            for &(c, d, vv) in &vs {
                coo.push(self.index(a, c), self.index(b, d), scale * xv * vv);
            }
        }
    }

    fn kron(&self, terms: &[(&DMatrix<f64>, &DMatrix<f64>, f64)]) -> CsrMatrix<f64> {
        let n = self.dim();
        let mut coo = CooMatrix::new(n, n);
        for (x, v, s) in terms {
            self.kron_into(&mut coo, x, v, *s);
        }
        CsrMatrix::from(&coo)
    }
}

/// Broken x-space matrices shared by the kinetic forms and the moment identities.
#[derive(Debug, Clone)]
pub struct XOperators {
    pub mass: DMatrix<f64>,
    /// `∫ ∂φ_a φ_b`
    pub deriv: DMatrix<f64>,
    /// `(jump row, average row)` per interior edge.
    pub edges: Vec<(DVector<f64>, DVector<f64>)>,
    /// Trace rows at `a` (normal −1) and `b` (normal +1).
    pub left: DVector<f64>,
    pub right: DVector<f64>,
    pub omega_mass: DMatrix<f64>,
}

impl XOperators {
    pub fn new(space: &DGSpace, data: &ProblemData) -> Result<Self> {
        let edges = (1..space.mesh().n_cells()).map(|e| space.jump_average_rows(e)).collect::<Result<_>>()?;
        let (left, right) = space.boundary_rows();
        Ok(Self {
            mass: space.mass(),
            deriv: space.derivative_matrix(),
            edges,
            left,
            right,
            omega_mass: space.mass_weighted(|x| data.omega(x)),
        })
    }

    /// `Σ_e [[φ]] {{φ}}ᵀ`
    pub fn flux_avg(&self) -> DMatrix<f64> {
        let n = self.mass.nrows();
        self.edges.iter().fold(DMatrix::zeros(n, n), |acc, (j, a)| acc + j * a.transpose())
    }

    /// `Σ_e [[φ]] [[φ]]ᵀ`
    pub fn flux_jump(&self) -> DMatrix<f64> {
        let n = self.mass.nrows();
        self.edges.iter().fold(DMatrix::zeros(n, n), |acc, (j, _)| acc + j * j.transpose())
    }

    pub fn boundary(&self) -> DMatrix<f64> {
        &self.left * self.left.transpose() + &self.right * self.right.transpose()
    }
}

/// Matrices of the kinetic forms, the moment maps and the data they were
/// built from. Rows index test functions.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub spaces: KineticSpaces,
    pub maxwellian: DiscreteMaxwellian,
    pub data: ProblemData,
    pub beta: Beta,
    pub epsilon: f64,
    /// Time at which the field-dependent blocks were evaluated.
    pub time: f64,
    pub gamma: GammaCoefficients,
    pub xops: XOperators,
    pub vops: VelocityOperators,
    pub mass: CsrMatrix<f64>,
    /// Transport form without the interior penalty.
    pub a_base: CsrMatrix<f64>,
    /// Interior penalty `⟨|v_h|/2 [[w]], [[z]]⟩`, scaled by `ε^β` inside `a`.
    pub a_penalty: CsrMatrix<f64>,
    pub a: CsrMatrix<f64>,
    pub b: CsrMatrix<f64>,
    pub d: CsrMatrix<f64>,
    pub q: CsrMatrix<f64>,
    pub c: CsrMatrix<f64>,
    /// `Σ_e ⟨|v_h| [[g]], [[g]]⟩` over interior x-edges.
    pub jump_form: CsrMatrix<f64>,
    /// `⟨|v_h| g, g⟩` over both x-boundaries.
    pub boundary_form: CsrMatrix<f64>,
    pub p_rho: CsrMatrix<f64>,
    pub p_j: CsrMatrix<f64>,
}

fn moment_map(spaces: &KineticSpaces, weights: &DVector<f64>) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(spaces.nx(), spaces.dim());
    for a in 0..spaces.nx() {
        for (c, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                coo.push(a, spaces.index(a, c), w);
            }
        }
    }
    CsrMatrix::from(&coo)
}

impl AssembledOperators {
    pub fn assemble(
        spaces: &KineticSpaces,
        maxwellian: &DiscreteMaxwellian,
        data: &ProblemData,
        beta: Beta,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(config(format!("epsilon must be positive, got {epsilon}")));
        }
        data.validate()?;
        let (a, b) = data.x_domain;
        if spaces.x.mesh().a() != a || spaces.x.mesh().b() != b {
            return Err(config("x mesh does not match the problem domain"));
        }
        if (maxwellian.theta() - data.theta).abs() > 0.0 {
            return Err(config("Maxwellian temperature differs from the problem theta"));
        }
        let gamma = maxwellian.gamma_edges()?;
        let xops = XOperators::new(&spaces.x, data)?;
        let vops = VelocityOperators::new(&spaces.v, maxwellian)?;

        let mass = spaces.kron(&[(&xops.mass, &vops.mass, 1.0)]);
        let flux_avg_x = xops.flux_avg();
        let flux_jump_x = xops.flux_jump();
        let right = &xops.right * xops.right.transpose();
        let left = &xops.left * xops.left.transpose();
        let a_base = spaces.kron(&[
            (&xops.deriv, &vops.vel, -1.0),
            (&flux_avg_x, &vops.vel, 1.0),
            (&right, &vops.vel_plus, 1.0),
            (&left, &vops.vel_minus, 1.0),
        ]);
        let a_penalty = spaces.kron(&[(&flux_jump_x, &vops.vel_abs, 0.5)]);
        let a_op = &a_base + &(&a_penalty * epsilon.powf(beta.as_f64()));
        let mut rank_one = &vops.p * vops.p.transpose();
        rank_one -= &vops.mass;
        let q = spaces.kron(&[(&xops.omega_mass, &rank_one, 1.0)]);
        let jump_form = spaces.kron(&[(&flux_jump_x, &vops.vel_abs, 1.0)]);
        let bdry = xops.boundary();
        let boundary_form = spaces.kron(&[(&bdry, &vops.vel_abs, 1.0)]);
        let p_rho = moment_map(spaces, &vops.p);
        let p_j = moment_map(spaces, &(&vops.u / epsilon));

        let mut ops = Self {
            spaces: spaces.clone(),
            maxwellian: maxwellian.clone(),
            data: data.clone(),
            beta,
            epsilon,
            time: f64::NAN,
            gamma,
            xops,
            vops,
            mass,
            a_base,
            a_penalty,
            a: a_op,
            b: CsrMatrix::zeros(0, 0),
            d: CsrMatrix::zeros(0, 0),
            q,
            c: CsrMatrix::zeros(0, 0),
            jump_form,
            boundary_form,
            p_rho,
            p_j,
        };
        ops.set_time(0.0);
        Ok(ops)
    }

    /// Re-evaluate the field-dependent blocks `B`, `D`, `C` at time `t`.
    pub fn set_time(&mut self, t: f64) {
        if self.time == t {
            return;
        }
        let x = &self.spaces.x;
        let data = &self.data;
        let e_mass = x.mass_weighted(|xx| data.e(xx, t));
        let e_abs = x.mass_weighted(|xx| data.e(xx, t).abs());
        let v = &self.vops;
        let boundary = &v.endpoint * v.p.transpose();
        let s = &self.spaces;
        self.b = s.kron(&[(&e_mass, &v.deriv, -1.0), (&e_mass, &v.flux_avg, 1.0), (&e_abs, &v.flux_jump, 0.5)]);
        self.d = s.kron(&[(&e_mass, &boundary, 1.0)]);
        self.c = s.kron(&[(&e_mass, &v.vel, 0.5 / self.maxwellian.theta())]);
        self.time = t;
    }

    pub fn field_is_time_dependent(&self) -> bool {
        self.data.e_field.is_time_dependent()
    }

    /// `A + B + D − C − Q/ε`
    pub fn spatial_operator(&self) -> CsrMatrix<f64> {
        let transport = &(&(&self.a + &self.b) + &self.d) - &self.c;
        &transport - &(&self.q * (1.0 / self.epsilon))
    }

    /// `g₀ = ρ_{0,h} ⊗ M` with `ρ_{0,h}` the L² projection of the initial density.
    pub fn initial_state(&self) -> Result<KineticState> {
        let data = self.data.clone();
        let rho = l2_project_fn(move |x| data.rho0(x), self.spaces.x.clone())?;
        Ok(self.isotropic_state(&rho.coeffs, 0.0))
    }

    pub fn isotropic_state(&self, rho: &DVector<f64>, t: f64) -> KineticState {
        KineticState { g: self.spaces.tensor(rho, &self.vops.m), epsilon: self.epsilon, beta: self.beta, t }
    }

    pub fn rho(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.p_rho * g
    }

    pub fn current(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.p_j * g
    }

    /// `J = −(2θ/ε) (∂M, g − Mρ)`
    pub fn current_from_defect(&self, g: &DVector<f64>) -> DVector<f64> {
        let defect = g - self.spaces.tensor(&self.rho(g), &self.vops.m);
        let gm = self.spaces.to_matrix(&defect);
        gm * &self.vops.dm * (-2.0 * self.maxwellian.theta() / self.epsilon)
    }

    /// `g − M ρ(g)`
    pub fn defect(&self, g: &DVector<f64>) -> DVector<f64> {
        g - self.spaces.tensor(&self.rho(g), &self.vops.m)
    }

    pub fn moments(&self, state: &KineticState) -> (SpatialField, SpatialField) {
        let rho = SpatialField { space: self.spaces.x.clone(), coeffs: self.rho(&state.g) };
        let j = SpatialField { space: self.spaces.x.clone(), coeffs: self.current(&state.g) };
        (rho, j)
    }

    pub fn norm_sq(&self, g: &DVector<f64>) -> f64 {
        g.dot(&(&self.mass * g))
    }

    pub fn form(m: &CsrMatrix<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        z.dot(&(m * w))
    }
}

/// Coefficients of `g` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub g: DVector<f64>,
    pub epsilon: f64,
    pub beta: Beta,
    pub t: f64,
}
