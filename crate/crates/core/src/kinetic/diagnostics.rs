use nalgebra::DVector;

use super::{AssembledOperators, Trajectory};
use crate::data::ProblemData;
use crate::maxwellian::DiscreteMaxwellian;
use crate::velocity::VelocityOperators;

/// Constants of the energy estimate and the collision-dominance threshold.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityConstants {
    pub omega_min: f64,
    pub e_sup: f64,
    /// `‖E v_h‖_∞ / (2θ)`
    pub c1: f64,
    /// `C_T ‖E‖_∞`
    pub c2: f64,
    /// `3 ‖E‖_∞ / (2θ)`
    pub c3: f64,
    pub trace_constant: f64,
    /// `ω_min h_v / (4 C_1 h_v + 2 C_2)`, infinite when `E ≡ 0`.
    pub eps_threshold: f64,
}

impl StabilityConstants {
    pub fn compute(ops: &AssembledOperators) -> Self {
        Self::new(&ops.maxwellian, &ops.vops, &ops.data, ops.spaces.v.mesh().h())
    }

    /// Constants from the velocity discretization alone, so `ε_{h_v}` can be
    /// checked before assembling the phase-space operators.
    pub fn new(maxw: &DiscreteMaxwellian, vops: &VelocityOperators, data: &ProblemData, h_v: f64) -> Self {
        let theta = maxw.theta();
        let e_sup = data.e_sup();
        let omega_min = data.omega_min();
        let c1 = e_sup * maxw.velocity_sup() / (2.0 * theta);
        let trace_constant = vops.trace_constant;
        let c2 = trace_constant * e_sup;
        let c3 = 1.5 * e_sup / theta;
        let denom = 4.0 * c1 * h_v + 2.0 * c2;
        let eps_threshold = if denom > 0.0 { omega_min * h_v / denom } else { f64::INFINITY };
        Self { omega_min, e_sup, c1, c2, c3, trace_constant, eps_threshold }
    }
}

/// Terms of the energy inequality accumulated along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    pub g0_sq: f64,
    pub final_sq: f64,
    /// `(ω_min / 2ε²) ∫ ‖g − Mρ‖²`
    pub defect: f64,
    /// `ε^{β−1} ∫ ⟨|v_h| [[g]], [[g]]⟩`
    pub jumps: f64,
    /// `(1/ε) ∫ ⟨|v_h| g, g⟩_∂`
    pub boundary: f64,
    pub lhs: f64,
    /// `‖g₀‖² exp(C_3² T / ω_min)`
    pub rhs: f64,
    pub allowance: f64,
    /// Whether `ε ≤ ε_{h_v}`, i.e. whether the bound is asserted.
    pub asserted: bool,
    pub holds: bool,
    /// `‖g^{n+1}‖ ≤ ‖g^n‖` at every step (up to roundoff).
    pub monotone: bool,
    /// `∫ ‖g − Mρ‖²` without weights.
    pub defect_l2t_sq: f64,
}

/// Evaluate the energy inequality with allowance `1 + slack · dt`.
pub fn energy_diagnostics(traj: &Trajectory, ops: &AssembledOperators, slack: f64) -> EnergyReport {
    let k = StabilityConstants::compute(ops);
    let eps = ops.epsilon;
    let beta = ops.beta.as_f64();
    let dt = traj.dt;
    let g0_sq = ops.norm_sq(&traj.states[0].g);
    let mut defect_sq = 0.0;
    let mut jumps = 0.0;
    let mut boundary = 0.0;
    let mut monotone = true;
    let mut prev = g0_sq;
    for s in &traj.states[1..] {
        let d = ops.defect(&s.g);
        defect_sq += dt * ops.norm_sq(&d);
        jumps += dt * AssembledOperators::form(&ops.jump_form, &s.g, &s.g);
        boundary += dt * AssembledOperators::form(&ops.boundary_form, &s.g, &s.g);
        let cur = ops.norm_sq(&s.g);
        if cur > prev * (1.0 + 1e-12) + 1e-300 {
            monotone = false;
        }
        prev = cur;
    }
    let t_final = traj.states.last().unwrap().t - traj.states[0].t;
    let final_sq = prev;
    let defect = k.omega_min / (2.0 * eps * eps) * defect_sq;
    let jumps = eps.powf(beta - 1.0) * jumps;
    let boundary = boundary / eps;
    let lhs = final_sq + defect + jumps + boundary;
    let rhs = g0_sq * (k.c3 * k.c3 * t_final / k.omega_min).exp();
    let allowance = 1.0 + slack * dt;
    let asserted = eps <= k.eps_threshold;
    let holds = lhs.is_finite() && lhs <= rhs * allowance + 1e-14 * g0_sq.max(1e-300);
    EnergyReport {
        g0_sq,
        final_sq,
        defect,
        jumps,
        boundary,
        lhs,
        rhs,
        allowance,
        asserted,
        holds,
        monotone,
        defect_l2t_sq: defect_sq,
    }
}

/// Time level at which the spatial terms of the moment identities are paired
/// with the backward difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualPairing {
    /// New level: the pairing the scheme itself uses, exact up to roundoff.
    BackwardEuler,
    /// Average of the two levels: a first-order consistency residual.
    Midpoint,
}

/// Residuals of the density and current evolution identities over all
/// x-basis functions, with the remainder terms they subtract.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResidual {
    pub rho: DVector<f64>,
    pub current: DVector<f64>,
    pub theta: [DVector<f64>; 5],
}

impl EvolutionResidual {
    pub fn rho_norm(&self) -> f64 {
        self.rho.norm()
    }

    pub fn current_norm(&self) -> f64 {
        self.current.norm()
    }
}

/// `a = θ²/θ_h` and `b = θ/θ_h`, the diffusion and drift coefficients that
/// the moment identities produce with the discrete Maxwellian.
pub fn moment_coefficients(ops: &AssembledOperators) -> (f64, f64) {
    let theta = ops.maxwellian.theta();
    let th = ops.maxwellian.theta_h();
    (theta * theta / th, theta / th)
}

pub fn evolution_residuals(
    old: &DVector<f64>,
    new: &DVector<f64>,
    ops: &AssembledOperators,
    dt: f64,
    pairing: ResidualPairing,
) -> EvolutionResidual {
    let s = &ops.spaces;
    let x = &ops.xops;
    let v = &ops.vops;
    let eps = ops.epsilon;
    let beta = ops.beta.as_f64();
    let gam = &ops.gamma;
    let g = match pairing {
        ResidualPairing::BackwardEuler => new.clone(),
        ResidualPairing::Midpoint => (old + new) * 0.5,
    };
    let rho = ops.rho(&g);
    let j = ops.current(&g);
    let d_rho = (ops.rho(new) - ops.rho(old)) / dt;
    let d_j = (ops.current(new) - ops.current(old)) / dt;
    let defect = ops.defect(&g);
    let dm = s.to_matrix(&defect);
    let nx = s.nx();

    // density identity
    let mut r_rho = &x.mass * &d_rho - &x.deriv * &j;
    let mut theta1 = DVector::zeros(nx);
    for (jr, av) in &x.edges {
        r_rho += jr * (av.dot(&j) + eps.powf(beta - 1.0) * gam.gamma_i * jr.dot(&rho));
        let jump_defect = dm.transpose() * jr;
        theta1 += jr * (-0.5 / eps * v.m.dot(&(&v.vel_abs * jump_defect)));
    }
    r_rho += &x.left * (gam.gamma_b_minus * x.left.dot(&rho) / eps);
    r_rho += &x.right * (gam.gamma_b_plus * x.right.dot(&rho) / eps);
    let theta2 = (&x.right * v.m.dot(&(&v.vel_plus * (dm.transpose() * &x.right)))
        + &x.left * v.m.dot(&(&v.vel_minus * (dm.transpose() * &x.left))))
        * (-1.0 / eps);
    r_rho -= &theta1 * eps.powf(beta) + &theta2;

    // current identity
    let (a, b) = moment_coefficients(ops);
    let vm = ops.maxwellian_velocity_coefficients();
    let e_mass = ops.spaces.x.mass_weighted(|xx| ops.data.e(xx, ops.time));
    let mut r_j =
        &x.mass * &d_j * (eps * eps) + &x.omega_mass * &j + x.deriv.transpose() * &rho * a - &e_mass * &rho * b;
    let mut pen = DVector::zeros(nx);
    for (jr, av) in &x.edges {
        r_j -= av * (a * jr.dot(&rho));
        pen += jr * jr.dot(&rho);
    }
    let transport = &(&(&ops.a + &ops.b) + &ops.d) - &ops.c;
    let eps_theta3 = -(s.to_matrix(&(&transport * &defect)) * &vm);
    let theta4 = pen * (-eps.powf(beta) * 0.5 * v.m.dot(&(&v.vel_abs * &vm)));
    let theta5 = &x.right * (x.right.dot(&rho) * -v.m.dot(&(&v.vel_minus * &vm)))
        + &x.left * (x.left.dot(&rho) * -v.m.dot(&(&v.vel_plus * &vm)));
    r_j -= &eps_theta3 + &theta4 + &theta5;

    let theta3 = eps_theta3 / eps;
    let theta4 = theta4 / eps.powf(0.5 * (beta + 1.0));
    let theta5 = theta5 / eps.sqrt();
    EvolutionResidual { rho: r_rho, current: r_j, theta: [theta1, theta2, theta3, theta4, theta5] }
}

impl AssembledOperators {
    /// Nodal coefficients of `v_h M`, constant `−2θ ∂M` on each velocity cell.
    pub fn maxwellian_velocity_coefficients(&self) -> DVector<f64> {
        let kv1 = self.spaces.v.local_count();
        let theta = self.maxwellian.theta();
        DVector::from_fn(self.spaces.nv(), |i, _| -2.0 * theta * self.maxwellian.slopes()[i / kv1])
    }
}
