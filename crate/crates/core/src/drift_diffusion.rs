//! The discrete drift-diffusion system obtained in the small-ε limit.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::ProblemData;
use crate::error::{config, Error, Result};
use crate::linalg::{self, CheckedLu};
use crate::maxwellian::DiscreteMaxwellian;
use crate::norms::Beta;
use crate::projection::{l2_project, l2_project_fn};
use crate::quadrature::Quadrature;
use crate::space::{Continuity, DGSpace, SpatialField};

/// Which temperature enters the limit system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaUse {
    /// Diffusion `θ`, drift `1`.
    Theta,
    /// Diffusion `θ_h`, drift `1`.
    ThetaH,
    /// Diffusion `θ²/θ_h`, drift `θ/θ_h`: the coefficients produced by the
    /// moment equations of the kinetic scheme with the discrete Maxwellian.
    Matched,
}

impl ThetaUse {
    /// `(diffusion, drift)` coefficients.
    pub fn coefficients(self, maxw: &DiscreteMaxwellian) -> (f64, f64) {
        let (t, th) = (maxw.theta(), maxw.theta_h());
        match self {
            ThetaUse::Theta => (t, 1.0),
            ThetaUse::ThetaH => (th, 1.0),
            ThetaUse::Matched => (t * t / th, t / th),
        }
    }
}

/// Mixed system for `(ρ, J)`; ρ lives in a zero-trace space, J in the
/// broken space.
#[derive(Debug, Clone)]
pub struct DdOperators {
    pub beta: Beta,
    pub diffusion: f64,
    pub drift: f64,
    pub gamma_i: f64,
    pub data: ProblemData,
    pub rho_space: Arc<DGSpace>,
    pub j_space: Arc<DGSpace>,
    pub time: f64,
    /// `(ρ, q)` on the ρ-space.
    pub mass_rho: DMatrix<f64>,
    /// `−(J, ∂q) + ⟨{{J}}, [[q]]⟩`: rows q, columns J.
    pub k_jq: DMatrix<f64>,
    /// `⟨γ_I [[ρ]], [[q]]⟩`
    pub penalty: DMatrix<f64>,
    pub omega_mass: DMatrix<f64>,
    /// `a (∂ρ, τ) − a ⟨[[ρ]], {{τ}}⟩ − b (Eρ, τ)`: rows τ, columns ρ.
    pub k_rt: DMatrix<f64>,
    /// `J = −current_map · ρ`
    pub current_map: DMatrix<f64>,
    /// `penalty − k_jq · current_map`
    pub reduced: DMatrix<f64>,
    deriv: DMatrix<f64>,
    flux: DMatrix<f64>,
}

impl DdOperators {
    pub fn assemble(
        space_x: &DGSpace,
        maxw: &DiscreteMaxwellian,
        data: &ProblemData,
        beta: Beta,
        theta_use: ThetaUse,
    ) -> Result<Self> {
        let gamma = maxw.gamma_edges()?;
        let (a, b) = theta_use.coefficients(maxw);
        Self::with_coefficients(space_x, data, beta, a, b, gamma.gamma_i)
    }

    pub fn with_coefficients(
        space_x: &DGSpace,
        data: &ProblemData,
        beta: Beta,
        diffusion: f64,
        drift: f64,
        gamma_i: f64,
    ) -> Result<Self> {
        data.validate()?;
        if space_x.degree() == 0 && beta == Beta::Zero {
            return Err(config("k_x = 0 with beta = 0 locks the continuous limit space"));
        }
        if !(gamma_i > 0.0) {
            return Err(config("the limit system needs a positive interior flux coefficient"));
        }
        let j_space = Arc::new(space_x.with_continuity(Continuity::Broken)?);
        let rho_space = Arc::new(space_x.with_continuity(beta.limit_continuity())?);
        let ext = rho_space.extension();
        let n = j_space.broken_count();
        let mass = j_space.mass();
        let deriv = j_space.derivative_matrix();
        let mut flux = DMatrix::zeros(n, n);
        let mut jump = DMatrix::zeros(n, n);
        for e in 1..j_space.mesh().n_cells() {
            let (jr, av) = j_space.jump_average_rows(e)?;
            flux += &jr * av.transpose();
            jump += &jr * jr.transpose();
        }
        let mut ops = Self {
            beta,
            diffusion,
            drift,
            gamma_i,
            data: data.clone(),
            mass_rho: ext.transpose() * &mass * &ext,
            k_jq: ext.transpose() * (-deriv.clone() + &flux),
            penalty: ext.transpose() * jump * &ext * gamma_i,
            omega_mass: j_space.mass_weighted(|x| data.omega(x)),
            k_rt: DMatrix::zeros(0, 0),
            current_map: DMatrix::zeros(0, 0),
            reduced: DMatrix::zeros(0, 0),
            rho_space,
            j_space,
            time: f64::NAN,
            deriv,
            flux,
        };
        ops.set_time(0.0)?;
        Ok(ops)
    }
}

impl DdOperators {
    /// Re-evaluate the field-dependent blocks at time `t`.
    pub fn set_time(&mut self, t: f64) -> Result<()> {
        if self.time == t {
            return Ok(());
        }
        let ext = self.rho_space.extension();
        let data = &self.data;
        let e_mass = self.j_space.mass_weighted(|x| data.e(x, t));
        let k = (self.deriv.transpose() - self.flux.transpose()) * self.diffusion - e_mass * self.drift;
        self.k_rt = k * ext;
        let chol = linalg::cholesky(&self.omega_mass)?;
        self.current_map = chol.solve(&self.k_rt);
        self.reduced = &self.penalty - &self.k_jq * &self.current_map;
        self.time = t;
        Ok(())
    }

    pub fn field_is_time_dependent(&self) -> bool {
        self.data.e_field.is_time_dependent()
    }

    /// Broken coefficients of `J` for a given `ρ` at the current time.
    pub fn current(&self, rho: &DVector<f64>) -> DVector<f64> {
        -(&self.current_map * rho)
    }

    /// `ρ(0)` projects `ρ_{0,h}` onto the ρ-space; `J(0)` follows from the
    /// constitutive equation.
    pub fn initial_state(&mut self) -> Result<DDState> {
        let data = self.data.clone();
        let rho0h = l2_project_fn(move |x| data.rho0(x), self.j_space.clone())?;
        self.state_from_broken(&rho0h, 0.0)
    }

    pub fn state_from_broken(&mut self, rho0h: &SpatialField, t: f64) -> Result<DDState> {
        self.set_time(t)?;
        let rho = l2_project(rho0h, self.rho_space.clone())?;
        let j = SpatialField::new(self.j_space.clone(), self.current(&rho.coeffs))?;
        Ok(DDState { rho, j, t })
    }

    /// `(f(t), q)` over the ρ-space.
    pub fn forcing_load(&self, f: &dyn Fn(f64, f64) -> f64, t: f64) -> DVector<f64> {
        self.rho_space.restrict(&self.j_space.load(|x| f(x, t)))
    }
}

/// Density and current of the limit system at one time level.
#[derive(Debug, Clone)]
pub struct DDState {
    pub rho: SpatialField,
    pub j: SpatialField,
    pub t: f64,
}

pub type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Backward Euler for the limit system with `J` eliminated cellwise.
pub struct DdSolver {
    ops: DdOperators,
    dt: f64,
    lu: Option<CheckedLu>,
    forcing: Option<Forcing>,
}

pub const DD_SOLVE_TOLERANCE: f64 = 1e-12;

impl DdSolver {
    pub fn new(ops: DdOperators, dt: f64, forcing: Option<Forcing>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { ops, dt, lu: None, forcing })
    }

    pub fn ops(&self) -> &DdOperators {
        &self.ops
    }

    pub fn ops_mut(&mut self) -> &mut DdOperators {
        &mut self.ops
    }

    fn rhs(&self, state: &DDState, t_new: f64) -> DVector<f64> {
        let mut rhs = &self.ops.mass_rho * &state.rho.coeffs;
        if let Some(f) = &self.forcing {
            rhs += self.ops.forcing_load(f.as_ref(), t_new) * self.dt;
        }
        rhs
    }

    pub fn step(&mut self, state: &DDState) -> Result<DDState> {
        let t_new = state.t + self.dt;
        let stale = self.lu.is_none() || (self.ops.field_is_time_dependent() && self.ops.time != t_new);
        if stale {
            self.ops.set_time(t_new)?;
            let system = &self.ops.mass_rho + &self.ops.reduced * self.dt;
            self.lu = Some(CheckedLu::new(system)?);
        }
        let rhs = self.rhs(state, t_new);
        let rho = self.lu.as_ref().unwrap().solve(&rhs, DD_SOLVE_TOLERANCE)?;
        let j = self.ops.current(&rho);
        Ok(DDState {
            rho: SpatialField::new(self.ops.rho_space.clone(), rho)?,
            j: SpatialField::new(self.ops.j_space.clone(), j)?,
            t: t_new,
        })
    }

    /// Same step through the coupled `(ρ, J)` block system.
    pub fn step_coupled(&mut self, state: &DDState) -> Result<DDState> {
        let t_new = state.t + self.dt;
        self.ops.set_time(t_new)?;
        let o = &self.ops;
        let (nr, nj) = (o.mass_rho.nrows(), o.omega_mass.nrows());
        let mut m = DMatrix::zeros(nr + nj, nr + nj);
        m.view_mut((0, 0), (nr, nr)).copy_from(&(&o.mass_rho / self.dt + &o.penalty));
        m.view_mut((0, nr), (nr, nj)).copy_from(&o.k_jq);
        m.view_mut((nr, 0), (nj, nr)).copy_from(&o.k_rt);
        m.view_mut((nr, nr), (nj, nj)).copy_from(&o.omega_mass);
        let mut rhs = DVector::zeros(nr + nj);
        rhs.rows_mut(0, nr).copy_from(&(self.rhs(state, t_new) / self.dt));
        let sol = CheckedLu::new(m)?.solve(&rhs, DD_SOLVE_TOLERANCE)?;
        Ok(DDState {
            rho: SpatialField::new(o.rho_space.clone(), sol.rows(0, nr).into_owned())?,
            j: SpatialField::new(o.j_space.clone(), sol.rows(nr, nj).into_owned())?,
            t: t_new,
        })
    }

    pub fn run(&mut self, initial: DDState, n_steps: usize) -> Result<Vec<DDState>> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(initial);
        for _ in 0..n_steps {
            let next = self.step(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }
}

/// Terms of the limit energy bound along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DdEnergyReport {
    /// `max_n (‖ρⁿ‖² + (ω_min/a) Σ_{m≤n} dt ‖J^m‖²) / (e^{c tₙ} ‖ρ_{0,h}‖²)` with
    /// `c = b²‖E‖²/(a ω_min)`.
    pub worst_ratio: f64,
    /// Same ratio against `e^{‖E‖ tₙ/(θ ω_min)}`, the form with `‖E‖` to the first power.
    pub worst_ratio_linear: f64,
    pub allowance: f64,
    pub holds: bool,
    pub holds_linear: bool,
}

pub fn dd_energy_report(traj: &[DDState], ops: &DdOperators, rho0h_sq: f64, dt: f64, slack: f64) -> DdEnergyReport {
    let (a, b) = (ops.diffusion, ops.drift);
    let omega_min = ops.data.omega_min();
    let e = ops.data.e_sup();
    let mass = ops.j_space.mass();
    let c_sq = b * b * e * e / (a * omega_min);
    let c_lin = e / (a * omega_min);
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    for s in &traj[1..] {
        let j = &s.j.coeffs;
        acc += dt * j.dot(&(&mass * j));
        let r = s.rho.broken();
        let lhs = r.dot(&(&mass * &r)) + omega_min / a * acc;
        let t = s.t - traj[0].t;
        if rho0h_sq > 0.0 {
            worst = worst.max(lhs / (rho0h_sq * (c_sq * t).exp()));
            worst_lin = worst_lin.max(lhs / (rho0h_sq * (c_lin * t).exp()));
        } else if lhs > 0.0 {
            worst = f64::INFINITY;
            worst_lin = f64::INFINITY;
        }
    }
    let allowance = 1.0 + slack * dt;
    DdEnergyReport {
        worst_ratio: worst,
        worst_ratio_linear: worst_lin,
        allowance,
        holds: worst <= allowance,
        holds_linear: worst_lin <= allowance,
    }
}

/// Smooth exact solutions of the forced limit equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManufacturedFamily {
    /// `ρ = A e^{−λt} sin(m π x̂)`
    SineDecay { amplitude: f64, mode: u32, lambda: f64 },
    /// `ρ = A x̂ (1 − x̂)`, steady.
    SteadyQuadratic { amplitude: f64 },
}

/// Exact `(ρ, J)` and the forcing that makes them solve
/// `∂_t ρ + ∂_x J = f`, `ω J = −a ∂_x ρ + b E ρ`.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub family: ManufacturedFamily,
    pub data: ProblemData,
    pub diffusion: f64,
    pub drift: f64,
}

impl Manufactured {
    pub fn new(family: ManufacturedFamily, data: ProblemData, diffusion: f64, drift: f64) -> Self {
        Self { family, data, diffusion, drift }
    }

    fn len(&self) -> f64 {
        self.data.x_domain.1 - self.data.x_domain.0
    }

    /// `(ρ, ∂_x ρ, ∂_xx ρ, ∂_t ρ)`
    pub fn rho_derivatives(&self, x: f64, t: f64) -> (f64, f64, f64, f64) {
        let xh = self.data.unit(x);
        let l = self.len();
        match self.family {
            ManufacturedFamily::SineDecay { amplitude, mode, lambda } => {
                let k = mode as f64 * PI;
                let amp = amplitude * (-lambda * t).exp();
                let (s, c) = (k * xh).sin_cos();
                let r = amp * s;
                (r, amp * c * k / l, -r * (k / l).powi(2), -lambda * r)
            }
            ManufacturedFamily::SteadyQuadratic { amplitude } => {
                (amplitude * xh * (1.0 - xh), amplitude * (1.0 - 2.0 * xh) / l, -2.0 * amplitude / (l * l), 0.0)
            }
        }
    }

    pub fn rho(&self, x: f64, t: f64) -> f64 {
        self.rho_derivatives(x, t).0
    }

    pub fn current(&self, x: f64, t: f64) -> f64 {
        let (r, rx, _, _) = self.rho_derivatives(x, t);
        (-self.diffusion * rx + self.drift * self.data.e(x, t) * r) / self.data.omega(x)
    }

    pub fn current_dx(&self, x: f64, t: f64) -> f64 {
        let (r, rx, rxx, _) = self.rho_derivatives(x, t);
        let (e, ex) = (self.data.e(x, t), self.data.e_dx(x, t));
        let (w, wx) = (self.data.omega(x), self.data.omega_dx(x));
        let num = -self.diffusion * rx + self.drift * e * r;
        let num_x = -self.diffusion * rxx + self.drift * (ex * r + e * rx);
        (num_x * w - num * wx) / (w * w)
    }

    pub fn forcing(&self, x: f64, t: f64) -> f64 {
        self.rho_derivatives(x, t).3 + self.current_dx(x, t)
    }

    pub fn forcing_fn(&self) -> Forcing {
        let me = self.clone();
        Arc::new(move |x, t| me.forcing(x, t))
    }

    /// Problem data whose initial density is this solution at `t = 0`.
    pub fn initial_density(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.rho(x, 0.0)
    }
}

/// `‖u_h − u‖_{L²}` for broken coefficients, with a rule finer than assembly.
pub fn l2_error(space: &DGSpace, broken: &DVector<f64>, exact: impl Fn(f64) -> f64) -> Result<f64> {
    if broken.len() != space.broken_count() {
        return Err(Error::Config("coefficient length does not match the space".into()));
    }
    let q = Quadrature::gauss_legendre(space.degree() + 6);
    let np = space.local_count();
    let mut sum = 0.0;
    for c in 0..space.mesh().n_cells() {
        let (l, r) = space.mesh().cell(c);
        sum += q.integrate(l, r, |x| {
            let t = 2.0 * (x - l) / (r - l) - 1.0;
            let uh: f64 = (0..np).map(|i| broken[c * np + i] * space.basis().value(i, t)).sum();
            (uh - exact(x)).powi(2)
        });
    }
    Ok(sum.sqrt())
}

/// Text checkpoint of a limit state with broken coefficients of both fields:
///
/// ```text
/// # apdg drift-diffusion checkpoint
/// # n_x=8,k_x=1,beta=0,t=1e-1
/// index,x_cell,x_node,rho,j
/// ```
pub fn dd_checkpoint_string(state: &DDState) -> String {
    let space = &state.j.space;
    let beta = match state.rho.space.continuity() {
        Continuity::ContinuousZeroTrace | Continuity::Continuous => 0,
        _ => 1,
    };
    let mut out = String::from("# apdg drift-diffusion checkpoint\n");
    out += &format!("# n_x={},k_x={},beta={},t={:e}\n", space.mesh().n_cells(), space.degree(), beta, state.t);
    out += "index,x_cell,x_node,rho,j\n";
    let rho = state.rho.broken();
    let np = space.local_count();
    for i in 0..space.broken_count() {
        out += &format!("{},{},{},{:e},{:e}\n", i, i / np, i % np, rho[i], state.j.coeffs[i]);
    }
    out
}

/// Parsed limit checkpoint: `(n_x, k_x, beta, t, broken ρ, J)`.
pub type DdCheckpoint = (usize, usize, Beta, f64, DVector<f64>, DVector<f64>);

pub fn parse_dd_checkpoint(text: &str) -> Result<DdCheckpoint> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    let mut lines = text.lines();
    if lines.next() != Some("# apdg drift-diffusion checkpoint") {
        return Err(bad("missing magic line"));
    }
    let meta = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| bad("missing header line"))?;
    let mut n_x = None;
    let mut k_x = None;
    let mut beta = None;
    let mut t = None;
    for kv in meta.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("bad header entry"))?;
        match k {
            "n_x" => n_x = v.parse().ok(),
            "k_x" => k_x = v.parse().ok(),
            "beta" => beta = v.parse::<u8>().ok().and_then(|b| Beta::from_int(b).ok()),
            "t" => t = v.parse().ok(),
            _ => return Err(bad("unknown header entry")),
        }
    }
    let (n_x, k_x, beta, t): (usize, usize, Beta, f64) = match (n_x, k_x, beta, t) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(bad("incomplete header")),
    };
    if lines.next() != Some("index,x_cell,x_node,rho,j") {
        return Err(bad("missing column header"));
    }
    let n = n_x * (k_x + 1);
    let mut rho = DVector::zeros(n);
    let mut j = DVector::zeros(n);
    let mut seen = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 || cols[0].parse::<usize>().ok() != Some(seen) || seen >= n {
            return Err(bad("malformed row"));
        }
        rho[seen] = cols[3].parse().map_err(|_| bad("bad rho value"))?;
        j[seen] = cols[4].parse().map_err(|_| bad("bad j value"))?;
        seen += 1;
    }
    if seen != n {
        return Err(bad("row count does not match the header"));
    }
    Ok((n_x, k_x, beta, t, rho, j))
}
