use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StudyKind;
use crate::data::{DensityPreset, FieldPreset, OmegaPreset, ProblemData};
use crate::drift_diffusion::{ManufacturedFamily, ThetaUse};
use crate::error::{Error, Result};
use crate::kinetic::StabilityConstants;
use crate::maxwellian::{check_admissible, DiscreteMaxwellian};
use crate::mesh::Mesh1D;
use crate::norms::Beta;
use crate::space::DGSpace;
use crate::velocity::VelocityOperators;

/// Physical data shared by every run of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default = "default_domain")]
    pub x_domain: (f64, f64),
    #[serde(default = "one")]
    pub theta: f64,
    /// Half-width of the velocity domain.
    #[serde(default = "default_l_v")]
    pub l_v: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_omega")]
    pub omega: OmegaPreset,
    #[serde(default = "default_field")]
    pub e_field: FieldPreset,
    #[serde(default = "default_rho0")]
    pub rho0: DensityPreset,
}

/// Discretization parameters. Studies read the lists they sweep over and
/// take the first entry of the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "default_n_x")]
    pub n_x: Vec<usize>,
    #[serde(default = "default_n_v")]
    pub n_v: Vec<usize>,
    #[serde(default = "default_k")]
    pub k_x: Vec<usize>,
    #[serde(default = "default_k")]
    pub k_v: Vec<usize>,
    #[serde(default = "default_beta")]
    pub beta: Vec<u8>,
    #[serde(default = "default_eps")]
    pub epsilon: Vec<f64>,
    /// `Δt = dt_factor · min(h_x, √ε)` for kinetic runs, `dt_factor · h_x²`
    /// for the limit h-sweep.
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    /// Explicit time steps for Δt-refinement checks.
    #[serde(default = "default_dt")]
    pub dt: Vec<f64>,
    /// Cell counts for the projection and interpolant checks.
    #[serde(default = "default_projection_cells")]
    pub projection_cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Upper bound `C` in `ε / h_x ≤ C`.
    #[serde(default = "one")]
    pub eps_over_h_max: f64,
    /// Allowance `1 + slack · Δt` on asserted energy bounds.
    #[serde(default = "default_slack")]
    pub energy_slack: f64,
    /// Coefficients of the limit system the kinetic runs are compared with.
    #[serde(default = "default_theta_use")]
    pub theta_use: ThetaUse,
    /// Cap on `max / min` for quantities expected to stay bounded in ε.
    #[serde(default = "default_spread")]
    pub spread_max: f64,
    #[serde(default = "default_samples")]
    pub random_samples: usize,
}

/// Parameters of the discrete Maxwellian certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellianGrid {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// `L = l_factor · √θ`
    #[serde(default = "default_l_factor")]
    pub l_factor: f64,
    /// `h_v = h_factor · √θ`
    #[serde(default = "default_h_factors")]
    pub h_factors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub kind: StudyKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_physics")]
    pub physics: Physics,
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default = "default_limits")]
    pub limits: Limits,
    #[serde(default = "default_maxwellian")]
    pub maxwellian: MaxwellianGrid,
    #[serde(default = "default_manufactured")]
    pub manufactured: ManufacturedFamily,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn require(errs: &mut Vec<String>, cond: bool, msg: String) {
    if !cond {
        errs.push(msg);
    }
}

fn one() -> f64 {
    1.0
}
fn default_domain() -> (f64, f64) {
    (0.0, 1.0)
}
fn default_l_v() -> f64 {
    6.0
}
fn default_t_end() -> f64 {
    0.1
}
fn default_omega() -> OmegaPreset {
    OmegaPreset::Constant { value: 1.0 }
}
fn default_field() -> FieldPreset {
    FieldPreset::Linear { left: 0.5, right: 1.0 }
}
fn default_rho0() -> DensityPreset {
    DensityPreset::Sine { amplitude: 1.0, mode: 1 }
}
fn default_n_x() -> Vec<usize> {
    vec![16]
}
fn default_n_v() -> Vec<usize> {
    vec![16]
}
fn default_k() -> Vec<usize> {
    vec![1]
}
fn default_beta() -> Vec<u8> {
    vec![0, 1]
}
fn default_eps() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4, 1e-5]
}
fn default_dt_factor() -> f64 {
    0.1
}
fn default_dt() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3, 5e-4]
}
fn default_projection_cells() -> Vec<usize> {
    vec![8, 16, 32, 64]
}
fn default_slack() -> f64 {
    10.0
}
fn default_theta_use() -> ThetaUse {
    ThetaUse::ThetaH
}
fn default_spread() -> f64 {
    10.0
}
fn default_samples() -> usize {
    100
}
fn default_thetas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_l_factor() -> f64 {
    6.0
}
fn default_h_factors() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}
fn default_physics() -> Physics {
    toml::from_str("").expect("physics defaults")
}
fn default_grid() -> Grid {
    toml::from_str("").expect("grid defaults")
}
fn default_limits() -> Limits {
    toml::from_str("").expect("limit defaults")
}
fn default_maxwellian() -> MaxwellianGrid {
    toml::from_str("").expect("maxwellian defaults")
}
fn default_manufactured() -> ManufacturedFamily {
    ManufacturedFamily::SineDecay { amplitude: 1.0, mode: 1, lambda: 1.0 }
}

impl StudyConfig {
    /// Preset for `kind`: the field defaults with the grid adjusted to the
    /// study's desk-scale sizes.
    pub fn new(kind: StudyKind) -> Self {
        let mut cfg = Self::defaults(kind);
        match kind {
            StudyKind::HSweep => cfg.grid.n_x = vec![8, 16, 32, 64],
            StudyKind::Stability => {
                cfg.grid.epsilon = vec![1e-2, 1e-3, 1e-4];
            }
            StudyKind::Identities => {
                cfg.physics.l_v = 3.0;
                cfg.grid.n_x = vec![4];
                cfg.grid.n_v = vec![4];
                cfg.grid.epsilon = vec![1e-2];
            }
            StudyKind::EpsSweep | StudyKind::Maxwellian => {}
        }
        cfg
    }

    /// Field defaults, the same as a config file that only sets `kind`.
    pub fn defaults(kind: StudyKind) -> Self {
        Self {
            kind,
            seed: 0,
            out: None,
            physics: default_physics(),
            grid: default_grid(),
            limits: default_limits(),
            maxwellian: default_maxwellian(),
            manufactured: default_manufactured(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse a config for a known study kind. A missing `kind` key is filled
    /// in; a different one is an error.
    pub fn from_toml_for(kind: StudyKind, text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        match table.get("kind") {
            None => {
                table.insert("kind".into(), toml::Value::String(kind.name().into()));
            }
            Some(toml::Value::String(k)) if k == kind.name() => {}
            Some(other) => {
                return Err(Error::Config(format!("config is for study {other}, not {}", kind.name())));
            }
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_for(kind: StudyKind, path: &Path) -> Result<Self> {
        let text = read(path)?;
        Self::from_toml_for(kind, &text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn problem_data(&self) -> ProblemData {
        ProblemData {
            x_domain: self.physics.x_domain,
            theta: self.physics.theta,
            omega: self.physics.omega.clone(),
            e_field: self.physics.e_field.clone(),
            rho0: self.physics.rho0.clone(),
        }
    }

    pub fn betas(&self) -> Result<Vec<Beta>> {
        self.grid.beta.iter().map(|&b| Beta::from_int(b)).collect()
    }

    pub fn x_mesh(&self, n: usize) -> Result<Mesh1D> {
        Mesh1D::new(self.physics.x_domain.0, self.physics.x_domain.1, n)
    }

    pub fn v_mesh(&self, n: usize) -> Result<Mesh1D> {
        Mesh1D::symmetric(self.physics.l_v, n)
    }

    /// `ε_{h_v}` for the velocity grid `(n_v, k_v)`.
    pub fn eps_threshold(&self, n_v: usize, k_v: usize) -> Result<f64> {
        let mesh = self.v_mesh(n_v)?;
        let maxw = DiscreteMaxwellian::build(mesh.clone(), self.physics.theta)?;
        let space = DGSpace::broken(mesh.clone(), k_v)?;
        let vops = VelocityOperators::new(&space, &maxw)?;
        Ok(StabilityConstants::new(&maxw, &vops, &self.problem_data(), mesh.h()).eps_threshold)
    }

    /// Check every assumption the study's assertions rely on. All problems
    /// are collected into one error.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let p = &self.physics;
        let g = &self.grid;
        if let Err(e) = self.problem_data().validate() {
            errs.push(e.to_string());
        }
        require(
            &mut errs,
            p.t_end > 0.0 && p.t_end.is_finite(),
            format!("physics.t_end must be positive, got {}", p.t_end),
        );
        require(&mut errs, g.dt_factor > 0.0, format!("grid.dt_factor must be positive, got {}", g.dt_factor));
        require(&mut errs, self.limits.energy_slack >= 0.0, "limits.energy_slack must be non-negative".into());
        require(&mut errs, self.limits.eps_over_h_max > 0.0, "limits.eps_over_h_max must be positive".into());
        for &e in &g.epsilon {
            require(&mut errs, e > 0.0 && e.is_finite(), format!("epsilon must be positive, got {e}"));
        }
        for &d in &g.dt {
            require(&mut errs, d > 0.0 && d.is_finite(), format!("dt must be positive, got {d}"));
        }
        for &b in &g.beta {
            require(&mut errs, b <= 1, format!("beta must be 0 or 1, got {b}"));
        }
        for &n in g.n_x.iter().chain(&g.projection_cells) {
            require(&mut errs, n >= 2, format!("cell counts must be at least 2, got {n}"));
        }
        let kinetic = matches!(self.kind, StudyKind::EpsSweep | StudyKind::Stability | StudyKind::Identities);
        let limit = matches!(self.kind, StudyKind::EpsSweep | StudyKind::HSweep | StudyKind::Stability);
        if limit {
            for &k in &g.k_x {
                if k == 0 && g.beta.contains(&0) {
                    errs.push("k_x = 0 with beta = 0 is rejected: the continuous limit space locks".into());
                }
            }
        }
        match self.kind {
            StudyKind::EpsSweep | StudyKind::Stability => {
                require(
                    &mut errs,
                    g.epsilon.len() >= 3,
                    "an epsilon sweep needs at least 3 values for a slope fit".into(),
                );
            }
            StudyKind::HSweep => {
                require(&mut errs, g.n_x.len() >= 3, "an h-sweep needs at least 3 values of n_x".into());
                require(&mut errs, g.k_x.iter().all(|&k| k >= 1), "the h-sweep needs k_x >= 1".into());
            }
            StudyKind::Identities => {
                require(&mut errs, g.dt.len() >= 3, "dt refinement needs at least 3 time steps".into());
                require(&mut errs, g.projection_cells.len() >= 2, "projection checks need at least 2 meshes".into());
                require(&mut errs, self.limits.random_samples >= 1, "limits.random_samples must be positive".into());
            }
            StudyKind::Maxwellian => {
                let m = &self.maxwellian;
                require(
                    &mut errs,
                    m.h_factors.len() >= 3,
                    "the Maxwellian study needs at least 3 velocity meshes".into(),
                );
                for &t in &m.thetas {
                    require(&mut errs, t > 0.0, format!("theta must be positive, got {t}"));
                    for &f in &m.h_factors {
                        let n = 2.0 * m.l_factor / f;
                        let ok = f > 0.0 && (n - n.round()).abs() < 1e-9 && (n.round() as usize) % 2 == 0;
                        if !ok {
                            errs.push(format!("2 l_factor / h_factor = {n} must be an even integer"));
                            continue;
                        }
                        if let Ok(mesh) = Mesh1D::symmetric(m.l_factor * t.sqrt(), n.round() as usize) {
                            if let Err(e) = check_admissible(&mesh, t) {
                                errs.push(e.to_string());
                            }
                        }
                    }
                }
            }
        }
        if kinetic || limit {
            for &n_v in &g.n_v {
                match self.v_mesh(n_v) {
                    Ok(mesh) => {
                        if let Err(e) = check_admissible(&mesh, p.theta) {
                            errs.push(e.to_string());
                        }
                    }
                    Err(e) => errs.push(e.to_string()),
                }
            }
        }
        if kinetic && errs.is_empty() {
            for &n_x in &g.n_x {
                let h = (p.x_domain.1 - p.x_domain.0) / n_x as f64;
                for &e in &g.epsilon {
                    if e / h > self.limits.eps_over_h_max {
                        errs.push(format!(
                            "epsilon / h_x = {} exceeds limits.eps_over_h_max = {} (epsilon = {e}, n_x = {n_x})",
                            e / h,
                            self.limits.eps_over_h_max
                        ));
                    }
                }
            }
            if matches!(self.kind, StudyKind::EpsSweep | StudyKind::Stability) {
                for &n_v in &g.n_v {
                    for &k_v in &g.k_v {
                        match self.eps_threshold(n_v, k_v) {
                            Ok(th) => {
                                for &e in &g.epsilon {
                                    if e > th {
                                        errs.push(format!(
                                            "epsilon = {e} exceeds the collision threshold {th:.4e} for n_v = {n_v}, k_v = {k_v}"
                                        ));
                                    }
                                }
                            }
                            Err(e) => errs.push(e.to_string()),
                        }
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}
