//! Coefficient presets and the stability constants derived from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Collision frequency `ω(x)`, written in the unit coordinate `x̂ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaPreset {
    Constant { value: f64 },
    Linear { left: f64, right: f64 },
    Sinusoid { mean: f64, amplitude: f64, mode: u32 },
}

/// Field `E(x, t)`, written in `x̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldPreset {
    Zero,
    Constant {
        value: f64,
    },
    Linear {
        left: f64,
        right: f64,
    },
    /// `amplitude · sin(mode π x̂) · cos(frequency · t)`
    Sinusoid {
        amplitude: f64,
        mode: u32,
        #[serde(default)]
        frequency: f64,
    },
}

/// Initial density `ρ₀(x)`, written in `x̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityPreset {
    Zero,
    Constant {
        value: f64,
    },
    Sine {
        amplitude: f64,
        mode: u32,
    },
    /// Coefficients of a polynomial in `x̂`, lowest degree first.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl OmegaPreset {
    pub fn value(&self, xh: f64) -> f64 {
        match *self {
            OmegaPreset::Constant { value } => value,
            OmegaPreset::Linear { left, right } => left + (right - left) * xh,
            OmegaPreset::Sinusoid { mean, amplitude, mode } => mean + amplitude * (mode as f64 * PI * xh).sin(),
        }
    }

    /// Derivative with respect to `x̂`.
    pub fn dxh(&self, xh: f64) -> f64 {
        match *self {
            OmegaPreset::Constant { .. } => 0.0,
            OmegaPreset::Linear { left, right } => right - left,
            OmegaPreset::Sinusoid { amplitude, mode, .. } => {
                let k = mode as f64 * PI;
                amplitude * k * (k * xh).cos()
            }
        }
    }

    /// Lower bound of `ω` on `[0, 1]`.
    pub fn min(&self) -> f64 {
        match *self {
            OmegaPreset::Constant { value } => value,
            OmegaPreset::Linear { left, right } => left.min(right),
            OmegaPreset::Sinusoid { mean, amplitude, mode } => {
                if mode == 0 {
                    mean
                } else {
                    mean - amplitude.abs()
                }
            }
        }
    }
}

impl FieldPreset {
    pub fn value(&self, xh: f64, t: f64) -> f64 {
        match *self {
            FieldPreset::Zero => 0.0,
            FieldPreset::Constant { value } => value,
            FieldPreset::Linear { left, right } => left + (right - left) * xh,
            FieldPreset::Sinusoid { amplitude, mode, frequency } => {
                amplitude * (mode as f64 * PI * xh).sin() * (frequency * t).cos()
            }
        }
    }

    pub fn dxh(&self, xh: f64, t: f64) -> f64 {
        match *self {
            FieldPreset::Zero | FieldPreset::Constant { .. } => 0.0,
            FieldPreset::Linear { left, right } => right - left,
            FieldPreset::Sinusoid { amplitude, mode, frequency } => {
                let k = mode as f64 * PI;
                amplitude * k * (k * xh).cos() * (frequency * t).cos()
            }
        }
    }

    /// `sup |E|` over `[0, 1] × [0, ∞)`.
    pub fn sup(&self) -> f64 {
        match *self {
            FieldPreset::Zero => 0.0,
            FieldPreset::Constant { value } => value.abs(),
            FieldPreset::Linear { left, right } => left.abs().max(right.abs()),
            FieldPreset::Sinusoid { amplitude, mode, .. } => {
                if mode == 0 {
                    0.0
                } else {
                    amplitude.abs()
                }
            }
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, FieldPreset::Sinusoid { frequency, .. } if *frequency != 0.0)
    }
}

impl DensityPreset {
    pub fn value(&self, xh: f64) -> f64 {
        match self {
            DensityPreset::Zero => 0.0,
            DensityPreset::Constant { value } => *value,
            DensityPreset::Sine { amplitude, mode } => amplitude * (*mode as f64 * PI * xh).sin(),
            DensityPreset::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * xh + c),
        }
    }
}

/// Physical data of one kinetic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    pub x_domain: (f64, f64),
    pub theta: f64,
    pub omega: OmegaPreset,
    pub e_field: FieldPreset,
    pub rho0: DensityPreset,
}

impl ProblemData {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.x_domain;
        if !(b > a) {
            return Err(config(format!("x domain must satisfy a < b, got [{a}, {b}]")));
        }
        if !(self.theta > 0.0) {
            return Err(config(format!("theta must be positive, got {}", self.theta)));
        }
        if !(self.omega.min() > 0.0) {
            return Err(config(format!(
                "omega must be bounded below by a positive constant, min = {}",
                self.omega.min()
            )));
        }
        Ok(())
    }

    pub fn unit(&self, x: f64) -> f64 {
        (x - self.x_domain.0) / (self.x_domain.1 - self.x_domain.0)
    }

    fn len(&self) -> f64 {
        self.x_domain.1 - self.x_domain.0
    }

    pub fn omega(&self, x: f64) -> f64 {
        self.omega.value(self.unit(x))
    }

    pub fn omega_dx(&self, x: f64) -> f64 {
        self.omega.dxh(self.unit(x)) / self.len()
    }

    pub fn e(&self, x: f64, t: f64) -> f64 {
        self.e_field.value(self.unit(x), t)
    }

    pub fn e_dx(&self, x: f64, t: f64) -> f64 {
        self.e_field.dxh(self.unit(x), t) / self.len()
    }

    pub fn rho0(&self, x: f64) -> f64 {
        self.rho0.value(self.unit(x))
    }

    pub fn omega_min(&self) -> f64 {
        self.omega.min()
    }

    pub fn e_sup(&self) -> f64 {
        self.e_field.sup()
    }
}
