//! Convergence and verification studies, slope fits and output files.

mod config;
mod fit;
mod output;
mod runs;

use serde::{Deserialize, Serialize};

pub use config::{Grid, Limits, MaxwellianGrid, Physics, StudyConfig};
pub use fit::{loglog_fit, SlopeFit};
pub use output::{csv_string, emit_outputs, summary_json, svg_plot, OutputFiles};
pub use runs::{run_eps_sweep, run_h_sweep, run_identity_suite, run_maxwellian_study, run_stability_suite};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    EpsSweep,
    HSweep,
    Maxwellian,
    Stability,
    Identities,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::EpsSweep => "eps_sweep",
            StudyKind::HSweep => "h_sweep",
            StudyKind::Maxwellian => "maxwellian",
            StudyKind::Stability => "stability",
            StudyKind::Identities => "identities",
        }
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Within,
}

/// A recorded assertion with both of its sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    /// Upper end for [`Relation::Within`].
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Criterion {
    fn make(name: impl Into<String>, value: f64, relation: Relation, bound: f64, upper: Option<f64>) -> Self {
        let finite = value.is_finite() && !bound.is_nan() && upper.map_or(true, |u| !u.is_nan());
        let passed = finite
            && match relation {
                Relation::Le => value <= bound,
                Relation::Lt => value < bound,
                Relation::Ge => value >= bound,
                Relation::Within => value >= bound && value <= upper.unwrap_or(f64::NAN),
            };
        Self { name: name.into(), value, relation, bound, upper, passed }
    }

    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::Le, bound, None)
    }

    pub fn lt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::Lt, bound, None)
    }

    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, Relation::Ge, bound, None)
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self::make(name, value, Relation::Within, lo, Some(hi))
    }

    /// A boolean check recorded as `1 ≥ 1` or `0 ≥ 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::ge(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn describe(&self) -> String {
        let rel = match self.relation {
            Relation::Le => format!("{:.4e} <= {:.4e}", self.value, self.bound),
            Relation::Lt => format!("{:.4e} < {:.4e}", self.value, self.bound),
            Relation::Ge => format!("{:.4e} >= {:.4e}", self.value, self.bound),
            Relation::Within => {
                format!("{:.4e} in [{:.4e}, {:.4e}]", self.value, self.bound, self.upper.unwrap_or(f64::NAN))
            }
        };
        format!("{}: {rel}", self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: Vec<SlopeFit>,
    pub criteria: Vec<Criterion>,
    pub notes: Vec<String>,
}

impl StudyResult {
    pub fn new(kind: StudyKind, seed: u64, columns: &[&str]) -> Self {
        Self {
            kind,
            seed,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            fits: Vec::new(),
            criteria: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// Criteria whose names start with `prefix`.
    pub fn criteria_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Criterion> + 'a {
        self.criteria.iter().filter(move |c| c.name.starts_with(prefix))
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    Cell::Int(v) => *v as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    /// Fit a slope and record the `≥ lo` (or within `[lo, hi]`) and `R² ≥ 0.9`
    /// assertions when `assert` is set.
    pub fn fit_and_assert(
        &mut self,
        label: &str,
        x_name: &str,
        y_name: &str,
        xs: &[f64],
        ys: &[f64],
        range: Option<(f64, Option<f64>)>,
    ) -> Option<SlopeFit> {
        match loglog_fit(label, x_name, y_name, xs, ys) {
            Ok(fit) => {
                if let Some((lo, hi)) = range {
                    let c = match hi {
                        Some(hi) => Criterion::within(format!("{label} slope"), fit.slope, lo, hi),
                        None => Criterion::ge(format!("{label} slope"), fit.slope, lo),
                    };
                    self.criteria.push(c);
                    self.criteria.push(Criterion::ge(format!("{label} r2"), fit.r2, MIN_R2));
                }
                self.fits.push(fit.clone());
                Some(fit)
            }
            Err(e) => {
                self.notes.push(format!("{label}: fit skipped ({e})"));
                if let Some((lo, _)) = range {
                    self.criteria.push(Criterion::ge(format!("{label} slope"), f64::NAN, lo));
                }
                None
            }
        }
    }
}

/// Coefficient of determination required of every asserted slope.
pub const MIN_R2: f64 = 0.9;

/// Dispatch on the configured study kind after validation.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    match config.kind {
        StudyKind::EpsSweep => run_eps_sweep(config),
        StudyKind::HSweep => run_h_sweep(config),
        StudyKind::Maxwellian => run_maxwellian_study(config),
        StudyKind::Stability => run_stability_suite(config),
        StudyKind::Identities => run_identity_suite(config),
    }
}
