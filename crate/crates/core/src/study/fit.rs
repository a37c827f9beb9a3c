use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{config, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub label: String,
    pub x_name: String,
    pub y_name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// 95% confidence interval of the slope; infinite with two points.
    pub ci95: (f64, f64),
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub fn loglog_fit(label: &str, x_name: &str, y_name: &str, xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(config("slope fit needs equally many x and y values"));
    }
    if xs.len() < 3 {
        return Err(config(format!("slope fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(config("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(config("slope fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = n - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY);
    let half = t * se;
    Ok(SlopeFit {
        label: label.to_string(),
        x_name: x_name.to_string(),
        y_name: y_name.to_string(),
        slope,
        intercept,
        r2,
        ci95: (slope - half, slope + half),
        xs: xs.to_vec(),
        ys: ys.to_vec(),
    })
}
