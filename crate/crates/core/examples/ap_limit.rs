//! Distance between the kinetic density and the drift-diffusion limit as ε
//! shrinks, for the three choices of limit coefficients.

use apdg::study::{run_eps_sweep, StudyConfig, StudyKind};

fn main() -> apdg::Result<()> {
    let mut cfg = StudyConfig::new(StudyKind::EpsSweep);
    cfg.grid.n_x = vec![8];
    cfg.grid.beta = vec![1];
    cfg.validate()?;
    let res = run_eps_sweep(&cfg)?;
    let eps = res.column("epsilon").unwrap();
    for name in ["theta_h", "theta", "matched"] {
        let err = res.column(&format!("rho_err_{name}")).unwrap();
        print!("{name:>8}:");
        for (e, r) in eps.iter().zip(&err) {
            print!("  {e:.0e} -> {r:.3e}");
        }
        println!();
    }
    for fit in &res.fits {
        println!("{:<28} slope {:.3}  R2 {:.4}", fit.label, fit.slope, fit.r2);
    }
    Ok(())
}
