//! Build the discrete root-Maxwellian on a few velocity meshes and print its
//! structural residuals, interpolation errors and discrete temperature.
//!
//! ```text
//! cargo run --example maxwellian
//! ```

use apdg::maxwellian::{interpolation_error_bounds, DiscreteMaxwellian};
use apdg::Mesh1D;

fn main() -> apdg::Result<()> {
    let theta: f64 = 1.0;
    let l = 6.0 * theta.sqrt();
    println!(
        "{:>4} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n_v", "h_v", "mass-1", "l2 err", "l2 bound", "theta_h", "gamma_*"
    );
    for n in [12, 24, 48, 96] {
        let mesh = Mesh1D::symmetric(l, n)?;
        let h = mesh.h();
        let m = DiscreteMaxwellian::build(mesh, theta)?;
        let rep = m.assumption_report();
        let (l2, _) = m.interpolation_errors();
        let (l2_bound, _) = interpolation_error_bounds(theta, l, h);
        let gamma = m.gamma_edges()?;
        println!(
            "{n:>4} {h:>8.4} {:>10.2e} {l2:>10.2e} {l2_bound:>10.2e} {:>10.6} {:>10.4}",
            rep.mass,
            m.theta_h(),
            gamma.gamma_star
        );
    }
    Ok(())
}
