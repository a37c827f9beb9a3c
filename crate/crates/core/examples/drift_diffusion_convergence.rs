//! Mesh convergence of the limit solver against a manufactured solution.

use std::sync::Arc;

use apdg::data::{DensityPreset, FieldPreset, OmegaPreset, ProblemData};
use apdg::drift_diffusion::{l2_error, DdOperators, DdSolver, Manufactured, ManufacturedFamily, ThetaUse};
use apdg::maxwellian::DiscreteMaxwellian;
use apdg::projection::l2_project_fn;
use apdg::{Beta, DGSpace, Mesh1D};

fn main() -> apdg::Result<()> {
    let data = ProblemData {
        x_domain: (0.0, 2.0),
        theta: 1.0,
        omega: OmegaPreset::Sinusoid { mean: 1.5, amplitude: 0.5, mode: 2 },
        e_field: FieldPreset::Linear { left: -0.5, right: 0.5 },
        rho0: DensityPreset::Zero,
    };
    let maxw = DiscreteMaxwellian::build(Mesh1D::symmetric(6.0, 24)?, data.theta)?;
    let t_end = 0.05;
    let mut prev: Option<f64> = None;
    for n in [8, 16, 32, 64] {
        let space = DGSpace::broken(Mesh1D::new(0.0, 2.0, n)?, 1)?;
        let mut ops = DdOperators::assemble(&space, &maxw, &data, Beta::Zero, ThetaUse::Theta)?;
        let man = Manufactured::new(
            ManufacturedFamily::SineDecay { amplitude: 1.0, mode: 1, lambda: 2.0 },
            data.clone(),
            ops.diffusion,
            ops.drift,
        );
        let h = space.mesh().h();
        let steps = (t_end / (0.5 * h * h)).ceil() as usize;
        let dt = t_end / steps as f64;
        let init = ops.state_from_broken(&l2_project_fn(|x| man.rho(x, 0.0), Arc::new(space.clone()))?, 0.0)?;
        let traj = DdSolver::new(ops, dt, Some(man.forcing_fn()))?.run(init, steps)?;
        let last = traj.last().unwrap();
        let err = l2_error(&space, &last.rho.broken(), |x| man.rho(x, t_end))?;
        let order = prev.map(|p| (p / err).log2());
        println!("n = {n:>3}  |rho - rho_h| = {err:.3e}  order = {}", order.map_or("-".into(), |o| format!("{o:.2}")));
        prev = Some(err);
    }
    Ok(())
}
