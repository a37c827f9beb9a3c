//! Evolve the kinetic scheme at small ε from a well-prepared state, watch the
//! distance to local equilibrium and check the energy estimate. The final
//! state is written as a checkpoint.

use apdg::data::{DensityPreset, FieldPreset, OmegaPreset, ProblemData};
use apdg::kinetic::{
    energy_diagnostics, write_checkpoint, AssembledOperators, KineticSolver, KineticSpaces, StabilityConstants,
};
use apdg::maxwellian::DiscreteMaxwellian;
use apdg::{Beta, Mesh1D};

fn main() -> apdg::Result<()> {
    let data = ProblemData {
        x_domain: (0.0, 1.0),
        theta: 1.0,
        omega: OmegaPreset::Linear { left: 1.0, right: 2.0 },
        e_field: FieldPreset::Sinusoid { amplitude: 0.5, mode: 1, frequency: 0.0 },
        rho0: DensityPreset::Sine { amplitude: 1.0, mode: 2 },
    };
    let spaces = KineticSpaces::new(Mesh1D::new(0.0, 1.0, 8)?, 1, Mesh1D::symmetric(6.0, 16)?, 1)?;
    let maxw = DiscreteMaxwellian::build(spaces.v.mesh().clone(), data.theta)?;
    let eps = 1e-3;
    let ops = AssembledOperators::assemble(&spaces, &maxw, &data, Beta::One, eps)?;
    let k = StabilityConstants::compute(&ops);
    println!("eps = {eps:e}, threshold = {:.3e}", k.eps_threshold);

    let traj = KineticSolver::new(ops.clone(), 2e-3)?.run(ops.initial_state()?, 50)?;
    for s in traj.states.iter().step_by(10) {
        let d = ops.norm_sq(&ops.defect(&s.g)).sqrt();
        println!("t = {:.3}  |g| = {:.5}  |g - M rho| = {d:.3e}", s.t, ops.norm_sq(&s.g).sqrt());
    }
    let rep = energy_diagnostics(&traj, &ops, 10.0);
    println!("energy: lhs = {:.5}  rhs = {:.5}  holds = {}", rep.lhs, rep.rhs, rep.holds);

    let path = std::env::temp_dir().join("apdg_kinetic_relaxation.csv");
    write_checkpoint(&path, traj.states.last().unwrap(), &spaces)?;
    println!("checkpoint written to {}", path.display());
    Ok(())
}
