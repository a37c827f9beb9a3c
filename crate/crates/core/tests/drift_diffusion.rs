use std::f64::consts::PI;

use apdg::data::{DensityPreset, FieldPreset, OmegaPreset, ProblemData};
use apdg::drift_diffusion::{
    l2_error, parse_dd_checkpoint, DdOperators, DdSolver, Manufactured, ManufacturedFamily, ThetaUse,
};
use apdg::maxwellian::DiscreteMaxwellian;
use apdg::{Beta, DGSpace, Mesh1D};

fn data(e_field: FieldPreset, omega: OmegaPreset, rho0: DensityPreset) -> ProblemData {
    ProblemData { x_domain: (0.0, 2.0), theta: 1.0, omega, e_field, rho0 }
}

fn ops_for(d: &ProblemData, n: usize, beta: Beta) -> DdOperators {
    let space = DGSpace::broken(Mesh1D::new(0.0, 2.0, n).unwrap(), 1).unwrap();
    let maxw = DiscreteMaxwellian::build(Mesh1D::symmetric(6.0, 16).unwrap(), d.theta).unwrap();
    DdOperators::assemble(&space, &maxw, d, beta, ThetaUse::ThetaH).unwrap()
}

fn default_data() -> ProblemData {
    data(
        FieldPreset::Sinusoid { amplitude: 0.8, mode: 1, frequency: 3.0 },
        OmegaPreset::Linear { left: 1.0, right: 2.0 },
        DensityPreset::Sine { amplitude: 1.0, mode: 1 },
    )
}

#[test]
fn coupled_and_eliminated_steps_agree() {
    let d = default_data();
    for beta in [Beta::Zero, Beta::One] {
        let mut a = DdSolver::new(ops_for(&d, 12, beta), 1e-3, None).unwrap();
        let mut b = DdSolver::new(ops_for(&d, 12, beta), 1e-3, None).unwrap();
        let mut sa = a.ops_mut().initial_state().unwrap();
        let mut sb = sa.clone();
        for _ in 0..5 {
            sa = a.step(&sa).unwrap();
            sb = b.step_coupled(&sb).unwrap();
        }
        let dr = (&sa.rho.coeffs - &sb.rho.coeffs).amax();
        let dj = (&sa.j.coeffs - &sb.j.coeffs).amax();
        assert!(dr < 1e-10 && dj < 1e-10, "{beta:?}: {dr:e} {dj:e}");
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let d = data(FieldPreset::Constant { value: 1.0 }, OmegaPreset::Constant { value: 1.0 }, DensityPreset::Zero);
    for beta in [Beta::Zero, Beta::One] {
        let mut solver = DdSolver::new(ops_for(&d, 8, beta), 1e-2, None).unwrap();
        let s0 = solver.ops_mut().initial_state().unwrap();
        let traj = solver.run(s0, 4).unwrap();
        assert!(traj.iter().all(|s| s.rho.coeffs.amax() == 0.0 && s.j.coeffs.amax() == 0.0));
    }
}

#[test]
fn heat_mode_needs_no_forcing() {
    let d = data(FieldPreset::Zero, OmegaPreset::Constant { value: 1.0 }, DensityPreset::Zero);
    let a = 0.8;
    let k = PI / 2.0;
    let m = Manufactured::new(ManufacturedFamily::SineDecay { amplitude: 1.0, mode: 1, lambda: a * k * k }, d, a, 1.0);
    for i in 0..=40 {
        let x = 2.0 * i as f64 / 40.0;
        for t in [0.0, 0.3, 1.0] {
            assert!(m.forcing(x, t).abs() < 1e-12, "x={x}, t={t}: {}", m.forcing(x, t));
        }
    }
}

#[test]
fn manufactured_solution_satisfies_the_strong_form() {
    let d = default_data();
    let d = ProblemData { e_field: FieldPreset::Sinusoid { amplitude: 0.8, mode: 1, frequency: 0.0 }, ..d };
    let m =
        Manufactured::new(ManufacturedFamily::SineDecay { amplitude: 1.3, mode: 2, lambda: 0.7 }, d.clone(), 0.9, 1.1);
    let h = 1e-5;
    for i in 1..20 {
        let x = 2.0 * i as f64 / 20.0;
        let t = 0.25;
        let drho = (m.rho(x, t + h) - m.rho(x, t - h)) / (2.0 * h);
        let rx = (m.rho(x + h, t) - m.rho(x - h, t)) / (2.0 * h);
        let dj = (m.current(x + h, t) - m.current(x - h, t)) / (2.0 * h);
        let flux = -0.9 * rx + 1.1 * d.e(x, t) * m.rho(x, t);
        assert!((d.omega(x) * m.current(x, t) - flux).abs() < 1e-8);
        assert!((drho + dj - m.forcing(x, t)).abs() < 1e-6, "x={x}");
        assert!((m.current_dx(x, t) - dj).abs() < 1e-6);
    }
    assert!(m.rho(0.0, 0.4).abs() < 1e-15 && m.rho(2.0, 0.4).abs() < 1e-12);
}

#[test]
fn steady_solution_is_approached_with_forcing() {
    let d =
        data(FieldPreset::Linear { left: -0.5, right: 0.5 }, OmegaPreset::Constant { value: 1.0 }, DensityPreset::Zero);
    let m = Manufactured::new(ManufacturedFamily::SteadyQuadratic { amplitude: 1.0 }, d.clone(), 1.0, 1.0);
    let space = DGSpace::broken(Mesh1D::new(0.0, 2.0, 32).unwrap(), 1).unwrap();
    let ops = DdOperators::with_coefficients(&space, &d, Beta::Zero, 1.0, 1.0, 0.5).unwrap();
    let mut solver = DdSolver::new(ops, 0.5, Some(m.forcing_fn())).unwrap();
    let s0 = solver.ops_mut().initial_state().unwrap();
    let traj = solver.run(s0, 80).unwrap();
    let last = traj.last().unwrap();
    let err = l2_error(&space, &last.rho.broken(), |x| m.rho(x, 0.0)).unwrap();
    assert!(err < 5e-3, "steady error {err:e}");
}

#[test]
fn density_energy_decays_without_field() {
    let d =
        data(FieldPreset::Zero, OmegaPreset::Constant { value: 2.0 }, DensityPreset::Sine { amplitude: 1.0, mode: 3 });
    for beta in [Beta::Zero, Beta::One] {
        let mut solver = DdSolver::new(ops_for(&d, 16, beta), 1e-2, None).unwrap();
        let s0 = solver.ops_mut().initial_state().unwrap();
        let traj = solver.run(s0, 10).unwrap();
        let m = &solver.ops().mass_rho;
        let e: Vec<f64> = traj.iter().map(|s| s.rho.coeffs.dot(&(m * &s.rho.coeffs))).collect();
        for w in e.windows(2) {
            assert!(w[1] < w[0]);
        }
    }
}

#[test]
fn zero_trace_spaces_keep_boundary_values_zero() {
    let d = default_data();
    for beta in [Beta::Zero, Beta::One] {
        let mut solver = DdSolver::new(ops_for(&d, 6, beta), 1e-2, None).unwrap();
        let s0 = solver.ops_mut().initial_state().unwrap();
        let s = solver.run(s0, 3).unwrap().pop().unwrap();
        assert_eq!(s.rho.eval(0.0).unwrap(), 0.0);
        assert_eq!(s.rho.eval(2.0).unwrap(), 0.0);
        let text = apdg::drift_diffusion::dd_checkpoint_string(&s);
        let (n_x, _, b, _, rho, _) = parse_dd_checkpoint(&text).unwrap();
        assert_eq!((n_x, b), (6, beta));
        assert_eq!(rho, s.rho.broken());
    }
}

#[test]
fn locked_configuration_is_rejected() {
    let d = default_data();
    let space = DGSpace::broken(Mesh1D::new(0.0, 2.0, 4).unwrap(), 0).unwrap();
    assert!(DdOperators::with_coefficients(&space, &d, Beta::Zero, 1.0, 1.0, 0.5).is_err());
    let space = DGSpace::broken(Mesh1D::new(0.0, 2.0, 4).unwrap(), 1).unwrap();
    assert!(DdOperators::with_coefficients(&space, &d, Beta::One, 1.0, 1.0, 0.0).is_err());
}
