mod common;

use apdg::data::{DensityPreset, FieldPreset, OmegaPreset, ProblemData};
use apdg::drift_diffusion::DdOperators;
use apdg::kinetic::{AssembledOperators, KineticSpaces};
use apdg::maxwellian::{root_maxwellian, DiscreteMaxwellian};
use apdg::norms::DualNorm;
use apdg::velocity::rational_moments;
use apdg::{Beta, DGSpace, Mesh1D};
use common::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn small_data() -> ProblemData {
    ProblemData {
        x_domain: (0.0, 1.0),
        theta: 1.0,
        omega: OmegaPreset::Linear { left: 1.0, right: 2.0 },
        e_field: FieldPreset::Linear { left: 0.5, right: 1.0 },
        rho0: DensityPreset::Sine { amplitude: 1.0, mode: 1 },
    }
}

fn kinetic_case(k_x: usize, k_v: usize, beta: Beta, eps: f64) {
    let data = small_data();
    let l = 1.5;
    let spaces =
        KineticSpaces::new(Mesh1D::new(0.0, 1.0, 2).unwrap(), k_x, Mesh1D::symmetric(l, 2).unwrap(), k_v).unwrap();
    let maxw = DiscreteMaxwellian::build(Mesh1D::symmetric(l, 2).unwrap(), 1.0).unwrap();
    let ops = AssembledOperators::assemble(&spaces, &maxw, &data, beta, eps).unwrap();
    let e = |x: f64| 0.5 + 0.5 * x;
    let omega = |x: f64| 1.0 + x;
    let index = |i: usize, j: usize| spaces.index(i, j);
    let setup = KineticSetup {
        x: Broken1D::new(0.0, 1.0, 2, k_x),
        v: Broken1D::new(-l, l, 2, k_v),
        theta: 1.0,
        maxwellian: NodalLinear { l, values: maxw.nodal_values().to_vec() },
        e: &e,
        omega: &omega,
        penalty_scale: eps.powf(beta.as_f64()),
        index: &index,
    };
    let oracle = setup.assemble(2, 16);
    let dense = |m: &nalgebra_sparse::CsrMatrix<f64>| DMatrix::from(m);
    for (name, got, want) in [
        ("mass", dense(&ops.mass), &oracle.mass),
        ("a", dense(&ops.a), &oracle.a),
        ("b", dense(&ops.b), &oracle.b),
        ("d", dense(&ops.d), &oracle.d),
        ("q", dense(&ops.q), &oracle.q),
        ("c", dense(&ops.c), &oracle.c),
    ] {
        let diff = max_abs_diff(&got, want);
        assert!(diff <= 1e-12, "{name} (k_x={k_x}, k_v={k_v}, {beta:?}): max entry difference {diff:e}");
    }
}

#[test]
fn kinetic_forms_match_dense_quadrature_linear() {
    kinetic_case(1, 1, Beta::Zero, 0.3);
    kinetic_case(1, 1, Beta::One, 0.3);
}

#[test]
fn kinetic_forms_match_dense_quadrature_quadratic() {
    kinetic_case(2, 2, Beta::One, 0.05);
    kinetic_case(1, 2, Beta::Zero, 1.0);
}

#[test]
fn continuous_limit_system_matches_hat_assembly() {
    let data =
        ProblemData { e_field: FieldPreset::Sinusoid { amplitude: 0.8, mode: 1, frequency: 0.0 }, ..small_data() };
    let (diff_c, drift) = (0.7, 1.3);
    let space = DGSpace::broken(Mesh1D::new(0.0, 1.0, 4).unwrap(), 1).unwrap();
    let ops = DdOperators::with_coefficients(&space, &data, Beta::Zero, diff_c, drift, 0.4).unwrap();
    let hats = Hats { a: 0.0, b: 1.0, n: 4 };
    let jb = Broken1D::new(0.0, 1.0, 4, 1);

    // each restricted dof must be exactly one hat, in node order
    let ext = ops.rho_space.extension();
    for p in 0..hats.count() {
        for i in 0..jb.dim() {
            let c = jb.cell_of(i);
            let node = jb.cell(c).0 + (i % 2) as f64 * jb.h();
            assert!((ext[(i, p)] - hats.val(p, node)).abs() < 1e-15);
        }
    }

    let e = |x: f64| 0.8 * (std::f64::consts::PI * x).sin();
    let omega = |x: f64| 1.0 + x;
    let oracle = limit_oracle(&hats, &jb, diff_c, drift, e, omega);
    assert!(max_abs_diff(&ops.mass_rho, &oracle.mass_rho) < 1e-13);
    assert!(max_abs_diff(&ops.k_jq, &oracle.k_jq) < 1e-13);
    assert!(max_abs_diff(&ops.omega_mass, &oracle.omega_mass) < 1e-13);
    assert!(ops.penalty.abs().max() < 1e-15, "continuous test functions have no jumps");
    // the library integrates E sin(πx) with a finite rule
    assert!(max_abs_diff(&ops.k_rt, &oracle.k_rt) < 1e-7);

    let map = oracle.omega_mass.clone().lu().solve(&oracle.k_rt).unwrap();
    let reduced = -&oracle.k_jq * map;
    assert!(max_abs_diff(&ops.reduced, &reduced) < 1e-7);
}

/// Dual norm by an eigenbasis of the oracle Gram matrix, plus a check that
/// the maximiser attains it and random directions stay below it.
fn dual_oracle(gram: &DMatrix<f64>, load: &DVector<f64>) -> f64 {
    let eig = SymmetricEigen::new(gram.clone());
    let mut sum = 0.0;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let c = eig.eigenvectors.column(i).dot(load);
        sum += c * c / lam;
    }
    sum.sqrt()
}

#[test]
fn dual_norm_matches_eigenbasis_oracle() {
    let n = 6;
    let space = DGSpace::broken(Mesh1D::new(0.0, 1.0, n).unwrap(), 1).unwrap();
    let jb = Broken1D::new(0.0, 1.0, n, 1);
    let h = jb.h();
    let z = DVector::from_fn(jb.dim(), |i, _| ((i * 7 % 5) as f64 - 2.0) * 0.3 + 0.1 * i as f64);
    let zfun = |c: usize, x: f64| (0..jb.dim()).map(|i| z[i] * jb.val(i, c, x)).sum::<f64>();

    // beta = 0: hats with the H¹ seminorm
    let hats = Hats { a: 0.0, b: 1.0, n };
    let m = hats.count();
    let mut gram = DMatrix::zeros(m, m);
    let mut load = DVector::zeros(m);
    for c in 0..n {
        let (l, r) = jb.cell(c);
        for p in 0..m {
            load[p] += integrate(l, r, 4, |x| zfun(c, x) * hats.val(p, x));
            for q in 0..m {
                gram[(p, q)] += h * hats.der(p, c) * hats.der(q, c);
            }
        }
    }
    let want = dual_oracle(&gram, &load);
    let got = DualNorm::new(&space, Beta::Zero).unwrap().eval_broken(&z);
    assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    let best = gram.clone().lu().solve(&load).unwrap();
    let ratio = load.dot(&best) / best.dot(&(&gram * &best)).sqrt();
    assert!((ratio - want).abs() <= 1e-12 * want);
    for s in 0..20 {
        let q = DVector::from_fn(m, |i, _| ((i + 3 * s) as f64 * 1.7).sin());
        assert!(load.dot(&q) / q.dot(&(&gram * &q)).sqrt() <= want * (1.0 + 1e-12));
    }

    // beta = 1: broken functions vanishing at both ends, jumps penalised by 1/h
    let keep: Vec<usize> = (1..jb.dim() - 1).collect();
    let mut full = jb.mass(|_| 0.0, 1);
    for c in 0..n {
        let (l, r) = jb.cell(c);
        for i in 0..jb.dim() {
            for j in 0..jb.dim() {
                full[(i, j)] += integrate(l, r, 2, |x| jb.der(i, c, x) * jb.der(j, c, x));
            }
        }
    }
    for e in 1..n {
        let xe = e as f64 * h;
        let jump = DVector::from_fn(jb.dim(), |i, _| jb.val(i, e - 1, xe) - jb.val(i, e, xe));
        full += &jump * jump.transpose() / h;
    }
    let gram1 = full.select_rows(&keep).select_columns(&keep);
    let mass = jb.mass(|_| 1.0, 2);
    let load1 = (&mass * &z).select_rows(&keep);
    let want1 = dual_oracle(&gram1, &load1);
    let got1 = DualNorm::new(&space, Beta::One).unwrap().eval_broken(&z);
    assert!((got1 - want1).abs() <= 1e-12 * want1, "{got1} vs {want1}");
}

#[test]
fn rational_moments_match_quadrature() {
    for kappa in [-0.9, -0.43, -0.2, 0.0, 0.3, 0.49, 0.51, 4.0] {
        let got = rational_moments(kappa, 6);
        for (p, g) in got.iter().enumerate() {
            let want = integrate(0.0, 1.0, 64, |s| s.powi(p as i32) / (1.0 + kappa * s));
            assert!((g - want).abs() < 1e-13, "kappa={kappa}, p={p}: {g} vs {want}");
        }
    }
}

#[test]
fn discrete_maxwellian_is_normalised_interpolant() {
    let theta: f64 = 0.7;
    let l = 6.0 * theta.sqrt();
    let mesh = Mesh1D::symmetric(l, 24).unwrap();
    let maxw = DiscreteMaxwellian::build(mesh.clone(), theta).unwrap();
    let vals = maxw.nodal_values();
    let scale = vals[12] / root_maxwellian(theta, 0.0);
    for (i, v) in mesh.nodes().iter().enumerate() {
        assert!((vals[i] - scale * root_maxwellian(theta, *v)).abs() < 1e-14);
    }
    let lin = NodalLinear { l, values: vals.to_vec() };
    let h = mesh.h();
    let mut mass = 0.0;
    let mut energy = 0.0;
    for c in 0..24 {
        let a = -l + c as f64 * h;
        mass += integrate(a, a + h, 2, |v| lin.on_cell(c, v).powi(2));
        energy += h * lin.slope(c).powi(2);
    }
    assert!((mass - 1.0).abs() < 1e-13);
    assert!((maxw.theta_h() - 1.0 / (4.0 * energy)).abs() < 1e-12);
}
