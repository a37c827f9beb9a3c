//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here goes through the library's quadrature, basis or Kronecker
//! assembly: integrals use a tabulated 5-point Gauss rule on composite
//! subintervals, and basis functions are written out from their nodes.

#![allow(dead_code)]

use nalgebra::DMatrix;

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Composite 5-point Gauss points `(x, w)` on `[l, r]`.
pub fn gauss_points(l: f64, r: f64, pieces: usize) -> Vec<(f64, f64)> {
    let h = (r - l) / pieces as f64;
    let mut out = Vec::with_capacity(5 * pieces);
    for p in 0..pieces {
        let a = l + p as f64 * h;
        for &(t, w) in &GL5 {
            out.push((a + 0.5 * h * (t + 1.0), 0.5 * h * w));
        }
    }
    out
}

pub fn integrate(l: f64, r: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    gauss_points(l, r, pieces).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Reference nodes of the nodal basis for the degrees the oracles support.
pub fn ref_nodes(k: usize) -> Vec<f64> {
    match k {
        1 => vec![-1.0, 1.0],
        2 => vec![-1.0, 0.0, 1.0],
        _ => panic!("oracle basis only written for k = 1, 2"),
    }
}

fn lagrange(nodes: &[f64], i: usize, t: f64) -> f64 {
    let mut v = 1.0;
    for (j, &xj) in nodes.iter().enumerate() {
        if j != i {
            v *= (t - xj) / (nodes[i] - xj);
        }
    }
    v
}

fn lagrange_d(nodes: &[f64], i: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    for (m, &xm) in nodes.iter().enumerate() {
        if m == i {
            continue;
        }
        let mut prod = 1.0 / (nodes[i] - xm);
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i && j != m {
                prod *= (t - xj) / (nodes[i] - xj);
            }
        }
        sum += prod;
    }
    sum
}

/// Broken nodal space on a uniform mesh, evaluated cell by cell.
#[derive(Clone, Debug)]
pub struct Broken1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub k: usize,
    nodes: Vec<f64>,
}

impl Broken1D {
    pub fn new(a: f64, b: f64, n: usize, k: usize) -> Self {
        Self { a, b, n, k, nodes: ref_nodes(k) }
    }

    pub fn np(&self) -> usize {
        self.k + 1
    }

    pub fn dim(&self) -> usize {
        self.n * self.np()
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn cell(&self, c: usize) -> (f64, f64) {
        (self.a + c as f64 * self.h(), self.a + (c + 1) as f64 * self.h())
    }

    pub fn cell_of(&self, i: usize) -> usize {
        i / self.np()
    }

    /// Value on cell `c` (zero off its support), so traces are one-sided.
    pub fn val(&self, i: usize, c: usize, x: f64) -> f64 {
        if self.cell_of(i) != c {
            return 0.0;
        }
        let (l, r) = self.cell(c);
        lagrange(&self.nodes, i % self.np(), 2.0 * (x - l) / (r - l) - 1.0)
    }

    pub fn der(&self, i: usize, c: usize, x: f64) -> f64 {
        if self.cell_of(i) != c {
            return 0.0;
        }
        let (l, r) = self.cell(c);
        lagrange_d(&self.nodes, i % self.np(), 2.0 * (x - l) / (r - l) - 1.0) * 2.0 / (r - l)
    }

    /// Gram matrix `∫ w φ_i φ_j`.
    pub fn mass(&self, w: impl Fn(f64) -> f64, pieces: usize) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..self.n {
            let (l, r) = self.cell(c);
            for (x, wq) in gauss_points(l, r, pieces) {
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += wq * w(x) * self.val(i, c, x) * self.val(j, c, x);
                    }
                }
            }
        }
        m
    }
}

/// Piecewise-linear interpolant of nodal values on `[-l, l]`.
#[derive(Clone, Debug)]
pub struct NodalLinear {
    pub l: f64,
    pub values: Vec<f64>,
}

impl NodalLinear {
    fn h(&self) -> f64 {
        2.0 * self.l / (self.values.len() - 1) as f64
    }

    pub fn on_cell(&self, c: usize, v: f64) -> f64 {
        let x0 = -self.l + c as f64 * self.h();
        self.values[c] + (self.values[c + 1] - self.values[c]) * (v - x0) / self.h()
    }

    pub fn slope(&self, c: usize) -> f64 {
        (self.values[c + 1] - self.values[c]) / self.h()
    }
}

/// Kinetic forms computed by direct quadrature of their definitions.
pub struct KineticOracle {
    pub mass: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

pub struct KineticSetup<'a> {
    pub x: Broken1D,
    pub v: Broken1D,
    pub theta: f64,
    pub maxwellian: NodalLinear,
    pub e: &'a dyn Fn(f64) -> f64,
    pub omega: &'a dyn Fn(f64) -> f64,
    pub penalty_scale: f64,
    /// Global index of the product basis function `(x dof, v dof)`.
    pub index: &'a dyn Fn(usize, usize) -> usize,
}

impl KineticSetup<'_> {
    fn vh(&self, c: usize, v: f64) -> f64 {
        -2.0 * self.theta * self.maxwellian.slope(c) / self.maxwellian.on_cell(c, v)
    }

    /// `∫ M ψ_j` over the velocity support of `j`.
    fn m_moment(&self, j: usize, pieces: usize) -> f64 {
        let c = self.v.cell_of(j);
        let (l, r) = self.v.cell(c);
        integrate(l, r, pieces, |v| self.maxwellian.on_cell(c, v) * self.v.val(j, c, v))
    }

    pub fn assemble(&self, xp: usize, vp: usize) -> KineticOracle {
        let (nx, nv) = (self.x.dim(), self.v.dim());
        let n = nx * nv;
        let mut out = KineticOracle {
            mass: DMatrix::zeros(n, n),
            a: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            d: DMatrix::zeros(n, n),
            q: DMatrix::zeros(n, n),
            c: DMatrix::zeros(n, n),
        };
        let pairs: Vec<(usize, usize)> = (0..nx).flat_map(|i| (0..nv).map(move |j| (i, j))).collect();
        let x_edges: Vec<usize> = (1..self.x.n).collect();
        let v_edges: Vec<usize> = (1..self.v.n).collect();
        let m_l = *self.maxwellian.values.last().unwrap();
        let m_a = self.maxwellian.values[0];
        let (xa, xb) = (self.x.a, self.x.b);
        let (va, vb) = (self.v.a, self.v.b);

        for &(zi, zj) in &pairs {
            let row = (self.index)(zi, zj);
            let (zcx, zcv) = (self.x.cell_of(zi), self.v.cell_of(zj));
            for &(gi, gj) in &pairs {
                let col = (self.index)(gi, gj);
                let (gcx, gcv) = (self.x.cell_of(gi), self.v.cell_of(gj));

                // volume terms live on a single cell pair
                if zcx == gcx && zcv == gcv {
                    let (cx, cv) = (zcx, zcv);
                    let (xl, xr) = self.x.cell(cx);
                    let (vl, vr) = self.v.cell(cv);
                    let (mut m, mut a, mut b, mut c, mut q) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for (x, wx) in gauss_points(xl, xr, xp) {
                        for (v, wv) in gauss_points(vl, vr, vp) {
                            let w = wx * wv;
                            let g = self.x.val(gi, cx, x) * self.v.val(gj, cv, v);
                            let z = self.x.val(zi, cx, x) * self.v.val(zj, cv, v);
                            let zx = self.x.der(zi, cx, x) * self.v.val(zj, cv, v);
                            let zv = self.x.val(zi, cx, x) * self.v.der(zj, cv, v);
                            let vh = self.vh(cv, v);
                            let e = (self.e)(x);
                            m += w * g * z;
                            a -= w * vh * g * zx;
                            b -= w * e * g * zv;
                            c += w * e * vh * g * z / (2.0 * self.theta);
                            q -= w * (self.omega)(x) * g * z;
                        }
                    }
                    out.mass[(row, col)] += m;
                    out.a[(row, col)] += a;
                    out.b[(row, col)] += b;
                    out.c[(row, col)] += c;
                    out.q[(row, col)] += q;
                }

                // collision rank-one part: ω ρ(g) (M, z)_v
                if zcx == gcx {
                    let cx = zcx;
                    let (xl, xr) = self.x.cell(cx);
                    let mg = self.m_moment(gj, vp);
                    let mz = self.m_moment(zj, vp);
                    out.q[(row, col)] +=
                        integrate(xl, xr, xp, |x| (self.omega)(x) * self.x.val(gi, cx, x) * self.x.val(zi, cx, x))
                            * mg
                            * mz;
                }

                // x-edges: upwind average plus penalty, outflow boundary
                if zcv == gcv {
                    let cv = zcv;
                    let (vl, vr) = self.v.cell(cv);
                    for &e in &x_edges {
                        let xe = self.x.a + e as f64 * self.x.h();
                        let jump = |i: usize| self.x.val(i, e - 1, xe) - self.x.val(i, e, xe);
                        let avg = |i: usize| 0.5 * (self.x.val(i, e - 1, xe) + self.x.val(i, e, xe));
                        let (jz, jg, ag) = (jump(zi), jump(gi), avg(gi));
                        if jz == 0.0 {
                            continue;
                        }
                        out.a[(row, col)] += integrate(vl, vr, vp, |v| {
                            let vh = self.vh(cv, v);
                            let psi = self.v.val(gj, cv, v) * self.v.val(zj, cv, v);
                            (vh * ag * jz + self.penalty_scale * 0.5 * vh.abs() * jg * jz) * psi
                        });
                    }
                    let right = self.x.val(gi, self.x.n - 1, xb) * self.x.val(zi, self.x.n - 1, xb);
                    let left = self.x.val(gi, 0, xa) * self.x.val(zi, 0, xa);
                    out.a[(row, col)] += integrate(vl, vr, vp, |v| {
                        let vh = self.vh(cv, v);
                        let psi = self.v.val(gj, cv, v) * self.v.val(zj, cv, v);
                        (vh.max(0.0) * right + (-vh).max(0.0) * left) * psi
                    });
                }

                // v-edges: central average plus |E|/2 penalty
                if zcx == gcx {
                    let cx = zcx;
                    let (xl, xr) = self.x.cell(cx);
                    for &e in &v_edges {
                        let ve = self.v.a + e as f64 * self.v.h();
                        let jz = self.v.val(zj, e - 1, ve) - self.v.val(zj, e, ve);
                        let jg = self.v.val(gj, e - 1, ve) - self.v.val(gj, e, ve);
                        let ag = 0.5 * (self.v.val(gj, e - 1, ve) + self.v.val(gj, e, ve));
                        if jz == 0.0 {
                            continue;
                        }
                        out.b[(row, col)] += integrate(xl, xr, xp, |x| {
                            let e = (self.e)(x);
                            let phi = self.x.val(gi, cx, x) * self.x.val(zi, cx, x);
                            (e * ag * jz + 0.5 * e.abs() * jg * jz) * phi
                        });
                    }
                    // velocity boundary closure with the Maxwellian
                    let mg = self.m_moment(gj, vp);
                    let zb = m_l * self.v.val(zj, self.v.n - 1, vb) - m_a * self.v.val(zj, 0, va);
                    out.d[(row, col)] +=
                        integrate(xl, xr, xp, |x| (self.e)(x) * self.x.val(gi, cx, x) * self.x.val(zi, cx, x))
                            * mg
                            * zb;
                }
            }
        }
        out
    }
}

/// Continuous P1 hat functions at interior nodes of a uniform mesh.
pub struct Hats {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Hats {
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn count(&self) -> usize {
        self.n - 1
    }

    /// Hat `p` peaks at node `p + 1`.
    pub fn val(&self, p: usize, x: f64) -> f64 {
        let xn = self.a + (p + 1) as f64 * self.h();
        (1.0 - (x - xn).abs() / self.h()).max(0.0)
    }

    /// Derivative evaluated inside cell `c`.
    pub fn der(&self, p: usize, c: usize) -> f64 {
        if c == p {
            1.0 / self.h()
        } else if c == p + 1 {
            -1.0 / self.h()
        } else {
            0.0
        }
    }
}

/// Reference matrices of the continuous mixed limit system.
pub struct LimitOracle {
    pub mass_rho: DMatrix<f64>,
    pub k_jq: DMatrix<f64>,
    pub omega_mass: DMatrix<f64>,
    pub k_rt: DMatrix<f64>,
}

pub fn limit_oracle(
    hats: &Hats,
    j: &Broken1D,
    diffusion: f64,
    drift: f64,
    e: impl Fn(f64) -> f64,
    omega: impl Fn(f64) -> f64,
) -> LimitOracle {
    let (nr, nj) = (hats.count(), j.dim());
    let mut out = LimitOracle {
        mass_rho: DMatrix::zeros(nr, nr),
        k_jq: DMatrix::zeros(nr, nj),
        omega_mass: j.mass(&omega, 8),
        k_rt: DMatrix::zeros(nj, nr),
    };
    for c in 0..hats.n {
        let (l, r) = j.cell(c);
        for (x, w) in gauss_points(l, r, 8) {
            for p in 0..nr {
                for q in 0..nr {
                    out.mass_rho[(p, q)] += w * hats.val(p, x) * hats.val(q, x);
                }
                for t in 0..nj {
                    let tau = j.val(t, c, x);
                    out.k_jq[(p, t)] -= w * tau * hats.der(p, c);
                    out.k_rt[(t, p)] += w * (diffusion * hats.der(p, c) - drift * e(x) * hats.val(p, x)) * tau;
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).abs().max()
}
