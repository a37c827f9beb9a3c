//! Gauss–Legendre and Gauss–Lobatto rules on the reference interval `[-1, 1]`.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint derivative: P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// `n`-point Gauss–Legendre rule, exact for degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights }
    }

    /// Smallest Gauss–Legendre rule exact for polynomials of degree `degree`.
    pub fn exact_for(degree: usize) -> Self {
        Self::gauss_legendre(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrate `f` over `[l, r]`.
    pub fn integrate(&self, l: f64, r: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (c, s) = (0.5 * (l + r), 0.5 * (r - l));
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * f(c + s * t)).sum::<f64>() * s
    }

    /// Integrate `f` over `[l, r]` split into `pieces` equal subintervals.
    pub fn integrate_composite(&self, l: f64, r: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
        let d = (r - l) / pieces as f64;
        (0..pieces)
            .map(|p| {
                let a = l + p as f64 * d;
                self.integrate(a, a + d, &f)
            })
            .sum()
    }
}

/// `n` Gauss–Lobatto points on `[-1, 1]` (`n >= 2`), endpoints included,
/// exactly symmetric about zero.
pub fn gauss_lobatto_points(n: usize) -> Vec<f64> {
    assert!(n >= 2, "Gauss–Lobatto needs at least the two endpoints");
    let k = n - 1;
    let mut pts = vec![0.0; n];
    pts[0] = -1.0;
    pts[k] = 1.0;
    let kk = (k * (k + 1)) as f64;
    for j in 1..n.div_ceil(2) {
        let mut x = -(PI * j as f64 / k as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(k, x);
            let d2p = (2.0 * x * dp - kk * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[j] = x;
        pts[k - j] = -x;
    }
    if n % 2 == 1 {
        pts[k / 2] = 0.0;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_to_its_degree() {
        for n in 1..=12 {
            let q = Quadrature::gauss_legendre(n);
            for p in 0..2 * n {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let got = q.integrate(-1.0, 1.0, |x| x.powi(p as i32));
                assert!((got - exact).abs() < 1e-14, "n={n} p={p}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn lobatto_known_values() {
        let p = gauss_lobatto_points(3);
        assert_eq!(p, vec![-1.0, 0.0, 1.0]);
        let p = gauss_lobatto_points(4);
        assert!((p[2] - (1.0f64 / 5.0).sqrt()).abs() < 1e-15);
        assert_eq!(p[1], -p[2]);
        let p = gauss_lobatto_points(5);
        assert!((p[3] - (3.0f64 / 7.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn composite_rule_integrates_gaussian() {
        let q = Quadrature::gauss_legendre(10);
        let got = q.integrate_composite(-8.0, 8.0, 16, |x| (-x * x).exp());
        assert!((got - PI.sqrt()).abs() < 1e-13);
    }
}
