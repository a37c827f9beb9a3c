use crate::quadrature::gauss_lobatto_points;

/// Lagrange basis on `[-1, 1]` through the Gauss–Lobatto points of degree `k`
/// (the midpoint for `k = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(k: usize) -> Self {
        let nodes = if k == 0 { vec![0.0] } else { gauss_lobatto_points(k + 1) };
        let denom = (0..nodes.len())
            .map(|i| nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| nodes[i] - xj).product())
            .collect();
        Self { nodes, denom }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn value(&self, i: usize, t: f64) -> f64 {
        self.nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| t - xj).product::<f64>() / self.denom[i]
    }

    pub fn derivative(&self, i: usize, t: f64) -> f64 {
        let n = self.nodes.len();
        let mut sum = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..n {
                if j != i && j != m {
                    prod *= t - self.nodes[j];
                }
            }
            sum += prod;
        }
        sum / self.denom[i]
    }

    pub fn values(&self, t: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, t)).collect()
    }

    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.derivative(i, t)).collect()
    }

    /// Monomial coefficients of basis function `i` after the affine change
    /// `t = 2s - 1`, i.e. as a polynomial in `s` on `[0, 1]`.
    pub fn monomials_unit(&self, i: usize) -> Vec<f64> {
        let mut poly = vec![1.0 / self.denom[i]];
        for (j, &xj) in self.nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            // factor (2s - 1 - xj)
            let c0 = -1.0 - xj;
            let mut next = vec![0.0; poly.len() + 1];
            for (p, &a) in poly.iter().enumerate() {
                next[p] += a * c0;
                next[p + 1] += a * 2.0;
            }
            poly = next;
        }
        poly
    }
}
