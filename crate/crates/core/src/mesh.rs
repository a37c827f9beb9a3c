use crate::error::{config, Result};

/// Uniform partition of `[a, b]` into `n_cells` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    n_cells: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(config(format!("mesh endpoints must satisfy a < b, got [{a}, {b}]")));
        }
        if n_cells < 2 {
            return Err(config(format!("a mesh needs at least 2 cells to have an interior edge, got {n_cells}")));
        }
        Ok(Self { a, b, n_cells, h: (b - a) / n_cells as f64 })
    }

    /// Symmetric velocity mesh on `[-l, l]`.
    pub fn symmetric(l: f64, n_cells: usize) -> Result<Self> {
        Self::new(-l, l, n_cells)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Node `i` for `i` in `0..=n_cells`. Written as a convex combination so
    /// that symmetric meshes have exactly antisymmetric nodes.
    pub fn node(&self, i: usize) -> f64 {
        let n = self.n_cells as f64;
        let i = i as f64;
        (self.a * (n - i) + self.b * i) / n
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    pub fn cell(&self, c: usize) -> (f64, f64) {
        (self.node(c), self.node(c + 1))
    }

    pub fn center(&self, c: usize) -> f64 {
        let (l, r) = self.cell(c);
        0.5 * (l + r)
    }

    /// Map a reference coordinate in `[-1, 1]` into cell `c`.
    pub fn to_physical(&self, c: usize, t: f64) -> f64 {
        let (l, r) = self.cell(c);
        0.5 * (l + r) + 0.5 * (r - l) * t
    }

    /// Cell containing `x`; right endpoints belong to the left cell only at `b`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.a || x > self.b {
            return None;
        }
        let c = ((x - self.a) / self.h).floor() as usize;
        Some(c.min(self.n_cells - 1))
    }

    /// Interior edges are numbered `1..n_cells`; edge `e` sits at node `e`.
    pub fn is_interior_edge(&self, e: usize) -> bool {
        e >= 1 && e < self.n_cells
    }

    pub fn n_interior_edges(&self) -> usize {
        self.n_cells - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing() {
        let m = Mesh1D::new(0.0, 1.0, 7).unwrap();
        assert!((m.h() * 7.0 - 1.0).abs() < 1e-15);
        let nodes = m.nodes();
        assert_eq!(nodes.len(), 8);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*nodes.last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Mesh1D::new(0.0, 1.0, 1).is_err());
        assert!(Mesh1D::new(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn symmetric_mesh_has_node_at_zero() {
        let m = Mesh1D::symmetric(6.0, 16).unwrap();
        assert_eq!(m.node(8), 0.0);
        let m = Mesh1D::symmetric(6.0 * 0.7f64.sqrt(), 22).unwrap();
        for i in 0..=22 {
            assert_eq!(m.node(i), -m.node(22 - i));
        }
    }

    #[test]
    fn locate_cells() {
        let m = Mesh1D::new(0.0, 1.0, 4).unwrap();
        assert_eq!(m.locate(0.0), Some(0));
        assert_eq!(m.locate(0.3), Some(1));
        assert_eq!(m.locate(1.0), Some(3));
        assert_eq!(m.locate(1.1), None);
    }
}
