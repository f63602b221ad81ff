//! Uniform quadrature meshes on an interval and on the unit square.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform mesh on `[0, length]` with composite-trapezoid weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    length: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Mesh1D {
    pub fn uniform(length: f64, n_nodes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid("length", format!("must be positive, got {length}")));
        }
        if n_nodes < 3 {
            return Err(invalid("n_nodes", format!("need at least 3 nodes, got {n_nodes}")));
        }
        let intervals = (n_nodes - 1) as f64;
        let h = length / intervals;
        let nodes = (0..n_nodes)
            .map(|i| if i + 1 == n_nodes { length } else { length * i as f64 / intervals })
            .collect();
        let mut weights = vec![h; n_nodes];
        weights[0] = 0.5 * h;
        weights[n_nodes - 1] = 0.5 * h;
        Ok(Self {
            length,
            nodes,
            weights,
        })
    }

    /// Mesh of `[0, 1]` whose spacing divides the correlation length `epsilon`
    /// into `per_epsilon` equal cells.
    pub fn resolving(epsilon: f64, per_epsilon: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        let cells = (per_epsilon as f64 / epsilon).ceil() as usize;
        Self::uniform(1.0, cells.max(2) + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.length / (self.nodes.len() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Quadrature inner product.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.dot(u, u).sqrt()
    }

    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, a)| w * a).sum()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = (x / self.h()).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }

    /// Linear interpolation of node values at `x`.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let h = self.h();
        let s = (x / h).clamp(0.0, (self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        let t = s - i as f64;
        (1.0 - t) * u[i] + t * u[i + 1]
    }
}

/// Uniform tensor grid on the unit square, `n × n` nodes including the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid("n_nodes", format!("need at least 3 nodes per side, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Row-major values of `f` at all nodes.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.push(f(self.coord(i), self.coord(j)));
            }
        }
        out
    }

    fn weight_1d(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.h()
        } else {
            self.h()
        }
    }

    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let wi = self.weight_1d(i);
            for j in 0..self.n {
                let k = i * self.n + j;
                acc += wi * self.weight_1d(j) * u[k] * v[k];
            }
        }
        acc
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.dot(u, u).sqrt()
    }

    pub fn integrate(&self, u: &[f64]) -> f64 {
        let ones = vec![1.0; u.len()];
        self.dot(u, &ones)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        let m = Mesh1D::uniform(2.5, 101).unwrap();
        assert!((m.weights().iter().sum::<f64>() - 2.5).abs() < 1e-13);
        assert!(m.nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*m.nodes().last().unwrap(), 2.5);
    }

    #[test]
    fn resolving_mesh_spacing() {
        let m = Mesh1D::resolving(1.0 / 400.0, 8).unwrap();
        assert_eq!(m.len(), 3201);
        assert!((m.h() * 400.0 * 8.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_mesh() {
        assert!(Mesh1D::uniform(1.0, 2).is_err());
        assert!(Grid2D::new(2).is_err());
    }
}
