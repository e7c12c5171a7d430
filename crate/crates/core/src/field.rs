//! Discrete solution fields and the elementary diagnostics on them.

use crate::mesh::Grid1D;

/// Nodal values `u_i`, one per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.nodes().map(f).collect() }
    }

    pub fn constant(grid: &Grid1D, c: f64) -> Self {
        Self { values: vec![c; grid.n_nodes()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Nodal `m`-vectors stored flat, node-major: component `p` of node `i` is
/// `data[i * m + p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemField {
    pub m: usize,
    pub data: Vec<f64>,
}

impl SystemField {
    pub fn from_fn(grid: &Grid1D, m: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let mut data = Vec::with_capacity(grid.n_nodes() * m);
        for x in grid.nodes() {
            let v = f(x);
            assert_eq!(v.len(), m, "initial data has wrong component count");
            data.extend_from_slice(&v);
        }
        Self { m, data }
    }

    pub fn n_nodes(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.m..(i + 1) * self.m]
    }

    /// All values of one component as a contiguous vector.
    pub fn component(&self, p: usize) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)[p]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Total variation `Σ_i |u_i - u_{i-1}|`.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// How far the field leaves `[lo, hi]`: overshoot above `hi` plus
/// undershoot below `lo`.
pub fn extrema_excess(values: &[f64], lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - hi).max(0.0) + (lo - min).max(0.0)
}

/// Discrete mass `h * Σ_i u_i`.
pub fn mass(values: &[f64], h: f64) -> f64 {
    h * values.iter().sum::<f64>()
}
