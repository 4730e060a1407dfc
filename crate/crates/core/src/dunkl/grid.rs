use serde::{Deserialize, Serialize};

use crate::error::{grid_err, invalid, Result};
use crate::quadrature::interval_rule;

const STENCIL: usize = 7;
const CELL_RULE: usize = 12;

/// One axis of a tensor grid: nodes and weights for `dμ_j = |y|^{2k_j} dy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub k: f64,
    /// Node spacing when the axis is uniform.
    pub spacing: Option<f64>,
    /// True when the nodes are offset by half a step so that 0 is not a node.
    pub staggered: bool,
}

impl Axis {
    /// Uniform axis on `[-extent, extent]` with spacing `h`.
    ///
    /// Unstaggered axes have nodes `j h` (odd count, 0 included); staggered
    /// axes have nodes `(j + 1/2) h`. Weights integrate the degree-6 local
    /// interpolant of the smooth factor exactly against `|y|^{2k}`, cell by
    /// cell, with the origin always a cell breakpoint.
    pub fn uniform(k: f64, extent: f64, h: f64, staggered: bool) -> Result<Axis> {
        if !(k >= 0.0) {
            return Err(invalid(format!("multiplicity must be >= 0, got {k}")));
        }
        if !(h > 0.0 && extent > 0.0) || !(extent.is_finite() && h.is_finite()) {
            return Err(invalid("grid extent and spacing must be positive"));
        }
        let m = (extent / h).round() as i64;
        let nodes: Vec<f64> = if staggered {
            (-m..m).map(|i| (i as f64 + 0.5) * h).collect()
        } else {
            (-m..=m).map(|i| i as f64 * h).collect()
        };
        if nodes.len() < STENCIL {
            return Err(grid_err(format!("axis needs at least {STENCIL} nodes")));
        }
        let weights = product_weights(&nodes, k);
        Ok(Axis { nodes, weights, k, spacing: Some(h), staggered })
    }

    /// Axis with caller-supplied nodes and weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, k: f64) -> Result<Axis> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(grid_err("nodes and weights must be non-empty and of equal length"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(grid_err("axis nodes must be strictly increasing"));
        }
        let n = nodes.len();
        let h = (nodes[n - 1] - nodes[0]) / (n - 1).max(1) as f64;
        let uniform = n > 1 && nodes.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        let staggered = !nodes.contains(&0.0);
        Ok(Axis { nodes, weights, k, spacing: uniform.then_some(h), staggered })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.nodes.len();
        let scale = self.nodes.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1.0);
        (0..n).all(|i| (self.nodes[i] + self.nodes[n - 1 - i]).abs() <= 1e-12 * scale)
    }

    /// Index of the node `-nodes[i]` on a symmetric axis.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    /// Index of the node at the origin, if any.
    pub fn zero_index(&self) -> Option<usize> {
        self.nodes.iter().position(|x| *x == 0.0)
    }

    pub fn extent(&self) -> f64 {
        self.nodes.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
    }

    pub fn require_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(grid_err("axis is not symmetric about 0"))
        }
    }

    pub fn require_uniform(&self) -> Result<f64> {
        self.spacing.ok_or_else(|| grid_err("axis spacing is not uniform"))
    }
}

/// Product-integration weights for `∫ g(y) |y|^{2k} dy` over the node span,
/// symmetrized so that mirrored nodes carry equal weight.
fn product_weights(nodes: &[f64], k: f64) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    for left in 0..m - 1 {
        let (a, b) = (nodes[left], nodes[left + 1]);
        let start = (left as isize - (STENCIL as isize / 2 - 1)).clamp(0, (m - STENCIL) as isize) as usize;
        let stencil = &nodes[start..start + STENCIL];
        let rule = interval_rule(CELL_RULE, k, a, b);
        for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
            for (p, &xp) in stencil.iter().enumerate() {
                let mut l = 1.0;
                for (q, &xq) in stencil.iter().enumerate() {
                    if q != p {
                        l *= (y - xq) / (xp - xq);
                    }
                }
                w[start + p] += wy * l;
            }
        }
    }
    (0..m).map(|i| 0.5 * (w[i] + w[m - 1 - i])).collect()
}

/// Tensor product of axes, values stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord")]
pub struct TensorGrid {
    axes: Vec<Axis>,
    #[serde(skip)]
    strides: Vec<usize>,
}

#[derive(Deserialize)]
struct GridRecord {
    axes: Vec<Axis>,
}

impl TryFrom<GridRecord> for TensorGrid {
    type Error = crate::error::DunklError;
    fn try_from(r: GridRecord) -> Result<Self> {
        TensorGrid::new(r.axes)
    }
}

impl TensorGrid {
    pub fn new(axes: Vec<Axis>) -> Result<TensorGrid> {
        if axes.is_empty() {
            return Err(grid_err("grid needs at least one axis"));
        }
        let strides = strides_for(&axes);
        Ok(TensorGrid { axes, strides })
    }

    /// Uniform grid with the same extent and spacing on each axis of `k`.
    pub fn uniform(k: &[f64], extent: f64, h: f64, staggered: bool) -> Result<TensorGrid> {
        let axes = k.iter().map(|&kj| Axis::uniform(kj, extent, h, staggered)).collect::<Result<Vec<_>>>()?;
        TensorGrid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &Axis {
        &self.axes[j]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            let n = self.axes[j].len();
            idx[j] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(j, &i)| self.axes[j].nodes[i]).collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat).iter().enumerate().map(|(j, &i)| self.axes[j].weights[i]).product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Flat index of the node reflected in axis `j`.
    pub fn mirror_index(&self, flat: usize, j: usize) -> usize {
        let n = self.axes[j].len();
        let s = self.strides[j];
        let i = (flat / s) % n;
        flat - i * s + (n - 1 - i) * s
    }

    pub fn k(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.k).collect()
    }
}

fn strides_for(axes: &[Axis]) -> Vec<usize> {
    let mut strides = vec![1; axes.len()];
    for j in (0..axes.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * axes[j + 1].len();
    }
    strides
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    #[test]
    fn uniform_axis_layout() {
        let a = Axis::uniform(1.0, 1.0, 0.1, false).unwrap();
        assert_eq!(a.len(), 21);
        assert_eq!(a.zero_index(), Some(10));
        assert!(a.is_symmetric());
        let s = Axis::uniform(1.0, 1.0, 0.1, true).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.zero_index().is_none());
        assert!(s.is_symmetric());
        assert_eq!(s.mirror(3), 16);
    }

    #[test]
    fn weights_reproduce_gaussian_moment() {
        for &k in &[0.0, 0.3, 0.5, 1.0, 2.0] {
            let exact = gamma(k + 0.5).unwrap();
            for &stag in &[false, true] {
                for &h in &[0.1, 0.05] {
                    let a = Axis::uniform(k, 8.0, h, stag).unwrap();
                    let got: f64 = a.nodes.iter().zip(&a.weights).map(|(y, w)| w * (-y * y).exp()).sum();
                    assert!(((got - exact) / exact).abs() < 1e-8, "k={k} stag={stag} h={h}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weights_integrate_low_degree_polynomials_exactly() {
        for &k in &[0.0, 0.7, 1.5] {
            let a = Axis::uniform(k, 2.0, 0.25, false).unwrap();
            for p in 0..=6 {
                let got: f64 = a.nodes.iter().zip(&a.weights).map(|(y, w)| w * y.powi(p)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 * 2f64.powf(2.0 * k + p as f64 + 1.0) / (2.0 * k + p as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-12 * exact.max(1.0), "k={k} p={p}");
            }
        }
    }

    #[test]
    fn tensor_indexing_round_trips() {
        let g = TensorGrid::uniform(&[1.0, 0.5, 0.0], 1.0, 0.125, false).unwrap();
        assert_eq!(g.shape(), vec![17, 17, 17]);
        for flat in [0, 5, 100, 4912] {
            let idx = g.multi_index(flat);
            assert_eq!(g.flat_index(&idx), flat);
            let m = g.mirror_index(flat, 1);
            let p = g.point(flat);
            let q = g.point(m);
            assert_eq!(p[0], q[0]);
            assert!((p[1] + q[1]).abs() < 1e-15);
            assert_eq!(g.mirror_index(m, 1), flat);
        }
    }

    #[test]
    fn from_parts_detects_layout() {
        let a = Axis::from_parts(vec![-1.0, 0.0, 1.0], vec![1.0, 1.0, 1.0], 0.0).unwrap();
        assert_eq!(a.spacing, Some(1.0));
        assert!(!a.staggered);
        assert!(Axis::from_parts(vec![1.0, 0.0], vec![1.0, 1.0], 0.0).is_err());
    }
}
